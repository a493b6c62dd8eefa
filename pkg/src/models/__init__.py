"""Posets, persistence modules and barcodes."""
