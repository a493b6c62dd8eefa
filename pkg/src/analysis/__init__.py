"""Distances and stability checks."""
