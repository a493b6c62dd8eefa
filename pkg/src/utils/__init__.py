"""Logging setup and JSON file schemas."""
