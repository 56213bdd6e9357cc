"""Schemas and file formats."""
