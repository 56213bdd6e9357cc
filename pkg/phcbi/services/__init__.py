"""Numerical services and the pipelines built on them."""
