"""Test utilities and helper functions."""
