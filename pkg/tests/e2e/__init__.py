"""End-to-end tests for complete user workflows."""
