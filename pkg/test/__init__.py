"""Module contain all tests."""
