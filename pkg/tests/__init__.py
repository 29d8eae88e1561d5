"""Test package for the LAPQ toolkit."""
