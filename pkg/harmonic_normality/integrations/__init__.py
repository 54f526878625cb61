"""Integration modules."""
