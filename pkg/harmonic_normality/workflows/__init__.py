"""Workflow modules."""
