"""Retrieval, selection, supervision and evaluation services."""
