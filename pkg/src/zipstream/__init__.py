"""Streams specified by zip equations."""
