"""Exact quotients of the Farey graph by high powers of Dehn twists."""

__version__ = "0.1.0"
