"""Validation package initialization."""
