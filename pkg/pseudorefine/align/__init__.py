"""Prototype alignment package."""
