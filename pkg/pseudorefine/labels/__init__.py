"""Pseudo-label refinement package."""
