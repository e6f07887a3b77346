"""Evaluation metrics package."""
