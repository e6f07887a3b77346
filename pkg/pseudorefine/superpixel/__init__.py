"""Superpixel package: SEEDS partitioning and point prompts."""
