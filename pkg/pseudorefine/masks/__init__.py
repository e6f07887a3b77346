"""Mask pipeline package: overlap filtering, mask-id maps and coverage."""
