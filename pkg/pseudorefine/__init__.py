"""PseudoRefine package initialization."""

__version__ = "1.0.0"
__author__ = "PseudoRefine Team"
__description__ = "Mask-level pseudo-label refinement and prototype alignment toolkit"
