"""Exponential moving average of teacher parameters."""

from typing import Dict, Mapping

import numpy as np

from ..validation.input_validation import ConfigError, DimensionError


def ema_update(teacher: np.ndarray, student: np.ndarray, alpha: float) -> np.ndarray:
    """theta_T <- alpha * theta_T + (1 - alpha) * theta_S, in the teacher's dtype."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must be in [0, 1], got {alpha}")
    teacher = np.asarray(teacher)
    student = np.asarray(student)
    if teacher.shape != student.shape:
        raise DimensionError(
            f"Teacher {teacher.shape} and student {student.shape} parameters differ in shape"
        )

    updated = alpha * teacher.astype(np.float64) + (1.0 - alpha) * student.astype(np.float64)
    if np.issubdtype(teacher.dtype, np.floating):
        return updated.astype(teacher.dtype)
    return updated


def ema_update_state(
    teacher: Mapping[str, np.ndarray], student: Mapping[str, np.ndarray], alpha: float
) -> Dict[str, np.ndarray]:
    """Update every named parameter; both states must hold the same names."""
    missing = sorted(set(teacher) ^ set(student))
    if missing:
        raise DimensionError(f"Parameter names differ between teacher and student: {missing}")
    return {name: ema_update(teacher[name], student[name], alpha) for name in teacher}
