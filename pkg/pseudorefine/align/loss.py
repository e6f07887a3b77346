"""
Prototype Contrastive Loss

Similarities between projected pixel features and the fixed class
prototypes, s_ic = z_i . p_c / T, feed a softmax cross-entropy against the
pixel labels. The analytic gradient with respect to z is exposed for an
external trainer. All accumulation is float64.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..models.arrays import LabelMap, ProbMap
from ..validation.input_validation import ConfigError, DimensionError, ValidationError
from ..utils.logging import get_logger
from .prototypes import AbsentClassError, PrototypeBank, ZeroNormError

logger = get_logger(__name__)

PROB_FLOOR = 1e-12


class EmptyLabelsError(ValidationError):
    """Raised when a loss is requested over zero labeled pixels."""

    pass


@dataclass(frozen=True)
class AlignConfig:
    """Contrastive alignment settings."""

    temperature: float = 0.1
    lambda_proto: float = 0.1
    normalize_projected: bool = True
    exclude_absent: bool = False

    def __post_init__(self):
        if not self.temperature > 0:
            raise ConfigError(f"temperature must be > 0, got {self.temperature}")
        if not self.lambda_proto >= 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lambda_proto}")


def similarity(z: np.ndarray, bank: PrototypeBank, cfg: AlignConfig) -> np.ndarray:
    """H' x W' x K temperature-scaled similarities (float64)."""
    if z.ndim != 3:
        raise DimensionError(f"Projected features must be H' x W' x C, got {z.shape}")
    if z.shape[2] != bank.channels:
        raise DimensionError(
            f"Projected features have {z.shape[2]} channels, prototypes have {bank.channels}"
        )

    units = _unit_features(z) if cfg.normalize_projected else z.astype(np.float64)
    scores = units @ bank.prototypes.astype(np.float64).T / cfg.temperature
    if cfg.exclude_absent:
        scores[..., ~bank.present] = -np.inf
    return scores


def check_labels_present(labels: LabelMap, bank: PrototypeBank) -> None:
    """Raise AbsentClassError when a labeled pixel's class has no prototype."""
    classes = np.unique(labels.labels[labels.valid]).astype(np.int64)
    out_of_range = classes[classes >= bank.num_classes]
    if out_of_range.size:
        raise ValidationError(
            f"Labels {out_of_range.tolist()} outside {bank.num_classes} prototype classes"
        )
    absent = [int(c) for c in classes if not bank.present[c]]
    if absent:
        raise AbsentClassError(f"Labels reference absent prototype classes {absent}", absent)


def proto_loss(similarities: np.ndarray, labels: LabelMap) -> float:
    """Mean softmax cross-entropy of the similarities over labeled pixels."""
    log_probs, targets, _ = _labeled_log_softmax(similarities, labels)
    return float(-log_probs[np.arange(len(targets)), targets].mean())


def proto_loss_grad(
    z: np.ndarray, bank: PrototypeBank, labels: LabelMap, cfg: AlignConfig
) -> np.ndarray:
    """
    dL/dz for the prototype loss.

    With s = u P^T / T, dL/ds = (softmax(s) - onehot(y)) / N. When features
    are normalized (u = z / |z|) the result is projected onto the tangent
    space: dL/dz = (g - u (u . g)) / |z| with g = dL/du.
    """
    check_labels_present(labels, bank)
    scores = similarity(z, bank, cfg)
    log_probs, targets, valid = _labeled_log_softmax(scores, labels)

    n_labeled = len(targets)
    channels = z.shape[2]
    grad_scores = np.exp(log_probs)
    grad_scores[np.arange(n_labeled), targets] -= 1.0
    grad_scores /= n_labeled

    prototypes = bank.prototypes.astype(np.float64)
    grad_units = grad_scores @ prototypes / cfg.temperature

    flat_z = z.reshape(-1, channels).astype(np.float64)[valid]
    if cfg.normalize_projected:
        norms = np.linalg.norm(flat_z, axis=1, keepdims=True)
        units = flat_z / norms
        radial = (units * grad_units).sum(axis=1, keepdims=True)
        grad_labeled = (grad_units - units * radial) / norms
    else:
        grad_labeled = grad_units

    grad = np.zeros((z.shape[0] * z.shape[1], channels), dtype=np.float64)
    grad[valid] = grad_labeled
    return grad.reshape(z.shape)


def pixel_cross_entropy(p: ProbMap, labels: LabelMap) -> float:
    """Mean -log p(y) over labeled pixels; zero probabilities are floored at 1e-12."""
    if p.shape != labels.shape:
        raise DimensionError(f"ProbMap {p.shape} and labels {labels.shape} differ in size")
    valid = labels.valid
    if not valid.any():
        raise EmptyLabelsError("Cross-entropy needs at least one labeled pixel")

    targets = labels.labels[valid].astype(np.int64)
    if int(targets.max()) >= p.classes:
        raise ValidationError(f"Label {int(targets.max())} outside {p.classes} classes")

    picked = p.probs[valid].astype(np.float64)[np.arange(len(targets)), targets]
    floored = picked < PROB_FLOOR
    if floored.any():
        logger.warning(
            "Clamped %d zero-probability labeled pixels to %g",
            int(floored.sum()), PROB_FLOOR,
        )
    return float(-np.log(np.maximum(picked, PROB_FLOOR)).mean())


def total_loss(l_s: float, l_t: float, l_proto: float, lam: float) -> float:
    """L = L_S + L_T + lambda * L_proto."""
    values = {"l_s": l_s, "l_t": l_t, "l_proto": l_proto, "lambda": lam}
    bad = [name for name, value in values.items() if not math.isfinite(value)]
    if bad:
        raise ValidationError(f"Non-finite loss inputs: {', '.join(bad)}")
    return l_s + l_t + lam * l_proto


def _unit_features(z: np.ndarray) -> np.ndarray:
    values = z.astype(np.float64)
    norms = np.linalg.norm(values, axis=2, keepdims=True)
    if (norms == 0).any():
        row, col = np.argwhere(norms[..., 0] == 0)[0]
        raise ZeroNormError(f"Projected feature at ({row}, {col}) has zero norm")
    return values / norms


def _labeled_log_softmax(similarities: np.ndarray, labels: LabelMap):
    """Log-softmax rows of the labeled pixels, their targets, and the flat validity mask."""
    if similarities.ndim != 3:
        raise DimensionError(f"Similarities must be H' x W' x K, got {similarities.shape}")
    if similarities.shape[:2] != labels.shape:
        raise DimensionError(
            f"Similarities {similarities.shape[:2]} and labels {labels.shape} differ in size"
        )

    n_classes = similarities.shape[2]
    valid = labels.valid.ravel()
    if not valid.any():
        raise EmptyLabelsError("Prototype loss needs at least one labeled pixel")

    targets = labels.labels.ravel()[valid].astype(np.int64)
    if int(targets.max()) >= n_classes:
        raise ValidationError(f"Label {int(targets.max())} outside {n_classes} classes")

    scores = similarities.reshape(-1, n_classes)[valid].astype(np.float64)
    if np.isneginf(scores[np.arange(len(targets)), targets]).any():
        raise AbsentClassError("Labels reference a class excluded from the softmax")

    peak = scores.max(axis=1, keepdims=True)
    shifted = scores - peak
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return shifted - log_norm, targets, valid
