import numpy as np
import pytest

from pseudorefine.align.projection import ProjectionHead, project
from pseudorefine.align.prototypes import (
    AbsentClassError,
    PrototypeAccumulator,
    ZeroNormError,
    accumulate_prototypes,
    downsample_labels,
    finalize_prototypes,
)
from pseudorefine.models.arrays import IGNORE_LABEL, LabelMap
from pseudorefine.validation.input_validation import DimensionError, ValidationError


def _labels(grid):
    return LabelMap(np.array(grid, dtype=np.uint8))


def test_downsample_majority():
    assert downsample_labels(_labels([[0, 0], [0, 1]]), (1, 1)).labels.tolist() == [[0]]
    assert downsample_labels(_labels([[0, 1]]), (1, 1)).labels.tolist() == [[0]]
    assert downsample_labels(_labels([[255, 255]]), (1, 1)).labels.tolist() == [[255]]


def test_downsample_ignores_ignore_votes():
    grid = [[255, 255, 2, 2], [255, 3, 2, 255]]
    assert downsample_labels(_labels(grid), (1, 2)).labels.tolist() == [[3, 2]]


def test_downsample_uneven_cells():
    grid = [[1, 1, 2], [1, 2, 2], [0, 0, 0]]
    # source rows {0, 1} -> 0 and {2} -> 1; columns likewise
    out = downsample_labels(_labels(grid), (2, 2))
    assert out.labels.tolist() == [[1, 2], [0, 0]]


def test_downsample_same_size_and_errors():
    labels = _labels([[1, 2]])
    assert downsample_labels(labels, (1, 2)) is labels
    with pytest.raises(DimensionError):
        downsample_labels(labels, (2, 2))


def test_accumulate_single_pixel():
    acc = accumulate_prototypes(
        PrototypeAccumulator.empty(2, 2), np.array([[[1.0, 0.0]]]), _labels([[1]])
    )
    assert acc.sums.tolist() == [[0.0, 0.0], [1.0, 0.0]]
    assert acc.counts.tolist() == [0, 1]


def test_accumulate_all_ignore_is_identity():
    start = PrototypeAccumulator.empty(3, 2)
    acc = accumulate_prototypes(start, np.ones((2, 2, 2)), _labels([[255, 255], [255, 255]]))
    assert not acc.sums.any()
    assert not acc.counts.any()


def test_merge_equals_concatenation(rng):
    feats_a = rng.normal(size=(3, 4, 5))
    feats_b = rng.normal(size=(2, 4, 5))
    labels_a = rng.integers(0, 4, size=(3, 4))
    labels_b = rng.integers(0, 4, size=(2, 4))
    labels_a[0, 0] = IGNORE_LABEL

    empty = PrototypeAccumulator.empty(4, 5)
    merged = accumulate_prototypes(empty, feats_a, _labels(labels_a)).merge(
        accumulate_prototypes(empty, feats_b, _labels(labels_b))
    )
    joint = accumulate_prototypes(
        empty,
        np.concatenate([feats_a, feats_b]),
        _labels(np.concatenate([labels_a, labels_b])),
    )

    np.testing.assert_allclose(merged.sums, joint.sums, atol=1e-12)
    assert merged.counts.tolist() == joint.counts.tolist()


def test_accumulate_checks():
    acc = PrototypeAccumulator.empty(2, 3)
    with pytest.raises(DimensionError):
        accumulate_prototypes(acc, np.ones((1, 2, 3)), _labels([[0]]))
    with pytest.raises(DimensionError):
        accumulate_prototypes(acc, np.ones((1, 1, 2)), _labels([[0]]))
    with pytest.raises(ValidationError):
        accumulate_prototypes(acc, np.ones((1, 1, 3)), _labels([[2]]))
    with pytest.raises(DimensionError):
        acc.merge(PrototypeAccumulator.empty(3, 3))


def test_finalize_normalizes_means():
    acc = accumulate_prototypes(
        PrototypeAccumulator.empty(3, 2),
        np.array([[[1.0, 0.0], [0.0, 1.0], [3.0, 4.0]]]),
        _labels([[1, 1, 0]]),
    )
    bank = finalize_prototypes(acc)

    np.testing.assert_allclose(bank.prototypes[0], [0.6, 0.8], atol=1e-6)
    np.testing.assert_allclose(bank.prototypes[1], [0.70710678, 0.70710678], atol=1e-6)
    assert bank.prototypes.dtype == np.float32
    assert bank.present.tolist() == [True, True, False]
    assert bank.absent_classes() == [2]
    assert not bank.prototypes[2].any()
    assert bank.source_counts.tolist() == [1, 2, 0]


def test_finalize_errors():
    with pytest.raises(AbsentClassError) as excinfo:
        finalize_prototypes(PrototypeAccumulator.empty(2, 2))
    assert excinfo.value.classes == [0, 1]

    cancelling = accumulate_prototypes(
        PrototypeAccumulator.empty(1, 2),
        np.array([[[1.0, 2.0], [-1.0, -2.0]]]),
        _labels([[0, 0]]),
    )
    with pytest.raises(ZeroNormError):
        finalize_prototypes(cancelling)


def test_bank_save_and_load(tmp_path, rng):
    acc = accumulate_prototypes(
        PrototypeAccumulator.empty(3, 4), rng.normal(size=(2, 2, 4)), _labels([[0, 0], [1, 1]])
    )
    bank = finalize_prototypes(acc)
    bank.save(tmp_path / "p.npy", tmp_path / "p.json", temperature=0.1, normalize_projected=True)

    loaded = type(bank).load(tmp_path / "p.npy", tmp_path / "p.json")
    assert loaded.prototypes.tobytes() == bank.prototypes.tobytes()
    assert loaded.present.tolist() == [True, True, False]
    assert loaded.source_counts.tolist() == [2, 2, 0]
    assert bank.sidecar(0.1, True)["temperature_default"] == 0.1


def test_projection(rng):
    features = rng.normal(size=(3, 4, 5))
    np.testing.assert_array_equal(project(features, ProjectionHead.identity(5)), features)

    bias = np.array([1.0, -2.0])
    constant = project(features, ProjectionHead(np.zeros((5, 2)), bias))
    assert (constant == bias).all()

    weight = rng.normal(size=(5, 3))
    bias = rng.normal(size=3)
    out = project(features, ProjectionHead(weight, bias))
    for y in range(3):
        for x in range(4):
            np.testing.assert_allclose(out[y, x], weight.T @ features[y, x] + bias, atol=1e-6)


def test_projection_head_checks():
    with pytest.raises(DimensionError):
        ProjectionHead(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValidationError):
        ProjectionHead(np.array([[np.nan]]), np.zeros(1))
    with pytest.raises(DimensionError):
        project(np.ones((1, 1, 4)), ProjectionHead.identity(3))
