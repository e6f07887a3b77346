"""
SEEDS Superpixels

Energy-driven superpixel partitioning by hill climbing on color histograms.

The image starts as a regular grid of cells. Rectangular blocks on region
boundaries are then exchanged between neighboring regions from coarse to
fine block sizes, followed by pixel-level boundary updates. A move is taken
only when it strictly increases the region/color agreement. A final pass
makes every region 4-connected.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
from scipy import ndimage

from ..validation.input_validation import DimensionError, ValidationError
from ..utils.logging import get_logger

logger = get_logger(__name__)

# 4-connectivity for region labelling
_CROSS = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class SeedsParams:
    """Superpixel parameters."""

    num_superpixels: int = 1000
    levels: int = 4
    bins_per_channel: int = 5
    iterations: int = 4
    smoothing_prior: int = 2

    def __post_init__(self):
        if self.num_superpixels < 1:
            raise ValidationError(f"num_superpixels must be >= 1, got {self.num_superpixels}")
        if self.levels < 1:
            raise ValidationError(f"levels must be >= 1, got {self.levels}")
        if self.bins_per_channel < 2:
            raise ValidationError(f"bins_per_channel must be >= 2, got {self.bins_per_channel}")
        if self.iterations < 0:
            raise ValidationError(f"iterations must be >= 0, got {self.iterations}")
        if self.smoothing_prior < 0:
            raise ValidationError(f"smoothing_prior must be >= 0, got {self.smoothing_prior}")


@dataclass(frozen=True)
class SuperpixelMap:
    """H x W region ids in [0, count)."""

    ids: np.ndarray
    count: int

    def __post_init__(self):
        ids = np.array(self.ids, dtype=np.int32, copy=True)
        ids.setflags(write=False)
        object.__setattr__(self, "ids", ids)

    @property
    def shape(self) -> Tuple[int, int]:
        return int(self.ids.shape[0]), int(self.ids.shape[1])


def seeds_partition(image: np.ndarray, params: SeedsParams) -> SuperpixelMap:
    """Partition an H x W x 3 uint8 image into at most K contiguous superpixels."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise DimensionError(f"Expected an H x W x 3 image, got {image.shape}")
    if image.dtype != np.uint8:
        raise ValidationError(f"Expected a uint8 image, got {image.dtype}")

    height, width = image.shape[:2]
    if height * width < params.num_superpixels:
        raise ValidationError(
            f"Image {height}x{width} is too small for {params.num_superpixels} superpixels"
        )

    rows, cols = grid_shape(height, width, params.num_superpixels)
    row_cell = (np.arange(height) * rows) // height
    col_cell = (np.arange(width) * cols) // width
    labels = (row_cell[:, None] * cols + col_cell[None, :]).astype(np.int64)
    n_regions = rows * cols

    bins = _color_bins(image, params.bins_per_channel)
    n_bins = params.bins_per_channel ** 3
    hist = np.bincount(
        (labels * n_bins + bins).ravel(), minlength=n_regions * n_bins
    ).reshape(n_regions, n_bins)
    sizes = np.bincount(labels.ravel(), minlength=n_regions)

    for block_h, block_w in _block_sizes(height / rows, width / cols, params.levels):
        for _ in range(params.iterations):
            moved = _block_sweep(labels, bins, hist, sizes, block_h, block_w, n_bins)
            logger.debug("Block level %dx%d moved %d blocks", block_h, block_w, moved)
            if not moved:
                break

    labels = _pixel_updates(labels, bins, hist, sizes, params)
    labels = _enforce_connectivity(labels)
    ids, count = _relabel_raster_order(labels)

    logger.debug(
        "SEEDS produced %d regions on a %dx%d grid for %dx%d image",
        count, rows, cols, height, width,
    )
    return SuperpixelMap(ids, count)


def grid_shape(height: int, width: int, num_superpixels: int) -> Tuple[int, int]:
    """
    Pick the (rows, cols) initial grid.

    Largest rows * cols <= K that fits the image, then the cell aspect ratio
    closest to square, then more columns.
    """
    best_key = None
    best = (1, 1)
    for rows in range(1, min(height, num_superpixels) + 1):
        cols = min(width, num_superpixels // rows)
        if cols < 1:
            continue
        mismatch = round(abs(math.log((height / rows) / (width / cols))), 12)
        key = (-(rows * cols), mismatch, -cols)
        if best_key is None or key < best_key:
            best_key, best = key, (rows, cols)
    return best


def _color_bins(image: np.ndarray, bins_per_channel: int) -> np.ndarray:
    quantized = (image.astype(np.int64) * bins_per_channel) // 256
    return (
        quantized[..., 0] * bins_per_channel * bins_per_channel
        + quantized[..., 1] * bins_per_channel
        + quantized[..., 2]
    )


def _block_sizes(cell_h: float, cell_w: float, levels: int) -> List[Tuple[int, int]]:
    """Block sizes from coarse to fine; single-pixel blocks are left to the pixel level."""
    sizes: List[Tuple[int, int]] = []
    for level in range(1, levels):
        block = (max(1, int(cell_h) >> level), max(1, int(cell_w) >> level))
        if block[0] * block[1] < 2 or block in sizes:
            continue
        sizes.append(block)
    return sizes


def _intersection(a: np.ndarray, a_size: int, b: np.ndarray, b_size: int) -> float:
    return float(np.minimum(a / a_size, b / b_size).sum())


def _block_sweep(
    labels: np.ndarray,
    bins: np.ndarray,
    hist: np.ndarray,
    sizes: np.ndarray,
    block_h: int,
    block_w: int,
    n_bins: int,
) -> int:
    """One raster-order pass of block exchanges; updates state in place."""
    height, width = labels.shape
    moved = 0
    for top in range(0, height, block_h):
        bottom = min(top + block_h, height)
        for left in range(0, width, block_w):
            right = min(left + block_w, width)
            block = labels[top:bottom, left:right]
            own = int(block[0, 0])
            if not (block == own).all():
                continue
            block_size = block.size
            if sizes[own] <= block_size:
                continue

            candidates = _block_neighbors(labels, top, bottom, left, right, own)
            if not candidates:
                continue

            block_hist = np.bincount(bins[top:bottom, left:right].ravel(), minlength=n_bins)
            stay = _intersection(
                block_hist, block_size, hist[own] - block_hist, int(sizes[own]) - block_size
            )
            best_label, best_energy = -1, stay
            for region in sorted(candidates):
                energy = _intersection(block_hist, block_size, hist[region], int(sizes[region]))
                if energy > best_energy:
                    best_label, best_energy = region, energy

            if best_label >= 0:
                labels[top:bottom, left:right] = best_label
                hist[own] -= block_hist
                hist[best_label] += block_hist
                sizes[own] -= block_size
                sizes[best_label] += block_size
                moved += 1
    return moved


def _block_neighbors(
    labels: np.ndarray, top: int, bottom: int, left: int, right: int, own: int
) -> set:
    height, width = labels.shape
    border = []
    if top > 0:
        border.append(labels[top - 1, left:right])
    if bottom < height:
        border.append(labels[bottom, left:right])
    if left > 0:
        border.append(labels[top:bottom, left - 1])
    if right < width:
        border.append(labels[top:bottom, right])
    if not border:
        return set()
    found = set(np.unique(np.concatenate(border)).tolist())
    found.discard(own)
    return found


def _boundary_pixels(labels: np.ndarray) -> np.ndarray:
    edge = np.zeros(labels.shape, dtype=bool)
    vertical = labels[1:, :] != labels[:-1, :]
    horizontal = labels[:, 1:] != labels[:, :-1]
    edge[1:, :] |= vertical
    edge[:-1, :] |= vertical
    edge[:, 1:] |= horizontal
    edge[:, :-1] |= horizontal
    return np.argwhere(edge)


def _pixel_updates(
    labels: np.ndarray,
    bins: np.ndarray,
    hist: np.ndarray,
    sizes: np.ndarray,
    params: SeedsParams,
) -> np.ndarray:
    """
    Pixel-level boundary updates.

    A boundary pixel of color bin h moves from region A to neighbor R when
    P_R(h) * (n_R + 1) ** prior > P_A'(h) * (n_A + 1) ** prior, where P is the
    region's normalized histogram (A' excludes the pixel) and n counts the
    region's labels among the 8 surrounding pixels.
    """
    height, width = labels.shape
    prior = params.smoothing_prior
    lab = labels.tolist()
    colors = bins.tolist()
    region_hist = hist.tolist()
    region_size = sizes.tolist()

    for sweep in range(params.iterations):
        moved = 0
        for y, x in _boundary_pixels(np.asarray(lab)).tolist():
            own = lab[y][x]
            if region_size[own] <= 1:
                continue

            candidates = set()
            if y > 0:
                candidates.add(lab[y - 1][x])
            if y + 1 < height:
                candidates.add(lab[y + 1][x])
            if x > 0:
                candidates.add(lab[y][x - 1])
            if x + 1 < width:
                candidates.add(lab[y][x + 1])
            candidates.discard(own)
            if not candidates:
                continue

            neighbors: Dict[int, int] = {}
            for yy in range(max(0, y - 1), min(height, y + 2)):
                row = lab[yy]
                for xx in range(max(0, x - 1), min(width, x + 2)):
                    if yy != y or xx != x:
                        neighbors[row[xx]] = neighbors.get(row[xx], 0) + 1

            h = colors[y][x]
            stay = (region_hist[own][h] - 1) / (region_size[own] - 1)
            best_label = -1
            best_score = stay * (neighbors.get(own, 0) + 1) ** prior
            for region in sorted(candidates):
                score = (
                    region_hist[region][h] / region_size[region]
                    * (neighbors.get(region, 0) + 1) ** prior
                )
                if score > best_score:
                    best_label, best_score = region, score

            if best_label >= 0:
                lab[y][x] = best_label
                region_hist[own][h] -= 1
                region_hist[best_label][h] += 1
                region_size[own] -= 1
                region_size[best_label] += 1
                moved += 1

        logger.debug("Pixel sweep %d moved %d pixels", sweep, moved)
        if not moved:
            break

    return np.asarray(lab, dtype=np.int64)


def _enforce_connectivity(labels: np.ndarray) -> np.ndarray:
    """
    Reassign every fragment not in its region's largest 4-connected component
    to the neighboring region sharing the longest boundary with it.
    """
    labels = labels.copy()
    height, width = labels.shape
    while True:
        changed = False
        grown = set()
        for region, box in enumerate(ndimage.find_objects(labels + 1)):
            # a region that absorbed fragments this pass has a stale box
            if box is None or region in grown:
                continue
            rows, cols = box
            window = labels[
                max(rows.start - 1, 0):min(rows.stop + 1, height),
                max(cols.start - 1, 0):min(cols.stop + 1, width),
            ]
            components, n_components = ndimage.label(window == region, structure=_CROSS)
            if n_components <= 1:
                continue
            counts = np.bincount(components.ravel())[1:]
            # argmax keeps the first (raster-order) component among equal sizes
            keep = int(np.argmax(counts)) + 1
            for component in range(1, n_components + 1):
                if component == keep:
                    continue
                fragment = components == component
                target = _longest_shared_boundary(window, fragment, region)
                if target == region:
                    continue
                window[fragment] = target
                grown.add(target)
                changed = True
        if not changed:
            return labels


def _longest_shared_boundary(labels: np.ndarray, fragment: np.ndarray, own: int) -> int:
    shared: Dict[int, int] = {}
    pairs = (
        (fragment[1:, :], labels[:-1, :]),
        (fragment[:-1, :], labels[1:, :]),
        (fragment[:, 1:], labels[:, :-1]),
        (fragment[:, :-1], labels[:, 1:]),
    )
    for inside, neighbor in pairs:
        for region, count in zip(*np.unique(neighbor[inside], return_counts=True)):
            region = int(region)
            if region != own:
                shared[region] = shared.get(region, 0) + int(count)
    if not shared:
        return own
    return min(shared, key=lambda region: (-shared[region], region))


def _relabel_raster_order(labels: np.ndarray) -> Tuple[np.ndarray, int]:
    flat = labels.ravel()
    regions, first_seen, inverse = np.unique(flat, return_index=True, return_inverse=True)
    rank = np.empty(len(regions), dtype=np.int64)
    rank[np.argsort(first_seen)] = np.arange(len(regions))
    return rank[inverse].reshape(labels.shape), len(regions)
