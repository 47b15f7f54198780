"""Gray-level co-occurrence matrices and their Haralick texture features."""

from dataclasses import dataclass

import numpy as np

from ._kernels import GLCM_FEATURE_ORDER
from ._kernels._numpy import _pair_views

DEFAULT_OFFSET = (0, 1)


def glcm(
    patch: np.ndarray,
    offset: tuple[int, int] = DEFAULT_OFFSET,
    levels: int = 256,
) -> np.ndarray:
    """Symmetric normalized co-occurrence matrix of one integer patch.

    Counts value pairs at the given (dy, dx) offset plus its reverse and
    normalizes by the total pair count, so entries sum to 1.
    """
    patch = np.asarray(patch)
    if patch.max(initial=0) >= levels:
        raise ValueError(f"sample value >= levels ({levels})")
    dy, dx = offset
    a, b = _pair_views(patch.astype(np.int64), dy, dx)
    codes = np.concatenate([a * levels + b, b * levels + a])
    counts = np.bincount(codes, minlength=levels * levels)
    matrix = counts.reshape(levels, levels).astype(np.float64)
    return matrix / (2 * a.size)


@dataclass(frozen=True)
class GlcmFeatures:
    contrast: float
    dissimilarity: float
    homogeneity: float
    angular_second_moment: float
    energy: float
    correlation: float

    def as_tuple(self) -> tuple[float, ...]:
        return (
            self.contrast,
            self.dissimilarity,
            self.homogeneity,
            self.angular_second_moment,
            self.energy,
            self.correlation,
        )


# display names used in pooled-feature naming, aligned with as_tuple order
GLCM_FEATURE_NAMES = GLCM_FEATURE_ORDER


def glcm_features(matrix: np.ndarray) -> GlcmFeatures:
    """Haralick statistics of a normalized GLCM.

    correlation of a zero-variance matrix (constant patch) is defined as 1.
    """
    p = np.asarray(matrix, dtype=np.float64)
    levels = p.shape[0]
    idx = np.arange(levels, dtype=np.float64)
    diff = idx[:, None] - idx[None, :]
    d2 = diff * diff

    contrast = float(np.sum(p * d2))
    dissimilarity = float(np.sum(p * np.abs(diff)))
    homogeneity = float(np.sum(p / (1.0 + d2)))
    asm = float(np.sum(p * p))
    energy = float(np.sqrt(asm))

    pa = p.sum(axis=1)
    pb = p.sum(axis=0)
    mu_a = float(np.dot(idx, pa))
    mu_b = float(np.dot(idx, pb))
    var_a = float(np.dot(idx * idx, pa)) - mu_a * mu_a
    var_b = float(np.dot(idx * idx, pb)) - mu_b * mu_b
    if var_a <= 0.0 or var_b <= 0.0:
        correlation = 1.0
    else:
        cov = float(np.sum(p * (idx[:, None] - mu_a) * (idx[None, :] - mu_b)))
        correlation = cov / np.sqrt(var_a * var_b)

    return GlcmFeatures(
        contrast=contrast,
        dissimilarity=dissimilarity,
        homogeneity=homogeneity,
        angular_second_moment=asm,
        energy=energy,
        correlation=correlation,
    )


def quantize_levels(patch: np.ndarray, levels: int, bit_depth: int) -> np.ndarray:
    """Map native-range samples onto [0, levels) gray levels."""
    native = 1 << bit_depth
    if levels >= native:
        return patch
    return (patch.astype(np.int64) * levels) // native
