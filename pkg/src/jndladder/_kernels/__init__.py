"""Hot-loop kernels with a compiled core and a pure-numpy fallback.

The compiled extension (``_core``, Cython) implements the per-block
DCT-energy statistics, the per-patch GLCM texture features and the CART
best-split search. If the extension is missing (build skipped or failed)
the numpy implementations in ``_numpy`` are used instead; both backends
implement the same contracts and are cross-checked in the test suite.
"""

try:
    from . import _core as _impl

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    from . import _numpy as _impl

    BACKEND = "numpy"

from . import _numpy as numpy_backend

plane_block_stats = _impl.plane_block_stats
glcm_feature_batch = _impl.glcm_feature_batch
best_split = _impl.best_split

GLCM_FEATURE_ORDER = (
    "contrast",
    "dissimilarity",
    "homogeneity",
    "angular second moment",
    "energy",
    "correlation",
)

__all__ = [
    "BACKEND",
    "GLCM_FEATURE_ORDER",
    "best_split",
    "glcm_feature_batch",
    "numpy_backend",
    "plane_block_stats",
]
