"""DCT-energy scene complexity features.

Seven per-scene measures: average luma texture energy E_Y, its temporal
gradient h, average luminance L_Y, and the chroma counterparts E_U, E_V,
L_U, L_V. Per-plane values are means over block-wise statistics of the
orthonormal type-II 2-D DCT; the exact weighting is fixed by
FORMULA_VERSION and recorded in every features file, since downstream
models are trained against these definitions.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from . import _kernels
from .ingest import SceneClip

FORMULA_VERSION = "dct-energy/1"
DEFAULT_BLOCK_SIZE = 32

SCENE_FEATURE_NAMES = ("E_Y", "h", "L_Y", "E_U", "E_V", "L_U", "L_V")


@lru_cache(maxsize=8)
def dct_basis(size: int) -> np.ndarray:
    """Orthonormal type-II DCT basis matrix C[u, x]."""
    x = np.arange(size)
    u = np.arange(size)[:, None]
    basis = np.cos(np.pi * (2 * x + 1) * u / (2 * size)) * math.sqrt(2 / size)
    basis[0] = math.sqrt(1 / size)
    basis.setflags(write=False)
    return basis


@lru_cache(maxsize=8)
def energy_weights(size: int) -> np.ndarray:
    """Coefficient weights exp(|(ij/w^2)^2 - 1|) with the DC term zeroed."""
    ij = np.outer(np.arange(size), np.arange(size)) / (size * size)
    weights = np.exp(np.abs(ij * ij - 1.0))
    weights[0, 0] = 0.0
    weights.setflags(write=False)
    return weights


def dct2d(block: np.ndarray) -> np.ndarray:
    """Orthonormal type-II 2-D DCT of one square block."""
    block = np.asarray(block, dtype=np.float64)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise ValueError(f"expected a square block, got shape {block.shape}")
    return scipy.fft.dctn(block, type=2, norm="ortho")


def block_texture_energy(coefficients: np.ndarray) -> float:
    """Weighted absolute AC-coefficient sum, normalized by the block area."""
    coefficients = np.asarray(coefficients, dtype=np.float64)
    w = coefficients.shape[0]
    return float(
        np.sum(energy_weights(w) * np.abs(coefficients)) / (w * w)
    )


def plane_stats(plane: np.ndarray, block_size: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-block (texture energy, DC/w brightness) over a tiled plane.

    Right/bottom partial blocks are edge-replicated to full size, matching
    tile_blocks, so every pixel contributes.
    """
    if block_size < 4:
        raise ValueError(f"block size must be >= 4, got {block_size}")
    h, w = plane.shape
    pad_y = -h % block_size
    pad_x = -w % block_size
    padded = np.pad(
        np.asarray(plane, dtype=np.float64), ((0, pad_y), (0, pad_x)), mode="edge"
    )
    return _kernels.plane_block_stats(
        np.ascontiguousarray(padded),
        block_size,
        dct_basis(block_size),
        energy_weights(block_size),
    )


@dataclass(frozen=True)
class FramePlaneFeatures:
    """Per-frame texture energy and brightness for the three planes."""

    E_Y: float
    L_Y: float
    E_U: float
    L_U: float
    E_V: float
    L_V: float


@dataclass(frozen=True)
class SceneComplexity:
    """Per-frame series and scene-level means of the seven features."""

    scene_id: str
    per_frame: tuple[FramePlaneFeatures, ...]
    h_per_frame: tuple[float, ...]
    E_Y: float
    h: float
    L_Y: float
    E_U: float
    E_V: float
    L_U: float
    L_V: float

    @property
    def frame_count(self) -> int:
        return len(self.per_frame)

    def series(self, name: str) -> np.ndarray:
        """Per-frame series of one scene-complexity feature (h included)."""
        if name == "h":
            return np.asarray(self.h_per_frame, dtype=np.float64)
        if name not in ("E_Y", "L_Y", "E_U", "L_U", "E_V", "L_V"):
            raise KeyError(f"unknown scene-complexity feature {name!r}")
        return np.asarray(
            [getattr(f, name) for f in self.per_frame], dtype=np.float64
        )

    def scene_features(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in SCENE_FEATURE_NAMES}


def frame_features(frame, block_size: int = DEFAULT_BLOCK_SIZE) -> FramePlaneFeatures:
    """E and L for each plane: means of the per-block statistics."""
    values = {}
    for tag, plane in zip(("Y", "U", "V"), frame.planes):
        energies, lumas = plane_stats(plane, block_size)
        values[f"E_{tag}"] = float(np.mean(energies))
        values[f"L_{tag}"] = float(np.mean(lumas))
    return FramePlaneFeatures(**values)


def temporal_gradient(
    luma_block_energies: list[np.ndarray],
) -> tuple[list[float], float]:
    """Per-frame gradient h_p of the luma block energies and the scene mean.

    h_p = mean_k |H[p, k] - H[p-1, k]| for p >= 1, h_0 = 0; the scene value
    averages h_p over p >= 1 and is 0 for single-frame scenes.
    """
    if not luma_block_energies:
        raise ValueError("empty energy series")
    h_per_frame = [0.0]
    for prev, cur in zip(luma_block_energies, luma_block_energies[1:]):
        h_per_frame.append(float(np.mean(np.abs(cur - prev))))
    scene_h = float(np.mean(h_per_frame[1:])) if len(h_per_frame) > 1 else 0.0
    return h_per_frame, scene_h


def _frame_stats(frame, block_size):
    values = {}
    luma_energies = None
    for tag, plane in zip(("Y", "U", "V"), frame.planes):
        energies, lumas = plane_stats(plane, block_size)
        if tag == "Y":
            luma_energies = energies
        values[f"E_{tag}"] = float(np.mean(energies))
        values[f"L_{tag}"] = float(np.mean(lumas))
    return FramePlaneFeatures(**values), luma_energies


def scene_complexity(
    clip: SceneClip,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
) -> SceneComplexity:
    """Extract the seven features for one scene.

    Frames are processed independently (optionally in a thread pool) and
    reduced in frame order, so results do not depend on the worker count.
    """
    frames = clip.frames
    if not frames:
        raise ValueError("empty clip")
    if threads > 1 and len(frames) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda f: _frame_stats(f, block_size), frames))
    else:
        results = [_frame_stats(f, block_size) for f in frames]

    per_frame = tuple(r[0] for r in results)
    h_per_frame, scene_h = temporal_gradient([r[1] for r in results])

    def scene_mean(name):
        return float(np.mean([getattr(f, name) for f in per_frame]))

    return SceneComplexity(
        scene_id=clip.scene_id,
        per_frame=per_frame,
        h_per_frame=tuple(h_per_frame),
        E_Y=scene_mean("E_Y"),
        h=scene_h,
        L_Y=scene_mean("L_Y"),
        E_U=scene_mean("E_U"),
        E_V=scene_mean("E_V"),
        L_U=scene_mean("L_U"),
        L_V=scene_mean("L_V"),
    )


def complexity_to_dict(sc: SceneComplexity, clip: SceneClip, block_size: int) -> dict:
    """JSON-ready features-file payload (schema: scene-complexity/1)."""
    per_frame = []
    for feats, h_p in zip(sc.per_frame, sc.h_per_frame):
        row = {
            "E_Y": feats.E_Y,
            "L_Y": feats.L_Y,
            "E_U": feats.E_U,
            "L_U": feats.L_U,
            "E_V": feats.E_V,
            "L_V": feats.L_V,
            "h": h_p,
        }
        per_frame.append(row)
    first = clip.frames[0]
    return {
        "schema_version": 1,
        "kind": "scene-complexity",
        "scene_id": sc.scene_id,
        "config": {
            "block_size": block_size,
            "formula": FORMULA_VERSION,
            "bit_depth": first.bit_depth,
            "chroma_format": first.chroma_format,
        },
        "framerate": [clip.fps_num, clip.fps_den],
        "frame_count": sc.frame_count,
        "per_frame": per_frame,
        "scene": sc.scene_features(),
    }


def complexity_from_dict(doc: dict) -> SceneComplexity:
    """Rebuild a SceneComplexity from a features-file payload."""
    from .errors import SchemaError

    if doc.get("kind") != "scene-complexity":
        raise SchemaError("not a scene-complexity features file")
    if doc.get("schema_version") != 1:
        raise SchemaError(
            f"unsupported scene-complexity schema version {doc.get('schema_version')!r}"
        )
    try:
        per_frame = tuple(
            FramePlaneFeatures(
                E_Y=row["E_Y"],
                L_Y=row["L_Y"],
                E_U=row["E_U"],
                L_U=row["L_U"],
                E_V=row["E_V"],
                L_V=row["L_V"],
            )
            for row in doc["per_frame"]
        )
        h_per_frame = tuple(row["h"] for row in doc["per_frame"])
        scene = doc["scene"]
        return SceneComplexity(
            scene_id=doc["scene_id"],
            per_frame=per_frame,
            h_per_frame=h_per_frame,
            **{name: scene[name] for name in SCENE_FEATURE_NAMES},
        )
    except KeyError as exc:
        raise SchemaError(f"scene-complexity file is missing field {exc}")
