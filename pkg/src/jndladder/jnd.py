"""JND feature vector: pooled complexity, bitstream and GLCM features.

Three groups feed the threshold predictor: temporally pooled scene
complexity, temporally pooled bitstream series (ingested from an external
analyzer's JSON, never recomputed here), and spatio-temporally pooled GLCM
texture features. The default 15-entry selection and its order are fixed
and versioned; ``candidate_features`` exposes the full pool that forward
selection draws from.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .complexity import SceneComplexity, SCENE_FEATURE_NAMES
from .errors import SchemaError
from .glcm import GLCM_FEATURE_NAMES, quantize_levels
from .ingest import SceneClip, crop_patches
from .pooling import POOL_STATS, pool

DEFAULT_PATCH_SIZE = 64
DEFAULT_GLCM_OFFSET = (0, 1)

# fixed 15-entry selection; outer stat pools over frames, inner over patches
JND_FEATURE_NAMES = (
    "max(L_Y)",
    "max(L_U)",
    "kurt(AvMotionX)",
    "kurt(AvMotionY)",
    "kurt(SpatialComplexity)",
    "mean(mean(dissimilarity))",
    "kurt(kurt(dissimilarity))",
    "max(mean(homogeneity))",
    "mean(mean(homogeneity))",
    "skew(std(angular second moment))",
    "kurt(std(angular second moment))",
    "kurt(skew(angular second moment))",
    "mean(skew(energy))",
    "std(max(correlation))",
    "kurt(max(contrast))",
)

_BITSTREAM_SERIES = ("frame_size_bytes", "AvMotionX", "AvMotionY", "SpatialComplexity")


@dataclass(frozen=True)
class BitstreamSeries:
    """Per-frame bitstream statistics from the external near-lossless encode."""

    framerate: float
    bitrate_kbps: float
    frame_size_bytes: np.ndarray
    av_motion_x: np.ndarray
    av_motion_y: np.ndarray
    spatial_complexity: np.ndarray

    @property
    def frame_count(self) -> int:
        return len(self.frame_size_bytes)

    def series(self, name: str) -> np.ndarray:
        attr = {
            "frame_size_bytes": "frame_size_bytes",
            "AvMotionX": "av_motion_x",
            "AvMotionY": "av_motion_y",
            "SpatialComplexity": "spatial_complexity",
        }.get(name)
        if attr is None:
            raise KeyError(f"unknown bitstream series {name!r}")
        return getattr(self, attr)


def ingest_bitstream_features(doc: dict) -> BitstreamSeries:
    """Validate and load a bitstream-features JSON document.

    Schema: framerate, bitrate_kbps, frames: [{frame_size_bytes, AvMotionX,
    AvMotionY, SpatialComplexity}]. An optional frame_count is cross-checked
    against the frames list.
    """
    for key in ("framerate", "bitrate_kbps", "frames"):
        if key not in doc:
            raise SchemaError(f"bitstream features file is missing {key!r}")
    frames = doc["frames"]
    if not isinstance(frames, list) or not frames:
        raise SchemaError("bitstream features file has no frame records")
    declared = doc.get("frame_count")
    if declared is not None and declared != len(frames):
        raise SchemaError(
            f"declared frame_count {declared} != {len(frames)} frame records"
        )
    columns = {name: [] for name in _BITSTREAM_SERIES}
    for i, rec in enumerate(frames):
        for name in _BITSTREAM_SERIES:
            if name not in rec:
                raise SchemaError(f"frame record {i} is missing {name!r}")
            columns[name].append(float(rec[name]))
    return BitstreamSeries(
        framerate=float(doc["framerate"]),
        bitrate_kbps=float(doc["bitrate_kbps"]),
        frame_size_bytes=np.asarray(columns["frame_size_bytes"]),
        av_motion_x=np.asarray(columns["AvMotionX"]),
        av_motion_y=np.asarray(columns["AvMotionY"]),
        spatial_complexity=np.asarray(columns["SpatialComplexity"]),
    )


def bitstream_to_dict(bs: BitstreamSeries) -> dict:
    return {
        "framerate": bs.framerate,
        "bitrate_kbps": bs.bitrate_kbps,
        "frame_count": bs.frame_count,
        "frames": [
            {
                "frame_size_bytes": float(bs.frame_size_bytes[i]),
                "AvMotionX": float(bs.av_motion_x[i]),
                "AvMotionY": float(bs.av_motion_y[i]),
                "SpatialComplexity": float(bs.spatial_complexity[i]),
            }
            for i in range(bs.frame_count)
        ],
    }


def _frame_glcm_pools(frame, patch_size, offset, levels):
    patches = crop_patches(frame.y, patch_size)
    patches = quantize_levels(patches, levels, frame.bit_depth)
    patches = np.ascontiguousarray(patches, dtype=np.uint16)
    dy, dx = offset
    feats = _kernels.glcm_feature_batch(patches, dy, dx, levels)
    # spatial pooling across patches, per feature
    return {
        (stat, name): pool(feats[:, j], stat)
        for j, name in enumerate(GLCM_FEATURE_NAMES)
        for stat in POOL_STATS
    }


def pooled_glcm(
    clip: SceneClip,
    patch_size: int = DEFAULT_PATCH_SIZE,
    offset: tuple[int, int] = DEFAULT_GLCM_OFFSET,
    levels: int | None = None,
    threads: int = 1,
) -> dict[str, float]:
    """Spatio-temporally pooled GLCM features of a clip's luma plane.

    Per frame, Haralick features are computed per patch and pooled across
    patches with all five statistics; each (spatial stat, feature) series is
    then pooled across frames, yielding 6 x 25 = 150 named values.
    """
    if levels is None:
        levels = 1 << clip.frames[0].bit_depth
    work = lambda f: _frame_glcm_pools(f, patch_size, offset, levels)
    if threads > 1 and len(clip.frames) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            per_frame = list(ex.map(work, clip.frames))
    else:
        per_frame = [work(f) for f in clip.frames]

    out = {}
    for name in GLCM_FEATURE_NAMES:
        for t_stat in POOL_STATS:
            for s_stat in POOL_STATS:
                series = [pools[(s_stat, name)] for pools in per_frame]
                out[f"{t_stat}({s_stat}({name}))"] = pool(series, t_stat)
    return out


def scene_feature_pools(sc: SceneComplexity) -> dict[str, float]:
    """Temporal pools of the per-frame scene-complexity series (35 values)."""
    out = {}
    for name in SCENE_FEATURE_NAMES:
        series = sc.series(name)
        for stat in POOL_STATS:
            out[f"{stat}({name})"] = pool(series, stat)
    return out


def bitstream_feature_pools(bs: BitstreamSeries) -> dict[str, float]:
    """Temporal pools of the bitstream series plus the scalar fields."""
    out = {}
    for name in _BITSTREAM_SERIES:
        series = bs.series(name)
        for stat in POOL_STATS:
            out[f"{stat}({name})"] = pool(series, stat)
    out["framerate"] = bs.framerate
    out["bitrate_kbps"] = bs.bitrate_kbps
    return out


def candidate_features(
    sc: SceneComplexity,
    bitstream: BitstreamSeries,
    glcm_pools: dict[str, float],
) -> dict[str, float]:
    """The full named candidate pool the selection stage draws from."""
    if bitstream.frame_count != sc.frame_count:
        raise SchemaError(
            f"bitstream series has {bitstream.frame_count} frames, "
            f"scene has {sc.frame_count}"
        )
    merged = scene_feature_pools(sc)
    merged.update(bitstream_feature_pools(bitstream))
    merged.update(glcm_pools)
    return merged


@dataclass(frozen=True)
class JndFeatureVector:
    """Ordered, named feature values feeding the JND threshold predictor."""

    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise ValueError("names and values length mismatch")

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.values)}


def assemble_jnd_vector(
    sc: SceneComplexity,
    bitstream: BitstreamSeries,
    glcm_pools: dict[str, float],
    selection: tuple[str, ...] = JND_FEATURE_NAMES,
) -> JndFeatureVector:
    """Pick the named features, in selection order, from the candidate pool."""
    pool_map = candidate_features(sc, bitstream, glcm_pools)
    values = np.empty(len(selection), dtype=np.float64)
    for i, name in enumerate(selection):
        if name not in pool_map:
            raise SchemaError(f"selected feature {name!r} not found in sources")
        values[i] = pool_map[name]
    return JndFeatureVector(names=tuple(selection), values=values)


def jnd_vector_to_dict(
    vec: JndFeatureVector,
    scene_id: str,
    patch_size: int,
    offset: tuple[int, int],
    levels: int,
) -> dict:
    """JSON-ready JND-features payload (schema: jnd-features/1)."""
    return {
        "schema_version": 1,
        "kind": "jnd-features",
        "scene_id": scene_id,
        "features": vec.as_dict(),
        "provenance": {
            "patch_size": patch_size,
            "glcm_offset": list(offset),
            "glcm_levels": levels,
            "pooling": "mean/std/max/skew/kurt; population moments; "
            "zero-variance skew/kurt := 0; zero-variance correlation := 1",
        },
    }


def jnd_vector_from_dict(doc: dict) -> JndFeatureVector:
    if doc.get("kind") != "jnd-features":
        raise SchemaError("not a jnd-features file")
    if doc.get("schema_version") != 1:
        raise SchemaError(
            f"unsupported jnd-features schema version {doc.get('schema_version')!r}"
        )
    feats = doc.get("features")
    if not isinstance(feats, dict) or not feats:
        raise SchemaError("jnd-features file has no features block")
    names = tuple(feats.keys())
    values = np.asarray([float(feats[n]) for n in names])
    return JndFeatureVector(names=names, values=values)
