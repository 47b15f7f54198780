"""Bitrate ladder construction and JND-based representation elimination.

For each target bitrate, VMAF is predicted for every supported resolution
from [E_Y, h, L_Y, ln(bitrate)] and the best resolution picked; a CRF is
then predicted with that resolution's model. Representations past the
first max-resolution entry whose CRF falls below the JND threshold CRF are
eliminated. A measured-data convex-hull oracle provides the ground-truth
resolution choice the predictor is judged against.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, MissingModelError, SchemaError
from .jnd import JndFeatureVector

# Apple HLS authoring-spec ladder, the fixed reference configuration
HLS_RESOLUTIONS = ("360p", "432p", "540p", "720p", "1080p")
HLS_BITRATES_KBPS = (
    145.0,
    300.0,
    600.0,
    900.0,
    1600.0,
    2400.0,
    3400.0,
    4500.0,
    5800.0,
    8100.0,
)
CRF_MIN = 0.0
CRF_MAX = 51.0


def resolution_height(tag: str) -> int:
    """Height in lines of a '<height>p' resolution tag."""
    if not tag.endswith("p"):
        raise ConfigError(f"resolution tag {tag!r} is not of the form '<height>p'")
    try:
        height = int(tag[:-1])
    except ValueError:
        raise ConfigError(f"resolution tag {tag!r} is not of the form '<height>p'")
    if height <= 0:
        raise ConfigError(f"non-positive resolution {tag!r}")
    return height


@dataclass(frozen=True)
class LadderConfig:
    """Supported resolutions (ascending), target bitrates and CRF bounds."""

    resolutions: tuple[str, ...] = HLS_RESOLUTIONS
    bitrates_kbps: tuple[float, ...] = HLS_BITRATES_KBPS
    crf_min: float = CRF_MIN
    crf_max: float = CRF_MAX

    def __post_init__(self):
        if not self.resolutions or not self.bitrates_kbps:
            raise ConfigError("resolutions and bitrates must be non-empty")
        heights = [resolution_height(r) for r in self.resolutions]
        if any(b <= a for a, b in zip(heights, heights[1:])):
            raise ConfigError("resolutions must be strictly ascending by height")
        if any(b <= a for a, b in zip(self.bitrates_kbps, self.bitrates_kbps[1:])):
            raise ConfigError("bitrates must be strictly ascending")
        if any(b <= 0 for b in self.bitrates_kbps):
            raise ConfigError("bitrates must be positive")
        if not (0 <= self.crf_min < self.crf_max):
            raise ConfigError("require 0 <= crf_min < crf_max")

    @property
    def r_max(self) -> str:
        return self.resolutions[-1]

    @property
    def resolution_count(self) -> int:
        return len(self.resolutions)

    @property
    def bitrate_count(self) -> int:
        return len(self.bitrates_kbps)


DEFAULT_LADDER_CONFIG = LadderConfig()


@dataclass(frozen=True)
class LadderEntry:
    resolution: str
    bitrate_kbps: float
    crf: float
    predicted_vmaf: float | None = None
    eliminated: bool = False


@dataclass(frozen=True)
class BitrateLadder:
    scene_id: str
    entries: tuple[LadderEntry, ...]
    jnd_threshold: float | None = None

    def surviving(self) -> tuple[LadderEntry, ...]:
        return tuple(e for e in self.entries if not e.eliminated)


# scene features feeding the predictors, in model input order
PREDICTOR_FEATURES = ("E_Y", "h", "L_Y", "ln_bitrate")


def _model_input(features, bitrate_kbps: float) -> np.ndarray:
    e_y, h, l_y = features
    return np.array([e_y, h, l_y, math.log(bitrate_kbps)], dtype=np.float64)


def predict_vmaf_grid(features, config: LadderConfig, vmaf_models) -> np.ndarray:
    """Predicted VMAF per (resolution, bitrate) cell, clamped to [0, 100].

    features is the (E_Y, h, L_Y) scene triple; vmaf_models maps resolution
    tags to predictors exposing predict([E_Y, h, L_Y, ln_bitrate]).
    """
    grid = np.empty((config.resolution_count, config.bitrate_count))
    for m, tag in enumerate(config.resolutions):
        model = vmaf_models.get(tag)
        if model is None:
            raise MissingModelError(f"no VMAF model for resolution {tag}")
        for t, bitrate in enumerate(config.bitrates_kbps):
            raw = model.predict(_model_input(features, bitrate))
            grid[m, t] = min(max(raw, 0.0), 100.0)
    return grid


def select_resolution(column: np.ndarray, resolutions: tuple[str, ...]) -> str:
    """Resolution with the highest predicted quality; ties pick the lowest."""
    column = np.asarray(column, dtype=np.float64)
    if len(column) != len(resolutions):
        raise ValueError("column length != resolution count")
    return resolutions[int(np.argmax(column))]


def predict_crf(
    features, resolution: str, bitrate_kbps: float, crf_models, config: LadderConfig
) -> float:
    """CRF predicted by the chosen resolution's model, clamped to bounds."""
    model = crf_models.get(resolution)
    if model is None:
        raise MissingModelError(f"no CRF model for resolution {resolution}")
    raw = model.predict(_model_input(features, bitrate_kbps))
    return min(max(raw, config.crf_min), config.crf_max)


def build_ladder(
    features, config: LadderConfig, vmaf_models, crf_models, scene_id: str = ""
) -> BitrateLadder:
    """Per-bitrate resolution and CRF prediction (no elimination applied)."""
    grid = predict_vmaf_grid(features, config, vmaf_models)
    entries = []
    for t, bitrate in enumerate(config.bitrates_kbps):
        resolution = select_resolution(grid[:, t], config.resolutions)
        crf = predict_crf(features, resolution, bitrate, crf_models, config)
        m = config.resolutions.index(resolution)
        entries.append(
            LadderEntry(
                resolution=resolution,
                bitrate_kbps=bitrate,
                crf=crf,
                predicted_vmaf=float(grid[m, t]),
            )
        )
    return BitrateLadder(scene_id=scene_id, entries=tuple(entries))


def predict_jnd_threshold(
    vector: JndFeatureVector, model, config: LadderConfig = DEFAULT_LADDER_CONFIG
) -> float:
    """JND threshold CRF from the feature vector, clamped to the CRF range."""
    if model.feature_names is not None and tuple(model.feature_names) != vector.names:
        raise SchemaError(
            "feature vector does not match the model: "
            f"model wants {list(model.feature_names)}, got {list(vector.names)}"
        )
    raw = model.predict(vector.values)
    return min(max(raw, config.crf_min), config.crf_max)


def eliminate_representations(
    ladder: BitrateLadder, jnd_threshold: float, r_max: str
) -> BitrateLadder:
    """Flag perceptually redundant entries.

    Literal counter semantics: walking entries in ascending bitrate order,
    each (resolution == r_max and crf < threshold) entry increments a flag;
    every entry visited while flag > 1 is eliminated. The first
    threshold-crossing max-resolution entry therefore survives and
    everything from the second crossing onward is dropped.
    """
    flag = 0
    entries = []
    for entry in ladder.entries:
        if entry.resolution == r_max and entry.crf < jnd_threshold:
            flag += 1
        entries.append(replace(entry, eliminated=flag > 1))
    return BitrateLadder(
        scene_id=ladder.scene_id,
        entries=tuple(entries),
        jnd_threshold=jnd_threshold,
    )


@dataclass(frozen=True)
class MeasuredRDPoint:
    resolution: str
    bitrate_kbps: float
    quality: float


def convex_hull_ladder(
    rd_points, bitrates_kbps, resolutions: tuple[str, ...] | None = None
) -> list[tuple[str, float, float]]:
    """Brute-force ladder from measured RD data: best resolution per bitrate.

    Quality at each target bitrate is piecewise-linear interpolation of
    that resolution's measured points; resolutions whose measured range
    does not span the target are skipped for it. Ties pick the lowest
    resolution. Returns (resolution, bitrate, quality) triples.
    """
    by_res: dict[str, list[MeasuredRDPoint]] = {}
    for p in rd_points:
        by_res.setdefault(p.resolution, []).append(p)
    if resolutions is None:
        resolutions = tuple(sorted(by_res, key=resolution_height))
    curves = {}
    for tag in resolutions:
        pts = sorted(by_res.get(tag, []), key=lambda p: p.bitrate_kbps)
        if len(pts) >= 2:
            curves[tag] = (
                np.array([p.bitrate_kbps for p in pts]),
                np.array([p.quality for p in pts]),
            )

    out = []
    for bitrate in bitrates_kbps:
        best = None
        for tag in resolutions:
            if tag not in curves:
                continue
            rates, quals = curves[tag]
            if not (rates[0] <= bitrate <= rates[-1]):
                continue
            q = float(np.interp(bitrate, rates, quals))
            if best is None or q > best[1]:
                best = (tag, q)
        if best is None:
            raise ValueError(
                f"target bitrate {bitrate} kbps is outside every "
                "resolution's measured range"
            )
        out.append((best[0], float(bitrate), best[1]))
    return out


def ladder_to_dict(ladder: BitrateLadder, config: LadderConfig) -> dict:
    """JSON-ready ladder payload (schema: bitrate-ladder/1)."""
    return {
        "schema_version": 1,
        "kind": "bitrate-ladder",
        "scene_id": ladder.scene_id,
        "jnd_threshold_crf": ladder.jnd_threshold,
        "entries": [
            {
                "resolution": e.resolution,
                "bitrate_kbps": e.bitrate_kbps,
                "crf": e.crf,
                "predicted_vmaf": e.predicted_vmaf,
                "eliminated": e.eliminated,
            }
            for e in ladder.entries
        ],
        "config": {
            "resolutions": list(config.resolutions),
            "bitrates_kbps": list(config.bitrates_kbps),
            "crf_min": config.crf_min,
            "crf_max": config.crf_max,
        },
    }


def ladder_to_csv(ladder: BitrateLadder) -> str:
    """One line per entry for pipeline consumption."""
    lines = ["resolution,bitrate_kbps,crf,predicted_vmaf,eliminated"]
    for e in ladder.entries:
        vmaf = "" if e.predicted_vmaf is None else repr(e.predicted_vmaf)
        lines.append(
            f"{e.resolution},{e.bitrate_kbps!r},{e.crf!r},{vmaf},"
            f"{str(e.eliminated).lower()}"
        )
    return "\n".join(lines) + "\n"
