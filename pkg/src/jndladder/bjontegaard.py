"""Bjøntegaard-delta metrics and the ladder storage delta.

Classic cubic-polynomial variant: log10(bitrate) is fitted as a cubic in
quality (BD-rate) or quality as a cubic in log10(bitrate) (BD-quality) and
both fits are integrated over the overlapping range. Empty overlap is an
error rather than an extrapolation.
"""

import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError

VMAF_SATURATION = 99.95


@dataclass(frozen=True)
class RDPoint:
    bitrate_kbps: float
    quality: float

    def __post_init__(self):
        if self.bitrate_kbps <= 0:
            raise ValueError("bitrate must be strictly positive")


@dataclass(frozen=True)
class RDCurve:
    metric_kind: str  # "vmaf" or "psnr"
    points: tuple[RDPoint, ...]

    def __post_init__(self):
        if self.metric_kind not in ("vmaf", "psnr"):
            raise ValueError(f"unknown metric kind {self.metric_kind!r}")
        rates = [p.bitrate_kbps for p in self.points]
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ValueError("bitrates must be strictly increasing")
        quals = [p.quality for p in self.points]
        if any(b < a for a, b in zip(quals, quals[1:])):
            warnings.warn(
                "RD curve quality is not non-decreasing in bitrate",
                stacklevel=2,
            )

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.array([p.bitrate_kbps for p in self.points]),
            np.array([p.quality for p in self.points]),
        )


def _fit_arrays(curve: RDCurve) -> tuple[np.ndarray, np.ndarray]:
    """(quality, log10 bitrate) used for fitting, saturation-trimmed."""
    rates, quals = curve.arrays()
    if curve.metric_kind == "vmaf":
        saturated = quals >= VMAF_SATURATION
        if saturated.sum() > 1:
            first = int(np.argmax(saturated))
            keep = ~saturated
            keep[first] = True
            dropped = int((~keep).sum())
            warnings.warn(
                f"dropped {dropped} saturated VMAF points (>= {VMAF_SATURATION}) "
                "before fitting",
                stacklevel=3,
            )
            rates, quals = rates[keep], quals[keep]
    if len(rates) < 4:
        raise ValueError(
            f"need at least 4 usable RD points, got {len(rates)}"
        )
    return quals, np.log10(rates)


def _poly_mean(coeffs: np.ndarray, lo: float, hi: float) -> float:
    anti = np.polyint(coeffs)
    return (np.polyval(anti, hi) - np.polyval(anti, lo)) / (hi - lo)


def bd_rate(reference: RDCurve, test: RDCurve) -> float:
    """Average bitrate change (percent) of test vs reference at equal quality."""
    q_ref, lr_ref = _fit_arrays(reference)
    q_test, lr_test = _fit_arrays(test)
    lo = max(q_ref.min(), q_test.min())
    hi = min(q_ref.max(), q_test.max())
    if hi <= lo:
        raise ValueError("quality ranges do not overlap")
    fit_ref = np.polyfit(q_ref, lr_ref, 3)
    fit_test = np.polyfit(q_test, lr_test, 3)
    avg_diff = _poly_mean(fit_test, lo, hi) - _poly_mean(fit_ref, lo, hi)
    return float((10.0**avg_diff - 1.0) * 100.0)


def bd_quality(reference: RDCurve, test: RDCurve) -> float:
    """Average quality change of test vs reference at equal bitrate."""
    q_ref, lr_ref = _fit_arrays(reference)
    q_test, lr_test = _fit_arrays(test)
    lo = max(lr_ref.min(), lr_test.min())
    hi = min(lr_ref.max(), lr_test.max())
    if hi <= lo:
        raise ValueError("bitrate ranges do not overlap")
    fit_ref = np.polyfit(lr_ref, q_ref, 3)
    fit_test = np.polyfit(lr_test, q_test, 3)
    return float(_poly_mean(fit_test, lo, hi) - _poly_mean(fit_ref, lo, hi))


def storage_delta(reference_bitrates, optimized_bitrates) -> float:
    """Relative change of total representation bitrate: sum(opt)/sum(ref) - 1."""
    ref = float(np.sum(np.asarray(reference_bitrates, dtype=np.float64)))
    opt = float(np.sum(np.asarray(optimized_bitrates, dtype=np.float64)))
    if ref <= 0:
        raise ValueError("reference bitrate sum must be positive")
    return opt / ref - 1.0


RD_CSV_COLUMNS = ("scene_id", "ladder_name", "resolution", "bitrate_kbps", "psnr_db", "vmaf")


def read_rd_csv(text: str) -> dict[str, list[dict]]:
    """Measured RD rows grouped by scene, schema-checked with row numbers.

    Columns: scene_id, ladder_name, resolution, bitrate_kbps, psnr_db, vmaf.
    """
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise SchemaError("RD CSV is empty")
    missing = set(RD_CSV_COLUMNS) - set(reader.fieldnames)
    if missing:
        raise SchemaError(f"RD CSV is missing columns {sorted(missing)}")
    scenes: dict[str, list[dict]] = {}
    for i, row in enumerate(reader, start=2):
        try:
            rec = {
                "scene_id": row["scene_id"],
                "ladder_name": row["ladder_name"],
                "resolution": row["resolution"],
                "bitrate_kbps": float(row["bitrate_kbps"]),
                "psnr_db": float(row["psnr_db"]),
                "vmaf": float(row["vmaf"]),
            }
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"RD CSV row {i}: {exc}")
        scenes.setdefault(rec["scene_id"], []).append(rec)
    if not scenes:
        raise SchemaError("RD CSV has no data rows")
    return scenes


def curve_from_rows(rows: list[dict], metric: str) -> RDCurve:
    """RD curve over a scene's rows, sorted by bitrate."""
    column = {"vmaf": "vmaf", "psnr": "psnr_db"}[metric]
    ordered = sorted(rows, key=lambda r: r["bitrate_kbps"])
    points = tuple(
        RDPoint(bitrate_kbps=r["bitrate_kbps"], quality=r[column]) for r in ordered
    )
    return RDCurve(metric_kind=metric, points=points)
