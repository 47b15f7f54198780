"""The five pooling statistics: mean, std, max, skew, kurt.

Population conventions throughout (divide by n, biased moments): pooling
describes the realized series, not a sample estimate. Zero-variance series
get skew = kurt = 0 so every pooled value stays finite.
"""

import numpy as np

POOL_STATS = ("mean", "std", "max", "skew", "kurt")


def pool(series, stat: str) -> float:
    """One pooling statistic of a non-empty series."""
    x = np.asarray(series, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot pool an empty series")
    if stat == "mean":
        return float(np.mean(x))
    if stat == "max":
        return float(np.max(x))
    if stat not in ("std", "skew", "kurt"):
        raise ValueError(f"unknown pooling stat {stat!r}")
    if np.min(x) == np.max(x):
        return 0.0
    dev = x - np.mean(x)
    m2 = float(np.mean(dev * dev))
    if stat == "std":
        return float(np.sqrt(m2))
    if m2 == 0.0:
        return 0.0
    if stat == "skew":
        m3 = float(np.mean(dev**3))
        return m3 / m2**1.5
    m4 = float(np.mean(dev**4))
    return m4 / (m2 * m2) - 3.0


def pool_all(series) -> dict[str, float]:
    """All five statistics of one series."""
    return {stat: pool(series, stat) for stat in POOL_STATS}
