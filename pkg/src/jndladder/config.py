"""Pipeline configuration: defaults, JSON config files, flag overrides."""

import hashlib
import json
from dataclasses import dataclass, replace

from .errors import ConfigError
from .ladder import HLS_BITRATES_KBPS, HLS_RESOLUTIONS, LadderConfig


@dataclass(frozen=True)
class PipelineConfig:
    resolutions: tuple[str, ...] = HLS_RESOLUTIONS
    bitrates_kbps: tuple[float, ...] = HLS_BITRATES_KBPS
    crf_min: float = 0.0
    crf_max: float = 51.0
    block_size: int = 32
    patch_size: int = 64
    glcm_offset: tuple[int, int] = (0, 1)
    glcm_levels: int | None = None  # None: 2^bit_depth of the input
    seed: int = 0
    models_dir: str | None = None
    jnd_model: str | None = None

    def validate(self) -> "PipelineConfig":
        self.ladder_config()  # raises ConfigError on bad R/B/CRF values
        if self.block_size < 4:
            raise ConfigError("block_size must be >= 4")
        if self.patch_size < 2:
            raise ConfigError("patch_size must be >= 2")
        if len(self.glcm_offset) != 2 or self.glcm_offset == (0, 0):
            raise ConfigError("glcm_offset must be a non-zero (dy, dx) pair")
        if self.glcm_levels is not None and self.glcm_levels < 2:
            raise ConfigError("glcm_levels must be >= 2")
        return self

    def ladder_config(self) -> LadderConfig:
        return LadderConfig(
            resolutions=tuple(self.resolutions),
            bitrates_kbps=tuple(float(b) for b in self.bitrates_kbps),
            crf_min=self.crf_min,
            crf_max=self.crf_max,
        )

    def to_dict(self) -> dict:
        return {
            "resolutions": list(self.resolutions),
            "bitrates_kbps": list(self.bitrates_kbps),
            "crf_min": self.crf_min,
            "crf_max": self.crf_max,
            "block_size": self.block_size,
            "patch_size": self.patch_size,
            "glcm_offset": list(self.glcm_offset),
            "glcm_levels": self.glcm_levels,
            "seed": self.seed,
            "models_dir": self.models_dir,
            "jnd_model": self.jnd_model,
        }


_CONFIG_KEYS = set(PipelineConfig().to_dict())


def config_from_dict(doc: dict) -> PipelineConfig:
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    kwargs = dict(doc)
    for key in ("resolutions", "bitrates_kbps", "glcm_offset"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    try:
        cfg = PipelineConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}")
    return cfg.validate()


def load_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig().validate()
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return config_from_dict(doc)


def override(cfg: PipelineConfig, **kwargs) -> PipelineConfig:
    """Apply non-None flag overrides and re-validate."""
    changes = {k: v for k, v in kwargs.items() if v is not None}
    if not changes:
        return cfg
    for key in ("resolutions", "bitrates_kbps", "glcm_offset"):
        if key in changes:
            changes[key] = tuple(changes[key])
    return replace(cfg, **changes).validate()


def config_hash(cfg: PipelineConfig) -> str:
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
