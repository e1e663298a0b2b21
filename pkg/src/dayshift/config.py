"""Pipeline configuration: a single YAML document, strictly validated."""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import yaml

from .detector.anchors import desk_layout, full_300_layout
from .errors import ConfigError

LAYOUT_PRESETS = {"desk": desk_layout, "full300": full_300_layout}


@dataclass
class TranslationConfig:
    n_blocks: int = 6
    ngf: int = 64
    ndf: int = 64
    lambda_cyc: float = 10.0
    lr: float = 2e-4
    batch_size: int = 1
    steps: int = 300
    seed: int = 0
    load_size: int = 286
    crop_size: int = 256

    def validate(self):
        if self.n_blocks < 1:
            raise ConfigError("translation.n_blocks must be >= 1")
        if self.crop_size % 4 or self.crop_size > self.load_size:
            raise ConfigError("translation.crop_size must divide by 4 and fit the load size")
        if self.lr <= 0 or self.lambda_cyc < 0 or self.batch_size < 1 or self.steps < 0:
            raise ConfigError("translation hyperparameters out of range")


@dataclass
class DetectorConfig:
    layout: str = "desk"
    input_size: int = 128
    base_channels: int = 16
    phi: float = 1.0
    lr: float = 1e-3
    steps: int = 500
    seed: int = 0
    match_threshold: float = 0.5
    nms_iou: float = 0.45
    score_threshold: float = 0.01
    overlay_score_threshold: float = 0.5
    top_k: int = 200

    def validate(self):
        if self.layout not in LAYOUT_PRESETS:
            raise ConfigError(
                f"detector.layout must be one of {sorted(LAYOUT_PRESETS)}, got {self.layout!r}"
            )
        if self.phi <= 0:
            raise ConfigError("detector.phi must be positive")
        if not (0 < self.match_threshold < 1):
            raise ConfigError("detector.match_threshold must be in (0, 1)")
        if not (0 < self.nms_iou < 1) or not (0 < self.score_threshold < 1):
            raise ConfigError("detector NMS thresholds must be in (0, 1)")
        if self.lr <= 0 or self.steps < 0 or self.top_k < 1:
            raise ConfigError("detector hyperparameters out of range")

    def build_layout(self):
        return LAYOUT_PRESETS[self.layout]()


@dataclass
class MetricsConfig:
    iou_threshold: float = 0.5
    tau: float = 0.5

    def validate(self):
        if not (0 < self.iou_threshold < 1):
            raise ConfigError("metrics.iou_threshold must be in (0, 1)")
        if not (0 < self.tau < 1):
            raise ConfigError("metrics.tau must be in (0, 1)")


@dataclass
class PathsConfig:
    night_dir: str = ""
    day_dir: str = ""
    correspondence_file: Optional[str] = None
    manifest: str = ""
    output_dir: str = "out"

    def validate(self):
        pass


@dataclass
class PipelineConfig:
    translation: TranslationConfig = field(default_factory=TranslationConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)

    def validate(self):
        self.translation.validate()
        self.detector.validate()
        self.metrics.validate()
        self.paths.validate()


def _build_section(cls, raw, section):
    known = {f.name: f for f in fields(cls)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown key {section}.{key}")
    obj = cls(**{name: raw[name] for name in known if name in raw})
    # type-check provided values against the defaults' types
    defaults = cls()
    for name in raw:
        value = getattr(obj, name)
        default = getattr(defaults, name)
        if value is None and default is None:
            continue
        if isinstance(default, bool) or isinstance(value, bool):
            raise ConfigError(f"{section}.{name}: wrong type {type(value).__name__}")
        if isinstance(default, int):
            if not isinstance(value, int):
                raise ConfigError(f"{section}.{name}: expected integer, got {value!r}")
        elif isinstance(default, float):
            if not isinstance(value, (int, float)):
                raise ConfigError(f"{section}.{name}: expected number, got {value!r}")
            setattr(obj, name, float(value))
        elif not isinstance(value, str):
            raise ConfigError(f"{section}.{name}: expected string, got {value!r}")
    return obj


def load_config(path):
    """Parse and validate a YAML config file; unknown keys are errors."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    sections = {
        "translation": TranslationConfig,
        "detector": DetectorConfig,
        "metrics": MetricsConfig,
        "paths": PathsConfig,
    }
    for key in raw:
        if key not in sections:
            raise ConfigError(f"unknown section {key!r}")
    config = PipelineConfig(**{
        name: _build_section(cls, raw.get(name, {}) or {}, name)
        for name, cls in sections.items()
    })
    config.validate()
    return config


def digest(config):
    """Stable hex digest of the normalized config (key order independent)."""
    canonical = json.dumps(asdict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
