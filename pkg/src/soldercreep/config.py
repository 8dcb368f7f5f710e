"""Experiment configuration: a flat ``key = value`` text format.

Keys are dotted (``mlp.batch_size = 512``), ``#`` starts a comment, lists
are comma separated. Unknown keys are errors so typos fail loudly.
"""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field, fields, replace

from .creepsim import CreepMaterial, JointGeometry
from .exceptions import ConfigError, InputValidationError
from .neuralnet.training import LstmConfig, MlpConfig
from .profilegen import ProfileSpec

CONFIG_VERSION = 1
DEFAULT_FRACTIONS = (0.03125, 0.0625, 0.125, 0.25, 0.5, 1.0)
DEFAULT_SEQ_LENGTHS = (10.0, 41.0, 100.0, 165.0, 330.0)


@dataclass(frozen=True)
class DatasetConfig:
    fractions: tuple = DEFAULT_FRACTIONS
    test_fraction: float = 0.2
    validation_fraction: float = 0.2

    def __post_init__(self):
        fr = tuple(float(f) for f in self.fractions)
        if not fr:
            raise InputValidationError("dataset.fractions is empty")
        if any(not 0.0 < f <= 1.0 for f in fr):
            raise InputValidationError("dataset.fractions must lie in (0, 1]")
        if list(fr) != sorted(fr):
            raise InputValidationError("dataset.fractions must be sorted ascending")
        object.__setattr__(self, "fractions", fr)
        for name in ("test_fraction", "validation_fraction"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise InputValidationError(f"dataset.{name} must lie in (0, 1)")


@dataclass(frozen=True)
class SimulationConfig:
    dt_s: float = 1.0

    def __post_init__(self):
        if not self.dt_s > 0:
            raise InputValidationError("simulation.dt_s must be positive")


@dataclass(frozen=True)
class SweepConfig:
    seq_lengths: tuple = DEFAULT_SEQ_LENGTHS

    def __post_init__(self):
        sl = tuple(float(s) for s in self.seq_lengths)
        if not sl or any(s <= 0 for s in sl):
            raise InputValidationError("sweep.seq_lengths must be positive")
        object.__setattr__(self, "seq_lengths", sl)


@dataclass(frozen=True)
class ExperimentConfig:
    config_version: int = CONFIG_VERSION
    seed: int = 0
    out_dir: str = "runs/default"
    profile: ProfileSpec = field(default_factory=ProfileSpec)
    material: CreepMaterial = field(default_factory=CreepMaterial)
    geometry: JointGeometry = field(default_factory=JointGeometry)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    mlp: MlpConfig = field(default_factory=MlpConfig)
    lstm: LstmConfig = field(default_factory=LstmConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def __post_init__(self):
        if self.config_version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config_version {self.config_version}")

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Override the master seed; child seeds follow from it."""
        return replace(self, seed=int(seed))

    def child_seed(self, purpose: str) -> int:
        return derive_seed(self.seed, purpose)

    def profile_spec(self) -> ProfileSpec:
        return replace(self.profile, seed=self.child_seed("profile"))

    def model_config(self, kind: str, purpose: str):
        """MLP or LSTM config with a seed derived for ``purpose``."""
        if kind not in ("mlp", "lstm"):
            raise ConfigError(f"unknown model kind {kind!r}")
        return replace(getattr(self, kind), seed=self.child_seed(f"{kind}:{purpose}"))

    def fingerprint(self) -> str:
        """Hash of everything that shapes results (the output directory does not)."""
        return hashlib.sha256(dumps(replace(self, out_dir="")).encode()).hexdigest()[:16]


_SECTIONS = ("profile", "material", "geometry", "simulation", "dataset", "mlp", "lstm", "sweep")
_TOP = ("config_version", "seed", "out_dir")


def derive_seed(master: int, purpose: str) -> int:
    """Child seed from (master, purpose); independent of any other purpose."""
    digest = hashlib.sha256(f"{int(master)}:{purpose}".encode()).digest()
    return int.from_bytes(digest[:4], "little")


def _section_fields(obj):
    # per-section seeds are derived from the master seed, never configured
    return [f for f in fields(obj) if f.name != "seed"]


def _format(value) -> str:
    if isinstance(value, (tuple, list)):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _coerce(raw: str, default, key: str):
    try:
        if isinstance(default, bool):
            if raw.lower() not in ("true", "false"):
                raise ValueError(raw)
            return raw.lower() == "true"
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(float(p) for p in raw.split(",") if p.strip())
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None


def dumps(cfg: ExperimentConfig) -> str:
    lines = ["# soldercreep experiment configuration"]
    for name in _TOP:
        lines.append(f"{name} = {_format(getattr(cfg, name))}")
    for section in _SECTIONS:
        lines.append("")
        sub = getattr(cfg, section)
        for f in _section_fields(sub):
            lines.append(f"{section}.{f.name} = {_format(getattr(sub, f.name))}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> ExperimentConfig:
    """Parse config text; missing keys keep their defaults."""
    base = ExperimentConfig()
    top, nested = {}, {s: {} for s in _SECTIONS}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (p.strip() for p in line.split("=", 1))
        if key in _TOP:
            top[key] = _coerce(raw, getattr(base, key), key)
            continue
        section, _, name = key.partition(".")
        if section not in nested:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        defaults = getattr(base, section)
        if name not in {f.name for f in _section_fields(defaults)}:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        nested[section][name] = _coerce(raw, getattr(defaults, name), key)
    try:
        parts = {s: replace(getattr(base, s), **nested[s]) for s in _SECTIONS}
        return ExperimentConfig(**top, **parts)
    except (InputValidationError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def load(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def as_dict(cfg: ExperimentConfig) -> dict:
    return dataclasses.asdict(cfg)
