"""Layered configuration: defaults < config file < command-line flags.

The config file format is flat `key=value` lines ('#' starts a comment).
Unknown keys are rejected by name.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Dict, Optional

from .errors import ConfigError


@dataclass
class Config:
    # model shape
    d: int = 256
    L: int = 256
    R: int = 5
    H: int = 4
    B: int = 2
    d_ff: int = 512
    # retrieval
    ngram_n: int = 5
    buckets: int = 1 << 20
    context_k: int = 64
    # optimization
    gamma: float = 0.5
    lr: float = 1e-4
    epochs: int = 1
    batch: int = 32
    seed: int = 0
    loss: str = "margin"                 # margin | bce
    # scoring
    measure: str = "late_interaction"    # late_interaction | cosine | euclidean
    symmetrize: bool = True
    tau: Optional[float] = None
    # ablations / switches
    enhancer_mode: str = "full"          # full | attention_only | off
    freeze_embeddings: bool = False
    dtype: str = "float32"

    def validate(self) -> "Config":
        if self.gamma <= 0:
            raise ConfigError("gamma must be > 0")
        if self.batch < 1:
            raise ConfigError("batch must be >= 1")
        if self.d % self.H != 0:
            raise ConfigError(f"H={self.H} must divide d={self.d}")
        if self.loss not in ("margin", "bce"):
            raise ConfigError(f"unknown loss {self.loss!r}")
        if self.measure not in ("late_interaction", "cosine", "euclidean"):
            raise ConfigError(f"unknown measure {self.measure!r}")
        if self.enhancer_mode not in ("full", "attention_only", "off"):
            raise ConfigError(f"unknown enhancer_mode {self.enhancer_mode!r}")
        if self.dtype not in ("float32", "float64"):
            raise ConfigError(f"unknown dtype {self.dtype!r}")
        if self.R < 1 or self.L < 1:
            raise ConfigError("R and L must be >= 1")
        return self

    def to_dict(self) -> Dict:
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(Config)}
_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(key: str, raw: str):
    ftype = _FIELD_TYPES[key]
    if key == "tau":
        return None if raw.lower() in ("none", "") else float(raw)
    if ftype in ("int", int):
        return int(raw)
    if ftype in ("float", float):
        return float(raw)
    if ftype in ("bool", bool):
        low = raw.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ConfigError(f"cannot parse boolean {key}={raw!r}")
    return raw


def parse_config_file(path: str) -> Dict:
    values: Dict = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, raw = line.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown configuration key {key!r}")
            values[key] = _coerce(key, raw)
    return values


def resolve_config(file_path: Optional[str] = None,
                   flag_values: Optional[Dict] = None) -> Config:
    """Last-writer-wins layering: defaults, then file, then explicit flags."""
    cfg = Config()
    if file_path:
        for key, value in parse_config_file(file_path).items():
            setattr(cfg, key, value)
    for key, value in (flag_values or {}).items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown configuration key {key!r}")
        setattr(cfg, key, value)
    return cfg.validate()
