"""
run_config.py

RunConfig: the parameters of one hyperlattice command. Values come from, in
increasing precedence, the defaults below, the file named by the
HYPERLATTICE_CONFIG environment variable, a --config file, and command line
flags. Config files are flat `key = value` lines; `#` starts a comment.
"""

import logging
import math
import os
from dataclasses import dataclass, fields, replace
from typing import Optional, Tuple

from errors import DomainError

logger = logging.getLogger(__name__)

# ─── CONFIG ────────────────────────────────────────────────────────────────────
ENV_VAR   = "HYPERLATTICE_CONFIG"
COMMANDS  = ("admissibility", "verdict", "identity-suite", "tile", "finite-demo",
             "covolume", "periodization", "sweep")
FORMATS   = ("text", "json", "xlsx")


@dataclass(frozen=True)
class RunConfig:
    command: str = "admissibility"
    alpha: float = 2.0
    n: int = 0
    group: str = "modular"
    q: Optional[int] = None
    covolume: Optional[float] = None
    word_length: int = 8
    cusp_height: float = 10.0
    nodes_a: Optional[int] = None
    nodes_b: Optional[int] = None
    nodes_theta: Optional[int] = None
    nodes_freq: Optional[int] = None
    panel_nodes: Optional[int] = None
    out: Optional[str] = None
    format: str = "text"
    seed: int = 0
    samples: int = 0
    points: Tuple[complex, ...] = ()
    svg: Optional[str] = None
    N: int = 8
    K: Optional[int] = None
    selection: Optional[str] = None
    tolerance: Optional[float] = None
    corrupt_window: bool = False
    alphas: Tuple[float, ...] = (0.5, 1.0, 1.5, 2.0, 3.0, 4.0)
    groups: Tuple[str, ...] = ("modular", "hecke:4", "hecke:5", "hecke:6")
    canonical: bool = False
    verbose: bool = False

    # ─── text form ────────────────────────────────────────────────────────────
    @classmethod
    def from_text(cls, text, base=None):
        """Apply the key = value pairs in `text` on top of `base` (defaults)."""
        return (base or cls()).updated(parse_pairs(text))

    @classmethod
    def from_file(cls, path, base=None):
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise DomainError(f"cannot read config file {path}: {exc}")
        logger.info("Loaded config file %s", path)
        return cls.from_text(text, base)

    def to_text(self):
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            lines.append(f"{f.name} = {_format_value(value)}")
        return "\n".join(lines) + "\n"

    def updated(self, pairs):
        """Copy with string or typed values for the named fields."""
        known = {f.name: f for f in fields(self)}
        changes = {}
        for raw_key, value in pairs.items():
            key = raw_key.replace("-", "_")
            if key not in known:
                raise DomainError(f"unknown config key {raw_key!r}")
            changes[key] = _coerce(key, value, known[key].default)
        return replace(self, **changes)

    # ─── checks ───────────────────────────────────────────────────────────────
    def validate(self):
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise DomainError(f"format must be one of {', '.join(FORMATS)}, got {self.format!r}")
        if self.format == "xlsx" and not self.out:
            raise DomainError("xlsx output needs --out")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be positive, got {self.alpha!r}")
        if self.n < 0:
            raise DomainError(f"n must be >= 0, got {self.n!r}")
        if self.word_length < 0:
            raise DomainError(f"word length must be >= 0, got {self.word_length!r}")
        if not self.cusp_height > 1:
            raise DomainError(f"cusp height must exceed 1, got {self.cusp_height!r}")
        for name in ("nodes_a", "nodes_b", "nodes_theta", "nodes_freq"):
            value = getattr(self, name)
            if value is not None and value < 2:
                raise DomainError(f"{name} must be >= 2, got {value!r}")
        if self.panel_nodes is not None and self.panel_nodes < 1:
            raise DomainError(f"panel_nodes must be >= 1, got {self.panel_nodes!r}")
        if self.covolume is not None and not self.covolume > 0:
            raise DomainError(f"covolume must be positive, got {self.covolume!r}")
        if self.command == "finite-demo":
            if self.N < 2:
                raise DomainError(f"N must be >= 2, got {self.N!r}")
            if self.K is not None and not 1 <= self.K <= self.N ** 2:
                raise DomainError(f"K must lie in 1..N^2, got {self.K!r}")
        if self.samples < 0:
            raise DomainError(f"samples must be >= 0, got {self.samples!r}")
        if self.tolerance is not None and self.tolerance < 0:
            raise DomainError(f"tolerance must be >= 0, got {self.tolerance!r}")
        if any(not a > 0 for a in self.alphas):
            raise DomainError("sweep alphas must be positive")
        return self


def load_config(overrides, config_path=None, environ=None):
    """Defaults < $HYPERLATTICE_CONFIG < config_path < overrides."""
    environ = os.environ if environ is None else environ
    cfg = RunConfig()
    env_path = environ.get(ENV_VAR)
    if env_path:
        cfg = RunConfig.from_file(env_path, cfg)
    if config_path:
        cfg = RunConfig.from_file(config_path, cfg)
    return cfg.updated(overrides)


def parse_pairs(text):
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise DomainError(f"config line {lineno} is not key = value: {line!r}")
        pairs[key.strip()] = value.strip()
    return pairs


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, complex):
        return repr(value).strip("()")
    return str(value)


def _coerce(key, value, default):
    if not isinstance(value, str):
        return tuple(value) if isinstance(value, list) else value
    text = value.strip()
    if text.lower() in ("", "none") and default is None:
        return None
    try:
        if key in ("alphas",):
            return tuple(float(v) for v in _split(text))
        if key in ("groups",):
            return tuple(_split(text))
        if key in ("points",):
            return tuple(complex(v.replace(" ", "")) for v in _split(text))
        if isinstance(default, bool):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if key in ("n", "q", "word_length", "nodes_a", "nodes_b", "nodes_theta", "nodes_freq",
                   "panel_nodes", "seed", "samples", "N", "K"):
            return int(text)
        if key in ("alpha", "covolume", "cusp_height", "tolerance"):
            return float(text)
    except ValueError:
        raise DomainError(f"bad value for {key}: {value!r}")
    return text


def _split(text):
    return [v.strip() for v in text.split(",") if v.strip()]
