"""Decode configuration: hyperparameters, mode table, and key=value file I/O."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import BiasdecError

MODES = ("greedy", "base", "base_lm", "wb", "wb_ctx", "full")

# Ablation aliases accepted wherever a mode name is: decode as `full` with
# one parameter overridden.
ABLATIONS = {
    "full_c1": ("C", 1.0),
    "full_sigma0": ("sigma", 0.0),
}


@dataclass(frozen=True)
class DecodeConfig:
    """Beam-search hyperparameters.

    Defaults are the tuned operating point of the full decoder; the
    baseline modes replace some of them (see :func:`baseline_config`).
    """

    N: int = 100            # beam width
    C: float = 0.991        # cumulative-mass sampling threshold
    lam: float = 1.424      # unigram bias scale (config key: lambda)
    delta: float = 10.33    # OOV penalty, log space
    gamma: float = 13.31    # OOV bias boost, log space
    alpha: float = 0.788    # LM weight
    beta: float = 0.119     # word-count bonus
    sigma: float = 10.91    # rescoring-likelihood scale
    K: float = 24.0         # prunable-swap percentage of N
    mode: str = "full"
    lm_boundaries: bool = False  # score <s>/</s> around the utterance

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.N < 1:
            raise BiasdecError(f"beam width N must be >= 1, got {self.N}")
        if not (0.0 < self.C <= 1.0):
            raise BiasdecError(f"sampling threshold C must be in (0, 1], got {self.C}")
        for name in ("lam", "delta", "gamma", "sigma"):
            value = getattr(self, name)
            if value < 0.0:
                raise BiasdecError(f"{name} must be >= 0, got {value}")
        if not (0.0 <= self.K <= 100.0):
            raise BiasdecError(f"K must be a percentage in [0, 100], got {self.K}")
        if self.mode not in MODES:
            raise BiasdecError(f"unknown mode {self.mode!r} (expected one of {MODES})")

    def effective(self) -> "DecodeConfig":
        """Apply the mode table: simpler modes neutralize the fields they ignore."""
        cfg = self
        if cfg.mode == "base":
            cfg = replace(cfg, alpha=0.0, beta=0.0, lam=0.0, gamma=0.0,
                          delta=0.0, sigma=0.0, K=0.0, C=1.0)
        elif cfg.mode == "base_lm":
            cfg = replace(cfg, lam=0.0, gamma=0.0, delta=0.0, sigma=0.0, K=0.0)
        elif cfg.mode == "wb":
            # fixed-boost word biasing on a standard beam: no lookahead swap
            cfg = replace(cfg, lam=0.0, delta=0.0, sigma=0.0, K=0.0)
        elif cfg.mode == "wb_ctx":
            cfg = replace(cfg, delta=0.0, sigma=0.0, K=0.0)
        return cfg


# key used in config files / CLI for the `lam` field
_FILE_KEYS = {"lam": "lambda"}
_FIELD_BY_KEY = {
    _FILE_KEYS.get(f.name, f.name): f.name for f in fields(DecodeConfig)
}


def resolve_mode(name: str) -> tuple[str, dict]:
    """Map a mode or ablation name onto (real mode, parameter overrides)."""
    if name in ABLATIONS:
        key, value = ABLATIONS[name]
        return "full", {key: value}
    if name not in MODES:
        raise BiasdecError(f"unknown mode {name!r}")
    return name, {}


def baseline_config(name: str) -> DecodeConfig:
    """Tuned per-mode configuration used by the experiment runner.

    The simpler decoders run without the sampling function (C=1); their
    scoring weights come from a per-mode optimization.
    """
    mode, overrides = resolve_mode(name)
    if mode == "base" or mode == "greedy":
        cfg = DecodeConfig(mode=mode, C=1.0)
    elif mode == "base_lm":
        cfg = DecodeConfig(mode=mode, C=1.0, alpha=0.105, beta=0.497)
    elif mode == "wb":
        cfg = DecodeConfig(mode=mode, C=1.0, gamma=7.09, alpha=0.29, beta=0.695)
    elif mode == "wb_ctx":
        cfg = DecodeConfig(mode=mode, C=1.0, gamma=2.697, alpha=0.3521,
                           beta=0.789, lam=1.24)
    else:
        cfg = DecodeConfig(mode="full")
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def load_config(path) -> DecodeConfig:
    """Parse a flat key=value config file."""
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise BiasdecError(f"config line {line_no}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _FIELD_BY_KEY:
                raise BiasdecError(f"config line {line_no}: unknown key {key!r}")
            values[_FIELD_BY_KEY[key]] = _parse_value(key, value)
    return DecodeConfig(**values)


def save_config(cfg: DecodeConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_config(cfg))


def format_config(cfg: DecodeConfig) -> str:
    lines = []
    for f in fields(DecodeConfig):
        key = _FILE_KEYS.get(f.name, f.name)
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def _parse_value(key: str, value: str):
    if key == "mode":
        return value
    if key == "lm_boundaries":
        if value.lower() in ("true", "1", "yes"):
            return True
        if value.lower() in ("false", "0", "no"):
            return False
        raise BiasdecError(f"config key {key}: expected a boolean, got {value!r}")
    if key == "N":
        return int(value)
    return float(value)
