"""Line-oriented experiment configuration.

Format: one ``key = value`` per line, ``#`` starts a comment, blank lines are
ignored. Every key is optional; an empty file gives the canonical parameter
set. Lists are comma separated; complex numbers use Python syntax (``5j``);
``auto`` selects a derived default where one is documented below.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

#: Environment variable naming the default output directory.
OUT_ENV = "ACTIONSCALE_OUT"
DEFAULT_OUT = "actionscale-out"


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


@dataclass(frozen=True)
class ExperimentConfig:
    # drive
    m: float = 1.0
    kappa: float = 0.36
    a_harm: float = 0.01
    l: float = 3.8
    hbar: float = 0.16
    alpha: complex = 5j
    # grid
    n_points: int = 8192
    q_min: float = -128.0
    q_max: float = 128.0
    # propagation
    dt: float = 0.005
    T_list: tuple[float, ...] = (0.0, 10.0, 20.0, 500.0)
    checkpoint_T: tuple[float, ...] | None = None
    fig1_log_points: int = 25
    fig1_log_min: float = 1.0
    # scan
    ratio: float = 6.8
    n_samples: int = 40
    dp_max: float | None = None
    target: float = 0.5
    ds_max_hbar: float = 6.0
    husimi_lambda: float | None = None
    # Berry-Voros
    f: int = 1
    M: float = 1.0
    omega: float = 0.1
    n_max: int | None = None
    bv_samples: int = 200
    # Monte-Carlo oracle
    oracle_samples: int = 1_000_000
    oracle_displacements: int = 20
    oracle_f: tuple[int, ...] = (1, 2, 3)
    oracle_streams: int = 4
    # run
    workers: int = 1
    seed: int = 20240501
    out: str | None = None

    @property
    def checkpoints(self) -> tuple[float, ...]:
        return self.T_list if self.checkpoint_T is None else self.checkpoint_T

    @property
    def lam(self) -> float:
        """Husimi squeezing; ``auto`` matches the oscillator, sqrt(m omega)."""
        if self.husimi_lambda is not None:
            return self.husimi_lambda
        return math.sqrt(self.m * math.sqrt(self.a_harm / self.m))

    def out_dir(self) -> Path:
        return Path(self.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("not a finite number")
    return v


def _int(s: str) -> int:
    f = float(s)
    if not math.isfinite(f) or f != int(f):
        raise ValueError("not an integer")
    return int(f)


def _complex(s: str) -> complex:
    return complex(s.replace(" ", ""))


def _auto(conv):
    def parse(s: str):
        return None if s.lower() == "auto" else conv(s)
    return parse


def _list(conv):
    def parse(s: str):
        items = [x.strip() for x in s.split(",") if x.strip()]
        if not items:
            raise ValueError("empty list")
        return tuple(conv(x) for x in items)
    return parse


def _str(s: str) -> str:
    return s


def _positive(v):
    return v is None or v > 0


def _nonneg(v):
    return v >= 0


def _pow2(v):
    return v >= 2 and v & (v - 1) == 0


def _nonneg_sorted(v):
    return v is None or (all(t >= 0 for t in v) and list(v) == sorted(v))


_PARSERS = {
    "m": _float, "kappa": _float, "a_harm": _float, "l": _float, "hbar": _float, "alpha": _complex,
    "n_points": _int, "q_min": _float, "q_max": _float,
    "dt": _float, "T_list": _list(_float), "checkpoint_T": _auto(_list(_float)),
    "fig1_log_points": _int, "fig1_log_min": _float,
    "ratio": _float, "n_samples": _int, "dp_max": _auto(_float), "target": _float,
    "ds_max_hbar": _float, "husimi_lambda": _auto(_float),
    "f": _int, "M": _float, "omega": _float, "n_max": _auto(_int), "bv_samples": _int,
    "oracle_samples": _int, "oracle_displacements": _int, "oracle_f": _list(_int),
    "oracle_streams": _int,
    "workers": _int, "seed": _int, "out": _str,
}

_CHECKS = {
    "m": (_positive, "must be positive"),
    "hbar": (_positive, "must be positive"),
    "a_harm": (_positive, "must be positive (the oscillator frequency enters the initial state)"),
    "n_points": (_pow2, "must be a power of two >= 2"),
    "dt": (_positive, "must be positive"),
    "T_list": (_nonneg_sorted, "must be non-negative and ascending"),
    "checkpoint_T": (_nonneg_sorted, "must be non-negative and ascending"),
    "fig1_log_points": (_nonneg, "must be non-negative"),
    "fig1_log_min": (_positive, "must be positive"),
    "n_samples": (_positive, "must be positive"),
    "dp_max": (_positive, "must be positive"),
    "target": (lambda v: 0 < v < 1, "must lie in (0, 1)"),
    "ds_max_hbar": (_positive, "must be positive"),
    "husimi_lambda": (_positive, "must be positive"),
    "f": (_positive, "must be a positive integer"),
    "M": (_positive, "must be positive"),
    "omega": (_positive, "must be positive"),
    "n_max": (lambda v: v is None or v >= 0, "must be non-negative"),
    "bv_samples": (_positive, "must be positive"),
    "oracle_samples": (lambda v: v >= 10_000, "must be at least 10000"),
    "oracle_displacements": (_positive, "must be positive"),
    "oracle_f": (lambda v: all(x > 0 for x in v), "entries must be positive"),
    "oracle_streams": (_positive, "must be positive"),
    "workers": (_positive, "must be positive"),
    "seed": (_nonneg, "must be non-negative"),
}

assert set(_PARSERS) == {f.name for f in fields(ExperimentConfig)}


def parse_config_text(text: str, path: str | None = None) -> ExperimentConfig:
    values: dict = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno, path)
        key, value = (x.strip() for x in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno, path)
        if key in lines:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", lineno, path)
        try:
            parsed = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"malformed value for {key!r}: {value!r} ({exc})", lineno, path) from None
        check = _CHECKS.get(key)
        if check is not None and not check[0](parsed):
            raise ConfigError(f"{key} = {value} {check[1]}", lineno, path)
        values[key] = parsed
        lines[key] = lineno
    cfg = replace(ExperimentConfig(), **values)
    if not cfg.q_max > cfg.q_min:
        raise ConfigError(f"q_max ({cfg.q_max}) must exceed q_min ({cfg.q_min})",
                          lines.get("q_max", lines.get("q_min")), path)
    return cfg


def parse_config(path) -> ExperimentConfig:
    path = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", None, path) from None
    return parse_config_text(text, path)


def _format(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, complex):
        return repr(value).strip("()")
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_echo(cfg: ExperimentConfig) -> str:
    """Fully resolved configuration in the input format; parses back to ``cfg``."""
    lines = ["# resolved configuration"]
    for fl in fields(cfg):
        value = getattr(cfg, fl.name)
        if fl.name == "out":
            continue  # the echo lives inside the output directory
        lines.append(f"{fl.name} = {_format(value)}")
    return "\n".join(lines) + "\n"
