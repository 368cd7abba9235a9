"""Run configuration files.

Flat ``key = value`` lines grouped under ``[section]`` headers; ``#`` starts a
comment.  Every key must be known, every section must be known, and a key
may appear once.  Lists are comma separated.

    [grid]
    N = 8192
    [dynamics]
    K = 10.09, 50.09
    [ensemble]
    size = 200
    seed = 12345
    n_max = 12
    sigma = default
    [displacements]
    m = 10               # integer multiples of 2 pi / N
    np_over_2pi = 0.5    # real multiples, may be combined with m
    [analysis]
    fit_start = 1
    fit_end = 4
    [output]
    tag = decay
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional

from .statespace import TWO_PI, TorusGrid


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, source: str = "<config>"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def _int(text):
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"expected a finite number, got {text!r}")
    return value


def _float_list(text):
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise ValueError("empty list")
    return [_float(item) for item in items]


def _sigma(text):
    return None if text.lower() == "default" else _float(text)


def _rate(text):
    if text.lower() in ("analytic", "fitted"):
        return text.lower()
    return _float(text)


def _tag(text):
    if not text or any(c in text for c in "/\\ \t"):
        raise ValueError(f"tag must be a single path-safe word, got {text!r}")
    return text


SCHEMA = {
    "grid": {"N": _int},
    "dynamics": {"K": _float_list},
    "ensemble": {"size": _int, "seed": _int, "n_max": _int, "sigma": _sigma},
    "displacements": {"m": _float_list, "np_over_2pi": _float_list},
    "analysis": {
        "fit_start": _int,
        "fit_end": _int,
        "plateau_factor": _float,
        "tail_start": _int,
        "tail_end": _int,
        "theory_rate": _rate,
        "alpha": _float,
    },
    "output": {"tag": _tag},
}


@dataclass(frozen=True)
class RunConfig:
    N: int
    K_list: tuple
    np_over_2pi: tuple
    n_max: int
    ensemble_size: int = 200
    seed: int = 0
    sigma: Optional[float] = None
    fit_start: int = 1
    fit_end: int = 4
    plateau_factor: float = 10.0
    tail_start: Optional[int] = None
    tail_end: Optional[int] = None
    theory_rate: object = "analytic"
    alpha: float = 1.0
    tag: str = "run"
    source_text: str = field(default="", repr=False, compare=False)

    @property
    def grid(self) -> TorusGrid:
        return TorusGrid(self.N)

    @property
    def P_list(self) -> tuple:
        return tuple(r * TWO_PI / self.N for r in self.np_over_2pi)

    @property
    def width(self) -> float:
        return self.grid.default_sigma() if self.sigma is None else self.sigma

    @property
    def tail_window(self) -> tuple[int, int]:
        start = self.tail_start if self.tail_start is not None else (self.n_max * 2) // 5
        end = self.tail_end if self.tail_end is not None else self.n_max
        return start, end

    def snapshot(self) -> dict:
        data = asdict(self)
        data.pop("source_text")
        data["K_list"] = list(self.K_list)
        data["np_over_2pi"] = list(self.np_over_2pi)
        return data


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values: dict = {}
    lines: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno, source)
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno, source)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno, source)
        if section is None:
            raise ConfigError("key outside of any section", lineno, source)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno, source)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", lineno, source)
        try:
            values[key] = SCHEMA[section][key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno, source) from None
        lines[key] = lineno

    for required in ("N", "K", "n_max"):
        if required not in values:
            raise ConfigError(f"missing required key {required!r}", None, source)
    if "m" not in values and "np_over_2pi" not in values:
        raise ConfigError("no displacements given (set 'm' or 'np_over_2pi')", None, source)

    def check(cond, key, message):
        if not cond:
            raise ConfigError(message, lines.get(key), source)

    N = values["N"]
    check(N >= 2 and N % 2 == 0, "N", f"N must be even and >= 2, got {N}")
    check(all(K >= 0 for K in values["K"]), "K", "kicking strengths must be non-negative")
    check(values["n_max"] >= 1, "n_max", "n_max must be >= 1")
    check(values.get("size", 1) >= 1, "size", "ensemble size must be >= 1")
    check(0 <= values.get("seed", 0) < 2**64, "seed", "seed must fit in 64 unsigned bits")
    sigma = values.get("sigma")
    check(sigma is None or 0 < sigma <= TWO_PI / 8, "sigma", "sigma must lie in (0, 2*pi/8]")
    if sigma is None:
        check(math.sqrt(TWO_PI / N) <= TWO_PI / 8, "N", "default width sqrt(2 pi/N) too wide; N >= 16 needed")
    fit_start, fit_end = values.get("fit_start", 1), values.get("fit_end", 4)
    check(0 <= fit_start < fit_end, "fit_end", "need 0 <= fit_start < fit_end")
    check(values.get("plateau_factor", 10.0) > 0, "plateau_factor", "plateau_factor must be positive")
    n_max = values["n_max"]
    for key in ("tail_start", "tail_end"):
        if key in values:
            check(0 <= values[key] <= n_max, key, f"{key} must lie in [0, n_max]")
    if "tail_start" in values and "tail_end" in values:
        check(values["tail_start"] <= values["tail_end"], "tail_end", "tail_start > tail_end")

    ratios = tuple(values.get("m", [])) + tuple(values.get("np_over_2pi", []))
    return RunConfig(
        N=N,
        K_list=tuple(values["K"]),
        np_over_2pi=ratios,
        n_max=n_max,
        ensemble_size=values.get("size", 200),
        seed=values.get("seed", 0),
        sigma=sigma,
        fit_start=fit_start,
        fit_end=fit_end,
        plateau_factor=values.get("plateau_factor", 10.0),
        tail_start=values.get("tail_start"),
        tail_end=values.get("tail_end"),
        theory_rate=values.get("theory_rate", "analytic"),
        alpha=values.get("alpha", 1.0),
        tag=values.get("tag", "run"),
        source_text=text,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, source=str(path))
