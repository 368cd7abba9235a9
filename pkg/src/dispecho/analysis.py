"""Decay rates and saturation plateaus extracted from echo series."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .echo import EchoSeries

log = logging.getLogger(__name__)

# a fit point closer than this multiple of the plateau counts as saturated
SATURATION_GUARD = 5.0


@dataclass(frozen=True)
class DecayFit:
    rate: float
    intercept: float
    window: tuple[int, int]
    residual: float
    rate_stderr: float = 0.0
    saturated: bool = False
    plateau: float = float("nan")


@dataclass(frozen=True)
class TailEstimate:
    value: float
    stderr: float
    slope: float
    slope_stderr: float
    window: tuple[int, int]
    decaying: bool = False


def _slope_weights(n: np.ndarray) -> np.ndarray:
    centered = n - n.mean()
    return centered / np.sum(centered**2)


def estimate_plateau(series: EchoSeries, tail_fraction: float = 1 / 3) -> float:
    """Mean of the last ``tail_fraction`` of the series (at least 3 points)."""
    values = series.mean_MD
    count = max(3, int(round(len(values) * tail_fraction)))
    return float(np.mean(values[-count:]))


def default_fit_window(
    series: EchoSeries,
    start: int = 1,
    max_end: int = 4,
    plateau_factor: float = 10.0,
    plateau: Optional[float] = None,
) -> tuple[int, int]:
    """[start, min(max_end, first n below plateau_factor * plateau)], inclusive.

    Two passes: the plateau is estimated from the tail first, then used to
    stop the window where the decay has run into it.
    """
    last = len(series.mean_MD) - 1
    plateau = estimate_plateau(series) if plateau is None else plateau
    end = min(max_end, last)
    for n in range(start + 1, end + 1):
        if series.mean_MD[n] < plateau_factor * plateau:
            end = n
            break
    if end <= start:
        raise ValueError(f"series too short for a fit starting at n={start}")
    return start, end


def onset_fit_window(
    series: EchoSeries,
    onset_level: float = math.exp(-1.0),
    plateau_factor: float = 10.0,
    plateau: Optional[float] = None,
) -> tuple[int, int]:
    """Window over the exponential stretch between the onset shoulder and the plateau.

    Starts at the first n >= 1 where the echo has fallen below ``onset_level``
    and ends at the last consecutive point still above
    ``plateau_factor * plateau``.
    """
    values = series.mean_MD
    plateau = estimate_plateau(series) if plateau is None else plateau
    below = np.nonzero(values[1:] <= onset_level)[0]
    if not len(below):
        raise ValueError("echo never drops below the onset level")
    start = int(below[0]) + 1
    end = start
    while end + 1 < len(values) and values[end + 1] > plateau_factor * plateau:
        end += 1
    if end <= start:
        raise ValueError("fewer than two points between onset and plateau")
    return start, end


def fit_decay(
    series: EchoSeries,
    window: Optional[tuple[int, int]] = None,
    plateau: Optional[float] = None,
) -> DecayFit:
    """Least-squares line through (n, ln <M_D>) over an inclusive window; rate = -slope."""
    plateau = estimate_plateau(series) if plateau is None else plateau
    if window is None:
        window = default_fit_window(series, plateau=plateau)
    start, end = int(window[0]), int(window[1])
    if not 0 <= start < end < len(series.mean_MD):
        raise ValueError(f"window {window} outside series of length {len(series.mean_MD)}")
    n = np.arange(start, end + 1, dtype=float)
    values = series.mean_MD[start : end + 1]
    if np.any(values <= 0):
        raise ValueError("echo must be positive inside the fit window")
    y = np.log(values)
    slope, intercept = np.polyfit(n, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * n + intercept)) ** 2)))
    rel_err = series.stderr_MD[start : end + 1] / values
    rate_stderr = float(np.sqrt(np.sum((_slope_weights(n) * rel_err) ** 2)))
    saturated = bool(np.any(values <= SATURATION_GUARD * plateau))
    if saturated:
        log.warning(
            "fit window %s reaches within %gx of the plateau %.3g (%s)",
            (start, end), SATURATION_GUARD, plateau, series.label,
        )
    return DecayFit(
        rate=float(-slope),
        intercept=float(intercept),
        window=(start, end),
        residual=residual,
        rate_stderr=rate_stderr,
        saturated=saturated,
        plateau=plateau,
    )


def tail_saturation(series: EchoSeries, tail_window: tuple[int, int]) -> TailEstimate:
    """Plateau value as the mean of <M_D> over an inclusive tail window.

    The result is flagged as still decaying when the tail slope is negative by
    more than three standard errors.
    """
    start, end = int(tail_window[0]), int(tail_window[1])
    if not 0 <= start <= end < len(series.mean_MD):
        raise ValueError(f"tail window {tail_window} outside series of length {len(series.mean_MD)}")
    values = series.mean_MD[start : end + 1]
    errors = series.stderr_MD[start : end + 1]
    value = float(np.mean(values))
    stderr = float(np.sqrt(np.sum(errors**2)) / len(values))
    if end > start:
        n = np.arange(start, end + 1, dtype=float)
        w = _slope_weights(n)
        slope = float(np.sum(w * values))
        slope_stderr = float(np.sqrt(np.sum((w * errors) ** 2)))
    else:
        slope = slope_stderr = 0.0
    decaying = -slope > 3.0 * slope_stderr + 1e-12 * abs(value)
    return TailEstimate(value, stderr, slope, slope_stderr, (start, end), decaying)


def tail_abs_kernel(series: EchoSeries, tail_window: tuple[int, int]) -> float:
    """Mean of |<I(n)>| over the tail window."""
    start, end = tail_window
    return float(np.mean(np.abs(series.mean_I[start : end + 1])))
