"""Experiment orchestration: echo sweeps, saturation scans and theory curves.

Each run writes into ``<root>/<timestamp>-<tag>/``: the config as given, one
or more CSV files and a ``manifest.json`` with SHA-256 checksums of every
CSV.  Files are assembled in a hidden staging directory and renamed into
place only when the run has finished, so a failed run leaves nothing behind.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import shutil
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .analysis import default_fit_window, estimate_plateau, fit_decay, tail_abs_kernel, tail_saturation
from .config import ConfigError, RunConfig, load_config
from .echo import EchoSeries, ExperimentConfig, ensemble_echo
from .theory import (
    TheoryParams,
    decay_term,
    freeze_term,
    lyapunov_rate,
    predicted_echo,
    saturation_prediction,
    y_correlation_prediction,
)

DEFAULT_ROOT = "runs"


def output_root(root=None) -> Path:
    return Path(root or os.environ.get("DISPECHO_OUTPUT_ROOT") or DEFAULT_ROOT)


def fmt(value) -> str:
    """Loss-free text form of a number (17 significant digits)."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _slug(value: float) -> str:
    return f"{value:g}".replace("-", "m")


@dataclass
class RunResult:
    run_dir: Path
    manifest: dict

    def csv_paths(self) -> list[Path]:
        return [self.run_dir / name for name in self.manifest["outputs"]]


class _RunWriter:
    def __init__(self, command: str, config: RunConfig, root=None, workers=None):
        self.command = command
        self.config = config
        self.root = output_root(root)
        self.workers = workers
        self.files: dict[str, str] = {}
        self.started = datetime.now(timezone.utc)

    def add(self, name: str, text: str):
        if name in self.files:
            raise RuntimeError(f"output {name} written twice")
        self.files[name] = text

    def commit(self) -> RunResult:
        self.root.mkdir(parents=True, exist_ok=True)
        stamp = self.started.strftime("%Y%m%dT%H%M%S")
        final = self.root / f"{stamp}-{self.config.tag}"
        suffix = 1
        while final.exists():
            suffix += 1
            final = self.root / f"{stamp}-{self.config.tag}-{suffix}"
        staging = Path(tempfile.mkdtemp(prefix=".partial-", dir=self.root))
        try:
            outputs = {}
            for name, text in self.files.items():
                data = text.encode("utf-8")
                (staging / name).write_bytes(data)
                outputs[name] = hashlib.sha256(data).hexdigest()
            (staging / "config.txt").write_text(self.config.source_text, encoding="utf-8")
            manifest = {
                "command": self.command,
                "code_version": __version__,
                "seed": self.config.seed,
                "config": self.config.snapshot(),
                "workers": self.workers,
                "started": self.started.isoformat(),
                "finished": datetime.now(timezone.utc).isoformat(),
                "outputs": outputs,
            }
            (staging / "manifest.json").write_text(
                json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            staging.rename(final)
        except BaseException:
            shutil.rmtree(staging, ignore_errors=True)
            raise
        return RunResult(final, manifest)


def _experiment(config: RunConfig, K: float) -> ExperimentConfig:
    return ExperimentConfig(
        N=config.N,
        K=K,
        P_list=config.P_list,
        n_max=config.n_max,
        ensemble_size=config.ensemble_size,
        seed=config.seed,
        sigma=config.sigma,
    )


def _theory(config: RunConfig, K: float, P: float) -> TheoryParams:
    return TheoryParams(N=config.N, sigma=config.width, P=P, K=K, alpha=config.alpha)


def _rate(config: RunConfig, K: float, fitted: Optional[float] = None) -> float:
    if config.theory_rate == "analytic":
        return lyapunov_rate(K)
    if config.theory_rate == "fitted":
        if fitted is None or not np.isfinite(fitted):
            raise ConfigError("theory_rate = fitted needs a measured decay rate")
        return fitted
    return float(config.theory_rate)


def _fit(series: EchoSeries, config: RunConfig):
    plateau = estimate_plateau(series)
    try:
        window = default_fit_window(
            series,
            start=config.fit_start,
            max_end=config.fit_end,
            plateau_factor=config.plateau_factor,
            plateau=plateau,
        )
        return fit_decay(series, window, plateau=plateau)
    except ValueError:
        return None


FIT_HEADER = [
    "K", "np_over_2pi", "P", "rate", "rate_stderr", "intercept",
    "n_start", "n_end", "residual", "saturated", "plateau",
]
ECHO_HEADER = ["n", "mean_MD", "stderr_MD", "re_mean_I", "im_mean_I", "theory_decay", "theory_freeze"]


def echo_sweep(config: RunConfig, workers=None):
    """Run the ensemble for every K; returns {K: [EchoSeries per P]} plus fits."""
    results, fits = {}, {}
    for K in config.K_list:
        results[K] = ensemble_echo(_experiment(config, K), workers)
        fits[K] = [_fit(s, config) for s in results[K]]
    return results, fits


def run_echo_sweep(config_file, root=None, workers=None) -> RunResult:
    config = load_config(config_file) if not isinstance(config_file, RunConfig) else config_file
    writer = _RunWriter("echo-sweep", config, root, workers)
    results, fits = echo_sweep(config, workers)
    fit_rows = []
    n = np.arange(config.n_max + 1)
    for K in config.K_list:
        for ratio, series, fit in zip(config.np_over_2pi, results[K], fits[K]):
            theory = _theory(config, K, series.P)
            rate = _rate(config, K, fit.rate if fit else None)
            decay = decay_term(theory, n, rate)
            freeze = freeze_term(theory)
            rows = [
                (int(k), series.mean_MD[k], series.stderr_MD[k],
                 series.mean_I[k].real, series.mean_I[k].imag, decay[k], freeze)
                for k in n
            ]
            writer.add(f"echo_K{_slug(K)}_np{_slug(ratio)}.csv", csv_text(ECHO_HEADER, rows))
            if fit is None:
                fit_rows.append((K, ratio, series.P) + (float("nan"),) * 3 + (-1, -1, float("nan"), True, float("nan")))
            else:
                fit_rows.append((K, ratio, series.P, fit.rate, fit.rate_stderr, fit.intercept,
                                 fit.window[0], fit.window[1], fit.residual, fit.saturated, fit.plateau))
    writer.add("fits.csv", csv_text(FIT_HEADER, fit_rows))
    return writer.commit()


SATURATION_HEADER = [
    "NP_over_2pi", "tail_mean", "tail_stderr", "theory",
    "tail_abs_mean_I", "tail_mean_abs_I", "theory_y", "decaying",
]


def saturation_rows(config: RunConfig, series_list) -> list[tuple]:
    window = config.tail_window
    rows = []
    for ratio, series in zip(config.np_over_2pi, series_list):
        tail = tail_saturation(series, window)
        theory = _theory(config, series.K, series.P)
        rows.append((
            ratio, tail.value, tail.stderr, saturation_prediction(theory),
            tail_abs_kernel(series, window),
            float(np.mean(series.mean_abs_I[window[0] : window[1] + 1])),
            y_correlation_prediction(theory), tail.decaying,
        ))
    return rows


def run_saturation_scan(config_file, root=None, workers=None) -> RunResult:
    config = load_config(config_file) if not isinstance(config_file, RunConfig) else config_file
    writer = _RunWriter("saturation-scan", config, root, workers)
    for K in config.K_list:
        series_list = ensemble_echo(_experiment(config, K), workers)
        writer.add(f"saturation_K{_slug(K)}.csv", csv_text(SATURATION_HEADER, saturation_rows(config, series_list)))
    return writer.commit()


THEORY_HEADER = ["t", "predicted", "raw", "decay", "freeze", "floor"]


def run_theory_curve(config_file, root=None) -> RunResult:
    config = load_config(config_file) if not isinstance(config_file, RunConfig) else config_file
    if config.theory_rate == "fitted":
        raise ConfigError("theory-curve cannot use theory_rate = fitted; give 'analytic' or a number")
    writer = _RunWriter("theory-curve", config, root)
    t = np.arange(config.n_max + 1, dtype=float)
    for K in config.K_list:
        rate = _rate(config, K)
        for ratio, P in zip(config.np_over_2pi, config.P_list):
            theory = _theory(config, K, P)
            clamped = predicted_echo(theory, t, rate)
            raw = predicted_echo(theory, t, rate, clamp=False)
            decay = decay_term(theory, t, rate)
            freeze = freeze_term(theory)
            rows = [(t[k], clamped[k], raw[k], decay[k], freeze, 1.0 / config.N) for k in range(len(t))]
            writer.add(f"theory_K{_slug(K)}_np{_slug(ratio)}.csv", csv_text(THEORY_HEADER, rows))
    return writer.commit()
