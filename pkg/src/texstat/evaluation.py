"""Corpus-level evaluation: embeddings, Fréchet distance, robustness, timing."""

from __future__ import annotations

import time
import tracemalloc
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigMismatch,
    DegenerateCovariance,
    DimMismatch,
    InvalidFraction,
)
from .metric import MetricConfig, mss_loss, texstat_from_stats, texstat_loss
from .statistics import BLOCK_NAMES, StatsConfig, summary_statistics

__all__ = [
    "EmbeddingMatrix",
    "RobustnessReport",
    "embed_corpus",
    "frechet_distance",
    "robustness_experiment",
    "benchmark",
    "benchmark_to_text",
    "DEFAULT_FAD_BLOCKS",
]

DEFAULT_FAD_BLOCKS = ("s1", "s3")

_SHRINKAGE = 1e-6
_EIG_CLIP = -1e-8


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Row-per-frame statistics embedding of a corpus."""

    values: np.ndarray  # (rows, dim)
    config_hash: str
    blocks: tuple = DEFAULT_FAD_BLOCKS

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def embed_corpus(
    frames,
    cfg: StatsConfig,
    blocks=DEFAULT_FAD_BLOCKS,
    n_jobs: int = 1,
) -> EmbeddingMatrix:
    """Embed frames as concatenations of selected statistics blocks.

    Row order matches input order regardless of ``n_jobs``; the per-frame
    work is pure, so threading is safe.
    """
    cfg.validate()
    blocks = tuple(blocks)
    unknown = [b for b in blocks if b not in BLOCK_NAMES]
    if unknown:
        raise ConfigMismatch(f"unknown statistics blocks: {unknown}")
    if not blocks:
        raise ConfigMismatch("block mask must select at least one block")
    frames = list(frames)
    if not frames:
        raise ConfigMismatch("corpus is empty")

    def embed_one(frame):
        return summary_statistics(frame, cfg).concatenated(blocks)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(embed_one, frames))
    else:
        rows = [embed_one(f) for f in frames]
    return EmbeddingMatrix(
        values=np.vstack(rows), config_hash=cfg.config_hash, blocks=blocks
    )


def _fit_gaussian(values: np.ndarray):
    rows, dim = values.shape
    if rows < 2:
        raise DegenerateCovariance(f"need at least 2 rows, got {rows}")
    mean = values.mean(axis=0)
    cov = np.cov(values, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    if not np.all(np.isfinite(cov)):
        raise DegenerateCovariance("covariance has non-finite entries")
    eigvals = np.linalg.eigvalsh(cov)
    near_singular = eigvals.min() < 1e-12 * max(eigvals.max(), 1e-300)
    if rows < dim + 1 or near_singular:
        cov = cov + (_SHRINKAGE * np.trace(cov) / dim) * np.eye(dim)
    return mean, cov


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(matrix)
    if eigvals.min() < _EIG_CLIP * max(abs(eigvals).max(), 1.0):
        raise DegenerateCovariance(
            f"matrix has a strongly negative eigenvalue: {eigvals.min():.3e}"
        )
    eigvals = np.clip(eigvals, 0.0, None)
    return (eigvecs * np.sqrt(eigvals)) @ eigvecs.T


def frechet_distance(a: EmbeddingMatrix, b: EmbeddingMatrix) -> float:
    """Gaussian Fréchet distance between two embedding clouds.

    Fits a mean and covariance to each matrix and evaluates
    ``|mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2})`` with the matrix
    square root taken by eigendecomposition of the symmetrized product.
    Small negative eigenvalues from rounding are clipped to zero.
    """
    if a.dim != b.dim:
        raise DimMismatch(f"embedding dims differ: {a.dim} vs {b.dim}")
    if a.config_hash != b.config_hash:
        raise ConfigMismatch(
            f"embeddings come from different configs "
            f"({a.config_hash} vs {b.config_hash})"
        )
    mean_a, cov_a = _fit_gaussian(a.values)
    mean_b, cov_b = _fit_gaussian(b.values)

    sqrt_a = _psd_sqrt(cov_a)
    product = sqrt_a @ cov_b @ sqrt_a
    product = 0.5 * (product + product.T)
    eigvals = np.linalg.eigvalsh(product)
    if eigvals.min() < _EIG_CLIP * max(abs(eigvals).max(), 1.0):
        raise DegenerateCovariance(
            f"cross term has a strongly negative eigenvalue: {eigvals.min():.3e}"
        )
    trace_sqrt = float(np.sum(np.sqrt(np.clip(eigvals, 0.0, None))))

    mean_term = float(np.sum((mean_a - mean_b) ** 2))
    value = mean_term + float(np.trace(cov_a) + np.trace(cov_b)) - 2.0 * trace_sqrt
    return max(value, 0.0)


@dataclass(frozen=True)
class RobustnessReport:
    """Mean and std of both losses per transformation and level."""

    cells: dict  # {(transformation, level): {"texstat": (mu, sd), "mss": (mu, sd)}}
    n_frames: int
    config_hash: str

    def to_dict(self) -> dict:
        rows = []
        for (transformation, level), losses in sorted(self.cells.items()):
            rows.append({
                "transformation": transformation,
                "level": level,
                "texstat_mean": losses["texstat"][0],
                "texstat_std": losses["texstat"][1],
                "mss_mean": losses["mss"][0],
                "mss_std": losses["mss"][1],
            })
        return {
            "version": 1,
            "n_frames": self.n_frames,
            "config_hash": self.config_hash,
            "cells": rows,
        }

    def to_text(self) -> str:
        lines = [
            f"Robustness over {self.n_frames} frames (config {self.config_hash})",
            f"{'transformation':<16}{'level':>8}{'texstat':>20}{'mss':>20}",
        ]
        for (transformation, level), losses in sorted(self.cells.items()):
            ts = f"{losses['texstat'][0]:.4f} ± {losses['texstat'][1]:.4f}"
            ms = f"{losses['mss'][0]:.4f} ± {losses['mss'][1]:.4f}"
            lines.append(f"{transformation:<16}{level:>7.0%}{ts:>20}{ms:>20}")
        return "\n".join(lines)


def _scaled_uniform_noise(rng, frame: np.ndarray, frac: float) -> np.ndarray:
    noise = rng.uniform(-1.0, 1.0, frame.size)
    peak = np.abs(frame).max()
    noise_peak = np.abs(noise).max()
    if peak == 0.0 or noise_peak == 0.0:
        return np.zeros_like(frame)
    return noise * (frac * peak / noise_peak)


def robustness_experiment(
    frames,
    shift_fracs,
    noise_fracs,
    cfg: MetricConfig,
    rng_seed: int = 0,
) -> RobustnessReport:
    """Loss response to circular time shifts and additive uniform noise.

    Shifts move each frame circularly by ``round(frac * N)`` samples; noise
    is white uniform noise scaled so its maximum amplitude is ``frac``
    times the frame's maximum amplitude. Both losses are measured between
    each frame and its transformed version, then aggregated per cell.
    """
    cfg.validate()
    for frac in list(shift_fracs) + list(noise_fracs):
        if not (0.0 <= frac < 1.0):
            raise InvalidFraction(f"fractions must lie in [0, 1), got {frac}")
    arrays = [np.asarray(getattr(f, "samples", f), dtype=np.float64) for f in frames]
    rng = np.random.default_rng(rng_seed)

    base_stats = [summary_statistics(a, cfg.stats) for a in arrays]
    cells: dict = {}

    def add_cell(transformation, level, transformed_per_frame):
        texstat_vals, mss_vals = [], []
        for original, stats, transformed in zip(arrays, base_stats, transformed_per_frame):
            stats_t = summary_statistics(transformed, cfg.stats)
            texstat_vals.append(texstat_from_stats(stats, stats_t, cfg.beta))
            mss_vals.append(mss_loss(original, transformed))
        cells[(transformation, level)] = {
            "texstat": (float(np.mean(texstat_vals)), float(np.std(texstat_vals))),
            "mss": (float(np.mean(mss_vals)), float(np.std(mss_vals))),
        }

    for frac in shift_fracs:
        shifted = [np.roll(a, round(frac * cfg.stats.frame_length)) for a in arrays]
        add_cell("time-shift", float(frac), shifted)

    for frac in noise_fracs:
        noisy = [a + _scaled_uniform_noise(rng, a, frac) for a in arrays]
        add_cell("noise-add", float(frac), noisy)

    return RobustnessReport(
        cells=cells, n_frames=len(arrays), config_hash=cfg.stats.config_hash
    )


def _time_loss(fn, pairs, repeats: int, parallel: bool):
    """Wall time of evaluating ``fn`` over all pairs, repeated."""
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        if parallel:
            with ThreadPoolExecutor() as pool:
                list(pool.map(lambda xy: fn(*xy), pairs))
        else:
            for x, y in pairs:
                fn(x, y)
        timings.append((time.perf_counter() - start) * 1000.0)
    return float(np.mean(timings)), float(np.std(timings))


def benchmark(
    batch: int,
    length: int,
    cfg: MetricConfig,
    repeats: int = 10,
    rng_seed: int = 0,
    parallel: bool = False,
) -> dict:
    """Wall-time comparison of the losses over a batch of random pairs.

    Reports mean ± std milliseconds per batch and per signal pair for the
    texture-statistics loss, the multi-scale spectrogram loss, and plain
    MSE/MAE, plus a peak transient working-set estimate. Forward evaluation
    only; results are informational, not pass/fail.
    """
    if repeats < 3:
        raise ValueError(f"repeats must be >= 3, got {repeats}")
    cfg.validate()
    if length != cfg.stats.frame_length:
        cfg = MetricConfig(
            stats=StatsConfig(
                cochlear=cfg.stats.cochlear,
                modulation=cfg.stats.modulation,
                n_moments=cfg.stats.n_moments,
                alpha=cfg.stats.alpha,
                frame_length=length,
                envelope_decimation=cfg.stats.envelope_decimation,
            ),
            beta=cfg.beta,
        ).validate()

    rng = np.random.default_rng(rng_seed)
    pairs = [
        (rng.standard_normal(length), rng.standard_normal(length))
        for _ in range(batch)
    ]

    loss_fns = {
        "texstat": lambda x, y: texstat_loss(x, y, cfg),
        "mss": lambda x, y: mss_loss(x, y),
        "mse": lambda x, y: float(np.mean((x - y) ** 2)),
        "mae": lambda x, y: float(np.mean(np.abs(x - y))),
    }

    tracemalloc.start()
    texstat_loss(pairs[0][0], pairs[0][1], cfg)
    _, peak_bytes = tracemalloc.get_traced_memory()
    tracemalloc.stop()

    losses = {}
    for name, fn in loss_fns.items():
        total_mean, total_std = _time_loss(fn, pairs, repeats, parallel)
        losses[name] = {
            "total_ms_mean": total_mean,
            "total_ms_std": total_std,
            "per_signal_ms_mean": total_mean / batch,
            "per_signal_ms_std": total_std / batch,
        }

    return {
        "version": 1,
        "note": "forward evaluation only (no gradients)",
        "batch": int(batch),
        "length": int(length),
        "repeats": int(repeats),
        "parallel": bool(parallel),
        "peak_memory_mb": peak_bytes / 2**20,
        "config_hash": cfg.stats.config_hash,
        "losses": losses,
    }


def benchmark_to_text(report: dict) -> str:
    lines = [
        f"Loss timing, batch={report['batch']} x {report['length']} samples, "
        f"{report['repeats']} repeats ({report['note']})",
        f"{'loss':<10}{'batch ms (mu ± sigma)':>26}{'per-signal ms':>18}",
    ]
    for name in ("texstat", "mss", "mse", "mae"):
        row = report["losses"][name]
        timing = f"{row['total_ms_mean']:.1f} ± {row['total_ms_std']:.1f}"
        lines.append(f"{name:<10}{timing:>26}{row['per_signal_ms_mean']:>18.3f}")
    lines.append(f"peak transient memory ~ {report['peak_memory_mb']:.1f} MiB")
    return "\n".join(lines)
