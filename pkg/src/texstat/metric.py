"""The texture-statistics distance and the multi-scale spectrogram baseline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigMismatch, InvalidSpec, LengthMismatch
from .statistics import StatsConfig, SummaryStats, summary_statistics
from .validation import as_float_vector

__all__ = [
    "MetricConfig",
    "texstat_from_stats",
    "texstat_loss",
    "mss_loss",
    "DEFAULT_FFT_SIZES",
]

DEFAULT_FFT_SIZES = (64, 128, 256, 512, 1024, 2048)
_MSS_EPS = 1e-7


@dataclass(frozen=True)
class MetricConfig:
    """Statistics configuration plus the five per-block weights."""

    stats: StatsConfig = field(default_factory=StatsConfig)
    beta: tuple = (1.0, 1.0, 1.0, 1.0, 1.0)

    def validate(self) -> "MetricConfig":
        self.stats.validate()
        if len(self.beta) != 5:
            raise InvalidSpec(f"beta must have 5 entries, got {len(self.beta)}")
        if any(b < 0 for b in self.beta) or all(b == 0 for b in self.beta):
            raise InvalidSpec("beta entries must be >= 0 and not all zero")
        return self

    def to_dict(self) -> dict:
        return {"stats": self.stats.to_dict(), "beta": [float(b) for b in self.beta]}

    @classmethod
    def from_dict(cls, d: dict) -> "MetricConfig":
        return cls(
            stats=StatsConfig.from_dict(d["stats"]),
            beta=tuple(float(b) for b in d["beta"]),
        ).validate()


def texstat_from_stats(a: SummaryStats, b: SummaryStats, beta) -> float:
    """Weighted sum of per-block mean squared differences.

    Both stats must come from the same configuration; the result is
    symmetric, nonnegative, and zero iff all weighted blocks coincide.
    """
    if a.config_hash != b.config_hash:
        raise ConfigMismatch(
            f"stats were produced under different configs "
            f"({a.config_hash} vs {b.config_hash})"
        )
    beta = np.asarray(beta, dtype=np.float64)
    total = 0.0
    for weight, block_a, block_b in zip(beta, a.blocks(), b.blocks()):
        if block_a.shape != block_b.shape:
            raise ConfigMismatch("statistics blocks have different lengths")
        total += float(weight) * float(np.mean((block_a - block_b) ** 2))
    return total


def texstat_loss(x, y, cfg: MetricConfig) -> float:
    """Texture-statistics distance between two equal-length frames."""
    cfg.validate()
    stats_x = summary_statistics(x, cfg.stats)
    stats_y = summary_statistics(y, cfg.stats)
    return texstat_from_stats(stats_x, stats_y, cfg.beta)


def _stft_magnitudes(x: np.ndarray, n_fft: int, hop: int) -> np.ndarray:
    window = np.hanning(n_fft)
    n_frames = 1 + (x.size - n_fft) // hop
    offsets = np.arange(n_frames) * hop
    frames = x[offsets[:, None] + np.arange(n_fft)[None, :]]
    return np.abs(np.fft.rfft(frames * window, axis=1))


def mss_loss(x, y, fft_sizes=DEFAULT_FFT_SIZES) -> float:
    """Multi-scale spectrogram loss: linear plus log magnitude differences.

    For each FFT size (hop = size / 4, Hann window) the loss adds the mean
    absolute difference of the magnitude spectrograms and of their logs.
    """
    xs = as_float_vector(getattr(x, "samples", x), "x")
    ys = as_float_vector(getattr(y, "samples", y), "y")
    if xs.size != ys.size:
        raise LengthMismatch(f"signal lengths differ: {xs.size} vs {ys.size}")
    total = 0.0
    for n_fft in fft_sizes:
        if xs.size < n_fft:
            raise LengthMismatch(
                f"signals of length {xs.size} are shorter than FFT size {n_fft}"
            )
        hop = max(n_fft // 4, 1)
        mag_x = _stft_magnitudes(xs, n_fft, hop)
        mag_y = _stft_magnitudes(ys, n_fft, hop)
        linear = float(np.mean(np.abs(mag_x - mag_y)))
        log = float(np.mean(np.abs(np.log(mag_x + _MSS_EPS) - np.log(mag_y + _MSS_EPS))))
        total += linear + log
    return total
