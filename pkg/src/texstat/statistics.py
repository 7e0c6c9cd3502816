"""Subband envelope statistics: the five summary-statistics sets.

The pipeline splits a frame into cochlear subbands, takes the magnitude of
each subband's analytic signal as its amplitude envelope, and decomposes
each envelope with a low-frequency modulation filterbank. Five statistics
vectors are derived:

* ``s1`` — weighted normalized moments of each envelope,
* ``s2`` — Pearson correlations between envelopes of different bands,
* ``s3`` — per-band modulation energy relative to envelope energy,
* ``s4`` — correlations between modulation bands of the same envelope,
* ``s5`` — correlations across cochlear bands within a modulation band.

All expectations use population (1/n) normalization and degenerate
denominators are floored at ``EPS`` so silence yields finite statistics.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import hilbert

from .errors import ConfigMismatch, InvalidSpec, LengthMismatch
from .filterbanks import FilterbankSpec, cached_filterbank, filter_signal
from .validation import as_float_vector, check_finite, check_power_of_two

__all__ = [
    "EPS",
    "StatsConfig",
    "SummaryStats",
    "analytic_envelope",
    "normalized_moments",
    "pearson_corr_vech",
    "summary_statistics",
    "calibrate_alpha",
]

EPS = 1e-12

BLOCK_NAMES = ("s1", "s2", "s3", "s4", "s5")


def _default_cochlear() -> FilterbankSpec:
    return FilterbankSpec(kind="erb", n_filters=16, sample_rate=44100.0,
                          f_lo=20.0, f_hi=22050.0)


def _default_modulation() -> FilterbankSpec:
    return FilterbankSpec(kind="log", n_filters=6, sample_rate=44100.0,
                          f_lo=0.5, f_hi=100.0)


@dataclass(frozen=True)
class StatsConfig:
    """Everything that determines a summary-statistics vector.

    ``alpha`` weights the per-moment blocks of ``s1`` so the moments
    contribute comparably to distances despite their different magnitudes.
    ``envelope_decimation`` (a power of two) downsamples envelopes by block
    averaging before modulation filtering; 1 keeps the full audio rate.
    """

    cochlear: FilterbankSpec = field(default_factory=_default_cochlear)
    modulation: FilterbankSpec = field(default_factory=_default_modulation)
    n_moments: int = 4
    alpha: tuple = (1.0, 20.0, 80.0, 160.0)
    frame_length: int = 65536
    envelope_decimation: int = 1

    def validate(self) -> "StatsConfig":
        self.cochlear.validate()
        self.modulation.validate()
        if self.n_moments < 2:
            raise InvalidSpec(f"n_moments must be >= 2, got {self.n_moments}")
        if len(self.alpha) != self.n_moments:
            raise InvalidSpec(
                f"alpha has {len(self.alpha)} entries for {self.n_moments} moments"
            )
        if any(a <= 0 for a in self.alpha):
            raise InvalidSpec("alpha entries must be > 0")
        try:
            check_power_of_two(self.frame_length, 64, "frame_length")
            check_power_of_two(self.envelope_decimation, 1, "envelope_decimation")
        except ValueError as exc:
            raise InvalidSpec(str(exc)) from None
        if self.frame_length // self.envelope_decimation < 64:
            raise InvalidSpec("envelope_decimation leaves fewer than 64 samples")
        expected_mod_rate = self.cochlear.sample_rate / self.envelope_decimation
        if abs(self.modulation.sample_rate - expected_mod_rate) > 1e-9:
            raise InvalidSpec(
                f"modulation sample_rate {self.modulation.sample_rate} must equal "
                f"cochlear rate / envelope_decimation = {expected_mod_rate}"
            )
        if self.total_stats_count() >= self.frame_length:
            raise InvalidSpec(
                f"{self.total_stats_count()} statistics for a frame of "
                f"{self.frame_length} samples; reduce the filterbanks or moments"
            )
        return self

    def total_stats_count(self) -> int:
        nf, ng, nl = self.cochlear.n_filters, self.modulation.n_filters, self.n_moments
        return (nl * nf + nf * (nf - 1) // 2 + ng * nf
                + nf * ng * (ng - 1) // 2 + ng * nf * (nf - 1) // 2)

    def block_lengths(self) -> dict:
        nf, ng, nl = self.cochlear.n_filters, self.modulation.n_filters, self.n_moments
        return {
            "s1": nl * nf,
            "s2": nf * (nf - 1) // 2,
            "s3": ng * nf,
            "s4": nf * ng * (ng - 1) // 2,
            "s5": ng * nf * (nf - 1) // 2,
        }

    def to_dict(self) -> dict:
        return {
            "cochlear": self.cochlear.to_dict(),
            "modulation": self.modulation.to_dict(),
            "n_moments": int(self.n_moments),
            "alpha": [float(a) for a in self.alpha],
            "frame_length": int(self.frame_length),
            "envelope_decimation": int(self.envelope_decimation),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StatsConfig":
        return cls(
            cochlear=FilterbankSpec.from_dict(d["cochlear"]),
            modulation=FilterbankSpec.from_dict(d["modulation"]),
            n_moments=int(d["n_moments"]),
            alpha=tuple(float(a) for a in d["alpha"]),
            frame_length=int(d["frame_length"]),
            envelope_decimation=int(d.get("envelope_decimation", 1)),
        ).validate()

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class SummaryStats:
    """The five statistics vectors plus the hash of the producing config."""

    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    s4: np.ndarray
    s5: np.ndarray
    config_hash: str

    def blocks(self) -> tuple:
        return (self.s1, self.s2, self.s3, self.s4, self.s5)

    def concatenated(self, names: Sequence[str] = BLOCK_NAMES) -> np.ndarray:
        by_name = dict(zip(BLOCK_NAMES, self.blocks()))
        return np.concatenate([by_name[n] for n in names])

    def to_dict(self, config: StatsConfig | None = None) -> dict:
        doc = {"version": 1, "config_hash": self.config_hash}
        if config is not None:
            doc["config"] = config.to_dict()
        for name, block in zip(BLOCK_NAMES, self.blocks()):
            doc[name] = [float(v) for v in block]
        return doc

    @classmethod
    def from_dict(cls, d: dict) -> "SummaryStats":
        return cls(
            s1=np.asarray(d["s1"], dtype=np.float64),
            s2=np.asarray(d["s2"], dtype=np.float64),
            s3=np.asarray(d["s3"], dtype=np.float64),
            s4=np.asarray(d["s4"], dtype=np.float64),
            s5=np.asarray(d["s5"], dtype=np.float64),
            config_hash=d["config_hash"],
        )


def analytic_envelope(band) -> np.ndarray:
    """Amplitude envelope: magnitude of the analytic signal of ``band``.

    The analytic signal is built in the transform domain (negative bins
    zeroed, interior positive bins doubled, DC and Nyquist kept), which is
    what :func:`scipy.signal.hilbert` computes.
    """
    band = np.asarray(band, dtype=np.float64)
    if band.shape[-1] < 2:
        raise LengthMismatch("band must have at least 2 samples")
    return np.abs(hilbert(band, axis=-1))


def normalized_moments(x, n_moments: int) -> np.ndarray:
    """First ``n_moments`` normalized moments of a signal.

    The first is the mean, the second the variance over squared mean, and
    from the third on the standardized central moments (skewness,
    kurtosis, ...). Population normalization; denominators floored at EPS.
    """
    if n_moments < 2:
        raise ValueError("n_moments must be >= 2")
    x = as_float_vector(x)
    if x.size == 0:
        raise LengthMismatch("x must be non-empty")
    mu = float(np.mean(x))
    centered = x - mu
    var = float(np.mean(centered**2))
    sigma = np.sqrt(var)
    out = np.empty(n_moments)
    out[0] = mu
    out[1] = var / max(mu * mu, EPS)
    for order in range(3, n_moments + 1):
        out[order - 1] = float(np.mean(centered**order)) / max(sigma**order, EPS)
    return out


def _corr_vech(rows: np.ndarray) -> np.ndarray:
    """Upper off-diagonal Pearson correlations of the rows, (i<j) order."""
    k, n = rows.shape
    centered = rows - rows.mean(axis=1, keepdims=True)
    cov = centered @ centered.T / n
    var = np.diag(cov).copy()
    denom = np.sqrt(np.outer(var, var))
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = cov / np.maximum(denom, EPS)
    corr[var < EPS, :] = 0.0
    corr[:, var < EPS] = 0.0
    np.clip(corr, -1.0, 1.0, out=corr)
    iu, ju = np.triu_indices(k, k=1)
    return corr[iu, ju]


def pearson_corr_vech(vectors) -> np.ndarray:
    """Half-vectorized correlation matrix of k equal-length signals.

    Entries follow (i, j) for i < j in lexicographic order; the diagonal is
    excluded. Pairs involving a vector of near-zero variance yield 0.
    """
    rows = [as_float_vector(v, f"vectors[{i}]") for i, v in enumerate(vectors)]
    if len(rows) < 2:
        raise ValueError("need at least 2 vectors")
    n = rows[0].size
    if n < 2:
        raise LengthMismatch("vectors must have length >= 2")
    if any(r.size != n for r in rows):
        raise LengthMismatch("vectors must all have the same length")
    return _corr_vech(np.vstack(rows))


def _decimate_mean(env: np.ndarray, factor: int) -> np.ndarray:
    if factor == 1:
        return env
    nf, n = env.shape
    return env.reshape(nf, n // factor, factor).mean(axis=2)


def _analyze_frame(samples: np.ndarray, cfg: StatsConfig):
    """Cochlear bands, envelopes, and modulation bands for one frame."""
    cochlear_fb = cached_filterbank(cfg.cochlear, cfg.frame_length)
    mod_length = cfg.frame_length // cfg.envelope_decimation
    modulation_fb = cached_filterbank(cfg.modulation, mod_length)

    bands = filter_signal(cochlear_fb, samples)
    envelopes = np.abs(hilbert(bands, axis=1))
    env_mod = _decimate_mean(envelopes, cfg.envelope_decimation)

    env_spec = np.fft.rfft(env_mod, axis=1)
    n_mod = cfg.modulation.n_filters
    mod_bands = np.empty((env_mod.shape[0], n_mod, env_mod.shape[1]))
    for k in range(n_mod):
        mod_bands[:, k, :] = np.fft.irfft(
            env_spec * modulation_fb.responses[k][None, :], n=env_mod.shape[1], axis=1
        )
    return envelopes, env_mod, mod_bands


def summary_statistics(x, cfg: StatsConfig) -> SummaryStats:
    """Compute the five summary-statistics sets of a frame.

    ``x`` may be a :class:`texstat.audio_io.Signal` (its sample rate must
    match the cochlear bank) or a bare array of ``cfg.frame_length``
    samples.
    """
    cfg.validate()
    sample_rate = getattr(x, "sample_rate", None)
    if sample_rate is not None and abs(sample_rate - cfg.cochlear.sample_rate) > 1e-9:
        raise ConfigMismatch(
            f"signal rate {sample_rate} != config rate {cfg.cochlear.sample_rate}"
        )
    samples = as_float_vector(getattr(x, "samples", x), "x")
    if samples.size != cfg.frame_length:
        raise ConfigMismatch(
            f"signal length {samples.size} != frame_length {cfg.frame_length}"
        )
    check_finite(samples, "x")

    envelopes, env_mod, mod_bands = _analyze_frame(samples, cfg)
    nf = cfg.cochlear.n_filters
    ng = cfg.modulation.n_filters

    # s1: per-moment blocks of all envelopes, weighted by alpha
    mu = envelopes.mean(axis=1)
    centered = envelopes - mu[:, None]
    var = np.mean(centered**2, axis=1)
    sigma = np.sqrt(var)
    moments = np.empty((cfg.n_moments, nf))
    moments[0] = mu
    moments[1] = var / np.maximum(mu**2, EPS)
    for order in range(3, cfg.n_moments + 1):
        moments[order - 1] = np.mean(centered**order, axis=1) / np.maximum(
            sigma**order, EPS
        )
    s1 = (np.asarray(cfg.alpha)[:, None] * moments).ravel()

    # s2: cross-band envelope correlations
    s2 = _corr_vech(envelopes)

    # s3: modulation-band energy relative to envelope energy, per band
    mod_centered = mod_bands - mod_bands.mean(axis=2, keepdims=True)
    mod_sd = np.sqrt(np.mean(mod_centered**2, axis=2))  # (nf, ng)
    env_centered = env_mod - env_mod.mean(axis=1, keepdims=True)
    env_sd = np.sqrt(np.mean(env_centered**2, axis=1))  # (nf,)
    s3 = (mod_sd / np.maximum(env_sd, EPS)[:, None]).ravel()

    # s4: within-band correlations across modulation bands
    s4 = np.concatenate([_corr_vech(mod_bands[j]) for j in range(nf)])

    # s5: cross-band correlations within each modulation band
    s5 = np.concatenate([_corr_vech(mod_bands[:, k, :]) for k in range(ng)])

    return SummaryStats(
        s1=s1, s2=s2, s3=s3, s4=s4, s5=s5, config_hash=cfg.config_hash
    )


def calibrate_alpha(frames, cfg: StatsConfig, round_to: int = 1) -> tuple:
    """Recalibrate alpha so the per-moment blocks of s1 spread comparably.

    Computes the unweighted moment blocks over a calibration corpus and
    returns weights proportional to the inverse standard deviation of each
    block's values, normalized so the first weight is 1. This is how the
    shipped defaults were frozen; rerun it when the filterbank geometry or
    corpus changes materially.
    """
    cfg.validate()
    unit = StatsConfig(
        cochlear=cfg.cochlear,
        modulation=cfg.modulation,
        n_moments=cfg.n_moments,
        alpha=tuple(1.0 for _ in range(cfg.n_moments)),
        frame_length=cfg.frame_length,
        envelope_decimation=cfg.envelope_decimation,
    )
    nf = cfg.cochlear.n_filters
    blocks = []
    for frame in frames:
        s1 = summary_statistics(frame, unit).s1
        blocks.append(s1.reshape(cfg.n_moments, nf))
    stacked = np.stack(blocks)  # (n_frames, L, nf)
    spread = stacked.std(axis=(0, 2))
    spread = np.maximum(spread, EPS)
    alpha = spread[0] / spread
    alpha /= alpha[0]
    if round_to is not None:
        alpha = np.array([round(float(a), round_to) for a in alpha])
        alpha = np.maximum(alpha, 10.0**-round_to)
    return tuple(float(a) for a in alpha)
