"""Cochlear (ERB-spaced) and modulation (log-spaced) filterbanks.

Banks are built as amplitude-complementary raised-cosine responses on a
warped frequency scale and applied by multiplication in the frequency
domain, so filtering is zero-phase and the bands sum back to the in-range
content of the input exactly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidSpec, LengthMismatch, TooFewBins
from .validation import as_float_vector, check_power_of_two

__all__ = [
    "FilterbankSpec",
    "Filterbank",
    "Subbands",
    "freq_to_erb",
    "erb_to_freq",
    "make_filterbank",
    "apply_filterbank",
]

# Glasberg & Moore ERB-rate constants
_ERB_A = 24.7
_ERB_Q = 9.265


def freq_to_erb(freq_hz):
    """Convert frequency in Hz to the ERB-rate scale (Glasberg & Moore)."""
    return _ERB_Q * np.log(1.0 + np.asarray(freq_hz, dtype=np.float64) / (_ERB_A * _ERB_Q))


def erb_to_freq(n_erb):
    """Inverse of :func:`freq_to_erb`."""
    return _ERB_A * _ERB_Q * (np.exp(np.asarray(n_erb, dtype=np.float64) / _ERB_Q) - 1.0)


@dataclass(frozen=True)
class FilterbankSpec:
    """Declarative description of a filterbank.

    ``kind`` selects the warping of the frequency axis: ``"erb"`` spaces
    band centers uniformly on the ERB-rate scale, ``"log"`` uniformly in
    log-frequency.
    """

    kind: str
    n_filters: int
    sample_rate: float
    f_lo: float
    f_hi: float

    def validate(self) -> "FilterbankSpec":
        if self.kind not in ("erb", "log"):
            raise InvalidSpec(f"kind must be 'erb' or 'log', got {self.kind!r}")
        if self.n_filters < 1:
            raise InvalidSpec(f"n_filters must be >= 1, got {self.n_filters}")
        if not (0.0 < self.f_lo < self.f_hi <= self.sample_rate / 2.0):
            raise InvalidSpec(
                f"need 0 < f_lo < f_hi <= sample_rate/2, got "
                f"f_lo={self.f_lo}, f_hi={self.f_hi}, sample_rate={self.sample_rate}"
            )
        return self

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_filters": int(self.n_filters),
            "sample_rate": float(self.sample_rate),
            "f_lo": float(self.f_lo),
            "f_hi": float(self.f_hi),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FilterbankSpec":
        return cls(
            kind=d["kind"],
            n_filters=int(d["n_filters"]),
            sample_rate=float(d["sample_rate"]),
            f_lo=float(d["f_lo"]),
            f_hi=float(d["f_hi"]),
        ).validate()


@dataclass(frozen=True, eq=False)
class Filterbank:
    """A bank of real nonnegative amplitude responses on an rFFT grid.

    ``responses`` has shape (n_filters, transform_length // 2 + 1) and the
    responses sum to 1 at every grid frequency inside [f_lo, f_hi].
    Instances are immutable and safe to share across threads.
    """

    spec: FilterbankSpec
    transform_length: int
    responses: np.ndarray
    center_freqs: np.ndarray

    def __post_init__(self):
        self.responses.setflags(write=False)
        self.center_freqs.setflags(write=False)

    @property
    def grid_freqs(self) -> np.ndarray:
        return np.fft.rfftfreq(self.transform_length, 1.0 / self.spec.sample_rate)

    @property
    def fb_hash(self) -> str:
        payload = dict(self.spec.to_dict(), transform_length=self.transform_length)
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class Subbands:
    """Equal-length real band signals produced by :func:`apply_filterbank`."""

    bands: np.ndarray  # (n_filters, n_samples)
    sample_rate: float


def _warp_funcs(kind: str):
    if kind == "erb":
        return freq_to_erb
    return np.log


def make_filterbank(spec: FilterbankSpec, transform_length: int) -> Filterbank:
    """Construct an amplitude-complementary raised-cosine filterbank.

    Band centers are spaced uniformly on the warped scale from f_lo to
    f_hi inclusive; each band is a raised-cosine bump two spacings wide,
    so adjacent bands cross at amplitude 0.5 and any point between two
    centers is covered by exactly those two bands, summing to 1. The first
    and last bands are held flat at 1 below/above their centers (for a
    single band this degenerates to an all-pass over [f_lo, f_hi]), and
    all responses are zero outside [f_lo, f_hi].

    Parameters
    ----------
    spec : FilterbankSpec
    transform_length : int
        FFT length the responses are sampled for; a power of two >= 64.

    Raises
    ------
    InvalidSpec
        If the spec violates its invariants.
    TooFewBins
        If fewer grid frequencies fall inside [f_lo, f_hi] than bands.
    """
    spec.validate()
    try:
        transform_length = check_power_of_two(transform_length, 64, "transform_length")
    except ValueError as exc:
        raise InvalidSpec(str(exc)) from None

    freqs = np.fft.rfftfreq(transform_length, 1.0 / spec.sample_rate)
    in_range = (freqs >= spec.f_lo) & (freqs <= spec.f_hi)
    if int(in_range.sum()) < spec.n_filters:
        raise TooFewBins(
            f"only {int(in_range.sum())} grid frequencies inside "
            f"[{spec.f_lo}, {spec.f_hi}] Hz for {spec.n_filters} bands "
            f"(transform_length={transform_length})"
        )

    warp = _warp_funcs(spec.kind)
    u_lo = float(warp(spec.f_lo))
    u_hi = float(warp(spec.f_hi))
    # avoid log(0) at the DC bin; DC is outside [f_lo, f_hi] and gets zeroed
    u = np.asarray(warp(np.maximum(freqs, np.finfo(np.float64).tiny)))

    n = spec.n_filters
    responses = np.zeros((n, freqs.size))
    if n == 1:
        centers_u = np.array([0.5 * (u_lo + u_hi)])
        responses[0, in_range] = 1.0
    else:
        centers_u = np.linspace(u_lo, u_hi, n)
        width = centers_u[1] - centers_u[0]
        for i, c in enumerate(centers_u):
            r = np.zeros_like(u)
            on = np.abs(u - c) <= width
            r[on] = 0.5 * (1.0 + np.cos(np.pi * (u[on] - c) / width))
            if i == 0:
                r[u < c] = 1.0
            if i == n - 1:
                r[u > c] = 1.0
            r[~in_range] = 0.0
            responses[i] = r

    if spec.kind == "erb":
        center_freqs = np.asarray(erb_to_freq(centers_u), dtype=np.float64)
    else:
        center_freqs = np.exp(centers_u)
    if n == 1:
        # the sole band is an all-pass over the range; report its warped midpoint
        center_freqs = np.atleast_1d(center_freqs)

    return Filterbank(
        spec=spec,
        transform_length=transform_length,
        responses=responses,
        center_freqs=np.atleast_1d(center_freqs),
    )


@lru_cache(maxsize=32)
def cached_filterbank(spec: FilterbankSpec, transform_length: int) -> Filterbank:
    """Memoized :func:`make_filterbank`; instances are immutable, sharing is safe."""
    return make_filterbank(spec, transform_length)


def apply_filterbank(fb: Filterbank, x) -> Subbands:
    """Split ``x`` into zero-phase subbands by spectral multiplication.

    Accepts a :class:`texstat.audio_io.Signal` or a bare array whose length
    equals the bank's transform length. The returned bands are real and sum
    to the in-range content of ``x``.
    """
    sample_rate = getattr(x, "sample_rate", fb.spec.sample_rate)
    samples = as_float_vector(getattr(x, "samples", x), "x")
    if samples.size != fb.transform_length:
        raise LengthMismatch(
            f"signal length {samples.size} != transform length {fb.transform_length}"
        )
    bands = filter_signal(fb, samples)
    return Subbands(bands=bands, sample_rate=float(sample_rate))


def filter_signal(fb: Filterbank, samples: np.ndarray) -> np.ndarray:
    """Array-level core of :func:`apply_filterbank` (no wrapping, no checks)."""
    spectrum = np.fft.rfft(samples)
    return np.fft.irfft(spectrum[None, :] * fb.responses, n=samples.size, axis=1)
