"""WAV ingest/emit and frame segmentation.

Decoding is delegated to :mod:`scipy.io.wavfile` behind a fixed contract:
16-bit and 24-bit PCM are scaled to [-1, 1) by their nominal full scale,
32-bit float passes through untouched, and multichannel audio is downmixed
to mono by the per-sample arithmetic mean. No resampling ever happens here;
rate policy is enforced by the callers.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .errors import CorruptFile, UnsupportedFormat

__all__ = ["Signal", "read_wav", "write_wav", "segment"]

_PCM16_SCALE = 32768.0
_PCM24_SCALE = 8388608.0


@dataclass(frozen=True, eq=False)
class Signal:
    """A mono audio frame: float64 samples plus their sample rate."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        object.__setattr__(
            self, "samples", np.asarray(self.samples, dtype=np.float64)
        )

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def read_wav(path) -> Signal:
    """Decode a RIFF/WAVE file to a mono float Signal.

    Supports 16-bit PCM, 24-bit PCM, and 32-bit float encodings. Integer
    samples are scaled by 1/32768 (16-bit) or 1/8388608 (24-bit).

    Raises
    ------
    FileNotFoundError
        If ``path`` does not exist.
    UnsupportedFormat
        For encodings outside the supported three.
    CorruptFile
        If the container cannot be parsed.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    try:
        rate, data = wavfile.read(str(path))
    except ValueError as exc:
        message = str(exc)
        if "format" in message.lower() and "not understood" not in message.lower():
            raise UnsupportedFormat(f"{path}: {message}") from None
        raise CorruptFile(f"{path}: {message}") from None
    except Exception as exc:  # truncated chunks etc. surface in many shapes
        raise CorruptFile(f"{path}: {exc}") from None

    if data.dtype == np.int16:
        samples = data.astype(np.float64) / _PCM16_SCALE
    elif data.dtype == np.int32:
        # scipy left-justifies 24-bit PCM into int32, so /2^31 == value/2^23
        samples = data.astype(np.float64) / 2147483648.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise UnsupportedFormat(f"{path}: unsupported sample dtype {data.dtype}")

    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return Signal(samples=samples, sample_rate=float(rate))


def write_wav(path, x: Signal, encoding: str = "float32") -> None:
    """Write a Signal as 16-bit PCM or 32-bit float RIFF/WAVE.

    pcm16 clamps to [-1, 1 - 2**-15] and rounds to nearest before
    quantizing; float32 preserves values bit-exactly (after the float32
    cast).
    """
    if encoding not in ("pcm16", "float32"):
        raise ValueError(f"encoding must be 'pcm16' or 'float32', got {encoding!r}")
    samples = np.asarray(x.samples, dtype=np.float64)
    try:
        if encoding == "pcm16":
            clipped = np.clip(samples, -1.0, 1.0 - 2.0**-15)
            quantized = np.round(clipped * _PCM16_SCALE).astype(np.int16)
            wavfile.write(str(path), int(x.sample_rate), quantized)
        else:
            wavfile.write(str(path), int(x.sample_rate), samples.astype(np.float32))
    except OSError:
        raise
    except Exception as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc


def segment(x: Signal, frame: int, hop: int) -> list[Signal]:
    """Split into frames starting at 0, hop, 2*hop, ...; partials dropped."""
    if frame < 1 or hop < 1:
        raise ValueError("frame and hop must be >= 1")
    out = []
    start = 0
    while start + frame <= x.samples.size:
        out.append(Signal(samples=x.samples[start:start + frame].copy(),
                          sample_rate=x.sample_rate))
        start += hop
    return out
