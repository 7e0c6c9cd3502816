"""Global configuration: one JSON document wiring the whole pipeline.

A default config ships with the package (``data/default_config.json``);
every report embeds the hash of the config that produced it so results
stay comparable across runs and machines.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import InvalidSpec
from .evaluation import DEFAULT_FAD_BLOCKS
from .metric import MetricConfig
from .statistics import BLOCK_NAMES, StatsConfig

__all__ = ["GlobalConfig", "load_config", "default_config"]

CONFIG_VERSION = 1


@dataclass(frozen=True)
class GlobalConfig:
    """Statistics config plus metric weights, FAD mask, and synth defaults."""

    stats: StatsConfig = field(default_factory=StatsConfig)
    beta: tuple = (1.0, 1.0, 1.0, 1.0, 1.0)
    fad_blocks: tuple = DEFAULT_FAD_BLOCKS
    n_params: int = 256
    rng_seed: int = 42
    sample_rate: float = 44100.0

    def validate(self) -> "GlobalConfig":
        self.metric().validate()
        unknown = [b for b in self.fad_blocks if b not in BLOCK_NAMES]
        if unknown:
            raise InvalidSpec(f"unknown fad blocks: {unknown}")
        if self.n_params < 1 or 2 * self.n_params - 1 > self.stats.frame_length:
            raise InvalidSpec(
                f"n_params={self.n_params} does not fit frames of "
                f"{self.stats.frame_length} samples"
            )
        if abs(self.sample_rate - self.stats.cochlear.sample_rate) > 1e-9:
            raise InvalidSpec(
                f"sample_rate {self.sample_rate} != cochlear rate "
                f"{self.stats.cochlear.sample_rate}"
            )
        return self

    def metric(self) -> MetricConfig:
        return MetricConfig(stats=self.stats, beta=self.beta)

    def to_dict(self) -> dict:
        return {
            "version": CONFIG_VERSION,
            "stats": self.stats.to_dict(),
            "beta": [float(b) for b in self.beta],
            "fad_blocks": list(self.fad_blocks),
            "n_params": int(self.n_params),
            "rng_seed": int(self.rng_seed),
            "sample_rate": float(self.sample_rate),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GlobalConfig":
        version = d.get("version")
        if version != CONFIG_VERSION:
            raise InvalidSpec(f"unsupported config version: {version!r}")
        return cls(
            stats=StatsConfig.from_dict(d["stats"]),
            beta=tuple(float(b) for b in d["beta"]),
            fad_blocks=tuple(d["fad_blocks"]),
            n_params=int(d["n_params"]),
            rng_seed=int(d["rng_seed"]),
            sample_rate=float(d["sample_rate"]),
        ).validate()

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def with_frame_length(self, frame_length: int) -> "GlobalConfig":
        """Same config at a different analysis frame length."""
        stats = StatsConfig(
            cochlear=self.stats.cochlear,
            modulation=self.stats.modulation,
            n_moments=self.stats.n_moments,
            alpha=self.stats.alpha,
            frame_length=int(frame_length),
            envelope_decimation=self.stats.envelope_decimation,
        )
        return GlobalConfig(
            stats=stats,
            beta=self.beta,
            fad_blocks=self.fad_blocks,
            n_params=min(self.n_params, (int(frame_length) + 1) // 2),
            rng_seed=self.rng_seed,
            sample_rate=self.sample_rate,
        ).validate()


def default_config() -> GlobalConfig:
    """The packaged default configuration."""
    text = resources.files("texstat").joinpath("data/default_config.json").read_text()
    return GlobalConfig.from_dict(json.loads(text))


def load_config(path=None) -> GlobalConfig:
    """Load a config file, falling back to the packaged default."""
    if path is None:
        return default_config()
    doc = json.loads(Path(path).read_text())
    return GlobalConfig.from_dict(doc)
