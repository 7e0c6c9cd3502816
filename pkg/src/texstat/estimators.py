"""Scikit-learn compatible wrappers around the analysis and synthesis cores.

These estimators let the texture statistics and the envelope-imposition
resynthesizer slot into sklearn pipelines: ``X`` is always a
``(n_frames, frame_length)`` array of audio frames. The fitted attributes
hold the immutable filterbanks/seed, so a fitted estimator is thread-safe
for transform.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .evaluation import DEFAULT_FAD_BLOCKS
from .filterbanks import FilterbankSpec, cached_filterbank
from .statistics import StatsConfig, summary_statistics
from .synth import extract_params, generate_seed, texenv_synthesize
from .validation import check_frame_matrix

__all__ = ["TextureStatsTransformer", "TexEnvResynthesizer"]


class TextureStatsTransformer(BaseEstimator, TransformerMixin):
    """Map audio frames to summary-statistics feature rows.

    Parameters mirror the statistics configuration; ``blocks`` selects
    which statistics sets are concatenated into the output features
    (defaults to the moment and modulation-energy blocks used for corpus
    embeddings).
    """

    def __init__(
        self,
        n_cochlear=16,
        n_modulation=6,
        n_moments=4,
        alpha=(1.0, 20.0, 80.0, 160.0),
        sample_rate=44100.0,
        frame_length=65536,
        f_lo=20.0,
        f_hi=None,
        blocks=DEFAULT_FAD_BLOCKS,
    ):
        self.n_cochlear = n_cochlear
        self.n_modulation = n_modulation
        self.n_moments = n_moments
        self.alpha = alpha
        self.sample_rate = sample_rate
        self.frame_length = frame_length
        self.f_lo = f_lo
        self.f_hi = f_hi
        self.blocks = blocks

    def _build_config(self) -> StatsConfig:
        f_hi = self.sample_rate / 2.0 if self.f_hi is None else self.f_hi
        return StatsConfig(
            cochlear=FilterbankSpec(
                kind="erb",
                n_filters=self.n_cochlear,
                sample_rate=self.sample_rate,
                f_lo=self.f_lo,
                f_hi=f_hi,
            ),
            modulation=FilterbankSpec(
                kind="log",
                n_filters=self.n_modulation,
                sample_rate=self.sample_rate,
                f_lo=0.5,
                f_hi=100.0,
            ),
            n_moments=self.n_moments,
            alpha=tuple(self.alpha),
            frame_length=self.frame_length,
        ).validate()

    def fit(self, X, y=None):
        self.config_ = self._build_config()
        blocks = tuple(self.blocks)
        lengths = self.config_.block_lengths()
        self.n_features_out_ = sum(lengths[b] for b in blocks)
        check_frame_matrix(X, self.config_.frame_length)
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        frames = check_frame_matrix(X, self.config_.frame_length)
        blocks = tuple(self.blocks)
        rows = [
            summary_statistics(frame, self.config_).concatenated(blocks)
            for frame in frames
        ]
        return np.vstack(rows)


class TexEnvResynthesizer(BaseEstimator, TransformerMixin):
    """Frame-wise analysis-synthesis through the envelope synthesizer.

    ``fit`` builds the filterbank and the deterministic noise seed;
    ``transform`` extracts per-band envelope parameters from each frame and
    renders it from the seed. Output frames differ from the inputs in fine
    time structure but keep their texture statistics.
    """

    def __init__(
        self,
        n_cochlear=16,
        n_params=256,
        rng_seed=42,
        sample_rate=44100.0,
        frame_length=65536,
        f_lo=20.0,
        f_hi=None,
        nonnegative_envelopes=False,
    ):
        self.n_cochlear = n_cochlear
        self.n_params = n_params
        self.rng_seed = rng_seed
        self.sample_rate = sample_rate
        self.frame_length = frame_length
        self.f_lo = f_lo
        self.f_hi = f_hi
        self.nonnegative_envelopes = nonnegative_envelopes

    def fit(self, X, y=None):
        f_hi = self.sample_rate / 2.0 if self.f_hi is None else self.f_hi
        spec = FilterbankSpec(
            kind="erb",
            n_filters=self.n_cochlear,
            sample_rate=self.sample_rate,
            f_lo=self.f_lo,
            f_hi=f_hi,
        ).validate()
        self.filterbank_ = cached_filterbank(spec, self.frame_length)
        self.seed_ = generate_seed(self.filterbank_, self.frame_length, self.rng_seed)
        check_frame_matrix(X, self.frame_length)
        return self

    def transform(self, X):
        check_is_fitted(self, "seed_")
        frames = check_frame_matrix(X, self.frame_length)
        out = np.empty_like(frames)
        for i, frame in enumerate(frames):
            params = extract_params(frame, self.filterbank_, self.n_params)
            rendered = texenv_synthesize(
                params, self.seed_, nonnegative_envelopes=self.nonnegative_envelopes
            )
            out[i] = rendered.samples
        return out
