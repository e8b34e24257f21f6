"""Decoding strategies: nucleus filtering, temperature, token sampling,
parallel multi-candidate generation, and a beam-search baseline.

Candidates are stored ragged and PAD-free; the END marker terminates a
row but is not stored. Padding to a rectangle is purely a presentation
concern and never happens here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .lm import GeneratorModel
from .text import END_ID, START_ID


@dataclass(frozen=True)
class SamplingConfig:
    top_p: float = 0.8
    temperature: float = 1.0
    num_samples: int = 200
    max_length: int = 48
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.temperature <= 0.0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if self.num_samples < 1:
            raise ValueError(f"num_samples must be >= 1, got {self.num_samples}")
        if self.max_length < 1:
            raise ValueError(f"max_length must be >= 1, got {self.max_length}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass
class CandidatePool:
    """M candidate token sequences sampled for one input.

    ``input`` and ``candidates`` hold surface token strings; candidates
    contain no reserved markers. ``meta`` carries optional record fields
    (id, reference, language) through the file pipeline.
    """

    input: list[str]
    candidates: list[list[str]]
    config: SamplingConfig
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for cand in self.candidates:
            if len(cand) > self.config.max_length:
                raise ValueError("candidate longer than max_length")


def _validate_dist(dist) -> np.ndarray:
    arr = np.asarray(dist, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise ValueError("distribution must be a nonempty 1-D vector")
    if np.any(arr < 0.0):
        raise ValueError("distribution entries must be nonnegative")
    return arr


def nucleus_filter(dist, beta: float) -> np.ndarray:
    """Keep the minimal top-probability set with mass >= beta, rescaled.

    Ties at the boundary are included by ascending token index. The
    survivors keep their relative order; everything else becomes 0.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    return _kernels.nucleus_filter_kernel(_validate_dist(dist), beta)


def apply_temperature(dist, t: float) -> np.ndarray:
    """Exponent-rescale p_i^(1/t), renormalized; t=1 is the identity."""
    if t <= 0.0:
        raise ValueError(f"temperature must be positive, got {t}")
    return _kernels.apply_temperature_kernel(_validate_dist(dist), t)


def sample_token(dist, rng: np.random.Generator) -> int:
    """Draw one token index with probability dist[i]; advances ``rng``."""
    return int(_kernels.sample_token_kernel(_validate_dist(dist), rng.random()))


def _row_rng(seed: int, row: int) -> np.random.Generator:
    # Splittable per-row stream: reproducible regardless of how many
    # rows run or in which order.
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(row,)))


def _generate_row(
    model: GeneratorModel, code: Sequence[int], config: SamplingConfig, row: int
) -> list[int]:
    rng = _row_rng(config.seed, row)
    prefix = [START_ID]
    out: list[int] = []
    while len(out) < config.max_length:
        dist = model.next_distribution(code, prefix)
        tok = int(
            _kernels.sample_step_kernel(
                dist, config.top_p, config.temperature, rng.random()
            )
        )
        if tok == END_ID:
            break
        out.append(tok)
        prefix.append(tok)
    return out


def decode_candidates(
    model: GeneratorModel, code: Sequence[int], config: SamplingConfig
) -> CandidatePool:
    """Sample ``num_samples`` candidate rows independently.

    Each row applies temperature, then the nucleus filter, then one
    inverse-CDF draw per step, stopping at END or ``max_length``. Row
    rng streams depend only on (seed, row index), so the first M rows
    of a larger batch are identical to a batch of exactly M.
    """
    vocab = model.vocabulary
    candidates = [
        vocab.decode(_generate_row(model, code, config, row))
        for row in range(config.num_samples)
    ]
    return CandidatePool(
        input=vocab.decode(list(code)), candidates=candidates, config=config
    )


def beam_search(
    model: GeneratorModel,
    code: Sequence[int],
    beam_size: int,
    k: int,
    max_length: int = 48,
) -> list[list[int]]:
    """Top-k END-terminated (or length-capped) sequences by log-probability.

    No length normalization. Ties break by lexicographic token-id order.
    Returned sequences are surface token ids without START or END.
    """
    if beam_size < 1:
        raise ValueError(f"beam_size must be >= 1, got {beam_size}")
    if not 1 <= k <= beam_size:
        raise ValueError(f"k must be in [1, beam_size], got k={k} beam_size={beam_size}")
    live: list[tuple[float, tuple[int, ...]]] = [(0.0, ())]
    finished: list[tuple[float, tuple[int, ...]]] = []
    while live:
        expansions: list[tuple[float, tuple[int, ...]]] = []
        for logp, ids in live:
            dist = model.next_distribution(code, [START_ID, *ids])
            with np.errstate(divide="ignore"):
                logdist = np.log(dist)
            for tok in range(dist.shape[0]):
                if dist[tok] <= 0.0:
                    continue
                cand = (logp + float(logdist[tok]), ids + (tok,))
                if tok == END_ID:
                    finished.append((cand[0], ids))
                elif len(cand[1]) >= max_length:
                    # Capped rows are kept: ranking can still use them.
                    finished.append(cand)
                else:
                    expansions.append(cand)
        expansions.sort(key=lambda e: (-e[0], e[1]))
        live = expansions[:beam_size]
    finished.sort(key=lambda e: (-e[0], e[1]))
    return [list(ids) for _, ids in finished[:k]]
