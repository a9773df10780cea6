"""Monte Carlo estimate of the MoE load-imbalance factor.

Routing is idealized as uniform: each token picks its active experts as a
uniform random subset of the routed experts. The imbalance factor is the
mean over trials of (max expert load) / max(tokens * active / routed, 1),
i.e. how much the most loaded expert exceeds the floored average load.
Setting the factor to 1 downstream models perfect routing knowledge,
instant migration, or full expert replication.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .errors import DomainError

# Trials are drawn in chunks, each from its own child of the caller's
# SeedSequence: results are bit-identical for a given seed no matter how
# the chunks are scheduled, and chunks may run in parallel. Chunk size is
# a pure function of the arguments, which keeps determinism.
_CHUNK_PICK_BUDGET = 1 << 22
_MAX_CHUNK = 4096
DEFAULT_TRIALS = 1_000_000


def _chunk_trials(tokens: int, active: int) -> int:
    return max(1, min(_MAX_CHUNK, _CHUNK_PICK_BUDGET // (tokens * active)))


def _draw_distinct_picks(rng, rows: int, active: int, routed: int):
    """(rows, active) expert indices, distinct within each row.

    Rejection sampling: redraw any row containing a duplicate. Conditioning
    iid-uniform tuples on all-distinct yields exactly the uniform distinct
    subset. Falls back to random-key selection when `active` approaches
    `routed` and rejection would rarely accept.
    """
    if active == 1:
        return rng.integers(0, routed, size=(rows, 1), dtype=np.int32)
    if active * 2 > routed:
        keys = rng.random((rows, routed), dtype=np.float32)
        return np.argpartition(keys, active - 1, axis=1)[:, :active]
    picks = rng.integers(0, routed, size=(rows, active), dtype=np.int32)
    srt = np.sort(picks, axis=1)
    pending = np.flatnonzero((srt[:, 1:] == srt[:, :-1]).any(axis=1))
    while pending.size:
        repl = rng.integers(0, routed, size=(pending.size, active), dtype=np.int32)
        picks[pending] = repl
        srt = np.sort(repl, axis=1)
        pending = pending[(srt[:, 1:] == srt[:, :-1]).any(axis=1)]
    return picks


@dataclass(frozen=True)
class MoeImbalance:
    """Estimated max/mean expert load ratio and how it was sampled."""

    mi: float
    trials: int
    seed: int
    tokens: int

    def __post_init__(self):
        if self.mi < 1.0:
            raise ValueError("imbalance factor below 1 is not a valid max/mean ratio")


def estimate_imbalance(
    routed_experts: int,
    active_experts: int,
    tokens: int,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> MoeImbalance:
    """Sample uniform routing and return the mean imbalance factor.

    Each trial routes `tokens` tokens, every token choosing
    `active_experts` distinct experts uniformly from `routed_experts` bins.
    Deterministic for a fixed seed (NumPy PCG64 via SeedSequence.spawn).
    """
    if active_experts > routed_experts:
        raise DomainError(
            f"active experts ({active_experts}) cannot exceed routed experts ({routed_experts})"
        )
    if tokens < 1:
        raise DomainError("tokens must be >= 1")
    if trials < 1:
        raise DomainError("trials must be >= 1")

    denom = max(tokens * active_experts / routed_experts, 1.0)
    chunk = _chunk_trials(tokens, active_experts)
    children = np.random.SeedSequence(seed).spawn(ceil(trials / chunk))

    total_max = 0.0
    remaining = trials
    for child in children:
        n = min(chunk, remaining)
        remaining -= n
        rng = np.random.default_rng(child)
        picks = _draw_distinct_picks(rng, n * tokens, active_experts, routed_experts)
        odt = np.int32 if n * routed_experts < 2**31 else np.int64
        flat = picks.reshape(n, -1) + (np.arange(n, dtype=odt) * routed_experts)[:, None]
        loads = np.bincount(flat.ravel(), minlength=n * routed_experts)
        total_max += loads.reshape(n, routed_experts).max(axis=1).sum()

    mi = float(total_max / trials) / denom
    return MoeImbalance(mi=mi, trials=trials, seed=seed, tokens=tokens)


def estimate_imbalance_binomial(
    routed_experts: int,
    active_experts: int,
    tokens: int,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> MoeImbalance:
    """Cheap large-batch variant: sample each expert's load directly.

    Under uniform routing every expert's load is exactly
    Binomial(tokens, active/routed); only the (negative) cross-expert
    correlation is dropped, which at large token counts shifts the max by
    well under a percent. Cost is O(trials * routed) regardless of tokens,
    where the subset sampler is O(trials * tokens * routed).
    """
    if active_experts > routed_experts:
        raise DomainError(
            f"active experts ({active_experts}) cannot exceed routed experts ({routed_experts})"
        )
    if tokens < 1 or trials < 1:
        raise DomainError("tokens and trials must be >= 1")
    denom = max(tokens * active_experts / routed_experts, 1.0)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    p = active_experts / routed_experts
    total_max = 0.0
    remaining = trials
    while remaining:
        n = min(65_536, remaining)
        remaining -= n
        loads = rng.binomial(tokens, p, size=(n, routed_experts))
        total_max += loads.max(axis=1).sum()
    return MoeImbalance(mi=(total_max / trials) / denom, trials=trials, seed=seed,
                        tokens=tokens)
