"""Gauss-Markov sources, per-node caches, ages, estimation error, and reward.

Each node observes a driftless random walk: value_{k+1} = value_k + N(0, sigma^2),
started at 0.  Node i keeps, per origin j, only the freshest packet it has
ever received (freshest-only caching is lossless for MMSE estimation of a
Markov source).  The cache is represented by three m-by-m arrays: sampling
stamps, sampled values, and a has-entry mask.  Ages derive from stamps:
age[i][j] = k - stamp[i][j], with the diagonal pinned to 0 (a node always
knows its own current value) and never-received entries at stamp 0 / value 0,
so their age equals the current slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError


@dataclass
class SourceEnsemble:
    """Current values of the m monitored random walks at slot k."""

    sigma: float
    values: np.ndarray
    k: int = 0

    @classmethod
    def initial(cls, m: int, sigma: float = 1.0) -> "SourceEnsemble":
        if sigma < 0:
            raise ParameterError(f"sigma must be >= 0, got {sigma}")
        return cls(sigma=float(sigma), values=np.zeros(m), k=0)

    @property
    def m(self) -> int:
        return len(self.values)


def evolve_sources(s: SourceEnsemble, rng: np.random.Generator) -> SourceEnsemble:
    """Advance every walk by one independent N(0, sigma^2) increment."""
    s.values = s.values + rng.normal(0.0, s.sigma, size=s.m)
    s.k += 1
    return s


@dataclass(frozen=True)
class CacheEntry:
    """A packet: which process it samples, the sampled value, and when."""

    origin: int
    value: float
    stamp: int


class EstimationState:
    """Per-node caches and the derived age matrix at slot k."""

    def __init__(self, m: int):
        if m < 1:
            raise ParameterError(f"node count must be >= 1, got {m}")
        self.m = m
        self.k = 0
        self.stamps = np.zeros((m, m), dtype=np.int64)
        self.values = np.zeros((m, m), dtype=float)
        self.has_entry = np.zeros((m, m), dtype=bool)

    @property
    def ages(self) -> np.ndarray:
        a = self.k - self.stamps
        np.fill_diagonal(a, 0)
        return a

    def entry(self, holder: int, origin: int) -> CacheEntry | None:
        if not self.has_entry[holder, origin]:
            return None
        return CacheEntry(origin=origin, value=float(self.values[holder, origin]), stamp=int(self.stamps[holder, origin]))

    def cached_origins(self, holder: int) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.has_entry[holder]))


def deliver_packet(state: EstimationState, receiver: int, entry: CacheEntry) -> EstimationState:
    """Insert a packet into the receiver's cache; fresher stamps win.

    Stale packets (stamp not newer than the held entry) are silently
    discarded: collisions and relaying make stale arrivals normal.  Packets
    about the receiver's own process are dropped too, since the diagonal
    estimate is the true value by convention.
    """
    if entry.stamp > state.k:
        raise ParameterError(f"packet stamped {entry.stamp} is in the future of slot {state.k}")
    o = entry.origin
    if o == receiver:
        return state
    if (not state.has_entry[receiver, o]) or entry.stamp > state.stamps[receiver, o]:
        state.stamps[receiver, o] = entry.stamp
        state.values[receiver, o] = entry.value
        state.has_entry[receiver, o] = True
    return state


def mmse_estimate(state: EstimationState, sources: SourceEnsemble, i: int, j: int) -> float:
    """Node i's MMSE estimate of process j.

    For a driftless random walk the conditional expectation given the last
    sample is the sample itself; with no packet ever received the estimate
    is 0 (the common known start value).
    """
    if i == j:
        return float(sources.values[i])
    return float(state.values[i, j])  # 0.0 when no entry, by construction


def estimates_matrix(state: EstimationState, sources: SourceEnsemble) -> np.ndarray:
    """All m^2 estimates: row i holds node i's estimates of every process."""
    est = state.values.copy()
    np.fill_diagonal(est, sources.values)
    return est


def instantaneous_reward(state: EstimationState, sources: SourceEnsemble, mode: str = "realized") -> float:
    """Negative mean squared estimation error over all ordered node pairs.

    ``realized`` uses the actual squared errors; ``expected`` substitutes
    sigma^2 * age (the conditional expectation of the squared error given the
    age), which is deterministic given the decision trajectory.
    """
    if state.k != sources.k:
        raise ParameterError(f"state slot {state.k} != source slot {sources.k}")
    m = state.m
    if mode == "realized":
        err = estimates_matrix(state, sources) - sources.values[None, :]
        return float(-np.sum(err * err) / (m * m))
    if mode == "expected":
        return float(-sources.sigma**2 * np.sum(state.ages) / (m * m))
    raise ParameterError(f"unknown reward mode {mode!r}")


def asee(rewards: Sequence[float]) -> float:
    """Average sum of estimation errors over a reward trajectory."""
    if len(rewards) == 0:
        raise ParameterError("cannot average an empty reward trajectory")
    return float(-np.mean(np.asarray(rewards, dtype=float)))
