"""Decision alphabet, one-slot collision resolution, and the simulator step.

A decision is a pair (mu, nu): silence is encoded as nu == i (and mu == i by
convention).  When transmitting, nu must be a neighbor; mu == i means
"sample my own process now and send that" (generate-at-will), mu != i means
"forward my freshest cached packet that originated at mu".  The literal
neighbor-origin-only alphabet is available via mu_domain="neighbors", where
mu == i can only mean silence.

Collision rule: a transmission i -> nu fails iff at least two nodes transmit
to nu, or nu simultaneously transmits to i.  Resolution is a pure function
of the joint decision profile and the topology; only senders observe the
outcome.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import DecisionError, ParameterError
from .sources import (
    CacheEntry,
    EstimationState,
    SourceEnsemble,
    deliver_packet,
    evolve_sources,
    instantaneous_reward,
)
from .topology import Topology

MU_DOMAINS = ("full", "neighbors")


class Feedback(IntEnum):
    NO_TX = 0
    SUCCESS = 1
    COLLISION = 2


@dataclass(frozen=True)
class Decision:
    mu: int
    nu: int

    def is_silence(self, node: int) -> bool:
        return self.nu == node


def decision_violation(
    mu: int,
    nu: int,
    node: int,
    neighbors,
    cached_origins,
    mu_domain: str = "full",
) -> str | None:
    """Why (mu, nu) is invalid for this node, or None if it is valid.

    Single source of truth for decision validity; the action-distribution
    mask and the protocol validator both call this.
    """
    if mu_domain not in MU_DOMAINS:
        raise ParameterError(f"mu_domain must be one of {MU_DOMAINS}, got {mu_domain!r}")
    if nu == node:
        if mu != node:
            return "silence must encode origin as self"
        return None
    if nu not in neighbors:
        return "receiver not adjacent"
    if mu == node:
        if mu_domain == "neighbors":
            return "own-sample transmission disabled under the neighbor-origin alphabet"
        return None
    if mu_domain == "neighbors" and mu not in neighbors:
        return "origin not a neighbor"
    if mu not in cached_origins:
        return "origin not cached"
    return None


def validate_decision(
    d: Decision,
    node: int,
    topology: Topology,
    state: EstimationState,
    mu_domain: str = "full",
) -> str | None:
    if not (0 <= d.mu < topology.m):
        return "origin out of range"
    if not (0 <= d.nu < topology.m):
        return "receiver out of range"
    if d.nu == node:  # silence: cheap path, no cache lookup needed
        return None if d.mu == node else "silence must encode origin as self"
    return decision_violation(
        d.mu, d.nu, node, topology.neighbors(node), state.cached_origins(node), mu_domain
    )


@dataclass
class SlotOutcome:
    """What one slot's joint decision profile produced on the channel."""

    attempted: list  # (sender, Decision)
    delivered: list  # (sender, receiver, CacheEntry)
    feedback: np.ndarray  # per node, Feedback values

    def to_dict(self) -> dict:
        return {
            "feedback": [int(f) for f in self.feedback],
            "delivered": [[s, r, e.origin, e.stamp] for s, r, e in self.delivered],
        }


def resolve_slot(
    decisions,
    topology: Topology,
    state: EstimationState,
    sources: SourceEnsemble,
    mu_domain: str = "full",
) -> SlotOutcome:
    """Resolve one slot of the collision channel (no randomness).

    ``sources`` supplies the current value when a node transmits its own
    freshly generated sample.  Raises DecisionError on the first invalid
    decision; otherwise every transmission is classified SUCCESS/COLLISION
    and successful packets are reported for delivery (not yet applied).
    """
    m = topology.m
    if len(decisions) != m:
        raise ParameterError(f"expected {m} decisions, got {len(decisions)}")
    for i, d in enumerate(decisions):
        why = validate_decision(d, i, topology, state, mu_domain)
        if why is not None:
            raise DecisionError(i, why)

    attempted = [(i, d) for i, d in enumerate(decisions) if not d.is_silence(i)]
    receiver_load = np.zeros(m, dtype=int)
    target = {}
    for i, d in attempted:
        receiver_load[d.nu] += 1
        target[i] = d.nu

    feedback = np.full(m, int(Feedback.NO_TX), dtype=int)
    delivered = []
    for i, d in attempted:
        collided = receiver_load[d.nu] >= 2 or target.get(d.nu) == i
        if collided:
            feedback[i] = int(Feedback.COLLISION)
            continue
        feedback[i] = int(Feedback.SUCCESS)
        if d.mu == i:
            entry = CacheEntry(origin=i, value=float(sources.values[i]), stamp=state.k)
        else:
            entry = state.entry(i, d.mu)
            assert entry is not None  # validation guarantees it
        delivered.append((i, d.nu, entry))
    return SlotOutcome(attempted=attempted, delivered=delivered, feedback=feedback)


def step(
    topology: Topology,
    state: EstimationState,
    sources: SourceEnsemble,
    decisions,
    rng: np.random.Generator,
    reward_mode: str = "realized",
    mu_domain: str = "full",
):
    """Advance the simulator by one slot.

    Pipeline: resolve the channel, apply deliveries (fresher stamps win),
    advance the slot counter (all ages grow by one except entries refreshed
    this slot, whose age restarts from their new stamp), evolve the sources,
    then compute the reward on the updated state.  Mutates state and sources
    in place and returns them alongside the reward and the slot outcome.
    """
    if state.k != sources.k:
        raise ParameterError(f"state slot {state.k} != source slot {sources.k}")
    outcome = resolve_slot(decisions, topology, state, sources, mu_domain)
    for _, receiver, entry in outcome.delivered:
        deliver_packet(state, receiver, entry)
    state.k += 1
    evolve_sources(sources, rng)
    reward = instantaneous_reward(state, sources, mode=reward_mode)
    return state, sources, reward, outcome
