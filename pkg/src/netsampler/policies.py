"""Decentralized policies: the common interface, oblivious baselines, and
the graph-network policy that executes portable weight files.

Every policy sees only a LocalObservation: ages, topology, cached origins,
own last feedback, and the slot index.  Process values never appear, which
enforces obliviousness at the interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .grnn import (
    GrnnWeights,
    action_scores,
    grnn_forward_batch,
    sample_decision,
    shift_operator,
)
from .mac import Decision, Feedback
from .sources import EstimationState
from .topology import Topology


@dataclass
class LocalObservation:
    """Everything node i may condition on in one slot."""

    node: int
    neighbors: tuple[int, ...]
    ages: np.ndarray  # length m; never-received shows the current slot
    feedback: int  # Feedback value from this node's previous transmission
    cached_origins: tuple[int, ...]
    adjacency: np.ndarray
    slot: int


def build_observation(
    node: int,
    topology: Topology,
    state: EstimationState,
    last_feedback: int = int(Feedback.NO_TX),
    ages: np.ndarray | None = None,
) -> LocalObservation:
    """Assemble node's view; ``ages`` lets callers share one matrix per slot."""
    if ages is None:
        ages = state.ages
    return LocalObservation(
        node=node,
        neighbors=topology.neighbors(node),
        ages=ages[node],
        feedback=int(last_feedback),
        cached_origins=state.cached_origins(node),
        adjacency=topology.adjacency,
        slot=state.k,
    )


class Policy:
    """Shared decentralized-policy interface for baselines and learned actors."""

    name = "base"
    needs_observation = True

    def reset(self, topology: Topology) -> None:
        """Called once per episode before the first decision."""

    def decide(self, obs: LocalObservation, rng: np.random.Generator) -> Decision:
        raise NotImplementedError

    def decide_all(self, observations, rngs) -> list[Decision]:
        """Per-slot convenience; overridable for batched evaluation."""
        return [self.decide(obs, rng) for obs, rng in zip(observations, rngs)]


class SilencePolicy(Policy):
    """Never transmits; the analytic lower baseline."""

    name = "silence"
    needs_observation = False

    def decide(self, obs: LocalObservation, rng: np.random.Generator) -> Decision:
        return Decision(obs.node, obs.node)


class UniformPolicy(Policy):
    """Receiver uniform over neighbors (silence as one extra option), origin
    uniform over cached packets plus a fresh own sample."""

    name = "uniform"

    def __init__(self, include_silence: bool = True, mu_domain: str = "full"):
        self.include_silence = include_silence
        self.mu_domain = mu_domain

    def decide(self, obs: LocalObservation, rng: np.random.Generator) -> Decision:
        i = obs.node
        if not obs.neighbors:
            return Decision(i, i)
        if self.mu_domain == "neighbors":
            origins = [j for j in obs.cached_origins if j in obs.neighbors]
            if not origins:  # cache empty and own sampling unavailable
                return Decision(i, i)
        else:
            origins = list(obs.cached_origins) + [i]
        options = len(obs.neighbors) + (1 if self.include_silence else 0)
        pick = rng.integers(options)
        if pick == len(obs.neighbors):
            return Decision(i, i)
        nu = obs.neighbors[pick]
        mu = origins[rng.integers(len(origins))]
        return Decision(int(mu), int(nu))


class AgeBasedPolicy(Policy):
    """Receiver uniform over neighbors; origin weighted toward smaller age.

    Default law weights origin j by 1/(1 + age_j); a fresh own sample has age
    0 and therefore the largest weight.  ``law="softmax"`` substitutes
    softmax(-age / temperature).  Never silent when a neighbor exists.
    """

    name = "age"

    def __init__(self, law: str = "inverse", temperature: float = 1.0, mu_domain: str = "full"):
        if law not in ("inverse", "softmax"):
            raise ParameterError(f"unknown age law {law!r}")
        self.law = law
        self.temperature = float(temperature)
        self.mu_domain = mu_domain

    def decide(self, obs: LocalObservation, rng: np.random.Generator) -> Decision:
        i = obs.node
        if not obs.neighbors:
            return Decision(i, i)
        if self.mu_domain == "neighbors":
            origins = [j for j in obs.cached_origins if j in obs.neighbors]
            if not origins:
                return Decision(i, i)
            ages = np.array([obs.ages[j] for j in origins], dtype=float)
        else:
            origins = list(obs.cached_origins) + [i]
            ages = np.array([obs.ages[j] for j in obs.cached_origins] + [0.0], dtype=float)
        if self.law == "inverse":
            weights = 1.0 / (1.0 + ages)
        else:
            z = -ages / self.temperature
            weights = np.exp(z - z.max())
        probs = weights / weights.sum()
        nu = obs.neighbors[rng.integers(len(obs.neighbors))]
        mu = origins[rng.choice(len(origins), p=probs)]
        return Decision(int(mu), int(nu))


class GrnnPolicy(Policy):
    """Executes a GrnnWeights file: per-node forward pass, bilinear scores,
    masked softmax sampling.

    The input signal for node i stacks, per row j: log(1 + age_ij), a
    neighbor indicator, a self indicator, and this node's last feedback on
    its own row.  With T > 1 the current signal is repeated T times; the
    hidden state persists across slots unless ``recurrent_state="per_slot"``.
    """

    name = "grnn"

    def __init__(
        self,
        weights: GrnnWeights,
        mu_domain: str = "full",
        recurrent_state: str = "persistent",
        shift_normalization: str = "adjacency_over_m",
    ):
        if weights.F != 4:
            raise ParameterError(f"policy signal layout provides 4 features, weights expect {weights.F}")
        if recurrent_state not in ("persistent", "per_slot"):
            raise ParameterError(f"unknown recurrent_state {recurrent_state!r}")
        self.weights = weights
        self.mu_domain = mu_domain
        self.recurrent_state = recurrent_state
        self.shift_normalization = shift_normalization
        self._s: np.ndarray | None = None
        self._hidden: np.ndarray | None = None  # (m, m, H): per acting node

    def reset(self, topology: Topology) -> None:
        self._s = shift_operator(topology, self.shift_normalization)
        m = topology.m
        self._hidden = np.zeros((m, m, self.weights.H))

    def signal(self, obs: LocalObservation) -> np.ndarray:
        m = len(obs.ages)
        x = np.zeros((m, 4))
        x[:, 0] = np.log1p(obs.ages)
        x[list(obs.neighbors), 1] = 1.0
        x[obs.node, 2] = 1.0
        fb = {int(Feedback.NO_TX): 0.0, int(Feedback.SUCCESS): 1.0, int(Feedback.COLLISION): -1.0}[obs.feedback]
        x[obs.node, 3] = fb
        return x

    def scores(self, obs: LocalObservation) -> np.ndarray:
        """Pre-mask decision scores for one node; advances its hidden state."""
        if self._s is None:
            raise ParameterError("policy not reset with a topology")
        x = self.signal(obs)
        i = obs.node
        z0 = self._hidden[i][None] if self.recurrent_state == "persistent" else None
        y, z = grnn_forward_batch(
            self.weights, self._s, [x[None]] * self.weights.T, z0=z0, return_state=True
        )
        if self.recurrent_state == "persistent":
            self._hidden[i] = z[0]
        return action_scores(y[0], self.weights.theta_action)

    def decide(self, obs: LocalObservation, rng: np.random.Generator) -> Decision:
        scores = self.scores(obs)
        return sample_decision(scores, obs.node, obs.neighbors, obs.cached_origins, rng, self.mu_domain)

    def decide_all(self, observations, rngs) -> list[Decision]:
        """One batched forward pass for all nodes in the slot."""
        if self._s is None:
            raise ParameterError("policy not reset with a topology")
        x = np.stack([self.signal(obs) for obs in observations])
        nodes = [obs.node for obs in observations]
        z0 = self._hidden[nodes] if self.recurrent_state == "persistent" else None
        y, z = grnn_forward_batch(
            self.weights, self._s, [x] * self.weights.T, z0=z0, return_state=True
        )
        if self.recurrent_state == "persistent":
            self._hidden[nodes] = z
        theta = self.weights.theta_action
        decisions = []
        for obs, rng, y_i in zip(observations, rngs, y):
            scores = action_scores(y_i, theta)
            decisions.append(
                sample_decision(scores, obs.node, obs.neighbors, obs.cached_origins, rng, self.mu_domain)
            )
        return decisions
