"""Environment wire protocol: one session = one simulator instance.

Messages are newline-delimited JSON.  A session is a sequence of exchanges:

  client: {"type": "reset", "seed": int, "graph": {...}, "steps": int,
           "sigma": float, "reward": "realized"|"expected",
           "mu_domain": "full"|"neighbors"}
  server: {"type": "obs", "protocol_version": 1, "slot": int,
           "adjacency": [[...]], "per_node": [{"ages": [...],
           "feedback": int, "cached": [...]}, ...]}

  client: {"type": "act", "decisions": [[mu, nu], ...]}
  server: {"type": "transition", "reward": float, "done": bool,
           "outcome": {"feedback": [...], "delivered": [[s, r, origin,
           stamp], ...]}, "obs": {...}}

Malformed or invalid input produces {"type": "error", "why": ...} (plus
"node" when a specific decision is at fault) and leaves the session state
untouched.  The "graph" value is either a generator spec (the GraphSource
schema) or an explicit {"m", "edges"} exchange document.
"""

from __future__ import annotations

import json

import numpy as np
from pydantic import ValidationError

from .errors import DecisionError, NetsamplerError
from .harness import GraphSource
from .mac import Decision, Feedback, step, validate_decision
from .sources import EstimationState, SourceEnsemble
from .topology import Topology

PROTOCOL_VERSION = 1


class EnvSession:
    """State machine behind one protocol connection."""

    def __init__(self, default_seed: int = 0):
        self.default_seed = default_seed
        self.topology: Topology | None = None
        self.state: EstimationState | None = None
        self.sources: SourceEnsemble | None = None
        self.noise: np.random.Generator | None = None
        self.steps = 1024
        self.reward_mode = "realized"
        self.mu_domain = "full"
        self.feedback: np.ndarray | None = None
        self.done = False

    # -- message handling ------------------------------------------------

    def handle_line(self, line: str) -> str:
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return self._dump({"type": "error", "why": f"malformed message: {exc}"})
        if not isinstance(msg, dict) or "type" not in msg:
            return self._dump({"type": "error", "why": "message must be an object with a 'type'"})
        return self._dump(self.handle(msg))

    def handle(self, msg: dict) -> dict:
        kind = msg.get("type")
        if kind == "reset":
            return self._reset(msg)
        if kind == "act":
            return self._act(msg)
        return {"type": "error", "why": f"unknown message type {kind!r}"}

    # -- internals ---------------------------------------------------------

    def _reset(self, msg: dict) -> dict:
        seed = int(msg.get("seed", self.default_seed))
        graph = msg.get("graph")
        if not isinstance(graph, dict):
            return {"type": "error", "why": "reset requires a 'graph' object"}
        try:
            if "kind" in graph:
                topology = GraphSource.model_validate(graph).build(seed=seed)
            else:
                topology = Topology.from_dict(graph)
        except (NetsamplerError, ValidationError, ValueError) as exc:
            return {"type": "error", "why": f"bad graph: {exc}"}
        steps = int(msg.get("steps", 1024))
        sigma = float(msg.get("sigma", 1.0))
        reward_mode = msg.get("reward", "realized")
        mu_domain = msg.get("mu_domain", "full")
        if steps < 1:
            return {"type": "error", "why": "steps must be >= 1"}
        if reward_mode not in ("realized", "expected"):
            return {"type": "error", "why": f"unknown reward mode {reward_mode!r}"}
        if mu_domain not in ("full", "neighbors"):
            return {"type": "error", "why": f"unknown mu domain {mu_domain!r}"}
        self.topology = topology
        self.steps = steps
        self.reward_mode = reward_mode
        self.mu_domain = mu_domain
        self.state = EstimationState(topology.m)
        self.sources = SourceEnsemble.initial(topology.m, sigma)
        self.noise = np.random.default_rng(np.random.SeedSequence([seed, 1]))
        self.feedback = np.full(topology.m, int(Feedback.NO_TX))
        self.done = False
        obs = self._observation()
        obs["protocol_version"] = PROTOCOL_VERSION
        return obs

    def _act(self, msg: dict) -> dict:
        if self.state is None:
            return {"type": "error", "why": "act before reset"}
        if self.done:
            return {"type": "error", "why": "episode finished; send reset"}
        raw = msg.get("decisions")
        m = self.topology.m
        if not isinstance(raw, list) or len(raw) != m:
            return {"type": "error", "why": f"need {m} decisions"}
        decisions = []
        for i, pair in enumerate(raw):
            if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
                return {"type": "error", "node": i, "why": "decision must be a [mu, nu] pair"}
            decisions.append(Decision(int(pair[0]), int(pair[1])))
        for i, d in enumerate(decisions):
            why = validate_decision(d, i, self.topology, self.state, self.mu_domain)
            if why is not None:
                return {"type": "error", "node": i, "why": why}
        try:
            _, _, reward, outcome = step(
                self.topology, self.state, self.sources, decisions, self.noise,
                reward_mode=self.reward_mode, mu_domain=self.mu_domain,
            )
        except DecisionError as exc:  # unreachable given pre-validation; belt and braces
            return {"type": "error", "node": exc.node, "why": exc.why}
        self.feedback = outcome.feedback
        self.done = self.state.k >= self.steps
        return {
            "type": "transition",
            "reward": reward,
            "done": self.done,
            "outcome": outcome.to_dict(),
            "obs": self._observation(),
        }

    def _observation(self) -> dict:
        ages = self.state.ages
        return {
            "type": "obs",
            "slot": self.state.k,
            "adjacency": self.topology.adjacency.astype(int).tolist(),
            "per_node": [
                {
                    "ages": [int(a) for a in ages[i]],
                    "feedback": int(self.feedback[i]),
                    "cached": [int(j) for j in self.state.cached_origins(i)],
                }
                for i in range(self.topology.m)
            ],
        }

    @staticmethod
    def _dump(obj: dict) -> str:
        return json.dumps(obj, separators=(",", ":")) + "\n"
