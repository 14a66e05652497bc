"""Episode orchestration, policy evaluation, transfer sweeps, and metrics.

Everything is reproducible from (config, seeds): graph construction, source
noise, and per-node policy randomness run on independent seeded streams, and
every derived seed is recorded in the output rows.  ASEE is computed from
the reward trajectory under the configured reward mode ("realized" squared
errors, or "expected" sigma^2-weighted ages, which is deterministic given
the decision trajectory and therefore the variance-reduced choice for
comparing oblivious policies).
"""

from __future__ import annotations

import io
import json
import os
from typing import Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .errors import ParameterError
from .graphon import GraphonSpec, sample_from_graphon
from .grnn import GrnnWeights, load_weights, save_weights
from .mac import Decision, Feedback, step
from .policies import (
    AgeBasedPolicy,
    GrnnPolicy,
    Policy,
    SilencePolicy,
    UniformPolicy,
    build_observation,
)
from .sources import EstimationState, SourceEnsemble, asee
from .topology import (
    Topology,
    generate_sbm,
    generate_watts_strogatz,
    load_topology_zoo,
    permute,
)

ENV_SEED_VAR = "NETSAMPLER_SEED"


def fallback_seed() -> int:
    raw = os.environ.get(ENV_SEED_VAR)
    return int(raw) if raw else 0


class GraphSource(BaseModel):
    """Where episode topologies come from.

    kinds: watts_strogatz (m, k, beta), sbm (blocks, p_in, p_out),
    graphon (graphon dict + m, connected sample), graphml (path),
    explicit (m + edges).
    """

    kind: Literal["watts_strogatz", "sbm", "graphon", "graphml", "explicit"]
    m: Optional[int] = None
    k: int = 4
    beta: float = 0.3
    blocks: Optional[list[int]] = None
    p_in: float = 0.8
    p_out: float = 0.2
    graphon: Optional[dict] = None
    path: Optional[str] = None
    edges: Optional[list[list[int]]] = None

    @model_validator(mode="after")
    def _check_kind_fields(self):
        need = {
            "watts_strogatz": ("m",),
            "sbm": ("blocks",),
            "graphon": ("graphon", "m"),
            "graphml": ("path",),
            "explicit": ("m", "edges"),
        }[self.kind]
        for field in need:
            if getattr(self, field) is None:
                raise ValueError(f"graph source kind {self.kind!r} requires {field!r}")
        return self

    def synthetic(self) -> bool:
        return self.kind in ("watts_strogatz", "sbm", "graphon")

    def build(self, seed: int) -> Topology:
        if self.kind == "watts_strogatz":
            return generate_watts_strogatz(self.m, self.k, self.beta, seed=seed)
        if self.kind == "sbm":
            return generate_sbm(self.blocks, self.p_in, self.p_out, seed=seed)
        if self.kind == "graphon":
            spec = GraphonSpec.from_dict(self.graphon)
            return sample_from_graphon(spec, self.m, seed=seed, require_connected=True).topology
        if self.kind == "graphml":
            return load_topology_zoo(self.path)
        return Topology.from_edges(self.m, self.edges, provenance={"generator": "explicit"})


class EpisodeConfig(BaseModel):
    graph: GraphSource
    steps: int = Field(default=1024, ge=1)
    sigma: float = Field(default=1.0, ge=0.0)
    graph_seed: Optional[int] = None
    noise_seed: Optional[int] = None
    policy_seed: Optional[int] = None
    policy: Literal["silence", "uniform", "age", "grnn"] = "uniform"
    weights: Optional[str | dict] = None  # path to, or parsed content of, a weight file
    reward_mode: Literal["realized", "expected"] = "realized"
    mu_domain: Literal["full", "neighbors"] = "full"
    uniform_silence: bool = True
    age_law: Literal["inverse", "softmax"] = "inverse"
    age_temperature: float = 1.0
    recurrent_state: Literal["persistent", "per_slot"] = "persistent"

    def seed_triple(self) -> tuple[int, int, int]:
        base = fallback_seed()
        return (
            self.graph_seed if self.graph_seed is not None else base,
            self.noise_seed if self.noise_seed is not None else base,
            self.policy_seed if self.policy_seed is not None else base,
        )


class EpisodeResult(BaseModel):
    episode: int
    m: int
    steps: int
    graph_seed: int
    noise_seed: int
    policy_seed: int
    asee: float
    mean_reward: float
    mean_age: float
    max_age: float
    collision_rate: float
    delivery_rate: float


class RunReport(BaseModel):
    policy: str
    episodes: list[EpisodeResult]
    asee_mean: float
    asee_se: float
    mean_age: float
    collision_rate: float
    delivery_rate: float

    @classmethod
    def aggregate(cls, policy: str, rows: Sequence[EpisodeResult]) -> "RunReport":
        if not rows:
            raise ParameterError("cannot aggregate zero episodes")
        asees = np.array([r.asee for r in rows])
        se = float(asees.std(ddof=1) / np.sqrt(len(asees))) if len(asees) > 1 else 0.0
        return cls(
            policy=policy,
            episodes=list(rows),
            asee_mean=float(asees.mean()),
            asee_se=se,
            mean_age=float(np.mean([r.mean_age for r in rows])),
            collision_rate=float(np.mean([r.collision_rate for r in rows])),
            delivery_rate=float(np.mean([r.delivery_rate for r in rows])),
        )


def resolve_weights(cfg: EpisodeConfig) -> GrnnWeights:
    if cfg.weights is None:
        raise ParameterError("grnn policy requires a weight file")
    if isinstance(cfg.weights, dict):
        return load_weights(json.dumps(cfg.weights))
    return load_weights(cfg.weights)


def make_policy(cfg: EpisodeConfig) -> Policy:
    if cfg.policy == "silence":
        return SilencePolicy()
    if cfg.policy == "uniform":
        return UniformPolicy(include_silence=cfg.uniform_silence, mu_domain=cfg.mu_domain)
    if cfg.policy == "age":
        return AgeBasedPolicy(law=cfg.age_law, temperature=cfg.age_temperature, mu_domain=cfg.mu_domain)
    return GrnnPolicy(
        resolve_weights(cfg),
        mu_domain=cfg.mu_domain,
        recurrent_state=cfg.recurrent_state,
    )


def episode_topology(cfg: EpisodeConfig, episode: int, graph_seed: int) -> Topology:
    """Fresh synthetic graph per episode; fixed real topology gets a fresh
    node relabeling per episode instead."""
    if cfg.graph.synthetic():
        return cfg.graph.build(seed=graph_seed + episode)
    topo = cfg.graph.build(seed=graph_seed)
    if episode == 0:
        return topo
    perm_rng = np.random.default_rng(np.random.SeedSequence([graph_seed, episode]))
    return permute(topo, perm_rng.permutation(topo.m))


def run_episode(
    cfg: EpisodeConfig,
    episode: int = 0,
    topology: Topology | None = None,
    policy: Policy | None = None,
    slot_log: list | None = None,
) -> EpisodeResult:
    """One seeded episode; returns its metrics row.

    ``slot_log`` (when given) receives one (slot, reward, mean_age, max_age)
    tuple per step.
    """
    graph_seed, noise_seed, policy_seed = cfg.seed_triple()
    topo = topology if topology is not None else episode_topology(cfg, episode, graph_seed)
    m = topo.m
    state = EstimationState(m)
    sources = SourceEnsemble.initial(m, cfg.sigma)
    pol = policy if policy is not None else make_policy(cfg)
    pol.reset(topo)
    noise = np.random.default_rng(np.random.SeedSequence([noise_seed, episode]))
    node_rngs = [
        np.random.default_rng(np.random.SeedSequence([policy_seed, episode, i])) for i in range(m)
    ]
    feedback = np.full(m, int(Feedback.NO_TX))
    rewards = []
    age_mean_total = 0.0
    age_max_total = 0.0
    attempted = delivered = collided = 0
    pairs = m * (m - 1)
    ages = state.ages
    silent_profile = [Decision(i, i) for i in range(m)]
    for _ in range(cfg.steps):
        if pol.needs_observation:
            obs = [build_observation(i, topo, state, int(feedback[i]), ages) for i in range(m)]
            decisions = pol.decide_all(obs, node_rngs)
        else:
            decisions = pol.decide_all(None, node_rngs) if pol.name != "silence" else silent_profile
        _, _, reward, outcome = step(
            topo, state, sources, decisions, noise, reward_mode=cfg.reward_mode, mu_domain=cfg.mu_domain
        )
        rewards.append(reward)
        feedback = outcome.feedback
        attempted += len(outcome.attempted)
        delivered += len(outcome.delivered)
        collided += int(np.sum(outcome.feedback == int(Feedback.COLLISION)))
        ages = state.ages
        slot_mean = float(ages.sum()) / pairs if m > 1 else 0.0  # diagonal is 0
        slot_max = float(ages.max()) if m > 1 else 0.0
        age_mean_total += slot_mean
        age_max_total += slot_max
        if slot_log is not None:
            slot_log.append((state.k, reward, slot_mean, slot_max))
    return EpisodeResult(
        episode=episode,
        m=m,
        steps=cfg.steps,
        graph_seed=graph_seed,
        noise_seed=noise_seed,
        policy_seed=policy_seed,
        asee=asee(rewards),
        mean_reward=float(np.mean(rewards)),
        mean_age=age_mean_total / cfg.steps,
        max_age=age_max_total / cfg.steps,
        collision_rate=collided / attempted if attempted else 0.0,
        delivery_rate=delivered / attempted if attempted else 0.0,
    )


def evaluate_policy(cfg: EpisodeConfig, episodes: int = 30) -> RunReport:
    """Independent episodes: fresh synthetic graphs, or fresh relabelings of
    a fixed real topology."""
    if episodes < 1:
        raise ParameterError("episodes must be >= 1")
    rows = [run_episode(cfg, episode=e) for e in range(episodes)]
    return RunReport.aggregate(cfg.policy, rows)


def transfer_sweep(
    cfg: EpisodeConfig,
    m_list: Sequence[int],
    episodes: int = 30,
    baselines: Sequence[str] = ("uniform", "age"),
) -> list[dict]:
    """Evaluate fixed weights at each network size alongside the baselines.

    The config's graph source must be synthetic with a variable node count
    (watts_strogatz or graphon); weights are never retrained.
    """
    if cfg.graph.kind not in ("watts_strogatz", "graphon", "sbm"):
        raise ParameterError("transfer sweeps need a synthetic graph family")
    rows = []
    for m in m_list:
        graph = cfg.graph.model_copy(update={"m": int(m)})
        if cfg.graph.kind == "sbm" and cfg.graph.blocks:
            share = int(m) // len(cfg.graph.blocks)
            graph = graph.model_copy(update={"blocks": [share] * len(cfg.graph.blocks)})
        reports = {}
        for name in [cfg.policy, *baselines]:
            sub = cfg.model_copy(update={"graph": graph, "policy": name})
            reports[name] = evaluate_policy(sub, episodes)
        base = reports[cfg.policy]
        for name, report in reports.items():
            rows.append(
                {
                    "m": int(m),
                    "policy": name,
                    "asee_mean": report.asee_mean,
                    "asee_se": report.asee_se,
                    "mean_age": report.mean_age,
                    "collision_rate": report.collision_rate,
                    "delivery_rate": report.delivery_rate,
                    "gap_vs_" + cfg.policy: report.asee_mean - base.asee_mean,
                }
            )
    return rows


# -- deterministic text output -------------------------------------------------


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(format_value(row.get(c, "")) for c in columns) + "\n")
    return buf.getvalue()


EPISODE_COLUMNS = [
    "episode", "m", "steps", "graph_seed", "noise_seed", "policy_seed",
    "asee", "mean_reward", "mean_age", "max_age", "collision_rate", "delivery_rate",
]

SLOT_COLUMNS = ["slot", "reward", "mean_age", "max_age"]

TRANSFER_LAB_COLUMNS = [
    "graphon", "m", "seed", "n", "lhs", "rhs",
    "theta1", "theta2", "theta3", "eta1", "eta2", "eta3", "violation_flag",
]


def report_csv(report: RunReport) -> str:
    return rows_to_csv([r.model_dump() for r in report.episodes], EPISODE_COLUMNS)


def report_summary(report: RunReport) -> dict:
    return {
        "policy": report.policy,
        "episodes": len(report.episodes),
        "asee_mean": report.asee_mean,
        "asee_se": report.asee_se,
        "mean_age": report.mean_age,
        "collision_rate": report.collision_rate,
        "delivery_rate": report.delivery_rate,
    }
