"""Observation-to-tensor mappings and action validity masks.

The actor signal layout must match what the execution engine feeds its own
policy wrapper, otherwise exported weights would act differently at
execution time: per acting node i, row j carries [log(1+age_ij),
adjacency_ij, 1{j=i}, feedback_i on row i].  Feedback encodes no-tx 0,
success +1, collision -1.
"""

from __future__ import annotations

import numpy as np

from .client import Observation

FEEDBACK_SCALAR = {0: 0.0, 1: 1.0, 2: -1.0}
ACTOR_FEATURES = 4
CRITIC_FEATURES = 3


def actor_signals(obs: Observation) -> np.ndarray:
    """(m, m, F) stack: batch row b is the signal seen by acting node b."""
    m = obs.m
    x = np.zeros((m, m, ACTOR_FEATURES))
    x[:, :, 0] = np.log1p(obs.ages)
    x[:, :, 1] = obs.adjacency
    idx = np.arange(m)
    x[idx, idx, 2] = 1.0
    x[idx, idx, 3] = [FEEDBACK_SCALAR[int(f)] for f in obs.feedback]
    return x


def action_masks(obs: Observation, mu_domain: str = "full") -> np.ndarray:
    """(m, m, m) booleans: mask[i, mu, nu] marks pairs the channel accepts."""
    m = obs.m
    masks = np.zeros((m, m, m), dtype=bool)
    for i in range(m):
        neighbors = obs.adjacency[i].astype(bool)
        origin_ok = np.zeros(m, dtype=bool)
        origin_ok[obs.cached[i]] = True
        if mu_domain == "full":
            origin_ok[i] = True
        else:
            origin_ok &= neighbors
        masks[i] = origin_ok[:, None] & neighbors[None, :]
        masks[i, i, i] = True  # silence
    return masks


def critic_node_features(obs: Observation) -> np.ndarray:
    """(m, 3) joint-state features: mean incoming and outgoing log-age per
    node, plus normalized degree."""
    m = obs.m
    log_ages = np.log1p(obs.ages)
    off = ~np.eye(m, dtype=bool)
    incoming = np.array([log_ages[:, j][off[:, j]].mean() if m > 1 else 0.0 for j in range(m)])
    outgoing = np.array([log_ages[i][off[i]].mean() if m > 1 else 0.0 for i in range(m)])
    degree = obs.adjacency.sum(axis=1) / m
    return np.stack([incoming, outgoing, degree], axis=1)


def shift_operator(adjacency: np.ndarray) -> np.ndarray:
    return adjacency.astype(float) / adjacency.shape[0]
