"""Independent reference implementations used as test oracles.

These deliberately avoid the package's own code paths: the collision
evaluator is a direct transcription of the two channel rules, and the
network evaluator materializes explicit shift powers.  Keep them dumb.
"""

import numpy as np


def brute_force_slot(decisions, adjacency):
    """Classify each node's transmission by checking the two failure rules
    pairwise: (a) another node transmits to my receiver, (b) my receiver
    transmits to me.  Returns (feedback list, delivered sender list) with
    feedback coded 0=no-tx, 1=success, 2=collision.
    """
    m = len(decisions)
    transmitting = {}
    for i, (mu, nu) in enumerate(decisions):
        if nu != i:
            transmitting[i] = (mu, nu)
    feedback = [0] * m
    delivered = []
    for i, (mu, nu) in transmitting.items():
        failed = False
        for j, (mu_j, nu_j) in transmitting.items():
            if j != i and nu_j == nu:
                failed = True  # common receiver
            if j == nu and nu_j == i:
                failed = True  # opposite ends of an edge, sending to each other
        feedback[i] = 2 if failed else 1
        if not failed:
            delivered.append(i)
    return feedback, delivered


def naive_filter(taps, s, x):
    """sum_l h_l S^l X with explicit matrix powers."""
    out = np.zeros((x.shape[0], taps.shape[2]))
    for l in range(taps.shape[0]):
        out += np.linalg.matrix_power(s, l) @ x @ taps[l]
    return out


def naive_grnn(weights, s, inputs, z0=None):
    """Direct transcription of the recurrence with explicit powers."""
    acts = {"tanh": np.tanh, "identity": lambda v: v, "relu": lambda v: np.maximum(v, 0.0)}
    rho1, rho2 = acts[weights.rho1], acts[weights.rho2]
    m = inputs[0].shape[0]
    z = np.zeros((m, weights.H)) if z0 is None else np.array(z0, dtype=float)
    for x in inputs:
        z = rho1(naive_filter(weights.B, s, x) + naive_filter(weights.C, s, z))
    return rho2(naive_filter(weights.D, s, z))


def permutation_matrix(p):
    m = len(p)
    mat = np.zeros((m, m))
    for i, pi in enumerate(p):
        mat[pi, i] = 1.0  # column i of the identity moves to row p[i]
    return mat
