"""Graph-filter algebra, GNN/GRNN forward passes, and the action distribution.

A graph filter with taps [h_0, ..., h_{L-1}] acts on node signals X as
sum_l h_l S^l X, where S is the graph shift operator (adjacency / m by
default, matching the graphon operator scale).  The recurrent network runs

    Z_0 = 0,  Z_t = rho1(B(S) X_t + C(S) Z_{t-1}),  Y = rho2(D(S) Z_T)

over a length-T input sequence; T = 1 with zero C taps degenerates to a
plain feedforward GNN.  The decision scores of node i are the bilinear form
Y @ theta @ Y.T over (origin, receiver) pairs: invalid pairs are masked and
a softmax over the rest yields the sampling distribution.  All of this is
permutation-equivariant, and the parameter count never depends on the node
count, which is what lets one weight file run on graphs of any size.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError, WeightFormatError
from .mac import Decision, decision_violation
from .topology import Topology

ACTIVATIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "tanh": np.tanh,
    "identity": lambda x: x,
    "relu": lambda x: np.maximum(x, 0.0),
}

MASK_PENALTY = 1.0e9  # additive mask; keeps arithmetic finite


def shift_operator(topology: Topology, normalization: str = "adjacency_over_m") -> np.ndarray:
    """Shift operator for a topology; default scale matches induced graphons."""
    a = topology.adjacency.astype(float)
    if normalization == "adjacency_over_m":
        return a / topology.m
    if normalization == "adjacency_over_lmax":
        lmax = float(np.max(np.abs(np.linalg.eigvalsh(a))))
        return a / lmax if lmax > 0 else a
    raise ParameterError(f"unknown shift normalization {normalization!r}")


def apply_filter(taps: np.ndarray, s: np.ndarray, x: np.ndarray) -> np.ndarray:
    """sum_l S^l X taps[l], computed by iterated shifts (no explicit powers).

    ``taps`` has shape (L, F_in, F_out); ``x`` has shape (m, F_in).
    """
    taps = np.asarray(taps, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or taps.ndim != 3:
        raise ParameterError("expected x of shape (m, F_in) and taps of shape (L, F_in, F_out)")
    if taps.shape[1] != x.shape[1]:
        raise ParameterError(f"filter expects {taps.shape[1]} input features, signal has {x.shape[1]}")
    if s.shape != (x.shape[0], x.shape[0]):
        raise ParameterError("shift operator shape disagrees with signal")
    out = x @ taps[0]
    shifted = x
    for tap in taps[1:]:
        shifted = s @ shifted
        out = out + shifted @ tap
    return out


@dataclass
class GrnnWeights:
    """Portable parameter set: three filter banks, activations, and theta.

    Shapes: B (L,F,H), C (L,H,H), D (L,H,G), theta_action (G,G).  ``critic``
    optionally carries a same-schema filter block used by trainers; the
    engine never reads it at decision time.
    """

    F: int
    H: int
    G: int
    T: int
    L: int
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    theta_action: np.ndarray
    rho1: str = "tanh"
    rho2: str = "identity"
    critic: dict | None = None

    def __post_init__(self):
        self.B = np.asarray(self.B, dtype=float)
        self.C = np.asarray(self.C, dtype=float)
        self.D = np.asarray(self.D, dtype=float)
        self.theta_action = np.asarray(self.theta_action, dtype=float)
        for name, arr, shape in (
            ("B", self.B, (self.L, self.F, self.H)),
            ("C", self.C, (self.L, self.H, self.H)),
            ("D", self.D, (self.L, self.H, self.G)),
            ("theta_action", self.theta_action, (self.G, self.G)),
        ):
            if arr.shape != shape:
                raise WeightFormatError(f"field {name!r} has shape {arr.shape}, expected {shape}")
        if self.T < 1:
            raise WeightFormatError(f"field 'T' must be >= 1, got {self.T}")
        for name, rho in (("rho1", self.rho1), ("rho2", self.rho2)):
            if rho not in ACTIVATIONS:
                raise WeightFormatError(f"field {name!r} names unknown activation {rho!r}")


def random_weights(
    F: int = 4,
    H: int = 16,
    G: int = 8,
    T: int = 2,
    L: int = 3,
    seed: int = 0,
    scale: float = 0.3,
) -> GrnnWeights:
    """Random weights at the default architecture; used for fixtures."""
    rng = np.random.default_rng(seed)
    return GrnnWeights(
        F=F, H=H, G=G, T=T, L=L,
        B=rng.uniform(-scale, scale, size=(L, F, H)),
        C=rng.uniform(-scale, scale, size=(L, H, H)),
        D=rng.uniform(-scale, scale, size=(L, H, G)),
        theta_action=rng.uniform(-scale, scale, size=(G, G)),
    )


def grnn_forward(
    w: GrnnWeights,
    s: np.ndarray,
    inputs: Sequence[np.ndarray],
    z0: np.ndarray | None = None,
    return_state: bool = False,
):
    """Run the recurrence over a length-T input sequence.

    ``z0`` overrides the zero initial hidden state (used by policies that
    persist state across slots).  With ``return_state`` the final hidden
    state Z_T is returned alongside the output.
    """
    if len(inputs) != w.T:
        raise ParameterError(f"expected an input sequence of length T={w.T}, got {len(inputs)}")
    rho1 = ACTIVATIONS[w.rho1]
    rho2 = ACTIVATIONS[w.rho2]
    m = np.asarray(inputs[0]).shape[0]
    z = np.zeros((m, w.H)) if z0 is None else np.asarray(z0, dtype=float)
    if z.shape != (m, w.H):
        raise ParameterError(f"hidden state shape {z.shape} disagrees with (m={m}, H={w.H})")
    for x in inputs:
        z = rho1(apply_filter(w.B, s, x) + apply_filter(w.C, s, z))
    y = rho2(apply_filter(w.D, s, z))
    return (y, z) if return_state else y


def grnn_forward_batch(
    w: GrnnWeights,
    s: np.ndarray,
    inputs: Sequence[np.ndarray],
    z0: np.ndarray | None = None,
    return_state: bool = False,
):
    """Vectorized grnn_forward over a leading batch axis.

    ``inputs`` is a length-T sequence of (batch, m, F) arrays; used to run
    all nodes' actors in one shot.  Matches grnn_forward exactly per batch
    row (covered by tests).
    """
    if len(inputs) != w.T:
        raise ParameterError(f"expected an input sequence of length T={w.T}, got {len(inputs)}")
    rho1 = ACTIVATIONS[w.rho1]
    rho2 = ACTIVATIONS[w.rho2]
    x0 = np.asarray(inputs[0])
    batch, m = x0.shape[0], x0.shape[1]
    z = np.zeros((batch, m, w.H)) if z0 is None else np.asarray(z0, dtype=float)

    def filt(taps, x):
        out = np.einsum("bmf,fg->bmg", x, taps[0])
        shifted = x
        for tap in taps[1:]:
            shifted = np.einsum("mn,bnf->bmf", s, shifted)
            out = out + np.einsum("bmf,fg->bmg", shifted, tap)
        return out

    for x in inputs:
        z = rho1(filt(w.B, np.asarray(x, dtype=float)) + filt(w.C, z))
    y = rho2(filt(w.D, z))
    return (y, z) if return_state else y


def action_scores(y_hat: np.ndarray, theta_action: np.ndarray) -> np.ndarray:
    """Pre-softmax scores over (origin, receiver) pairs: Y theta Y^T."""
    y_hat = np.asarray(y_hat, dtype=float)
    theta_action = np.asarray(theta_action, dtype=float)
    if y_hat.ndim != 2 or theta_action.shape != (y_hat.shape[1], y_hat.shape[1]):
        raise ParameterError(
            f"need y_hat (m,G) and theta (G,G); got {y_hat.shape} and {theta_action.shape}"
        )
    return y_hat @ theta_action @ y_hat.T


def valid_pair_mask(
    node: int,
    neighbors,
    cached_origins,
    m: int,
    mu_domain: str = "full",
) -> np.ndarray:
    """Boolean m-by-m mask of decisions the MAC layer would accept.

    Vectorized equivalent of testing decision_violation on every (mu, nu)
    pair (the tests assert the equivalence).
    """
    if mu_domain not in ("full", "neighbors"):
        raise ParameterError(f"mu_domain must be 'full' or 'neighbors', got {mu_domain!r}")
    nb = np.zeros(m, dtype=bool)
    nb[list(neighbors)] = True
    origin_ok = np.zeros(m, dtype=bool)
    cached = list(cached_origins)
    if mu_domain == "full":
        origin_ok[cached] = True
        origin_ok[node] = True  # own fresh sample
    else:
        origin_ok[cached] = True
        origin_ok &= nb  # forwarding limited to neighbor-originated packets
    mask = origin_ok[:, None] & nb[None, :]
    mask[node, node] = True  # silence is always available
    return mask


def masked_action_probabilities(scores: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Softmax over valid (origin, receiver) pairs; invalid pairs get 0."""
    if scores.shape != mask.shape:
        raise ParameterError("scores and mask shapes disagree")
    if not np.all(np.isfinite(scores)):
        raise ParameterError("scores must be finite")
    shifted = np.where(mask, scores, scores - MASK_PENALTY)
    shifted = shifted - shifted.max()
    expd = np.exp(shifted)
    expd[~mask] = 0.0
    total = expd.sum()
    if total <= 0:  # silence is always valid, so this cannot trigger in practice
        raise ParameterError("no valid decision pair to sample")
    return expd / total


def sample_decision(
    scores: np.ndarray,
    node: int,
    neighbors,
    cached_origins,
    rng: np.random.Generator,
    mu_domain: str = "full",
) -> Decision:
    """Draw one (origin, receiver) pair from the masked softmax."""
    m = scores.shape[0]
    mask = valid_pair_mask(node, neighbors, cached_origins, m, mu_domain)
    probs = masked_action_probabilities(scores, mask)
    idx = rng.choice(m * m, p=probs.reshape(-1))
    return Decision(mu=int(idx // m), nu=int(idx % m))


# -- weight file format -------------------------------------------------------
#
# JSON, arrays row-major, floats as decimal with 17 significant digits:
# {"format_version": 1, "F": ..., "H": ..., "G": ..., "T": ..., "L": ...,
#  "B": [...], "C": [...], "D": [...], "theta_action": [...],
#  "rho1": "tanh", "rho2": "identity", "critic": {...}?}

FORMAT_VERSION = 1


def _dump_json(obj) -> str:
    if isinstance(obj, dict):
        items = (f"{json.dumps(k)}: {_dump_json(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump_json(v) for v in obj) + "]"
    if isinstance(obj, float):
        return format(obj, ".17g")
    return json.dumps(obj)


def _nested(arr: np.ndarray):
    return [float(v) for v in arr] if arr.ndim == 1 else [_nested(sub) for sub in arr]


def save_weights(w: GrnnWeights) -> bytes:
    doc = {
        "format_version": FORMAT_VERSION,
        "F": w.F, "H": w.H, "G": w.G, "T": w.T, "L": w.L,
        "B": _nested(w.B),
        "C": _nested(w.C),
        "D": _nested(w.D),
        "theta_action": _nested(w.theta_action),
        "rho1": w.rho1,
        "rho2": w.rho2,
    }
    if w.critic is not None:
        doc["critic"] = {k: (_nested(np.asarray(v, dtype=float)) if isinstance(v, (list, np.ndarray)) else v)
                         for k, v in w.critic.items()}
    return (_dump_json(doc) + "\n").encode()


def load_weights(data) -> GrnnWeights:
    """Parse a weight file (bytes, str, or path); names the offending field."""
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, (bytes, bytearray)):
        text = bytes(data).decode()
    elif isinstance(data, str) and data.lstrip().startswith("{"):
        text = data
    else:  # treat as a path
        with open(data, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WeightFormatError(f"weight file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise WeightFormatError("weight file must contain a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise WeightFormatError(f"field 'format_version' must be {FORMAT_VERSION}, got {version!r}")
    for name in ("F", "H", "G", "T", "L", "B", "C", "D", "theta_action"):
        if name not in doc:
            raise WeightFormatError(f"field {name!r} is missing")
    dims = {}
    for name in ("F", "H", "G", "T", "L"):
        if not isinstance(doc[name], int) or doc[name] < 1:
            raise WeightFormatError(f"field {name!r} must be a positive integer")
        dims[name] = doc[name]
    arrays = {}
    for name in ("B", "C", "D", "theta_action"):
        try:
            arrays[name] = np.asarray(doc[name], dtype=float)
        except (TypeError, ValueError) as exc:
            raise WeightFormatError(f"field {name!r} is not a numeric array") from exc
    try:
        return GrnnWeights(
            F=dims["F"], H=dims["H"], G=dims["G"], T=dims["T"], L=dims["L"],
            B=arrays["B"], C=arrays["C"], D=arrays["D"],
            theta_action=arrays["theta_action"],
            rho1=doc.get("rho1", "tanh"),
            rho2=doc.get("rho2", "identity"),
            critic=doc.get("critic"),
        )
    except WeightFormatError:
        raise
