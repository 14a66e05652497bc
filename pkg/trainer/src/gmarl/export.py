"""Serialize trained actors into the engine's portable weight format:
JSON with row-major arrays and decimal floats at 17 significant digits."""

from __future__ import annotations

import json

import torch

from .model import GnnCritic, GrnnActor

FORMAT_VERSION = 1


def _dump(obj) -> str:
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_dump(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump(v) for v in obj) + "]"
    if isinstance(obj, float):
        return format(obj, ".17g")
    return json.dumps(obj)


def _array(t: torch.Tensor):
    return t.detach().cpu().numpy().tolist()


def weight_document(actor: GrnnActor, critic: GnnCritic | None = None) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "F": actor.F, "H": actor.H, "G": actor.G, "T": actor.T, "L": actor.L,
        "B": _array(actor.B),
        "C": _array(actor.C),
        "D": _array(actor.D),
        "theta_action": _array(actor.theta),
        "rho1": "tanh",
        "rho2": "identity",
    }
    if critic is not None:
        doc["critic"] = {
            "F": critic.F, "H": critic.H, "G": 1, "L": critic.L,
            "B": _array(critic.B),
            "D": _array(critic.D),
            "bias": _array(critic.bias),
        }
    return doc


def export_weights(actor: GrnnActor, critic: GnnCritic | None = None) -> bytes:
    return (_dump(weight_document(actor, critic)) + "\n").encode()


def load_actor(doc: dict) -> GrnnActor:
    """Rebuild an actor from a weight document (round-trip convenience)."""
    actor = GrnnActor(F=doc["F"], H=doc["H"], G=doc["G"], T=doc["T"], L=doc["L"])
    with torch.no_grad():
        actor.B.copy_(torch.tensor(doc["B"], dtype=torch.float64))
        actor.C.copy_(torch.tensor(doc["C"], dtype=torch.float64))
        actor.D.copy_(torch.tensor(doc["D"], dtype=torch.float64))
        actor.theta.copy_(torch.tensor(doc["theta_action"], dtype=torch.float64))
    return actor
