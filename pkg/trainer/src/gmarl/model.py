"""Torch models: the graph-recurrent actor (shared by every node) and the
two critic variants.

The actor's forward pass mirrors the execution engine's semantics exactly:
Z_0 given (zeros when stateless), Z_t = tanh(B(S) X_t + C(S) Z_{t-1}),
Y = D(S) Z_T, decision scores Y theta Y^T over (origin, receiver) pairs.
Everything runs in float64 so exported weights reproduce engine outputs to
tight tolerances.
"""

from __future__ import annotations

import torch
from torch import nn

DTYPE = torch.float64


def _filter(taps: torch.Tensor, s: torch.Tensor, x: torch.Tensor) -> torch.Tensor:
    """sum_l S^l x taps[l] for x of shape (..., m, F_in), by iterated shift."""
    out = x @ taps[0]
    shifted = x
    for tap in taps[1:]:
        shifted = torch.einsum("mn,...nf->...mf", s, shifted)
        out = out + shifted @ tap
    return out


def _taps(l: int, f_in: int, f_out: int, scale: float, gen: torch.Generator) -> nn.Parameter:
    w = (torch.rand((l, f_in, f_out), generator=gen, dtype=DTYPE) * 2 - 1) * scale
    return nn.Parameter(w)


class GrnnActor(nn.Module):
    """Parameter-shared graphical actor with a bilinear action head."""

    def __init__(self, F: int = 4, H: int = 16, G: int = 8, T: int = 2, L: int = 3,
                 seed: int = 0, init_scale: float = 0.1):
        super().__init__()
        self.F, self.H, self.G, self.T, self.L = F, H, G, T, L
        gen = torch.Generator().manual_seed(seed)
        self.B = _taps(L, F, H, init_scale, gen)
        self.C = _taps(L, H, H, init_scale, gen)
        self.D = _taps(L, H, G, init_scale, gen)
        self.theta = nn.Parameter((torch.rand((G, G), generator=gen, dtype=DTYPE) * 2 - 1) * init_scale)

    def forward(self, s: torch.Tensor, x: torch.Tensor, z0: torch.Tensor | None = None):
        """x: (..., m, F) fed identically at each of the T steps; returns
        (y, z_final) with y of shape (..., m, G)."""
        z = torch.zeros(*x.shape[:-1], self.H, dtype=DTYPE) if z0 is None else z0
        for _ in range(self.T):
            z = torch.tanh(_filter(self.B, s, x) + _filter(self.C, s, z))
        y = _filter(self.D, s, z)
        return y, z

    def scores(self, y: torch.Tensor) -> torch.Tensor:
        """(..., m, G) -> (..., m, m) bilinear decision scores."""
        return torch.einsum("...mg,gh,...nh->...mn", y, self.theta, y)


def masked_log_probs(scores: torch.Tensor, masks: torch.Tensor) -> torch.Tensor:
    """Log-softmax over the flattened valid (mu, nu) pairs; invalid pairs get
    a large negative score, matching the engine's additive masking."""
    flat = scores.reshape(*scores.shape[:-2], -1)
    flat_mask = masks.reshape(*masks.shape[:-2], -1)
    penalized = flat + (~flat_mask) * (-1.0e9)
    return torch.log_softmax(penalized, dim=-1)


class GnnCritic(nn.Module):
    """Graph-filter value network without recurrence (two filter layers)."""

    def __init__(self, F: int, H: int = 16, L: int = 3, seed: int = 0, init_scale: float = 0.1):
        super().__init__()
        self.F, self.H, self.L = F, H, L
        gen = torch.Generator().manual_seed(seed)
        self.B = _taps(L, F, H, init_scale, gen)
        self.D = _taps(L, H, 1, init_scale, gen)
        self.bias = nn.Parameter(torch.zeros(1, dtype=DTYPE))

    def forward(self, s: torch.Tensor, x: torch.Tensor) -> torch.Tensor:
        """x: (..., m, F) -> (...,) scalar value (mean node readout)."""
        h = torch.tanh(_filter(self.B, s, x))
        per_node = _filter(self.D, s, h)[..., 0]
        return per_node.mean(dim=-1) + self.bias
