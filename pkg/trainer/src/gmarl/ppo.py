"""Rollout storage, generalized advantage estimation, and the clipped PPO
update for parameter-shared graphical actors.

Every node's action in every slot is one policy sample; the reward is the
single global signal, shared by all nodes (centralized training privilege).
IPPO pairs each node sample with a local-critic value; MAPPO uses one
centralized value per slot, broadcast to the node samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .model import DTYPE, GnnCritic, GrnnActor, masked_log_probs


@dataclass
class Rollout:
    s: np.ndarray  # (m, m) shift operator
    x: np.ndarray  # (K, m, m, F) actor inputs (batch row = acting node)
    z0: np.ndarray | None  # (K, m, m, H) pre-slot hidden states; None when stateless
    masks: np.ndarray  # (K, m, m, m) valid (mu, nu) pairs per acting node
    actions: np.ndarray  # (K, m) flat indices mu * m + nu
    logp: np.ndarray  # (K, m) behavior log-probabilities
    rewards: np.ndarray  # (K,) global rewards (already scaled for GAE)
    values: np.ndarray  # (K,) mappo | (K, m) ippo
    bootstrap: np.ndarray  # scalar () mappo | (m,) ippo: value of the final state
    critic_x: np.ndarray | None  # (K, m, 3) mappo joint features; None for ippo

    @property
    def steps(self) -> int:
        return self.x.shape[0]

    @property
    def m(self) -> int:
        return self.x.shape[1]


def gae(rewards: np.ndarray, values: np.ndarray, bootstrap, gamma: float, lam: float):
    """Advantages and value targets; values may carry a trailing node axis."""
    K = len(rewards)
    squeeze = values.ndim == 1
    v = values[:, None] if squeeze else values
    boot = np.atleast_1d(np.asarray(bootstrap, dtype=float))
    adv = np.zeros_like(v)
    carry = np.zeros(v.shape[1])
    next_v = boot if boot.shape == (v.shape[1],) else np.full(v.shape[1], float(boot[0]))
    for k in reversed(range(K)):
        delta = rewards[k] + gamma * next_v - v[k]
        carry = delta + gamma * lam * carry
        adv[k] = carry
        next_v = v[k]
    returns = adv + v
    if squeeze:
        return adv[:, 0], returns[:, 0]
    return adv, returns


@dataclass
class PpoConfig:
    clip: float = 0.2
    epochs: int = 4
    minibatch: int = 1024
    gamma: float = 0.99
    lam: float = 0.95
    lr: float = 3e-4
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    max_grad_norm: float = 0.5


class NanLossError(RuntimeError):
    pass


def ppo_update(
    actor: GrnnActor,
    critic: GnnCritic,
    optimizer: torch.optim.Optimizer,
    rollout: Rollout,
    cfg: PpoConfig,
    algorithm: str,
    rng: np.random.Generator,
) -> dict:
    """One PPO update (epochs x minibatches) on a collected episode."""
    K, m = rollout.steps, rollout.m
    s = torch.as_tensor(rollout.s, dtype=DTYPE)
    x = torch.as_tensor(rollout.x, dtype=DTYPE)
    masks = torch.as_tensor(rollout.masks)
    actions = torch.as_tensor(rollout.actions)
    old_logp = torch.as_tensor(rollout.logp, dtype=DTYPE)
    z0 = torch.as_tensor(rollout.z0, dtype=DTYPE) if rollout.z0 is not None else None

    adv, returns = gae(rollout.rewards, rollout.values, rollout.bootstrap, cfg.gamma, cfg.lam)
    if algorithm == "mappo":
        adv_nodes = np.repeat(adv[:, None], m, axis=1)
        value_targets = torch.as_tensor(returns, dtype=DTYPE)  # (K,)
        critic_x = torch.as_tensor(rollout.critic_x, dtype=DTYPE)
    else:
        adv_nodes = adv
        value_targets = torch.as_tensor(returns, dtype=DTYPE)  # (K, m)
        critic_x = None
    adv_nodes = (adv_nodes - adv_nodes.mean()) / (adv_nodes.std() + 1e-8)
    adv_t = torch.as_tensor(adv_nodes, dtype=DTYPE)

    flat = [(k, i) for k in range(K) for i in range(m)]
    flat = np.array(flat)
    stats = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0, "clip_frac": 0.0}
    batches = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(len(flat))
        for start in range(0, len(flat), cfg.minibatch):
            sel = flat[order[start:start + cfg.minibatch]]
            ks = torch.as_tensor(sel[:, 0])
            js = torch.as_tensor(sel[:, 1])
            xb = x[ks, js]  # (B, m, F)
            zb = z0[ks, js] if z0 is not None else None
            y, _ = actor(s, xb, z0=zb)
            logp_all = masked_log_probs(actor.scores(y), masks[ks, js])
            logp = logp_all.gather(1, actions[ks, js][:, None])[:, 0]
            ratio = torch.exp(logp - old_logp[ks, js])
            a = adv_t[ks, js]
            unclipped = ratio * a
            clipped = torch.clamp(ratio, 1 - cfg.clip, 1 + cfg.clip) * a
            policy_loss = -torch.minimum(unclipped, clipped).mean()
            probs = torch.exp(logp_all)
            entropy = -(probs * logp_all.clamp(min=-60)).sum(dim=1).mean()

            if algorithm == "mappo":
                uk = torch.unique(ks)
                v = critic(s, critic_x[uk])
                value_loss = torch.mean((v - value_targets[uk]) ** 2)
            else:
                v = critic(s, xb)
                value_loss = torch.mean((v - value_targets[ks, js]) ** 2)

            loss = policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * entropy
            if not torch.isfinite(loss):
                raise NanLossError(
                    f"non-finite loss: policy={policy_loss.item()} value={value_loss.item()} "
                    f"entropy={entropy.item()}"
                )
            optimizer.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(
                [p for group in optimizer.param_groups for p in group["params"]], cfg.max_grad_norm
            )
            optimizer.step()
            with torch.no_grad():
                stats["policy_loss"] += float(policy_loss)
                stats["value_loss"] += float(value_loss)
                stats["entropy"] += float(entropy)
                stats["clip_frac"] += float(((ratio - 1).abs() > cfg.clip).double().mean())
            batches += 1
    return {k: v / max(batches, 1) for k, v in stats.items()}
