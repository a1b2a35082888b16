"""K-candidate trajectory decoding, best-of-K loss, and displacement metrics.

Each head maps the concatenated initial and refined node features through
its own MLP to per-step displacements; positions come from a cumulative sum
anchored at the last observed position, which makes predictions translate
with the scene. The training loss takes the minimum candidate distance
inside the per-timestep sum, so gradient reaches only the per-step winner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Parameter, Tensor, concat
from .data import Scene

__all__ = [
    "PredictionSet",
    "MetricReport",
    "PredictionHeads",
    "best_of_k_loss",
    "min_ade_fde",
    "constant_velocity_baseline",
]


@dataclass
class PredictionSet:
    """K candidate futures per agent, (M, K, T_f, 2), scene frame."""

    candidates: Tensor
    best_index: np.ndarray | None = None  # per-agent k minimizing trajectory ADE

    @property
    def positions(self) -> np.ndarray:
        return self.candidates.data


@dataclass
class MetricReport:
    min_ade: float
    min_fde: float
    k_used: int
    per_scene: list = field(default_factory=list)  # (scene_id, ade, fde, m) rows


def _init(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.normal(0.0, 1.0 / math.sqrt(shape[0]), size=shape)


class PredictionHeads:
    """K parallel decoders from [h0 || hL] (width 2d) to T_f displacement
    steps. Two hidden layers of width 2d with GELU."""

    def __init__(self, d: int, k: int, t_f: int, rng: np.random.Generator,
                 prefix: str = "head"):
        if k < 1:
            raise ValueError("need at least one head")
        self.d, self.k, self.t_f = d, k, t_f
        w = 2 * d
        self.params_per_head = []
        for i in range(k):
            self.params_per_head.append({
                "w1": Parameter(f"{prefix}{i}.w1", _init(rng, (w, w))),
                "b1": Parameter(f"{prefix}{i}.b1", np.zeros(w)),
                "w2": Parameter(f"{prefix}{i}.w2", _init(rng, (w, w))),
                "b2": Parameter(f"{prefix}{i}.b2", np.zeros(w)),
                "w3": Parameter(f"{prefix}{i}.w3", _init(rng, (w, t_f * 2))),
                "b3": Parameter(f"{prefix}{i}.b3", np.zeros(t_f * 2)),
            })

    def parameters(self) -> list[Parameter]:
        return [p for head in self.params_per_head for p in head.values()]

    def decode(self, h0: Tensor, h_final: Tensor, last_observed: np.ndarray) -> PredictionSet:
        m = h0.shape[0]
        x = concat([h0, h_final], axis=-1)  # (M, 2d)
        anchor = Tensor(np.asarray(last_observed, dtype=np.float64).reshape(m, 1, 1, 2))
        outs = []
        for hp in self.params_per_head:
            z = (x @ hp["w1"].tensor + hp["b1"].tensor).gelu()
            z = (z @ hp["w2"].tensor + hp["b2"].tensor).gelu()
            disp = (z @ hp["w3"].tensor + hp["b3"].tensor).reshape(m, 1, self.t_f, 2)
            outs.append(disp)
        displacements = concat(outs, axis=1)            # (M, K, T_f, 2)
        positions = displacements.cumsum(axis=2) + anchor
        return PredictionSet(candidates=positions)


def best_of_k_loss(predictions: PredictionSet, future: np.ndarray,
                   min_scope: str = "per_step") -> Tensor:
    """Mean displacement with the min over candidates taken per time step
    (default) or per whole trajectory. Gradient flows only to winners."""
    pred = predictions.candidates
    fut = np.asarray(future, dtype=np.float64)
    m, k, t_f, _ = pred.shape
    if fut.shape != (m, t_f, 2):
        raise ValueError(
            f"future shape {fut.shape} does not match predictions ({m}, {t_f}, 2)"
        )
    diff = pred - Tensor(fut.reshape(m, 1, t_f, 2))
    dist = diff.l2norm_lastaxis()                       # (M, K, T_f)
    if min_scope == "per_step":
        winner = np.argmin(dist.data, axis=1)           # (M, T_f)
        best = dist.gather(axis=1, index=winner[:, None, :])  # (M, 1, T_f)
        return best.mean()
    if min_scope == "per_trajectory":
        ade = dist.mean(axis=2)                         # (M, K)
        winner = np.argmin(ade.data, axis=1)            # (M,)
        best = ade.gather(axis=1, index=winner[:, None])
        return best.mean()
    raise ValueError(f"unknown min scope {min_scope!r}")


def min_ade_fde(predictions: PredictionSet, future: np.ndarray) -> MetricReport:
    """Per agent, minimum-over-candidates mean and final displacement errors,
    averaged over agents. The min is taken independently per metric."""
    pred = predictions.positions
    fut = np.asarray(future, dtype=np.float64)
    m, k = pred.shape[0], pred.shape[1]
    dist = np.linalg.norm(pred - fut[:, None], axis=-1)  # (M, K, T_f)
    ade_k = dist.mean(axis=2)                            # (M, K)
    fde_k = dist[:, :, -1]                               # (M, K)
    predictions.best_index = np.argmin(ade_k, axis=1)
    min_ade = float(np.mean([row.min() for row in ade_k]))
    min_fde = float(np.mean([row.min() for row in fde_k]))
    return MetricReport(min_ade=min_ade, min_fde=min_fde, k_used=k)


def constant_velocity_baseline(scene: Scene, t_f: int | None = None) -> PredictionSet:
    """Single candidate extrapolating the last observed step velocity."""
    if t_f is None:
        t_f = scene.t_f
    obs = scene.observed
    last = obs[:, -1, :]
    vel = obs[:, -1, :] - obs[:, -2, :] if obs.shape[1] >= 2 else np.zeros_like(last)
    steps = np.arange(1, t_f + 1, dtype=np.float64)
    traj = last[:, None, :] + vel[:, None, :] * steps[None, :, None]
    return PredictionSet(candidates=Tensor(traj[:, None]))  # (M, 1, T_f, 2)
