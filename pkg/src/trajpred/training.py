"""Adam optimizer, learning-rate schedule, and the scene-batched training
loop."""

from __future__ import annotations

import math

import numpy as np

from .autodiff import Parameter
from .data import Scene, normalize
from .heads import best_of_k_loss, min_ade_fde
from .model import TrajectoryPredictor

__all__ = ["Adam", "warmup_cosine", "train_epoch", "evaluate"]


def warmup_cosine(base_lr: float, warmup_steps: int, total_steps: int,
                  floor: float = 0.01):
    """Step -> learning rate: linear warmup then cosine decay to
    floor * base_lr. The unsquared distance loss has error-independent
    gradient magnitudes, so the decay (not just small steps) is what lets
    training settle near the optimum."""

    def lr_at(step: int) -> float:
        warm = min(1.0, step / warmup_steps) if warmup_steps > 0 else 1.0
        frac = min(step, total_steps) / max(total_steps, 1)
        cos = 0.5 * (1.0 + math.cos(math.pi * frac))
        return base_lr * warm * max(cos, floor)

    return lr_at


class Adam:
    def __init__(self, params: list[Parameter], lr: float = 1e-3,
                 betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8,
                 clip_norm: float = 0.0, lr_schedule=None):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.clip_norm = clip_norm
        self.lr_schedule = lr_schedule
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]

    def step(self) -> None:
        self.t += 1
        lr = self.lr_schedule(self.t) if self.lr_schedule is not None else self.lr
        scale = 1.0
        if self.clip_norm > 0.0:
            sq = sum(float(np.sum(p.grad * p.grad)) for p in self.params
                     if p.grad is not None)
            norm = math.sqrt(sq)
            if norm > self.clip_norm:
                scale = self.clip_norm / norm
        b1, b2 = self.beta1, self.beta2
        for i, p in enumerate(self.params):
            g = p.grad
            if g is None:
                continue
            g = g * scale
            self.m[i] = b1 * self.m[i] + (1 - b1) * g
            self.v[i] = b2 * self.v[i] + (1 - b2) * g * g
            m_hat = self.m[i] / (1 - b1 ** self.t)
            v_hat = self.v[i] / (1 - b2 ** self.t)
            p.data = p.data - lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()


def scene_loss(model: TrajectoryPredictor, scene: Scene, min_scope: str):
    """Loss on one normalized scene (translation cancels in distances)."""
    norm_scene, _ = normalize(scene)
    result = model.forward(norm_scene.observed)
    return best_of_k_loss(result.predictions, norm_scene.future, min_scope=min_scope)


def train_epoch(model: TrajectoryPredictor, optimizer: Adam, scenes: list[Scene],
                batch_scenes: int, min_scope: str, rng: np.random.Generator) -> float:
    """One pass over the scenes in a seeded shuffle; gradients accumulate
    per batch in index order, so runs are reproducible."""
    order = rng.permutation(len(scenes))
    total = 0.0
    for start in range(0, len(order), batch_scenes):
        batch = [scenes[i] for i in order[start:start + batch_scenes]]
        optimizer.zero_grad()
        for scene in batch:
            loss = scene_loss(model, scene, min_scope) * (1.0 / len(batch))
            loss.backward()
            total += float(loss.data) * len(batch)
        optimizer.step()
    return total / len(scenes)


def evaluate(model: TrajectoryPredictor, scenes: list[Scene]):
    """Agent-weighted minADE/minFDE over the scenes, plus per-scene rows
    (scene_id, ade, fde, k, M). Deterministic index-order reduction."""
    rows = []
    ade_sum = fde_sum = 0.0
    agents = 0
    for scene in scenes:
        preds, _ = model.predict(scene)
        report = min_ade_fde(preds, scene.future)
        m = scene.num_agents
        rows.append((scene.scene_id, report.min_ade, report.min_fde, report.k_used, m))
        ade_sum += report.min_ade * m
        fde_sum += report.min_fde * m
        agents += m
    return ade_sum / agents, fde_sum / agents, rows
