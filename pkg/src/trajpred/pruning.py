"""Per-agent top-p sparsification of a dense edge-weight matrix.

For each agent the neighbors are ranked by weight (descending, ties broken
by ascending index), the shortest prefix whose cumulative weight ratio
reaches p is kept, and the kept weights are renormalized to sum to one.
Pruning is a hard selection: it is never differentiated through.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["PrunedGraph", "prune", "prune_oracle"]


@dataclass(frozen=True)
class PrunedGraph:
    weights: np.ndarray          # (M, M) renormalized, zero where pruned
    kept: tuple                  # per-agent tuple of retained neighbor indices
    k_star: np.ndarray           # (M,) retained count per agent

    @property
    def keep_mask(self) -> np.ndarray:
        """(M, M) boolean, True where the edge survived (diagonal False)."""
        return self.weights > 0.0


def _check_inputs(weights: np.ndarray, p: float) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"weights must be square (M, M), got {w.shape}")
    off = w[~np.eye(w.shape[0], dtype=bool)]
    if off.size and off.min() < 0:
        raise ValueError("off-diagonal weights must be nonnegative")
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must lie in (0, 1], got {p}")
    return w


def prune(weights: np.ndarray, p: float) -> PrunedGraph:
    w = _check_inputs(weights, p)
    m = w.shape[0]
    out = np.zeros((m, m))
    kept: list[tuple[int, ...]] = []
    k_star = np.zeros(m, dtype=np.intp)
    for i in range(m):
        neighbors = np.array([j for j in range(m) if j != i], dtype=np.intp)
        if neighbors.size == 0:
            kept.append(())
            continue
        row = w[i, neighbors]
        if row.sum() == 0.0:
            # degenerate all-zero row: keep everyone, uniform weight
            out[i, neighbors] = 1.0 / neighbors.size
            kept.append(tuple(neighbors))
            k_star[i] = neighbors.size
            continue
        # descending weight, ascending index on ties: sort on (-w, j)
        order = neighbors[np.lexsort((neighbors, -row))]
        csum = np.cumsum(w[i, order])
        total = csum[-1]
        k = int(np.searchsorted(csum / total, p, side="left")) + 1
        k = min(k, order.size)
        sel = order[:k]
        # correctly-rounded mass so decimal inputs renormalize exactly
        # (e.g. 0.3 / (0.5 + 0.3) is 0.375 to the last bit)
        out[i, sel] = w[i, sel] / math.fsum(w[i, sel])
        kept.append(tuple(sel))
        k_star[i] = k
    return PrunedGraph(weights=out, kept=tuple(kept), k_star=k_star)


def prune_oracle(weights: np.ndarray, p: float) -> PrunedGraph:
    """Brute-force reference: grow k from 1, recomputing sums naively each
    step. Shares no selection code with prune()."""
    w = _check_inputs(weights, p)
    m = w.shape[0]
    out = np.zeros((m, m))
    kept: list[tuple[int, ...]] = []
    k_star = np.zeros(m, dtype=np.intp)
    for i in range(m):
        candidates = [j for j in range(m) if j != i]
        if not candidates:
            kept.append(())
            continue
        if sum(w[i, j] for j in candidates) == 0.0:
            for j in candidates:
                out[i, j] = 1.0 / len(candidates)
            kept.append(tuple(candidates))
            k_star[i] = len(candidates)
            continue
        ranked = sorted(candidates, key=lambda j: (-w[i, j], j))
        total = 0.0
        for j in ranked:
            total += w[i, j]
        chosen: list[int] = []
        for k in range(1, len(ranked) + 1):
            chosen = ranked[:k]
            cum = 0.0
            for j in chosen:
                cum += w[i, j]
            if cum / total >= p:
                break
        mass = math.fsum(w[i, j] for j in chosen)
        for j in chosen:
            out[i, j] = w[i, j] / mass
        kept.append(tuple(chosen))
        k_star[i] = len(chosen)
    return PrunedGraph(weights=out, kept=tuple(kept), k_star=k_star)
