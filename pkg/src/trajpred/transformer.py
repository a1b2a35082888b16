"""Edge-aware relational transformer over the pruned interaction graph.

Each layer attends over an agent's retained neighbors plus itself, with
keys and values modulated by per-edge features, then updates node features
through a residual feed-forward block and edge features through a residual
MLP over the concatenated endpoint and bidirectional edge features. Pruned
edges are masked out of the attention and never updated, so they have
exactly zero influence on the output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .autodiff import Parameter, Tensor, concat
from .pruning import PrunedGraph
from .relation_graph import RelationGraph, TemporalNodeFeatures

__all__ = ["RtState", "RelationalTransformer"]

# large negative logit; exp() underflows to exactly zero after max-shift
_MASK_VALUE = -1e300


@dataclass
class RtState:
    node_features: Tensor    # (M, d)
    edge_features: Tensor    # (M, M, d); zero where pruned
    layer_index: int = 0


def _init(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.normal(0.0, 1.0 / math.sqrt(shape[0]), size=shape)


class _LayerParams:
    def __init__(self, rng, d: int, prefix: str):
        self.w_q = Parameter(f"{prefix}.w_q", _init(rng, (d, d)))
        self.w_k = Parameter(f"{prefix}.w_k", _init(rng, (d, d)))
        self.w_v = Parameter(f"{prefix}.w_v", _init(rng, (d, d)))
        self.w_ek = Parameter(f"{prefix}.w_ek", _init(rng, (d, d)))
        self.w_ev = Parameter(f"{prefix}.w_ev", _init(rng, (d, d)))
        self.ffn_w1 = Parameter(f"{prefix}.ffn_w1", _init(rng, (d, 4 * d)))
        self.ffn_b1 = Parameter(f"{prefix}.ffn_b1", np.zeros(4 * d))
        self.ffn_w2 = Parameter(f"{prefix}.ffn_w2", _init(rng, (4 * d, d)))
        self.ffn_b2 = Parameter(f"{prefix}.ffn_b2", np.zeros(d))
        self.edge_w1 = Parameter(f"{prefix}.edge_w1", _init(rng, (4 * d, d)))
        self.edge_b1 = Parameter(f"{prefix}.edge_b1", np.zeros(d))
        self.edge_w2 = Parameter(f"{prefix}.edge_w2", _init(rng, (d, d)))
        self.edge_b2 = Parameter(f"{prefix}.edge_b2", np.zeros(d))

    def parameters(self) -> list[Parameter]:
        return [self.w_q, self.w_k, self.w_v, self.w_ek, self.w_ev,
                self.ffn_w1, self.ffn_b1, self.ffn_w2, self.ffn_b2,
                self.edge_w1, self.edge_b1, self.edge_w2, self.edge_b2]


class RelationalTransformer:
    def __init__(self, d: int, heads: int, layers: int,
                 rng: np.random.Generator, prefix: str = "rt"):
        if layers < 1:
            raise ValueError("need at least one layer")
        if d % heads != 0:
            raise ValueError(f"d={d} must be divisible by heads={heads}")
        self.d = d
        self.heads = heads
        self.layers = [_LayerParams(rng, d, f"{prefix}.layer{i}") for i in range(layers)]

    def parameters(self) -> list[Parameter]:
        return [p for layer in self.layers for p in layer.parameters()]

    # ---- state --------------------------------------------------------------

    def init_state(self, features: TemporalNodeFeatures, graph: RelationGraph,
                   pruned: PrunedGraph) -> RtState:
        """Nodes start as the time-mean of the embedded features; edges start
        as the pairwise relation features, zeroed on pruned pairs (self edges
        survive)."""
        h0 = features.h.mean(axis=1)  # (M, d)
        m = h0.shape[0]
        mask = pruned.keep_mask | np.eye(m, dtype=bool)
        e0 = graph.relations.masked_fill(mask[:, :, None], 0.0)
        return RtState(node_features=h0, edge_features=e0, layer_index=0)

    # ---- layers -------------------------------------------------------------

    def rt_layer(self, state: RtState, pruned: PrunedGraph, layer: _LayerParams) -> RtState:
        h = state.node_features
        m, d = h.shape
        n_heads, dh = self.heads, d // self.heads
        mask = pruned.keep_mask | np.eye(m, dtype=bool)  # self always attended
        # force pruned entries to zero so stale values can never leak in
        e = state.edge_features.masked_fill(mask[:, :, None], 0.0)

        def split_heads(x: Tensor) -> Tensor:
            # (M, d) -> (heads, M, dh)
            return x.reshape(m, n_heads, dh).transpose(1, 0, 2)

        def split_edge_heads(x: Tensor) -> Tensor:
            # (M, M, d) -> (heads, M, M, dh)
            return x.reshape(m, m, n_heads, dh).transpose(2, 0, 1, 3)

        q = split_heads(h @ layer.w_q.tensor)
        k = split_heads(h @ layer.w_k.tensor)
        v = split_heads(h @ layer.w_v.tensor)
        ek = split_edge_heads(e @ layer.w_ek.tensor)
        ev = split_edge_heads(e @ layer.w_ev.tensor)

        node_logits = q @ k.transpose(0, 2, 1)                        # (H, M, M)
        edge_logits = (q.reshape(n_heads, m, 1, dh) * ek).sum(axis=-1)
        logits = (node_logits + edge_logits) * (1.0 / math.sqrt(dh))
        alpha = logits.masked_fill(mask[None, :, :], _MASK_VALUE).softmax(axis=-1)

        message = alpha @ v + (alpha.reshape(n_heads, m, m, 1) * ev).sum(axis=2)
        merged = message.transpose(1, 0, 2).reshape(m, d)

        ffn = (merged @ layer.ffn_w1.tensor + layer.ffn_b1.tensor).gelu()
        h_new = h + (ffn @ layer.ffn_w2.tensor + layer.ffn_b2.tensor)

        # edge update reads the just-updated node features
        hi = h_new.reshape(m, 1, d).broadcast_to((m, m, d))
        hj = h_new.reshape(1, m, d).broadcast_to((m, m, d))
        cat = concat([hi, hj, e, e.transpose(1, 0, 2)], axis=-1)      # (M, M, 4d)
        hidden = (cat @ layer.edge_w1.tensor + layer.edge_b1.tensor).gelu()
        delta = hidden @ layer.edge_w2.tensor + layer.edge_b2.tensor
        e_new = e + delta.masked_fill(mask[:, :, None], 0.0)

        return RtState(node_features=h_new, edge_features=e_new,
                       layer_index=state.layer_index + 1)

    def encode(self, state: RtState, pruned: PrunedGraph) -> RtState:
        for layer in self.layers:
            state = self.rt_layer(state, pruned, layer)
        return state
