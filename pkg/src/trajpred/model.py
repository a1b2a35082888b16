"""Full prediction pipeline: relation graph -> pruning -> relational
transformer -> K-head decoding, with scene normalization handled at the
boundary so predictions translate exactly with their inputs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Parameter, Tensor
from .data import Scene, denormalize, normalize
from .heads import PredictionHeads, PredictionSet
from .pruning import PrunedGraph, prune
from .relation_graph import RelationGraph, TargConfig, TemporalNodeFeatures, TemporalRelationGraph
from .transformer import RelationalTransformer, RtState

__all__ = ["ModelConfig", "ForwardResult", "TrajectoryPredictor"]


@dataclass(frozen=True)
class ModelConfig:
    d: int = 64
    heads: int = 4
    layers: int = 1
    k: int = 20
    t_f: int = 12
    top_p: float = 0.75
    weighting: str = "temporal_attention"
    prune_enabled: bool = True

    def __post_init__(self):
        if not (0.0 < self.top_p <= 1.0):
            raise ValueError(f"top_p must lie in (0, 1], got {self.top_p}")


@dataclass
class ForwardResult:
    features: TemporalNodeFeatures
    graph: RelationGraph
    pruned: PrunedGraph
    state0: RtState
    state: RtState
    predictions: PredictionSet


class TrajectoryPredictor:
    def __init__(self, config: ModelConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(seed)
        self.targ = TemporalRelationGraph(
            TargConfig(d=config.d, heads=config.heads, weighting=config.weighting), rng
        )
        self.rt = RelationalTransformer(config.d, config.heads, config.layers, rng)
        self.heads = PredictionHeads(config.d, config.k, config.t_f, rng)
        names = [p.name for p in self.parameters()]
        assert len(names) == len(set(names)), "parameter names must be unique"

    def parameters(self) -> list[Parameter]:
        return self.targ.parameters() + self.rt.parameters() + self.heads.parameters()

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def forward(self, observed: np.ndarray, *, store_scores: bool = False) -> ForwardResult:
        """Run on already-normalized (M, T_h, 2) positions."""
        features, graph = self.targ.forward(observed, store_scores=store_scores)
        if self.config.prune_enabled:
            pruned = prune(graph.weights.data, self.config.top_p)
        else:
            pruned = prune(graph.weights.data, 1.0)
        state0 = self.rt.init_state(features, graph, pruned)
        state = self.rt.encode(state0, pruned)
        last = np.asarray(observed, dtype=np.float64)[:, -1, :]
        predictions = self.heads.decode(state0.node_features, state.node_features, last)
        return ForwardResult(features=features, graph=graph, pruned=pruned,
                             state0=state0, state=state, predictions=predictions)

    def predict(self, scene: Scene, *, store_scores: bool = False) -> tuple[PredictionSet, ForwardResult]:
        """Normalize, run the pipeline, and map candidates back to the scene
        frame."""
        norm_scene, state = normalize(scene)
        result = self.forward(norm_scene.observed, store_scores=store_scores)
        shifted = result.predictions.positions + state.centroid
        return PredictionSet(candidates=Tensor(shifted)), result
