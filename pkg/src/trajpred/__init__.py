"""Multi-agent trajectory prediction with a temporal pairwise relation
graph, adaptive top-p interaction pruning, an edge-aware relational
transformer, and best-of-K decoding."""

from .autodiff import Parameter, ShapeError, Tensor, concat, finite_difference_gradient
from .data import (
    ConfigError,
    NormalizationState,
    ParseError,
    Scene,
    denormalize,
    generate_synthetic,
    load_ethucy_text,
    normalize,
)
from .heads import (
    MetricReport,
    PredictionHeads,
    PredictionSet,
    best_of_k_loss,
    constant_velocity_baseline,
    min_ade_fde,
)
from .model import ForwardResult, ModelConfig, TrajectoryPredictor
from .pruning import PrunedGraph, prune, prune_oracle
from .relation_graph import (
    RelationGraph,
    TargConfig,
    TemporalNodeFeatures,
    TemporalRelationGraph,
    ablation_weights,
    positional_encoding,
)
from .transformer import RelationalTransformer, RtState

__version__ = "0.1.0"
