"""epgraph: graph entropy, motif-preserving augmentation, mixed-order
propagation, and consistency-regularized semi-supervised node classification.
"""

from .graph import Graph, SparseOperator, normalized_adjacency, spmm
from .io import BundleError, DatasetBundle, LabelSet, load_bundle, write_bundle
from .motifs import MotifIndex, brute_force_triangles, enumerate_triangles, motif_coverage_stats
from .augment import (
    STRATEGIES,
    AugmentationPlan,
    PerturbedGraph,
    drop_edge,
    drop_node,
    dropout_features,
    entropy_preserving_augment,
    generate_batch,
    grand_drop,
    motif_only_features,
)
from .entropy import (
    SCENARIOS,
    EntropyReport,
    EntropyResult,
    entropy_drop_sweep,
    entropy_scenario_report,
    node_functional,
    node_probabilities,
    smoothness_index,
)
from .propagate import (
    PropagationOperator,
    mixed_order_propagate,
    propagate_gradients,
    softmax_weights,
)
from .train import (
    ClassifierParams,
    TrainConfig,
    TrainReport,
    TrainingDivergedError,
    average_prediction,
    classify,
    consistency_loss,
    evaluate,
    gcn_forward,
    load_checkpoint,
    predict,
    save_checkpoint,
    sharpen,
    supervised_loss,
    total_loss,
    train,
    train_gcn,
)
from .synthetic import erdos_renyi, planted_partition_bundle

__version__ = "0.1.0"
