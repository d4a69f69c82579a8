"""Batch entity resolution: blocking, similarity features, pair classification, clustering."""

from .tables import (
    Attribute,
    AttributeSchema,
    CleaningRule,
    Column,
    Dictionary,
    Table,
    apply_cleaning_rules,
    drop_constant_columns,
    encode_dictionary,
    load_dataset,
    profile,
)
from .indexing import IndexingConfig, block_and_pair, expand_rows, feature_subsets, index_dataset
from .similarity import (
    FeatureSpec,
    Tokenizer,
    build_feature_spec,
    featurize_pairs,
    numeric_similarity,
    string_similarity,
    token_similarity,
    tokenize,
)
from .matcher import (
    Hyperparameters,
    MatchModel,
    apply_threshold,
    predict_proba,
    split_train_test,
    train,
)
from .clustering import (
    EntityCluster,
    MatchGraph,
    assign_entity_ids,
    build_graph,
    connected_components,
    disjoint_cliques,
    edge_weight_loss,
    maximal_cliques,
)
from .metrics import EvaluationReport, clusters_to_pairs, pairwise_metrics
from .synth import generate_synthetic
from .config import PipelineConfig, load_config, validate_config
from .pipeline import run_pipeline

__version__ = "0.1.0"
