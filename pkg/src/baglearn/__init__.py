"""baglearn: multi-instance learning on bags of feature vectors.

Data model and IO, bag-aware scaling, neural and classical MIL estimators
with per-instance weight attribution, key-instance-detection metrics,
stepwise hyperparameter search, genetic consensus selection, and
deterministic benchmark generators.
"""

from .bags import BagDataset, CLASSIFICATION, REGRESSION, split_train_test
from .consensus import (
    GAConfig,
    PredictionMatrix,
    build_model_pool,
    consensus_predict,
    default_model_pool,
    genetic_search,
)
from .datagen import (
    AdditiveSpec,
    ClfBagSpec,
    PPISpec,
    RegBagSpec,
    create_bags_clf,
    create_bags_reg,
    encode_window_pair,
    generate_additive_bags,
    generate_cluster_instances,
    generate_ppi_bags,
)
from .errors import (
    BaglearnError,
    ConfigError,
    DataError,
    FormatError,
    NumericError,
    ShapeError,
)
from .estimators import (
    BagWrapper,
    InstanceWrapper,
    NeuralMIL,
    NeuralMILConfig,
    WrapperConfig,
    load_model,
    load_model_bundle,
    model_from_dict,
    model_to_json,
    save_model,
    save_model_bundle,
)
from .hyperopt import DEFAULT_PARAM_GRID, HoptResult, stepwise_search
from .idx import load_idx_images, load_idx_labels
from .jsonl import read_bags_jsonl, write_bags_jsonl
from .metrics import (
    MetricsReport,
    accuracy,
    evaluate_model,
    kid_accuracy,
    kid_rank_correlation,
    r2,
    spearman,
)
from .pipelines import benchmark_defaults, generate_benchmark_dataset, run_benchmark
from .pooling import pool
from .scaling import BagMinMaxScaler

__version__ = "0.1.0"
