"""Neural fact-prediction model over precomputed video encodings.

The architecture is the classifier-plus-predicate-MLPs design: a
multi-classifier maps the video encoding to per-individual presence
probabilities, one small MLP per predicate scores candidate facts over
trainable individual vectors, and inference thresholds both stages.
"""

from vid2kg.model.ablate import ABLATION_MODES, ablate
from vid2kg.model.config import ModelConfig
from vid2kg.model.features import (
    FeatureStore,
    RandomFeatureStore,
    load_features,
    pool_frames,
    write_features,
)
from vid2kg.model.gradcheck import gradient_check
from vid2kg.model.network import (
    GradBag,
    classify_individuals,
    example_gradients,
    example_losses,
    loss_classifier,
    loss_facts,
    presence_vector,
    score_atom,
    score_fact,
)
from vid2kg.model.params import (
    Mlp,
    ModelParams,
    init_params,
    params_equal,
    params_from_obj,
    params_to_obj,
    read_params,
    write_params,
)
from vid2kg.model.predict import predict, predict_kg
from vid2kg.model.training import Adam, Sgd, TrainResult, resolve_encoding, train

__all__ = [
    "ABLATION_MODES",
    "Adam",
    "FeatureStore",
    "GradBag",
    "Mlp",
    "ModelConfig",
    "ModelParams",
    "RandomFeatureStore",
    "Sgd",
    "TrainResult",
    "ablate",
    "classify_individuals",
    "example_gradients",
    "example_losses",
    "gradient_check",
    "init_params",
    "load_features",
    "loss_classifier",
    "loss_facts",
    "params_equal",
    "params_from_obj",
    "params_to_obj",
    "pool_frames",
    "predict",
    "predict_kg",
    "presence_vector",
    "read_params",
    "resolve_encoding",
    "score_atom",
    "score_fact",
    "train",
    "write_features",
    "write_params",
]
