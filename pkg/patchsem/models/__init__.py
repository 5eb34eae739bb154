# Classifier graph - Export parameters, layers and the forward pass
from .layers import (
    attention_weights,
    hybrid_attention,
    loss,
    mcc_forward,
    predict,
    refine_and_fuse,
    residual_block,
    semantic_align,
    window_attention,
    window_bounds,
)
from .network import (
    ConfigMismatch,
    LevelActivations,
    batch_loss,
    forward,
    run_graph,
    score_records,
)
from .params import (
    InvalidConfig,
    ModelParams,
    enabled_levels,
    init_params,
    param_specs,
    parameter_count,
    uniform_init,
)

__all__ = [
    # Parameters
    "InvalidConfig",
    "ModelParams",
    "enabled_levels",
    "init_params",
    "param_specs",
    "parameter_count",
    "uniform_init",
    # Layers
    "residual_block",
    "mcc_forward",
    "window_bounds",
    "window_attention",
    "semantic_align",
    "refine_and_fuse",
    "attention_weights",
    "hybrid_attention",
    "predict",
    "loss",
    # Graph
    "ConfigMismatch",
    "LevelActivations",
    "run_graph",
    "forward",
    "batch_loss",
    "score_records",
]
