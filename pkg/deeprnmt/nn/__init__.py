from .primitives import (
    LayerNormParams,
    AttentionParams,
    OutputLayerParams,
    OutputNetParams,
    embed,
    affine,
    layer_norm,
    attention,
    project_annotations,
    output_logits,
    )
from .cells import (
    GruTransitionParams,
    DtGruCellParams,
    gru_transition,
    dtgru_cell,
    residual_combine,
    )
