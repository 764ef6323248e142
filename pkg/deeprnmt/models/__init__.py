from .config import (
    ENCODER_KINDS,
    DECODER_KINDS,
    DECODER_VARIANTS,
    EncoderConfig,
    DecoderConfig,
    ModelConfig,
    )
from .params import (
    ParamSpec,
    ParameterSet,
    ParameterCount,
    parameter_schema,
    init_params,
    count_params,
    )
from .encoders import (
    SourceAnnotations,
    encode,
    encode_levels,
    encode_shallow,
    encode_deep_transition,
    encode_alternating,
    encode_biunidirectional,
    encode_bideep,
    )
from .decoders import (
    DecoderState,
    StepOutput,
    init_state,
    decoder_step,
    step,
    step_baseline,
    step_deep_transition,
    step_stacked,
    step_bideep,
    sequence_log_probs,
    score_sequence,
    )
from .checkpoint import (
    save_checkpoint,
    load_checkpoint,
    )
