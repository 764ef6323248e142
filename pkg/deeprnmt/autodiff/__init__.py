from .tensor import (
    Tensor,
    Graph,
    no_grad,
    is_grad_enabled,
    set_precision,
    get_dtype,
    BACKWARD_RULES,
    )
from .ops import (
    add,
    sub,
    mul,
    neg,
    sigmoid,
    tanh,
    matmul,
    concat,
    slice_,
    reshape,
    stack,
    sum_,
    mean,
    where,
    embedding,
    pick,
    softmax,
    log_softmax,
    layer_norm,
    zeros,
    sequential_sum,
    )
from .gradcheck import (
    check_gradients,
    GradcheckReport,
    TensorCheck,
    )
