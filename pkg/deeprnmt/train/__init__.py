from .trainer import Trainer, TrainResult, train
from .history import History
from .optim import (
    TrainHyper,
    TrainState,
    global_norm,
    clip_grad_norm,
    optimizer_step,
    )
from .objective import (
    loss,
    token_log_probs,
    summed_log_prob,
    corpus_cross_entropy,
    )
