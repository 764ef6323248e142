from collections.abc import Mapping
from dataclasses import dataclass, field
import math

import numpy as np

from ..errors import ConfigError, NonFiniteGradientError
from ..models import ParameterSet
from ..autodiff import ops


@dataclass(frozen=True)
class TrainHyper:
    '''
    Optimizer and training loop settings.

    :param select_by: `"ce"` keeps the checkpoint with the lowest validation cross-entropy,
        `"bleu"` the one with the highest validation BLEU of greedy decoding.
    '''
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = 1.0
    batch_size: int = 32
    valid_every: int = 500
    patience: int = 10
    max_steps: int = 5000
    warmup: int = 200
    select_by: str = 'ce'

    def validate(self) -> 'TrainHyper':
        if not self.lr > 0:
            raise ConfigError(f'train.lr must be positive, got {self.lr}')
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError('train.beta1 and train.beta2 must lie in [0, 1)')
        if not self.eps > 0:
            raise ConfigError(f'train.eps must be positive, got {self.eps}')
        if self.clip_norm < 0:
            raise ConfigError(f'train.clip_norm must not be negative (0 disables clipping), got {self.clip_norm}')
        if self.batch_size < 1 or self.valid_every < 1 or self.max_steps < 1:
            raise ConfigError('train.batch_size, train.valid_every and train.max_steps must be positive')
        if self.patience < 0 or self.warmup < 0:
            raise ConfigError('train.patience and train.warmup must not be negative')
        if self.select_by not in ('ce', 'bleu'):
            raise ConfigError(f'train.select_by must be "ce" or "bleu", got "{self.select_by}"')
        return self


@dataclass
class TrainState:
    '''
    Optimizer moments and the early stopping bookkeeping.
    '''
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    best_valid_ce: float = math.inf
    bad_evaluations: int = 0
    seed: int = 0


def global_norm(grads: Mapping[str, np.ndarray]) -> float:
    squares = np.array([ops.sequential_sum(g * g) for g in grads.values()])
    return float(np.sqrt(ops.sequential_sum(squares))) if squares.size else 0.0


def clip_grad_norm(grads: Mapping[str, np.ndarray], max_norm: float) -> tuple[dict[str, np.ndarray], float]:
    '''
    Rescales all gradients together so their global L2 norm is at most `max_norm`.

    A non-finite norm leaves the gradients untouched, so the tensor at fault stays the only
    non-finite one.

    :return: The (possibly) rescaled gradients and the norm before clipping.
    '''
    norm = global_norm(grads)
    if max_norm <= 0 or not math.isfinite(norm) or norm <= max_norm:
        return dict(grads), norm
    scale = max_norm / norm
    return {name: g * scale for (name, g) in grads.items()}, norm


def optimizer_step(state: TrainState,
                   params: ParameterSet,
                   grads: Mapping[str, np.ndarray],
                   hyper: TrainHyper,
                   ) -> tuple[ParameterSet, TrainState]:
    '''
    One bias-corrected adaptive-moment update, applied to `params` in place.

    :raises NonFiniteGradientError: Before touching anything, when a gradient holds NaN or infinity.
    '''
    for (name, grad) in grads.items():
        if name not in params:
            raise KeyError(f'Gradient for unknown parameter "{name}"')
        if grad.shape != params[name].shape:
            raise ValueError(f'Gradient of "{name}" has shape {grad.shape}, expected {params[name].shape}')
        if not np.isfinite(grad).all():
            raise NonFiniteGradientError(name)

    state.step += 1
    correction1 = 1.0 - hyper.beta1 ** state.step
    correction2 = 1.0 - hyper.beta2 ** state.step
    for (name, grad) in grads.items():
        m = state.m.get(name)
        v = state.v.get(name)
        m = (1.0 - hyper.beta1) * grad if m is None else hyper.beta1 * m + (1.0 - hyper.beta1) * grad
        v = (1.0 - hyper.beta2) * grad * grad if v is None else hyper.beta2 * v + (1.0 - hyper.beta2) * grad * grad
        state.m[name] = m
        state.v[name] = v
        params[name].data -= hyper.lr * (m / correction1) / (np.sqrt(v / correction2) + hyper.eps)
    return params, state
