from collections.abc import Mapping

import numpy as np

from ..autodiff import Tensor, no_grad, ops
from ..data import Batch
from ..models import ModelConfig, sequence_log_probs


def token_log_probs(params: Mapping[str, Tensor], config: ModelConfig, batch: Batch) -> Tensor:
    return sequence_log_probs(params, config, batch.source, batch.source_mask, batch.target, batch.target_mask)


def loss(params: Mapping[str, Tensor], config: ModelConfig, batch: Batch) -> Tensor:
    '''
    Mean cross-entropy per unmasked target token of `batch`.
    '''
    count = batch.num_target_tokens
    if count == 0:
        raise ValueError('Cannot compute a loss over a batch without target tokens')
    total = ops.sum_(token_log_probs(params, config, batch))
    return total * (-1.0 / count)


def summed_log_prob(params: Mapping[str, Tensor], config: ModelConfig, batch: Batch) -> float:
    '''
    Sum of target token log-probabilities, for token-weighted averages over several batches.
    '''
    return float(ops.sequential_sum(token_log_probs(params, config, batch).data))


def corpus_cross_entropy(params: Mapping[str, Tensor], config: ModelConfig, batches: list[Batch]) -> float:
    with no_grad():
        total = np.array([summed_log_prob(params, config, b) for b in batches])
    count = sum(b.num_target_tokens for b in batches)
    return float(-ops.sequential_sum(total) / count)
