from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .tasks import EOS_ID, Pair


@dataclass(frozen=True)
class Batch:
    '''
    Right-padded id matrices with boolean masks. `indices` are the positions of
    the pairs in the list they were batched from.
    '''
    source: np.ndarray
    source_mask: np.ndarray
    target: np.ndarray
    target_mask: np.ndarray
    indices: tuple[int, ...]

    @property
    def size(self) -> int:
        return self.source.shape[0]

    @property
    def num_target_tokens(self) -> int:
        return int(self.target_mask.sum())


def pad(sequences: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    '''
    Stacks sequences into `[B, max_len]` ids padded with the end-of-sentence id,
    plus the mask of real tokens.
    '''
    width = max(len(s) for s in sequences)
    ids = np.full((len(sequences), width), EOS_ID, dtype=np.int64)
    mask = np.zeros((len(sequences), width), dtype=bool)
    for (row, sequence) in enumerate(sequences):
        ids[row, :len(sequence)] = sequence
        mask[row, :len(sequence)] = True
    return ids, mask


def make_batches(pairs: Sequence[Pair],
                 batch_size: int,
                 rng: np.random.Generator | None = None,
                 ) -> list[Batch]:
    '''
    Sorts pairs by length, cuts them into batches and pads each batch.

    :param pairs: (source, target) id lists; targets are used as given.
    :param batch_size: Maximum number of pairs per batch.
    :param rng: When given, the order of the batches is shuffled with it.
    :return: Batches covering every pair exactly once.
    '''
    if batch_size < 1:
        raise ValueError(f'Expected batch_size >= 1, got {batch_size}')
    order = sorted(range(len(pairs)), key=lambda i: (len(pairs[i][0]), len(pairs[i][1]), i))
    batches = []
    for start in range(0, len(order), batch_size):
        indices = tuple(order[start:start + batch_size])
        (source, source_mask) = pad([pairs[i][0] for i in indices])
        (target, target_mask) = pad([pairs[i][1] for i in indices])
        batches.append(Batch(source, source_mask, target, target_mask, indices))
    if rng is not None:
        batches = [batches[i] for i in rng.permutation(len(batches))]
    return batches
