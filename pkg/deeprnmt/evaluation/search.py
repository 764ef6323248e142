'''
Greedy and beam search decoding.

Hypotheses are extended with every vocabulary entry, ranked by total log
probability and pruned to the live beam, which shrinks by one for every
hypothesis that emitted the end-of-sentence token. The returned hypothesis
maximizes the length-normalized score, i.e. total log probability divided by
the number of scored tokens (end-of-sentence included when emitted).
'''
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
import logging

import numpy as np

from ..autodiff import Tensor, no_grad, ops
from ..data import EOS_ID
from ..errors import EmptySequenceError, VocabularyError
from ..models import ModelConfig, encode, init_state, step
from ..models.decoders import target_embedding
from ..nn import embed
from ._parallel import map_items


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Hypothesis:
    '''
    :param tokens: Output tokens, without the end-of-sentence token.
    :param log_prob: Total log probability of the scored tokens.
    :param ended: `True` when the hypothesis emitted end-of-sentence, `False` when cut at `max_len`.
    '''
    tokens: tuple[int, ...]
    log_prob: float
    ended: bool

    @property
    def num_scored(self) -> int:
        return len(self.tokens) + int(self.ended)

    @property
    def score(self) -> float:
        return self.log_prob / max(self.num_scored, 1)


def _check_source(config: ModelConfig, source: Sequence[int]) -> np.ndarray:
    source = np.asarray(source, dtype=np.int64).reshape(-1)
    if source.size == 0:
        raise EmptySequenceError('Cannot decode an empty source sentence')
    if source.min() < 0 or source.max() >= config.src_vocab:
        raise VocabularyError(f'Source id out of range for a vocabulary of {config.src_vocab}')
    return source


def _best(pool: list[Hypothesis]) -> Hypothesis:
    # max() keeps the first of equal scores, so earlier finished hypotheses win ties
    return max(pool, key=lambda h: h.score)


def beam_search(params: Mapping[str, Tensor],
                config: ModelConfig,
                source: Sequence[int],
                beam_size: int = 5,
                max_len: int = 50,
                ) -> list[Hypothesis]:
    '''
    Runs beam search for one source sentence.

    Candidates are ordered by decreasing total log probability; ties are broken
    by the index of the extended hypothesis, then by token id.

    :return: Every hypothesis that left the beam, finished ones in order of completion
        followed by the live ones cut at `max_len`.
    '''
    if beam_size < 1 or max_len < 1:
        raise ValueError(f'beam_size and max_len must be positive, got {beam_size} and {max_len}')
    config = config.validate()
    source = _check_source(config, source)
    table = target_embedding(params)

    with no_grad():
        C = encode(params, config.encoder, source[None, :])
        state = init_state(C, params, config.decoder.depth)
        tokens = [()]
        log_probs = np.zeros(1)
        finished = []
        for t in range(max_len):
            live = len(tokens)
            if t == 0:
                C_live = C
                y_prev_emb = ops.zeros(1, table.shape[1])
            else:
                C_live = C.select(np.zeros(live, dtype=np.int64))
                y_prev_emb = embed(table, np.array([h[-1] for h in tokens], dtype=np.int64))
            out = step(params, config, state, y_prev_emb, C_live)
            step_log_probs = ops.log_softmax(out.logits, axis=-1).data

            vocab = step_log_probs.shape[1]
            candidates = (log_probs[:, None] + step_log_probs).reshape(-1)
            hyp_index = np.repeat(np.arange(live), vocab)
            token_id = np.tile(np.arange(vocab), live)
            order = np.lexsort((token_id, hyp_index, -candidates))[:beam_size - len(finished)]

            rows, new_tokens, new_log_probs = [], [], []
            for position in order:
                (h, y, lp) = (hyp_index[position], token_id[position], candidates[position])
                if y == EOS_ID:
                    finished.append(Hypothesis(tokens[h], float(lp), ended=True))
                else:
                    rows.append(h)
                    new_tokens.append(tokens[h] + (int(y),))
                    new_log_probs.append(lp)
            if not rows:
                break
            state = out.state.select(np.asarray(rows, dtype=np.int64))
            tokens = new_tokens
            log_probs = np.asarray(new_log_probs)
        else:
            finished.extend(Hypothesis(h, float(lp), ended=False) for (h, lp) in zip(tokens, log_probs))

    logger.debug(f'Beam search kept {len(finished)} hypotheses')
    return finished


def greedy_decode(params: Mapping[str, Tensor],
                  config: ModelConfig,
                  source: Sequence[int],
                  max_len: int = 50,
                  ) -> Hypothesis:
    '''
    Picks the most probable token at every step (lowest id on ties).
    '''
    return beam_search(params, config, source, beam_size=1, max_len=max_len)[0]


def decode(params: Mapping[str, Tensor],
           config: ModelConfig,
           source: Sequence[int],
           beam_size: int = 5,
           max_len: int = 50,
           ) -> Hypothesis:
    '''
    Length-normalized beam search. With `beam_size=1` this is exactly greedy
    decoding; with larger beams the greedy hypothesis joins the final pool, so
    the returned score is never below the greedy one.

    :param params: Model parameters.
    :param config: Model configuration.
    :param source: Source token ids.
    :param beam_size: Number of hypotheses kept per step.
    :param max_len: Maximum number of decoding steps.
    :return: The best `Hypothesis`.
    '''
    pool = beam_search(params, config, source, beam_size, max_len)
    if beam_size > 1:
        pool.append(greedy_decode(params, config, source, max_len))
    return _best(pool)


def _decode_item(params, config, item):
    (source, beam_size, max_len) = item
    return decode(params, config, source, beam_size, max_len)


def decode_corpus(params: Mapping[str, Tensor],
                  config: ModelConfig,
                  sources: Sequence[Sequence[int]],
                  beam_size: int = 5,
                  max_len: int = 50,
                  workers: int = 1,
                  ) -> list[Hypothesis]:
    '''
    Decodes every sentence of `sources`, in input order.

    :param workers: Number of worker processes; `1` decodes in-process.
    '''
    items = [(list(source), beam_size, max_len) for source in sources]
    return map_items(_decode_item, params, config, items, workers)
