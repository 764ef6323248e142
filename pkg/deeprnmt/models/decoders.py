'''
Attentional decoders.

The base stack level is always a conditional cell: transition 1 reads the
previous target embedding, attention runs on its output, transition 2 reads
the context vector, further transitions have no input. Higher levels depend on
the variant:

* `gru`:   deep transition cell fed with the residual output of the level below;
* `rgru`:  as `gru`, fed with that output concatenated to the base context;
* `cgru`:  conditional cell with its own attention network;
* `crgru`: conditional cell reusing the base context, without attention parameters.

Level outputs are combined residually from level 2 up, while each level's
recurrent state is its own last transition. The baseline, deep transition,
stacked and bideep decoders are all instances of `decoder_step`.
'''
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import partial

import numpy as np

from ..autodiff import Tensor, no_grad, ops
from ..errors import DimensionError, EmptySequenceError, VocabularyError
from ..nn import (
    AttentionParams,
    DtGruCellParams,
    GruTransitionParams,
    OutputNetParams,
    attention,
    dtgru_cell,
    embed,
    gru_transition,
    output_logits,
    project_annotations,
    residual_combine,
    )
from .config import DECODER_VARIANTS, ModelConfig
from .encoders import SourceAnnotations, encode


@dataclass(frozen=True)
class DecoderState:
    '''
    :param levels: One recurrent state `[B, H]` per stack level.
    :param base_context: Context vector of the base level from the last step.
    :param context: Context vector handed to the output network at the last step.
    '''
    levels: tuple[Tensor, ...]
    base_context: Tensor | None = None
    context: Tensor | None = None

    def select(self, rows: np.ndarray) -> 'DecoderState':
        '''
        Constant copy restricted to (possibly repeated) batch `rows`.
        '''
        pick = lambda t: None if t is None else Tensor(t.data[rows])
        return DecoderState(tuple(pick(s) for s in self.levels), pick(self.base_context), pick(self.context))


@dataclass(frozen=True)
class StepOutput:
    state: DecoderState
    contexts: tuple[Tensor, ...]
    logits: Tensor


def target_embedding(params: Mapping[str, Tensor]) -> Tensor:
    return params['emb.shared'] if 'emb.shared' in params else params['emb.tgt']


def init_state(C: SourceAnnotations, params: Mapping[str, Tensor], depth: int | None = None) -> DecoderState:
    '''
    Every level starts from `tanh(W mean(C) + b)`, the mean taken over
    unmasked positions only.
    '''
    if depth is None:
        depth = 1
        while f'dec.init.level{depth + 1}.W' in params:
            depth += 1
    mask = np.asarray(C.mask, dtype=bool)
    counts = mask.sum(axis=1)
    if (counts == 0).any():
        raise EmptySequenceError('Cannot initialize the decoder from a fully masked source')
    weights = mask.astype(C.annotations.data.dtype)[:, :, None]
    mean = ops.sum_(C.annotations * weights, axis=1) * (1.0 / counts[:, None])
    levels = tuple(
        ops.tanh(mean @ params[f'dec.init.level{k}.W'] + params[f'dec.init.level{k}.b'])
        for k in range(1, depth + 1)
        )
    return DecoderState(levels)


def _attend(params: Mapping[str, Tensor], prefix: str, C: SourceAnnotations, s: Tensor) -> Tensor:
    p = AttentionParams.from_params(params, prefix)
    projected = C.cached_projection(prefix, partial(project_annotations, p))
    (context, _) = attention(p, C.annotations, s, C.mask, projected)
    return context


def decoder_step(params: Mapping[str, Tensor],
                 state: DecoderState,
                 y_prev_emb: Tensor,
                 C: SourceAnnotations,
                 variant: str,
                 depths: Sequence[int],
                 literal_conditional_state: bool = False,
                 ) -> StepOutput:
    '''
    One output word of the generic stacked deep transition decoder.

    :param params: Model parameters.
    :param state: Recurrent state from the previous step or `init_state`.
    :param y_prev_emb: `[B, E]` embedding of the previous target word (zeros at the first step).
    :param C: Source annotations.
    :param variant: Cell of levels above the base, one of `DECODER_VARIANTS`.
    :param depths: Transition depth of each level, base first. Conditional higher levels use at least two.
    :param literal_conditional_state: Feed the base level's first transition state into transition 2 of
        cgru/crgru levels.
    :return: `StepOutput` with the new state, the context of every attending level and `[B, V]` logits.
    '''
    if variant not in DECODER_VARIANTS:
        raise ValueError(f'Unknown decoder variant "{variant}", expected one of {DECODER_VARIANTS}')
    if len(state.levels) != len(depths):
        raise DimensionError(f'Decoder state has {len(state.levels)} levels, the architecture {len(depths)}')
    if depths[0] < 2:
        raise DimensionError(f'The base decoder level needs at least 2 transitions, got {depths[0]}')

    transition = lambda prefix: GruTransitionParams.from_params(params, prefix)

    s_first = gru_transition(transition('dec.level1.trans1'), y_prev_emb, state.levels[0])
    base_context = _attend(params, 'dec.level1.att', C, s_first)
    s = gru_transition(transition('dec.level1.trans2'), base_context, s_first)
    for t in range(3, depths[0] + 1):
        s = gru_transition(transition(f'dec.level1.trans{t}'), None, s)

    new_levels = [s]
    contexts = [base_context]
    below = s
    for level in range(2, len(depths) + 1):
        prefix = f'dec.level{level}'
        previous = state.levels[level - 1]
        if variant in ('gru', 'rgru'):
            cell = DtGruCellParams.from_params(params, prefix, depths[level - 1])
            inp = below if variant == 'gru' else ops.concat([below, base_context], axis=-1)
            h = dtgru_cell(cell, inp, previous)
        else:
            v_first = gru_transition(transition(f'{prefix}.trans1'), below, previous)
            if variant == 'cgru':
                context = _attend(params, f'{prefix}.att', C, v_first)
                contexts.append(context)
            else:
                context = base_context
            h = gru_transition(transition(f'{prefix}.trans2'), context,
                               s_first if literal_conditional_state else v_first)
            for t in range(3, max(2, depths[level - 1]) + 1):
                h = gru_transition(transition(f'{prefix}.trans{t}'), None, h)
        new_levels.append(h)
        below = residual_combine(h, below)

    logits = output_logits(OutputNetParams.from_params(params, 'dec.out'), below, y_prev_emb, base_context)
    return StepOutput(DecoderState(tuple(new_levels), base_context, base_context), tuple(contexts), logits)


def step_baseline(params, state, y_prev_emb, C) -> StepOutput:
    return decoder_step(params, state, y_prev_emb, C, 'gru', (2,))


def step_deep_transition(params, state, y_prev_emb, C, L_t: int) -> StepOutput:
    if L_t < 2:
        raise DimensionError(f'A deep transition decoder needs at least 2 transitions, got {L_t}')
    return decoder_step(params, state, y_prev_emb, C, 'gru', (L_t,))


def step_stacked(params, state, y_prev_emb, C, variant: str, D_t: int,
                 literal_conditional_state: bool = False) -> StepOutput:
    return decoder_step(params, state, y_prev_emb, C, variant, (2,) + (1,) * (D_t - 1),
                        literal_conditional_state)


def step_bideep(params, state, y_prev_emb, C, variant: str, D_t: int, depths: Sequence[int],
                literal_conditional_state: bool = False) -> StepOutput:
    if len(depths) != D_t:
        raise DimensionError(f'{len(depths)} transition depths given for {D_t} levels')
    return decoder_step(params, state, y_prev_emb, C, variant, tuple(depths), literal_conditional_state)


def step(params: Mapping[str, Tensor], config: ModelConfig, state: DecoderState,
         y_prev_emb: Tensor, C: SourceAnnotations) -> StepOutput:
    '''
    Runs the decoder described by `config` for one output word.
    '''
    dec = config.decoder
    return decoder_step(params, state, y_prev_emb, C, dec.variant, dec.depths, dec.literal_conditional_state)


def previous_embeddings(params: Mapping[str, Tensor], target: np.ndarray) -> list[Tensor]:
    '''
    Decoder inputs for teacher forcing: a zero vector, then the embeddings of
    `target[:, :-1]`.
    '''
    table = target_embedding(params)
    batch = target.shape[0]
    inputs = [ops.zeros(batch, table.shape[1])]
    inputs += [embed(table, target[:, j]) for j in range(target.shape[1] - 1)]
    return inputs


def sequence_log_probs(params: Mapping[str, Tensor],
                       config: ModelConfig,
                       source: np.ndarray,
                       source_mask: np.ndarray | None,
                       target: np.ndarray,
                       target_mask: np.ndarray | None = None,
                       ) -> Tensor:
    '''
    Teacher-forced log-probability of every target token, `[B, T]`, zero at masked positions.
    '''
    config = config.validate()
    target = np.asarray(target, dtype=np.int64)
    if target.ndim != 2 or target.shape[1] == 0:
        raise EmptySequenceError(f'Expected a nonempty target batch of shape [B, T], got {target.shape}')
    if target.min() < 0 or target.max() >= config.tgt_vocab:
        raise VocabularyError(f'Target id out of range for a vocabulary of {config.tgt_vocab}')
    target_mask = np.ones(target.shape, dtype=bool) if target_mask is None else np.asarray(target_mask, dtype=bool)

    C = encode(params, config.encoder, source, source_mask)
    state = init_state(C, params, config.decoder.depth)
    columns = []
    for (j, y_prev_emb) in enumerate(previous_embeddings(params, target)):
        out = step(params, config, state, y_prev_emb, C)
        state = out.state
        log_probs = ops.log_softmax(out.logits, axis=-1)
        columns.append(ops.where(target_mask[:, j], ops.pick(log_probs, target[:, j]), 0.0))
    return ops.stack(columns, axis=1)


def score_sequence(params: Mapping[str, Tensor],
                   config: ModelConfig,
                   source: Sequence[int],
                   target: Sequence[int],
                   ) -> tuple[float, list[float]]:
    '''
    Teacher-forced log-probability of exactly the tokens of `target` given `source`.

    :return: Total log-probability and the per-token values (which sum to the total).
    '''
    if len(target) == 0:
        raise EmptySequenceError('Cannot score an empty target')
    config = config.validate()
    if min(source, default=0) < 0 or max(source, default=0) >= config.src_vocab:
        raise VocabularyError(f'Source id out of range for a vocabulary of {config.src_vocab}')
    with no_grad():
        log_probs = sequence_log_probs(params, config, np.asarray([source]), None, np.asarray([target]))
    per_token = [float(x) for x in log_probs.data[0]]
    return float(ops.sequential_sum(log_probs.data[0])), per_token
