'''
Bidirectional encoders.

Every topology is one wiring of two kinds of stack levels:

* bidirectional levels, run as a forward part and a backward part that alternate
  direction level by level (forward part starts left to right, backward part
  right to left), with residual connections from level 2 up;
* forward-only levels of double width stacked on the concatenated states.

shallow, deep transition, alternating, biunidirectional, bideep and mixed
encoders only differ in the number of levels of each kind and in each
level's transition depth. Padding is right-aligned; recurrences keep their
state unchanged over masked positions.
'''
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Tensor, ops
from ..errors import DimensionError, EmptySequenceError
from ..nn import DtGruCellParams, dtgru_cell, embed, residual_combine
from .config import EncoderConfig


@dataclass
class SourceAnnotations:
    '''
    :param annotations: `[B, N, C]` source word states.
    :param mask: `[B, N]` booleans, true at real tokens.
    :param layer_states: Optional per-level word states `{name: [N x [B, width]]}` for inspection.
    '''
    annotations: Tensor
    mask: np.ndarray
    layer_states: dict[str, list[Tensor]] | None = None
    _projections: dict[str, Tensor] = field(default_factory=dict, repr=False)

    @property
    def batch_size(self) -> int:
        return self.annotations.shape[0]

    @property
    def length(self) -> int:
        return self.annotations.shape[1]

    @property
    def width(self) -> int:
        return self.annotations.shape[2]

    def cached_projection(self, key: str, compute) -> Tensor:
        '''
        Memoizes a state-independent function of the annotations (the attention
        projection) for the lifetime of this object.
        '''
        if key not in self._projections:
            self._projections[key] = compute(self.annotations)
        return self._projections[key]

    def select(self, rows: np.ndarray) -> 'SourceAnnotations':
        '''
        Constant copy restricted to (possibly repeated) batch `rows`. Used by search.
        '''
        rows = np.asarray(rows, dtype=np.int64)
        selected = SourceAnnotations(Tensor(self.annotations.data[rows]), self.mask[rows])
        for (key, projected) in self._projections.items():
            selected._projections[key] = Tensor(projected.data[rows])
        return selected


def source_mask(tokens: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    '''
    Validates a right-padded batch and returns its boolean mask.
    '''
    tokens = np.asarray(tokens)
    if tokens.ndim != 2:
        raise DimensionError(f'Expected source ids of shape [B, N], got {tokens.shape}')
    if tokens.shape[1] == 0:
        raise EmptySequenceError('Empty source sentence')
    mask = np.ones(tokens.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if mask.shape != tokens.shape:
        raise DimensionError(f'Mask of shape {mask.shape} does not match ids {tokens.shape}')
    if not mask[:, 0].all():
        raise EmptySequenceError('Empty source sentence in batch')
    if (mask[:, 1:] & ~mask[:, :-1]).any():
        raise DimensionError('Source padding must be right-aligned')
    return mask


def source_embedding(params: Mapping[str, Tensor]) -> Tensor:
    return params['emb.shared'] if 'emb.shared' in params else params['emb.src']


def _run_level(cell: DtGruCellParams,
               inputs: Sequence[Tensor],
               mask: np.ndarray,
               reverse: bool,
               ) -> list[Tensor]:
    batch = inputs[0].shape[0]
    state = ops.zeros(batch, cell.hidden)
    outputs = [None] * len(inputs)
    positions = range(len(inputs) - 1, -1, -1) if reverse else range(len(inputs))
    for i in positions:
        new_state = dtgru_cell(cell, inputs[i], state)
        state = ops.where(mask[:, i:i + 1], new_state, state)
        outputs[i] = state
    return outputs


def _run_part(params: Mapping[str, Tensor],
              part: str,
              inputs: list[Tensor],
              mask: np.ndarray,
              depths: Sequence[int],
              reverse_first: bool,
              layer_states: dict | None,
              ) -> list[Tensor]:
    states = inputs
    for (index, depth) in enumerate(depths):
        level = index + 1
        cell = DtGruCellParams.from_params(params, f'enc.{part}.level{level}', depth)
        reverse = reverse_first if level % 2 == 1 else not reverse_first
        hidden = _run_level(cell, states, mask, reverse)
        states = hidden if level == 1 else [residual_combine(h, w) for (h, w) in zip(hidden, states)]
        if layer_states is not None:
            layer_states[f'{part}.level{level}'] = states
    return states


def encode_levels(params: Mapping[str, Tensor],
                  tokens: np.ndarray,
                  mask: np.ndarray | None,
                  bidirectional_depths: Sequence[int],
                  unidirectional_depths: Sequence[int] = (),
                  keep_layer_states: bool = False,
                  ) -> SourceAnnotations:
    '''
    The generic encoder.

    :param params: Model parameters.
    :param tokens: `[B, N]` source ids, right-padded.
    :param mask: `[B, N]`, true at real tokens; `None` means no padding.
    :param bidirectional_depths: Transition depth of each alternating bidirectional level.
    :param unidirectional_depths: Transition depth of each forward-only level above them.
    :param keep_layer_states: Keep every level's word states in the result.
    :return: `SourceAnnotations`.
    '''
    if not bidirectional_depths:
        raise DimensionError('An encoder needs at least one bidirectional level')
    tokens = np.asarray(tokens, dtype=np.int64)
    mask = source_mask(tokens, mask)
    table = source_embedding(params)
    inputs = [embed(table, tokens[:, i]) for i in range(tokens.shape[1])]
    layer_states = {} if keep_layer_states else None

    forward = _run_part(params, 'fwd', inputs, mask, bidirectional_depths, False, layer_states)
    backward = _run_part(params, 'bwd', inputs, mask, bidirectional_depths, True, layer_states)
    states = [ops.concat([f, b], axis=-1) for (f, b) in zip(forward, backward)]

    for (index, depth) in enumerate(unidirectional_depths):
        level = len(bidirectional_depths) + index + 1
        cell = DtGruCellParams.from_params(params, f'enc.uni.level{level}', depth)
        hidden = _run_level(cell, states, mask, reverse=False)
        states = [residual_combine(h, w) for (h, w) in zip(hidden, states)]
        if layer_states is not None:
            layer_states[f'uni.level{level}'] = states

    return SourceAnnotations(ops.stack(states, axis=1), mask, layer_states)


def encode_shallow(params, tokens, mask=None) -> SourceAnnotations:
    return encode_levels(params, tokens, mask, (1,))


def encode_deep_transition(params, tokens, mask=None, L_s: int = 4) -> SourceAnnotations:
    return encode_levels(params, tokens, mask, (L_s,))


def encode_alternating(params, tokens, mask=None, D_s: int = 4) -> SourceAnnotations:
    return encode_levels(params, tokens, mask, (1,) * D_s)


def encode_biunidirectional(params, tokens, mask=None, D_s: int = 4) -> SourceAnnotations:
    '''
    Shallow bidirectional base with `D_s - 1` forward-only levels of width `2H` above.
    '''
    return encode_levels(params, tokens, mask, (1,), (1,) * (D_s - 1))


def encode_bideep(params, tokens, mask=None, D_s: int = 2, L_s: int | Sequence[int] = 2) -> SourceAnnotations:
    '''
    Alternating encoder whose levels are deep transition cells. `L_s` is one
    depth for all levels or a list with one depth per level.
    '''
    depths = (L_s,) * D_s if isinstance(L_s, int) else tuple(L_s)
    if len(depths) != D_s:
        raise DimensionError(f'{len(depths)} transition depths given for {D_s} levels')
    return encode_levels(params, tokens, mask, depths)


def encode(params: Mapping[str, Tensor],
           config: EncoderConfig,
           tokens: np.ndarray,
           mask: np.ndarray | None = None,
           keep_layer_states: bool = False,
           ) -> SourceAnnotations:
    '''
    Runs the encoder described by `config`.
    '''
    config = config.validate()
    split = config.bidirectional_levels
    return encode_levels(params, tokens, mask,
                         config.transition_depth[:split],
                         config.transition_depth[split:],
                         keep_layer_states)
