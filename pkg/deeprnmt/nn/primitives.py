'''
Building blocks shared by encoders and decoders: embedding lookup, affine maps,
layer normalization, the single-hidden-layer attention network and the
(optionally deep) output network.

All functions work on batches: states are `[B, H]`, annotations `[B, N, C]`.
'''
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor, ops
from ..errors import DimensionError, EmptySequenceError


LAYER_NORM_EPSILON = 1e-5


@dataclass(frozen=True)
class LayerNormParams:
    gain: Tensor
    bias: Tensor
    epsilon: float = LAYER_NORM_EPSILON

    def __post_init__(self):
        if self.gain.shape != self.bias.shape or self.gain.ndim != 1:
            raise DimensionError(f'Layer norm gain {self.gain.shape} and bias {self.bias.shape} must be equal vectors')
        if self.epsilon <= 0:
            raise ValueError('Layer norm epsilon must be positive')

    @classmethod
    def from_params(cls, params: Mapping[str, Tensor], prefix: str) -> 'LayerNormParams | None':
        '''
        Collects `<prefix>.gain` and `<prefix>.bias`, or returns `None` when the
        model was built without layer normalization.
        '''
        if f'{prefix}.gain' not in params:
            return None
        return cls(params[f'{prefix}.gain'], params[f'{prefix}.bias'])


def layer_norm(x: Tensor, p: LayerNormParams) -> Tensor:
    return ops.layer_norm(x, p.gain, p.bias, p.epsilon)


def _maybe_norm(x: Tensor, p: LayerNormParams | None) -> Tensor:
    return x if p is None else layer_norm(x, p)


def embed(table: Tensor, token_ids) -> Tensor:
    '''
    Looks up rows of `table`. `token_ids` may be a single id or an integer array.
    '''
    return ops.embedding(table, token_ids)


def affine(x: Tensor, W: Tensor, b: Tensor | None = None, norm: LayerNormParams | None = None) -> Tensor:
    out = _maybe_norm(x @ W, norm)
    return out if b is None else out + b


@dataclass(frozen=True)
class AttentionParams:
    '''
    Parameters of `v . tanh(W_state s + W_ann C_i + b)`.
    '''
    W_state: Tensor
    W_ann: Tensor
    b: Tensor
    v: Tensor
    ln_state: LayerNormParams | None = None
    ln_ann: LayerNormParams | None = None

    def __post_init__(self):
        hidden = self.W_state.shape[1]
        if self.W_ann.shape[1] != hidden or self.b.shape != (hidden,) or self.v.shape != (hidden,):
            raise DimensionError(f'Attention pieces disagree on the hidden size: W_state {self.W_state.shape}, '
                                 f'W_ann {self.W_ann.shape}, b {self.b.shape}, v {self.v.shape}')

    @property
    def hidden(self) -> int:
        return self.W_state.shape[1]

    @classmethod
    def from_params(cls, params: Mapping[str, Tensor], prefix: str) -> 'AttentionParams':
        return cls(
            W_state=params[f'{prefix}.W_state'],
            W_ann=params[f'{prefix}.W_ann'],
            b=params[f'{prefix}.b'],
            v=params[f'{prefix}.v'],
            ln_state=LayerNormParams.from_params(params, f'{prefix}.ln_state'),
            ln_ann=LayerNormParams.from_params(params, f'{prefix}.ln_ann'),
            )


def project_annotations(p: AttentionParams, C: Tensor) -> Tensor:
    '''
    The state-independent half of the attention hidden layer, `W_ann C_i`,
    for every position. Shape `[B, N, A]`.
    '''
    (batch, length, width) = C.shape
    if width != p.W_ann.shape[0]:
        raise DimensionError(f'Annotations of width {width} do not fit W_ann of shape {p.W_ann.shape}')
    flat = C.reshape(batch * length, width) @ p.W_ann
    return _maybe_norm(flat, p.ln_ann).reshape(batch, length, p.hidden)


def attention(p: AttentionParams,
              C: Tensor,
              s: Tensor,
              mask: np.ndarray,
              projected: Tensor | None = None,
              ) -> tuple[Tensor, Tensor]:
    '''
    MLP attention over source annotations.

    :param p: Attention parameters.
    :param C: Annotations `[B, N, C]`.
    :param s: Decoder states `[B, H]`.
    :param mask: `[B, N]`, nonzero at real tokens. Masked positions get weight exactly 0.
    :param projected: Result of `project_annotations(p, C)` when already computed.
    :return: Context vectors `[B, C]` and weights `[B, N]`.
    '''
    (batch, length, width) = C.shape
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (batch, length):
        raise DimensionError(f'Mask of shape {mask.shape} does not match annotations {C.shape}')
    if not mask.any(axis=1).all():
        raise EmptySequenceError('Attention over a fully masked source')
    if projected is None:
        projected = project_annotations(p, C)

    query = _maybe_norm(s @ p.W_state, p.ln_state) + p.b
    hidden = ops.tanh(projected + query.reshape(batch, 1, p.hidden))
    scores = (hidden.reshape(batch * length, p.hidden) @ p.v.reshape(p.hidden, 1)).reshape(batch, length)
    weights = ops.softmax(ops.where(mask, scores, -np.inf), axis=-1)
    context = ops.sum_(weights.reshape(batch, length, 1) * C, axis=1)
    return context, weights


@dataclass(frozen=True)
class OutputLayerParams:
    '''
    One tanh hidden layer of the output network. The first layer has one weight
    matrix per input (state, previous embedding, context); deeper layers have `W_state` only.
    '''
    W_state: Tensor
    b: Tensor
    W_prev: Tensor | None = None
    W_ctx: Tensor | None = None
    ln_state: LayerNormParams | None = None
    ln_prev: LayerNormParams | None = None
    ln_ctx: LayerNormParams | None = None


@dataclass(frozen=True)
class OutputNetParams:
    layers: tuple[OutputLayerParams, ...]
    W_out: Tensor
    b_out: Tensor

    def __post_init__(self):
        if not self.layers:
            raise DimensionError('The output network needs at least one hidden layer')
        width = self.layers[0].W_state.shape[1]
        for layer in self.layers[1:]:
            if layer.W_state.shape != (width, width):
                raise DimensionError(f'Output hidden layer of shape {layer.W_state.shape} breaks the width {width}')
        if self.W_out.shape[0] != width or self.b_out.shape != self.W_out.shape[1:]:
            raise DimensionError(f'Output projection {self.W_out.shape} / {self.b_out.shape} does not fit width {width}')

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def vocab_size(self) -> int:
        return self.W_out.shape[1]

    @classmethod
    def from_params(cls, params: Mapping[str, Tensor], prefix: str) -> 'OutputNetParams':
        layers = []
        depth = 1
        while f'{prefix}.hidden{depth}.W_state' in params:
            layer_prefix = f'{prefix}.hidden{depth}'
            layers.append(OutputLayerParams(
                W_state=params[f'{layer_prefix}.W_state'],
                b=params[f'{layer_prefix}.b'],
                W_prev=params.get(f'{layer_prefix}.W_prev'),
                W_ctx=params.get(f'{layer_prefix}.W_ctx'),
                ln_state=LayerNormParams.from_params(params, f'{layer_prefix}.ln_state'),
                ln_prev=LayerNormParams.from_params(params, f'{layer_prefix}.ln_prev'),
                ln_ctx=LayerNormParams.from_params(params, f'{layer_prefix}.ln_ctx'),
                ))
            depth += 1
        return cls(tuple(layers), params[f'{prefix}.proj.W'], params[f'{prefix}.proj.b'])


def output_logits(p: OutputNetParams, s: Tensor, y_prev_emb: Tensor, c: Tensor) -> Tensor:
    '''
    Unnormalized target-word scores `[B, V]` from the decoder state, the previous
    target embedding and the context vector. The latter two are ignored when the
    network was built state-only.
    '''
    first = p.layers[0]
    pre = affine(s, first.W_state, norm=first.ln_state)
    if first.W_prev is not None:
        pre = pre + affine(y_prev_emb, first.W_prev, norm=first.ln_prev)
    if first.W_ctx is not None:
        pre = pre + affine(c, first.W_ctx, norm=first.ln_ctx)
    hidden = ops.tanh(pre + first.b)
    for layer in p.layers[1:]:
        hidden = ops.tanh(affine(hidden, layer.W_state, layer.b, layer.ln_state))
    return affine(hidden, p.W_out, p.b_out)
