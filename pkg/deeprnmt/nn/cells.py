'''
GRU transition blocks, deep transition cells made of several transitions, and
the residual connection between stack levels.

A transition uses the state-carrying update convention

    z  = sigmoid(a_z),  r = sigmoid(a_r)
    h~ = tanh(a_c_x + r * a_c_h)
    h' = (1 - z) * h~ + z * h

with the three gate contributions packed into `3H` columns in the order `z, r, candidate`.
'''
from collections.abc import Mapping
from dataclasses import dataclass

from ..autodiff import Tensor, ops
from ..errors import DimensionError
from .primitives import LayerNormParams, layer_norm


@dataclass(frozen=True)
class GruTransitionParams:
    U: Tensor
    b: Tensor
    W: Tensor | None = None
    ln_input: LayerNormParams | None = None
    ln_state: LayerNormParams | None = None

    def __post_init__(self):
        hidden = self.U.shape[0]
        if self.U.shape != (hidden, 3 * hidden) or self.b.shape != (3 * hidden,):
            raise DimensionError(f'GRU transition needs U of shape [H, 3H] and b of shape [3H], '
                                 f'got {self.U.shape} and {self.b.shape}')
        if self.W is not None and self.W.shape[1] != 3 * hidden:
            raise DimensionError(f'Input weights of shape {self.W.shape} do not fit a state of size {hidden}')

    @property
    def hidden(self) -> int:
        return self.U.shape[0]

    @property
    def input_dim(self) -> int:
        return 0 if self.W is None else self.W.shape[0]

    @classmethod
    def from_params(cls, params: Mapping[str, Tensor], prefix: str) -> 'GruTransitionParams':
        return cls(
            U=params[f'{prefix}.U'],
            b=params[f'{prefix}.b'],
            W=params.get(f'{prefix}.W'),
            ln_input=LayerNormParams.from_params(params, f'{prefix}.ln_input'),
            ln_state=LayerNormParams.from_params(params, f'{prefix}.ln_state'),
            )


def gru_transition(p: GruTransitionParams, x: Tensor | None, h: Tensor) -> Tensor:
    '''
    One GRU transition.

    :param p: Transition parameters.
    :param x: External input `[B, d_in]`, or `None` for a transition without input.
    :param h: Previous state `[B, H]`.
    :return: New state `[B, H]`.
    '''
    if (x is None) != (p.W is None):
        raise DimensionError('A GRU transition takes an input exactly when it has input weights')
    if h.shape[-1] != p.hidden:
        raise DimensionError(f'State of shape {h.shape} does not fit a transition of size {p.hidden}')
    H = p.hidden

    state_part = h @ p.U
    if p.ln_state is not None:
        state_part = layer_norm(state_part, p.ln_state)
    if x is None:
        input_part = p.b
    else:
        input_part = x @ p.W
        if p.ln_input is not None:
            input_part = layer_norm(input_part, p.ln_input)
        input_part = input_part + p.b

    gates = ops.sigmoid(ops.slice_(input_part, 0, 2 * H) + ops.slice_(state_part, 0, 2 * H))
    z = ops.slice_(gates, 0, H)
    r = ops.slice_(gates, H, 2 * H)
    candidate = ops.tanh(ops.slice_(input_part, 2 * H, 3 * H) + r * ops.slice_(state_part, 2 * H, 3 * H))
    return (1.0 - z) * candidate + z * h


@dataclass(frozen=True)
class DtGruCellParams:
    transitions: tuple[GruTransitionParams, ...]

    def __post_init__(self):
        if not self.transitions:
            raise DimensionError('A deep transition cell needs at least one transition')
        hidden = self.transitions[0].hidden
        if any(t.hidden != hidden for t in self.transitions):
            raise DimensionError('All transitions of a cell must share the state size')
        if any(t.W is not None for t in self.transitions[1:]):
            raise DimensionError('Only the first transition of a deep transition cell takes an input')

    @property
    def depth(self) -> int:
        return len(self.transitions)

    @property
    def hidden(self) -> int:
        return self.transitions[0].hidden

    @classmethod
    def from_params(cls, params: Mapping[str, Tensor], prefix: str, depth: int) -> 'DtGruCellParams':
        return cls(tuple(GruTransitionParams.from_params(params, f'{prefix}.trans{t}') for t in range(1, depth + 1)))


def dtgru_cell(p: DtGruCellParams, inp: Tensor | None, state: Tensor) -> Tensor:
    '''
    Applies the transitions in order; only the first sees `inp`. Returns the
    output of the last transition, which is also the next recurrent state.
    '''
    v = gru_transition(p.transitions[0], inp, state)
    for transition in p.transitions[1:]:
        v = gru_transition(transition, None, v)
    return v


def residual_combine(h: Tensor, w_below: Tensor) -> Tensor:
    if h.shape != w_below.shape:
        raise DimensionError(f'Residual connection between shapes {h.shape} and {w_below.shape}')
    return h + w_below
