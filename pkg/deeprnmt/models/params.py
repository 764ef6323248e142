'''
Parameter naming, deterministic initialization and closed-form counting.

Names are hierarchical and identical across architecture kinds wherever the
structures coincide, e.g. the first forward encoder level is always
`enc.fwd.level1.trans1.*`, so a shallow model's parameters drive a deep
transition or bideep model of depth one unchanged.
'''
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
import logging

import numpy as np

from ..autodiff import Tensor
from ..errors import DimensionError
from .config import ModelConfig


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParamSpec:
    '''
    :param init: `"uniform"` (scaled by `1/sqrt(fan_in)`), `"orthogonal"` (per square gate block),
        `"zeros"` or `"ones"`.
    :param component: Group the tensor is counted in.
    '''
    name: str
    shape: tuple[int, ...]
    init: str
    component: str

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


class ParameterSet(Mapping[str, Tensor]):
    '''
    Ordered map from hierarchical name to trainable `Tensor`.
    '''

    def __init__(self, tensors: Mapping[str, Tensor] | Iterable[tuple[str, Tensor]] = ()) -> None:
        items = tensors.items() if isinstance(tensors, Mapping) else tensors
        self._tensors: dict[str, Tensor] = {}
        for (name, tensor) in items:
            if name in self._tensors:
                raise ValueError(f'Duplicate parameter name "{name}"')
            tensor.name = name
            self._tensors[name] = tensor

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray], requires_grad: bool = True) -> 'ParameterSet':
        return cls((name, Tensor(array, requires_grad=requires_grad)) for (name, array) in arrays.items())

    def __getitem__(self, name: str) -> Tensor:
        try:
            return self._tensors[name]
        except KeyError:
            raise KeyError(f'No parameter named "{name}"') from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    @property
    def total_size(self) -> int:
        return sum(t.size for t in self._tensors.values())

    def zero_grad(self) -> None:
        for tensor in self._tensors.values():
            tensor.zero_grad()

    def grads(self) -> dict[str, np.ndarray]:
        '''
        Accumulated gradients by name; zeros for tensors the last loss did not reach.
        '''
        return {
            name: t.grad if t.grad is not None else np.zeros_like(t.data)
            for (name, t) in self._tensors.items()
            }

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for (name, t) in self._tensors.items()}

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        '''
        Overwrites every tensor in place. Names and shapes must match exactly.
        '''
        for name in self._tensors:
            if name not in state:
                raise DimensionError(f'State has no tensor "{name}"')
        for (name, array) in state.items():
            if name not in self._tensors:
                raise DimensionError(f'Unexpected tensor "{name}" in state')
            if np.shape(array) != self._tensors[name].shape:
                raise DimensionError(f'Tensor "{name}" has shape {np.shape(array)}, '
                                     f'expected {self._tensors[name].shape}')
        for (name, array) in state.items():
            self._tensors[name].data[...] = array

    def __repr__(self) -> str:
        return f'ParameterSet({len(self)} tensors, {self.total_size} scalars)'


# Schema

def _layer_norm_specs(prefix: str, width: int, component: str) -> list[ParamSpec]:
    return [
        ParamSpec(f'{prefix}.gain', (width,), 'ones', component),
        ParamSpec(f'{prefix}.bias', (width,), 'zeros', component),
        ]


def _transition_specs(prefix: str, d_in: int, hidden: int, layer_norm: bool, component: str) -> list[ParamSpec]:
    specs = []
    if d_in:
        specs.append(ParamSpec(f'{prefix}.W', (d_in, 3 * hidden), 'uniform', component))
    specs.append(ParamSpec(f'{prefix}.U', (hidden, 3 * hidden), 'orthogonal', component))
    specs.append(ParamSpec(f'{prefix}.b', (3 * hidden,), 'zeros', component))
    if layer_norm:
        if d_in:
            specs += _layer_norm_specs(f'{prefix}.ln_input', 3 * hidden, component)
        specs += _layer_norm_specs(f'{prefix}.ln_state', 3 * hidden, component)
    return specs


def _cell_specs(prefix: str, d_in: int, hidden: int, depth: int, layer_norm: bool, component: str) -> list[ParamSpec]:
    specs = _transition_specs(f'{prefix}.trans1', d_in, hidden, layer_norm, component)
    for t in range(2, depth + 1):
        specs += _transition_specs(f'{prefix}.trans{t}', 0, hidden, layer_norm, component)
    return specs


def _attention_specs(prefix: str, state_dim: int, ann_dim: int, hidden: int,
                     layer_norm: bool, component: str) -> list[ParamSpec]:
    specs = [
        ParamSpec(f'{prefix}.W_state', (state_dim, hidden), 'uniform', component),
        ParamSpec(f'{prefix}.W_ann', (ann_dim, hidden), 'uniform', component),
        ParamSpec(f'{prefix}.b', (hidden,), 'zeros', component),
        ParamSpec(f'{prefix}.v', (hidden,), 'uniform', component),
        ]
    if layer_norm:
        specs += _layer_norm_specs(f'{prefix}.ln_state', hidden, component)
        specs += _layer_norm_specs(f'{prefix}.ln_ann', hidden, component)
    return specs


def embedding_names(config: ModelConfig) -> tuple[str, str]:
    '''
    Names of the source and target embedding tables (the same name when tied).
    '''
    if config.tied_embeddings:
        return 'emb.shared', 'emb.shared'
    return 'emb.src', 'emb.tgt'


def parameter_schema(config: ModelConfig) -> list[ParamSpec]:
    '''
    Every tensor of the architecture, in initialization order.
    '''
    config = config.validate()
    enc, dec, ln = config.encoder, config.decoder, config.layer_norm
    H_enc, H_dec, C = enc.hidden, dec.hidden, enc.annotation_dim
    specs = []

    (src_name, tgt_name) = embedding_names(config)
    specs.append(ParamSpec(src_name, (config.src_vocab, enc.embedding), 'uniform', 'embeddings'))
    if tgt_name != src_name:
        specs.append(ParamSpec(tgt_name, (config.tgt_vocab, dec.embedding), 'uniform', 'embeddings'))

    for direction in ('fwd', 'bwd'):
        for level in range(1, enc.bidirectional_levels + 1):
            d_in = enc.embedding if level == 1 else H_enc
            specs += _cell_specs(f'enc.{direction}.level{level}', d_in, H_enc,
                                 enc.transition_depth[level - 1], ln, 'encoder')
    for level in range(enc.bidirectional_levels + 1, enc.depth + 1):
        specs += _cell_specs(f'enc.uni.level{level}', C, C, enc.transition_depth[level - 1], ln, 'encoder')

    for level in range(1, dec.depth + 1):
        specs.append(ParamSpec(f'dec.init.level{level}.W', (C, H_dec), 'uniform', 'decoder.init'))
        specs.append(ParamSpec(f'dec.init.level{level}.b', (H_dec,), 'zeros', 'decoder.init'))

    base = 'decoder.level1'
    specs += _transition_specs('dec.level1.trans1', dec.embedding, H_dec, ln, base)
    specs += _transition_specs('dec.level1.trans2', C, H_dec, ln, base)
    for t in range(3, dec.level_transitions(1) + 1):
        specs += _transition_specs(f'dec.level1.trans{t}', 0, H_dec, ln, base)
    specs += _attention_specs('dec.level1.att', H_dec, C, H_dec, ln, base)

    for level in range(2, dec.depth + 1):
        prefix, component = f'dec.level{level}', f'decoder.level{level}'
        transitions = dec.level_transitions(level)
        if dec.variant in ('gru', 'rgru'):
            d_in = H_dec if dec.variant == 'gru' else H_dec + C
            specs += _cell_specs(prefix, d_in, H_dec, transitions, ln, component)
        else:
            specs += _transition_specs(f'{prefix}.trans1', H_dec, H_dec, ln, component)
            specs += _transition_specs(f'{prefix}.trans2', C, H_dec, ln, component)
            for t in range(3, transitions + 1):
                specs += _transition_specs(f'{prefix}.trans{t}', 0, H_dec, ln, component)
            if dec.variant == 'cgru':
                specs += _attention_specs(f'{prefix}.att', H_dec, C, H_dec, ln, component)

    width = dec.embedding
    specs.append(ParamSpec('dec.out.hidden1.W_state', (H_dec, width), 'uniform', 'decoder.output'))
    if dec.output_inputs == 'full':
        specs.append(ParamSpec('dec.out.hidden1.W_prev', (dec.embedding, width), 'uniform', 'decoder.output'))
        specs.append(ParamSpec('dec.out.hidden1.W_ctx', (C, width), 'uniform', 'decoder.output'))
    specs.append(ParamSpec('dec.out.hidden1.b', (width,), 'zeros', 'decoder.output'))
    if ln:
        specs += _layer_norm_specs('dec.out.hidden1.ln_state', width, 'decoder.output')
        if dec.output_inputs == 'full':
            specs += _layer_norm_specs('dec.out.hidden1.ln_prev', width, 'decoder.output')
            specs += _layer_norm_specs('dec.out.hidden1.ln_ctx', width, 'decoder.output')
    for layer in range(2, dec.output_depth + 1):
        prefix = f'dec.out.hidden{layer}'
        specs.append(ParamSpec(f'{prefix}.W_state', (width, width), 'uniform', 'decoder.output'))
        specs.append(ParamSpec(f'{prefix}.b', (width,), 'zeros', 'decoder.output'))
        if ln:
            specs += _layer_norm_specs(f'{prefix}.ln_state', width, 'decoder.output')
    specs.append(ParamSpec('dec.out.proj.W', (width, config.tgt_vocab), 'uniform', 'decoder.output'))
    specs.append(ParamSpec('dec.out.proj.b', (config.tgt_vocab,), 'zeros', 'decoder.output'))
    return specs


# Initialization

def _orthogonal_blocks(shape: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    (rows, cols) = shape
    blocks = []
    for _ in range(cols // rows):
        q, r = np.linalg.qr(rng.standard_normal((rows, rows)))
        blocks.append(q * np.sign(np.diag(r)))
    return np.concatenate(blocks, axis=1)


def _initial_value(spec: ParamSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.init == 'zeros':
        return np.zeros(spec.shape)
    if spec.init == 'ones':
        return np.ones(spec.shape)
    if spec.init == 'orthogonal':
        return _orthogonal_blocks(spec.shape, rng)
    if spec.init == 'uniform':
        # embedding tables and vectors are scaled by their row width
        fan_in = spec.shape[0] if len(spec.shape) == 2 and spec.component != 'embeddings' else spec.shape[-1]
        scale = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-scale, scale, size=spec.shape)
    raise ValueError(f'Unknown initializer "{spec.init}"')


def init_params(config: ModelConfig, seed: int | None = None) -> ParameterSet:
    '''
    Allocates and initializes every parameter of `config`.

    :param config: Model config; validated here.
    :param seed: Overrides `config.seed`.
    :return: `ParameterSet` fully determined by the seed.
    '''
    config = config.validate()
    rng = np.random.default_rng(config.seed if seed is None else seed)
    params = ParameterSet(
        (spec.name, Tensor(_initial_value(spec, rng), requires_grad=True))
        for spec in parameter_schema(config)
        )
    logger.debug('Initialized %d tensors with %d scalars', len(params), params.total_size)
    return params


# Counting

def _transition_count(d_in: int, hidden: int, layer_norm: bool) -> int:
    count = 3 * hidden * d_in + 3 * hidden * hidden + 3 * hidden
    if layer_norm:
        count += 6 * hidden * (2 if d_in else 1)
    return count


def _cell_count(d_in: int, hidden: int, depth: int, layer_norm: bool) -> int:
    return _transition_count(d_in, hidden, layer_norm) + (depth - 1) * _transition_count(0, hidden, layer_norm)


def _attention_count(state_dim: int, ann_dim: int, hidden: int, layer_norm: bool) -> int:
    return state_dim * hidden + ann_dim * hidden + 2 * hidden + (4 * hidden if layer_norm else 0)


@dataclass(frozen=True)
class ParameterCount:
    total: int
    components: dict[str, int]

    def format(self) -> str:
        lines = [f'{name}\t{count}' for (name, count) in self.components.items()]
        lines.append(f'total\t{self.total}')
        return '\n'.join(lines)


def count_params(config: ModelConfig) -> ParameterCount:
    '''
    Closed-form parameter count with a per-component breakdown.
    '''
    config = config.validate()
    enc, dec, ln = config.encoder, config.decoder, config.layer_norm
    H_enc, H_dec, C = enc.hidden, dec.hidden, enc.annotation_dim
    components = {}

    if config.tied_embeddings:
        components['embeddings'] = config.src_vocab * enc.embedding
    else:
        components['embeddings'] = config.src_vocab * enc.embedding + config.tgt_vocab * dec.embedding

    encoder = 0
    for level in range(1, enc.bidirectional_levels + 1):
        d_in = enc.embedding if level == 1 else H_enc
        encoder += 2 * _cell_count(d_in, H_enc, enc.transition_depth[level - 1], ln)
    for level in range(enc.bidirectional_levels + 1, enc.depth + 1):
        encoder += _cell_count(C, C, enc.transition_depth[level - 1], ln)
    components['encoder'] = encoder

    components['decoder.init'] = dec.depth * (C * H_dec + H_dec)
    components['decoder.level1'] = (_transition_count(dec.embedding, H_dec, ln)
                                     + _transition_count(C, H_dec, ln)
                                     + (dec.level_transitions(1) - 2) * _transition_count(0, H_dec, ln)
                                     + _attention_count(H_dec, C, H_dec, ln))
    for level in range(2, dec.depth + 1):
        transitions = dec.level_transitions(level)
        if dec.variant == 'gru':
            count = _cell_count(H_dec, H_dec, transitions, ln)
        elif dec.variant == 'rgru':
            count = _cell_count(H_dec + C, H_dec, transitions, ln)
        else:
            count = (_transition_count(H_dec, H_dec, ln) + _transition_count(C, H_dec, ln)
                     + (transitions - 2) * _transition_count(0, H_dec, ln))
            if dec.variant == 'cgru':
                count += _attention_count(H_dec, C, H_dec, ln)
        components[f'decoder.level{level}'] = count

    width = dec.embedding
    first_inputs = H_dec + (dec.embedding + C if dec.output_inputs == 'full' else 0)
    contributions = 3 if dec.output_inputs == 'full' else 1
    output = first_inputs * width + width + (2 * width * contributions if ln else 0)
    output += (dec.output_depth - 1) * (width * width + width + (2 * width if ln else 0))
    output += width * config.tgt_vocab + config.tgt_vocab
    components['decoder.output'] = output

    return ParameterCount(sum(components.values()), components)
