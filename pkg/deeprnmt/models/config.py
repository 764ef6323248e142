'''
Architecture descriptions. Configs are frozen dataclasses; `validate()` returns
a normalized copy (defaults resolved, depth lists expanded) or raises
`ConfigError` naming the violated rule.
'''
from collections.abc import Callable
from dataclasses import dataclass, field, replace

from .. import configtext
from ..configtext import Key
from ..errors import ConfigError


ENCODER_KINDS = ('shallow', 'deep_transition', 'alternating', 'biunidirectional', 'bideep', 'mixed')
DECODER_KINDS = ('baseline', 'deep_transition', 'stacked', 'bideep')
DECODER_VARIANTS = ('gru', 'rgru', 'cgru', 'crgru')
OUTPUT_INPUTS = ('full', 'state_only')

_ENCODER_ALIASES = {'bideep_alternating': 'bideep'}

# kind: (default stack depth, default transition depths for a stack of depth D)
_ENCODER_DEFAULTS: dict[str, tuple[int, Callable[[int], tuple[int, ...]]]] = {
    'shallow': (1, lambda depth: (1,) * depth),
    'deep_transition': (1, lambda depth: (4,) * depth),
    'alternating': (4, lambda depth: (1,) * depth),
    'biunidirectional': (4, lambda depth: (1,) * depth),
    'bideep': (2, lambda depth: (2,) * depth),
    'mixed': (4, lambda depth: (1,) * depth),
    }

_DECODER_DEFAULTS: dict[str, tuple[int, Callable[[int], tuple[int, ...]]]] = {
    'baseline': (1, lambda depth: (2,) * depth),
    'deep_transition': (1, lambda depth: (8,) * depth),
    'stacked': (4, lambda depth: (2,) + (1,) * (depth - 1)),
    'bideep': (2, lambda depth: (4,) + (2,) * (depth - 1)),
    }


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _resolve_depths(section: str,
                    depth: int | None,
                    depths: tuple[int, ...],
                    default_depth: int,
                    default_pattern: Callable[[int], tuple[int, ...]],
                    ) -> tuple[int, tuple[int, ...]]:
    depths = tuple(depths)
    if depth is None:
        depth = len(depths) if len(depths) > 1 else default_depth
    _check(depth >= 1, f'{section}.depth must be at least 1, got {depth}')
    if not depths:
        depths = default_pattern(depth)
    elif len(depths) == 1:
        depths = depths * depth
    elif len(depths) != depth:
        raise ConfigError(f'{section}: {len(depths)} transition depths given for a stack of depth {depth}')
    _check(all(d >= 1 for d in depths), f'{section}: transition depths must be at least 1, got {list(depths)}')
    return depth, depths


@dataclass(frozen=True)
class EncoderConfig:
    '''
    :param kind: One of `ENCODER_KINDS`.
    :param depth: Stack depth. `None` is inferred from `transition_depth` or the kind's default.
    :param alt_layers: Bidirectional alternating levels of a `mixed` encoder.
    :param uni_layers: Forward-only levels of a `mixed` encoder, stacked above the alternating ones.
    :param transition_depth: Per-level transition depths; a single value applies to every level.
    :param hidden: State size of one direction.
    :param embedding: Source embedding size.
    '''
    kind: str = 'shallow'
    depth: int | None = None
    alt_layers: int | None = None
    uni_layers: int | None = None
    transition_depth: tuple[int, ...] = ()
    hidden: int = 32
    embedding: int = 16

    def validate(self) -> 'EncoderConfig':
        kind = _ENCODER_ALIASES.get(self.kind, self.kind)
        _check(kind in ENCODER_KINDS, f'encoder.kind must be one of {ENCODER_KINDS}, got "{self.kind}"')
        _check(self.hidden >= 1, f'encoder.hidden must be positive, got {self.hidden}')
        _check(self.embedding >= 1, f'encoder.embedding must be positive, got {self.embedding}')

        alt_layers, uni_layers, depth = self.alt_layers, self.uni_layers, self.depth
        if kind == 'mixed':
            alt_layers = 2 if alt_layers is None else alt_layers
            uni_layers = 2 if uni_layers is None else uni_layers
            _check(alt_layers >= 1, f'encoder.alt_layers must be at least 1, got {alt_layers}')
            _check(uni_layers >= 0, f'encoder.uni_layers must not be negative, got {uni_layers}')
            _check(depth is None or depth == alt_layers + uni_layers,
                   f'encoder.depth {depth} differs from alt_layers + uni_layers = {alt_layers + uni_layers}')
            depth = alt_layers + uni_layers
        else:
            _check(alt_layers is None and uni_layers is None,
                   'encoder.alt_layers and encoder.uni_layers only apply to the mixed encoder')

        default_depth, pattern = _ENCODER_DEFAULTS[kind]
        depth, depths = _resolve_depths('encoder', depth, self.transition_depth, default_depth, pattern)

        if kind == 'shallow':
            _check(depth == 1 and depths == (1,), 'a shallow encoder has stack depth 1 and transition depth 1')
        elif kind == 'deep_transition':
            _check(depth == 1, f'a deep transition encoder has stack depth 1, got {depth}')
        elif kind in ('alternating', 'biunidirectional'):
            _check(all(d == 1 for d in depths),
                   f'a stacked {kind} encoder has transition depth 1, got {list(depths)}; use bideep')
        return replace(self, kind=kind, depth=depth, alt_layers=alt_layers, uni_layers=uni_layers,
                       transition_depth=depths)

    @property
    def bidirectional_levels(self) -> int:
        if self.kind in ('alternating', 'bideep'):
            return self.depth
        if self.kind == 'mixed':
            return self.alt_layers
        return 1

    @property
    def unidirectional_levels(self) -> int:
        if self.kind == 'biunidirectional':
            return self.depth - 1
        if self.kind == 'mixed':
            return self.uni_layers
        return 0

    @property
    def annotation_dim(self) -> int:
        return 2 * self.hidden


@dataclass(frozen=True)
class DecoderConfig:
    '''
    :param kind: One of `DECODER_KINDS`.
    :param variant: Cell of the higher stack levels, one of `DECODER_VARIANTS` (stacked and bideep only).
    :param depth: Stack depth. `None` is inferred from `depths` or the kind's default.
    :param depths: Per-level transition depths, base level first, e.g. `(4, 2)`; a single value
        applies to every level. Any other length must equal `depth`.
    :param output_depth: Hidden layers of the output network.
    :param hidden: Decoder state size.
    :param embedding: Target embedding size; also the width of the output hidden layers.
    :param output_inputs: `"full"` feeds state, previous embedding and context to the output network,
        `"state_only"` only the state.
    :param literal_conditional_state: Feed the base level's first transition state into the second
        transition of cgru/crgru levels instead of the level's own first transition state.
    '''
    kind: str = 'baseline'
    variant: str = 'gru'
    depth: int | None = None
    depths: tuple[int, ...] = ()
    output_depth: int = 1
    hidden: int = 32
    embedding: int = 16
    output_inputs: str = 'full'
    literal_conditional_state: bool = False

    def validate(self) -> 'DecoderConfig':
        _check(self.kind in DECODER_KINDS, f'decoder.kind must be one of {DECODER_KINDS}, got "{self.kind}"')
        _check(self.variant in DECODER_VARIANTS,
               f'decoder.variant must be one of {DECODER_VARIANTS}, got "{self.variant}"')
        _check(self.output_inputs in OUTPUT_INPUTS,
               f'decoder.output_inputs must be one of {OUTPUT_INPUTS}, got "{self.output_inputs}"')
        _check(self.output_depth >= 1, f'decoder.output_depth must be at least 1, got {self.output_depth}')
        _check(self.hidden >= 1, f'decoder.hidden must be positive, got {self.hidden}')
        _check(self.embedding >= 1, f'decoder.embedding must be positive, got {self.embedding}')

        default_depth, pattern = _DECODER_DEFAULTS[self.kind]
        depth, depths = _resolve_depths('decoder', self.depth, self.depths, default_depth, pattern)

        if self.kind == 'baseline':
            _check(depth == 1 and depths == (2,), 'a baseline decoder has stack depth 1 and transition depth 2')
        elif self.kind == 'deep_transition':
            _check(depth == 1, f'a deep transition decoder has stack depth 1, got {depth}')
            _check(depths[0] >= 2, f'a deep transition decoder needs transition depth >= 2, got {depths[0]}')
        elif self.kind == 'stacked':
            _check(depths == pattern(depth),
                   f'a stacked decoder has transition depths {list(pattern(depth))}, got {list(depths)}; use bideep')
        else:
            _check(depths[0] >= 2,
                   f'the base level of a bideep decoder needs transition depth >= 2, got {depths[0]}')
        return replace(self, depth=depth, depths=depths)

    def level_transitions(self, level: int) -> int:
        '''
        Number of GRU transitions in stack level `level` (1-based). Conditional
        levels above the base always have at least two.
        '''
        depth = self.depths[level - 1]
        if level > 1 and self.variant in ('cgru', 'crgru'):
            return max(2, depth)
        return depth


@dataclass(frozen=True)
class ModelConfig:
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    src_vocab: int = 20
    tgt_vocab: int = 20
    layer_norm: bool = True
    tied_embeddings: bool = False
    seed: int = 1234

    def validate(self) -> 'ModelConfig':
        '''
        Checks every invariant and returns the normalized config.
        Validating a normalized config returns an equal config.
        '''
        _check(self.src_vocab >= 3, f'model.src_vocab must be at least 3, got {self.src_vocab}')
        _check(self.tgt_vocab >= 3, f'model.tgt_vocab must be at least 3, got {self.tgt_vocab}')
        encoder = self.encoder.validate()
        decoder = self.decoder.validate()
        if self.tied_embeddings:
            _check(self.src_vocab == self.tgt_vocab,
                   'tied embeddings need model.src_vocab == model.tgt_vocab')
            _check(encoder.embedding == decoder.embedding,
                   'tied embeddings need encoder.embedding == decoder.embedding')
        return replace(self, encoder=encoder, decoder=decoder)

    def to_text(self) -> str:
        '''
        Canonical text of every key, in a fixed order.
        '''
        return configtext.to_text(self, MODEL_KEYS)

    @classmethod
    def from_text(cls, text: str, source: str = '<config>') -> 'ModelConfig':
        return configtext.apply(cls(), MODEL_KEYS, configtext.parse_lines(text, source)).validate()


MODEL_KEYS = (
    Key('seed', ('seed',), 'int'),
    Key('model.src_vocab', ('src_vocab',), 'int'),
    Key('model.tgt_vocab', ('tgt_vocab',), 'int'),
    Key('model.layer_norm', ('layer_norm',), 'bool'),
    Key('model.tied_embeddings', ('tied_embeddings',), 'bool'),
    Key('encoder.kind', ('encoder', 'kind'), 'str'),
    Key('encoder.depth', ('encoder', 'depth'), 'optional_int'),
    Key('encoder.alt_layers', ('encoder', 'alt_layers'), 'optional_int'),
    Key('encoder.uni_layers', ('encoder', 'uni_layers'), 'optional_int'),
    Key('encoder.transition_depth', ('encoder', 'transition_depth'), 'int_list'),
    Key('encoder.hidden', ('encoder', 'hidden'), 'int'),
    Key('encoder.embedding', ('encoder', 'embedding'), 'int'),
    Key('decoder.kind', ('decoder', 'kind'), 'str'),
    Key('decoder.variant', ('decoder', 'variant'), 'str'),
    Key('decoder.depth', ('decoder', 'depth'), 'optional_int'),
    Key('decoder.depths', ('decoder', 'depths'), 'int_list'),
    Key('decoder.output_depth', ('decoder', 'output_depth'), 'int'),
    Key('decoder.hidden', ('decoder', 'hidden'), 'int'),
    Key('decoder.embedding', ('decoder', 'embedding'), 'int'),
    Key('decoder.output_inputs', ('decoder', 'output_inputs'), 'str'),
    Key('decoder.literal_conditional_state', ('decoder', 'literal_conditional_state'), 'bool'),
    )
