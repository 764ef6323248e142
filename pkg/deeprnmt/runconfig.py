'''
Run configuration of the command line: model, task, optimizer settings and
output paths in one canonical text, plus the architecture grid of `params --matrix`.
'''
from collections.abc import Iterable
from dataclasses import dataclass, field, replace
from pathlib import Path
import logging

from . import configtext
from .configtext import Key
from .data import SyntheticTask
from .errors import ConfigError
from .models import DecoderConfig, EncoderConfig, ModelConfig
from .models.config import MODEL_KEYS
from .train import TrainHyper


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Paths:
    checkpoint: str = 'model.ckpt'
    log: str = 'train.log'


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    task: SyntheticTask = field(default_factory=SyntheticTask)
    train: TrainHyper = field(default_factory=TrainHyper)
    paths: Paths = field(default_factory=Paths)

    @property
    def seed(self) -> int:
        return self.model.seed

    def validate(self) -> 'RunConfig':
        model = self.model.validate()
        task = self.task.validate()
        hyper = self.train.validate()
        if task.vocab > min(model.src_vocab, model.tgt_vocab):
            raise ConfigError(f'task.vocab {task.vocab} exceeds the model vocabularies '
                              f'({model.src_vocab} source, {model.tgt_vocab} target)')
        if not self.paths.checkpoint or not self.paths.log:
            raise ConfigError('paths.checkpoint and paths.log must not be empty')
        return replace(self, model=model, task=task, train=hyper)

    def to_text(self) -> str:
        return configtext.to_text(self, RUN_KEYS)

    @classmethod
    def from_text(cls, text: str, source: str = '<config>') -> 'RunConfig':
        return configtext.apply(cls(), RUN_KEYS, configtext.parse_lines(text, source)).validate()


RUN_KEYS = tuple(key.nested('model') for key in MODEL_KEYS) + (
    Key('task.kind', ('task', 'kind'), 'str'),
    Key('task.vocab', ('task', 'vocab'), 'int'),
    Key('task.min_len', ('task', 'min_len'), 'int'),
    Key('task.max_len', ('task', 'max_len'), 'int'),
    Key('task.min_distance', ('task', 'min_distance'), 'int'),
    Key('task.max_distance', ('task', 'max_distance'), 'optional_int'),
    Key('task.train_size', ('task', 'train_size'), 'int'),
    Key('task.valid_size', ('task', 'valid_size'), 'int'),
    Key('train.lr', ('train', 'lr'), 'float'),
    Key('train.beta1', ('train', 'beta1'), 'float'),
    Key('train.beta2', ('train', 'beta2'), 'float'),
    Key('train.eps', ('train', 'eps'), 'float'),
    Key('train.clip_norm', ('train', 'clip_norm'), 'float'),
    Key('train.batch_size', ('train', 'batch_size'), 'int'),
    Key('train.valid_every', ('train', 'valid_every'), 'int'),
    Key('train.patience', ('train', 'patience'), 'int'),
    Key('train.max_steps', ('train', 'max_steps'), 'int'),
    Key('train.warmup', ('train', 'warmup'), 'int'),
    Key('train.select_by', ('train', 'select_by'), 'str'),
    Key('paths.checkpoint', ('paths', 'checkpoint'), 'str'),
    Key('paths.log', ('paths', 'log'), 'str'),
    )


def load_run_config(path=None,
                    overrides: Iterable[str] = (),
                    seed: int | None = None,
                    ) -> RunConfig:
    '''
    Reads a config file, applies `key=value` overrides left to right (the last
    write wins), then `seed`, and validates the result.

    :param path: Config file, or `None` to start from the defaults.
    :param overrides: `key=value` strings.
    :param seed: Shorthand for a final `seed=<seed>` override.
    :raises ConfigError: For unknown keys, malformed values or violated invariants.
    '''
    assignments = []
    if path is not None:
        text = Path(path).read_text(encoding='utf-8')
        assignments.extend(configtext.parse_lines(text, str(path)).items())
    assignments.extend(configtext.parse_override(o) for o in overrides)
    if seed is not None:
        assignments.append(('seed', str(seed)))

    config = RunConfig()
    for (name, raw) in assignments:
        config = configtext.apply(config, RUN_KEYS, {name: raw})
    return config.validate()


def _encoder(base: EncoderConfig, kind: str, **kwargs) -> EncoderConfig:
    fields = {'depth': None, 'alt_layers': None, 'uni_layers': None, 'transition_depth': ()}
    return replace(base, kind=kind, **{**fields, **kwargs})


def _decoder(base: DecoderConfig, kind: str, **kwargs) -> DecoderConfig:
    fields = {'variant': 'gru', 'depth': None, 'depths': (), 'output_depth': 1}
    return replace(base, kind=kind, **{**fields, **kwargs})


def architecture_matrix(model: ModelConfig) -> list[tuple[str, ModelConfig]]:
    '''
    The compared encoder, decoder and encoder-decoder architectures at the
    dimensions of `model`, as `(label, config)` rows.
    '''
    enc, dec = model.encoder, model.decoder
    rows = [
        ('shallow / baseline', _encoder(enc, 'shallow'), _decoder(dec, 'baseline')),
        ('enc alternating 4', _encoder(enc, 'alternating', depth=4), _decoder(dec, 'baseline')),
        ('enc biunidirectional 1+3', _encoder(enc, 'biunidirectional', depth=4), _decoder(dec, 'baseline')),
        ('enc deep transition 4', _encoder(enc, 'deep_transition', transition_depth=(4,)), _decoder(dec, 'baseline')),
        ('enc bideep 2x2', _encoder(enc, 'bideep', depth=2, transition_depth=(2,)), _decoder(dec, 'baseline')),
        ('enc mixed 2+2', _encoder(enc, 'mixed', alt_layers=2, uni_layers=2), _decoder(dec, 'baseline')),
        ('dec stacked gru 4', _encoder(enc, 'shallow'), _decoder(dec, 'stacked', depth=4)),
        ('dec stacked rgru 4', _encoder(enc, 'shallow'), _decoder(dec, 'stacked', variant='rgru', depth=4)),
        ('dec stacked cgru 4', _encoder(enc, 'shallow'), _decoder(dec, 'stacked', variant='cgru', depth=4)),
        ('dec stacked crgru 4', _encoder(enc, 'shallow'), _decoder(dec, 'stacked', variant='crgru', depth=4)),
        ('dec deep transition 8', _encoder(enc, 'shallow'), _decoder(dec, 'deep_transition', depths=(8,))),
        ('dec deep output 4', _encoder(enc, 'shallow'), _decoder(dec, 'baseline', output_depth=4)),
        ('alternating 4 + stacked gru 4',
         _encoder(enc, 'alternating', depth=4), _decoder(dec, 'stacked', depth=4)),
        ('biunidirectional 4 + stacked rgru 4',
         _encoder(enc, 'biunidirectional', depth=4), _decoder(dec, 'stacked', variant='rgru', depth=4)),
        ('alternating 4 + stacked rgru 4',
         _encoder(enc, 'alternating', depth=4), _decoder(dec, 'stacked', variant='rgru', depth=4)),
        ('alternating 4 + stacked cgru 4',
         _encoder(enc, 'alternating', depth=4), _decoder(dec, 'stacked', variant='cgru', depth=4)),
        ('deep transition 4 / 8',
         _encoder(enc, 'deep_transition', transition_depth=(4,)), _decoder(dec, 'deep_transition', depths=(8,))),
        ('bideep 2x2 + bideep rgru 2 (4/2)',
         _encoder(enc, 'bideep', depth=2, transition_depth=(2,)),
         _decoder(dec, 'bideep', variant='rgru', depths=(4, 2))),
        ('bideep 4x2 + bideep rgru 4 (4/2)',
         _encoder(enc, 'bideep', depth=4, transition_depth=(2,)),
         _decoder(dec, 'bideep', variant='rgru', depths=(4, 2, 2, 2))),
        ('alternating 8 + stacked rgru 8',
         _encoder(enc, 'alternating', depth=8), _decoder(dec, 'stacked', variant='rgru', depth=8)),
        ]
    return [(label, replace(model, encoder=e, decoder=d).validate()) for (label, e, d) in rows]
