'''
Synthetic transduction tasks and the token vocabulary.

Token conventions: id 0 is the end-of-sentence token (also used for padding,
always masked), id 1 the unknown token, content tokens start at 2.
'''
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
import re

import numpy as np

from ..errors import ConfigError, VocabularyError


EOS_ID = 0
UNK_ID = 1
FIRST_CONTENT_ID = 2

EOS = '</s>'
UNK = '<unk>'

TASK_KINDS = ('copy', 'reverse', 'agreement')

Pair = tuple[list[int], list[int]]


class Vocabulary:
    '''
    Maps ids to words and back: `</s>`, `<unk>`, then `t<id>`. Tokens in text may
    be given either as words or as plain ids.
    '''

    _WORD = re.compile(r't(\d+)')

    def __init__(self, size: int) -> None:
        if size < FIRST_CONTENT_ID + 1:
            raise ValueError(f'A vocabulary needs at least {FIRST_CONTENT_ID + 1} entries, got {size}')
        self.size = size

    def __len__(self) -> int:
        return self.size

    def word(self, token_id: int) -> str:
        if token_id == EOS_ID:
            return EOS
        if token_id == UNK_ID:
            return UNK
        if not FIRST_CONTENT_ID <= token_id < self.size:
            raise VocabularyError(f'Token id {token_id} out of range for a vocabulary of {self.size}')
        return f't{token_id}'

    def token_id(self, token: str, unk: str = 'error') -> int:
        '''
        :param token: A word or a decimal id.
        :param unk: `"error"` raises `VocabularyError` for unknown tokens, `"replace"` maps them to `<unk>`.
        '''
        if token == EOS:
            return EOS_ID
        if token == UNK:
            return UNK_ID
        match = self._WORD.fullmatch(token)
        digits = match.group(1) if match else token
        if digits.isdigit() and int(digits) < self.size:
            return int(digits)
        if unk == 'replace':
            return UNK_ID
        raise VocabularyError(f'Unknown token "{token}"')

    def encode(self, text: str, unk: str = 'error') -> list[int]:
        return [self.token_id(token, unk) for token in text.split()]

    def decode(self, token_ids: Iterable[int]) -> str:
        return ' '.join(self.word(int(i)) for i in token_ids)


@dataclass(frozen=True)
class AgreementLexicon:
    '''
    Token roles of the agreement task: two subject forms, a verb lemma on the
    source side, two verb forms on the target side, and filler words.
    '''
    vocab: int
    subject_singular: int = 2
    subject_plural: int = 3
    verb: int = 4
    verb_singular: int = 5
    verb_plural: int = 6

    @property
    def fillers(self) -> np.ndarray:
        return np.arange(7, self.vocab)

    def verb_form(self, subject: int) -> int:
        return self.verb_singular if subject == self.subject_singular else self.verb_plural

    def flip(self, verb_form: int) -> int:
        return self.verb_plural if verb_form == self.verb_singular else self.verb_singular


@dataclass(frozen=True)
class SyntheticTask:
    '''
    :param kind: `"copy"`, `"reverse"` or `"agreement"`.
    :param vocab: Vocabulary size, special tokens included.
    :param min_len: Shortest sentence.
    :param max_len: Longest sentence.
    :param min_distance: Smallest subject-verb distance (agreement only).
    :param max_distance: Largest subject-verb distance, `None` for `max_len - 1` (agreement only).
        A sentence of `max_len` tokens holds distances up to `max_len - 1`.
    :param train_size: Number of training pairs.
    :param valid_size: Number of validation pairs.
    '''
    kind: str = 'copy'
    vocab: int = 20
    min_len: int = 1
    max_len: int = 10
    min_distance: int = 1
    max_distance: int | None = None
    train_size: int = 4000
    valid_size: int = 200

    def validate(self) -> 'SyntheticTask':
        if self.kind not in TASK_KINDS:
            raise ConfigError(f'task.kind must be one of {TASK_KINDS}, got "{self.kind}"')
        if not 1 <= self.min_len <= self.max_len:
            raise ConfigError(f'task lengths need 1 <= min_len <= max_len, got {self.min_len}..{self.max_len}')
        if self.train_size < 1 or self.valid_size < 1:
            raise ConfigError('task.train_size and task.valid_size must be positive')
        if self.kind == 'agreement':
            if self.vocab < 8:
                raise ConfigError(f'the agreement task needs task.vocab >= 8, got {self.vocab}')
            if not 1 <= self.min_distance <= (self.max_len - 1 if self.max_distance is None else self.max_distance):
                raise ConfigError('agreement distances need 1 <= min_distance <= max_distance')
            if self.max_distance is not None and self.max_distance + 1 > self.max_len:
                raise ConfigError(f'task.max_len {self.max_len} cannot hold a subject-verb distance of '
                                  f'{self.max_distance}, it needs max_len >= {self.max_distance + 1}')
        elif self.vocab < FIRST_CONTENT_ID + 1:
            raise ConfigError(f'task.vocab must be at least {FIRST_CONTENT_ID + 1}, got {self.vocab}')
        return self

    @property
    def distance_range(self) -> tuple[int, int]:
        return self.min_distance, self.max_len - 1 if self.max_distance is None else self.max_distance


@dataclass(frozen=True)
class AgreementExample:
    source: list[int]
    target: list[int]
    distance: int
    verb_position: int


def _rng(seed: int | np.random.Generator) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def agreement_example(task: SyntheticTask, rng: np.random.Generator, distance: int | None = None) -> AgreementExample:
    '''
    One agreement pair. The target copies the source except that the verb lemma
    becomes the verb form matching the subject `distance` positions earlier.
    '''
    lexicon = AgreementLexicon(task.vocab)
    (low, high) = task.distance_range
    if distance is None:
        distance = int(rng.integers(low, high + 1))
    length = int(rng.integers(max(task.min_len, distance + 1), max(task.max_len, distance + 1) + 1))
    prefix = int(rng.integers(0, length - distance))
    subject = int(rng.choice([lexicon.subject_singular, lexicon.subject_plural]))

    source = [int(t) for t in rng.choice(lexicon.fillers, size=length)]
    verb_position = prefix + distance
    source[prefix] = subject
    source[verb_position] = lexicon.verb
    target = list(source)
    target[verb_position] = lexicon.verb_form(subject)
    return AgreementExample(source, target, distance, verb_position)


def generate(task: SyntheticTask, n: int, seed: int | np.random.Generator) -> list[Pair]:
    '''
    `n` (source, target) pairs, fully determined by `seed`. Targets carry no
    end-of-sentence token; training appends it.
    '''
    task = task.validate()
    if n < 1:
        raise ValueError(f'Expected n >= 1, got {n}')
    rng = _rng(seed)
    pairs = []
    for _ in range(n):
        if task.kind == 'agreement':
            example = agreement_example(task, rng)
            pairs.append((example.source, example.target))
            continue
        length = int(rng.integers(task.min_len, task.max_len + 1))
        source = [int(t) for t in rng.integers(FIRST_CONTENT_ID, task.vocab, size=length)]
        target = list(source) if task.kind == 'copy' else source[::-1]
        pairs.append((source, target))
    return pairs


def with_eos(tokens: Sequence[int]) -> list[int]:
    return list(tokens) + [EOS_ID]
