'''
Contrastive evaluation: a model passes an item when it scores the reference
translation strictly higher than a minimally corrupted variant of it. Results
are bucketed by the distance between the two agreeing tokens.
'''
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
import logging

import numpy as np

from ..autodiff import Tensor
from ..data import AgreementLexicon, SyntheticTask, Vocabulary, agreement_example, with_eos
from ..errors import DataFormatError, VocabularyError
from ..models import ModelConfig, score_sequence
from ._parallel import map_items


logger = logging.getLogger(__name__)

OPEN_BUCKET = 16


@dataclass(frozen=True)
class ContrastiveItem:
    source: tuple[int, ...]
    reference: tuple[int, ...]
    contrastive: tuple[int, ...]
    distance: int
    category: str = 'agreement'

    def __post_init__(self):
        if tuple(self.reference) == tuple(self.contrastive):
            raise ValueError('The contrastive variant must differ from the reference')
        if self.distance < 1:
            raise ValueError(f'Distance must be at least 1, got {self.distance}')


def make_contrastive_items(task: SyntheticTask, n: int, seed: int | np.random.Generator) -> list[ContrastiveItem]:
    '''
    Agreement items whose contrastive variant carries the wrong verb form.
    Categories name the number of the subject (`agreement_sg` or `agreement_pl`).
    '''
    task = task.validate()
    if task.kind != 'agreement':
        raise ValueError(f'Contrastive items need an agreement task, got "{task.kind}"')
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    lexicon = AgreementLexicon(task.vocab)
    items = []
    for _ in range(n):
        example = agreement_example(task, rng)
        contrastive = list(example.target)
        verb = contrastive[example.verb_position]
        contrastive[example.verb_position] = lexicon.flip(verb)
        category = 'agreement_sg' if verb == lexicon.verb_singular else 'agreement_pl'
        items.append(ContrastiveItem(tuple(example.source), tuple(example.target), tuple(contrastive),
                                     example.distance, category))
    return items


def bucket_of(distance: int) -> int:
    return min(distance, OPEN_BUCKET)


def bucket_label(bucket: int) -> str:
    return f'>={OPEN_BUCKET}' if bucket >= OPEN_BUCKET else str(bucket)


@dataclass
class DistanceBucketReport:
    '''
    Per-bucket counts of correct decisions. Buckets are the distances 1 to 15
    and an open bucket for 16 and above; empty buckets are left out.
    '''
    correct: dict[int, int] = field(default_factory=dict)
    counts: dict[int, int] = field(default_factory=dict)
    category_correct: dict[str, int] = field(default_factory=dict)
    category_counts: dict[str, int] = field(default_factory=dict)

    def add(self, item: ContrastiveItem, is_correct: bool) -> None:
        bucket = bucket_of(item.distance)
        self.counts[bucket] = self.counts.get(bucket, 0) + 1
        self.correct[bucket] = self.correct.get(bucket, 0) + int(is_correct)
        self.category_counts[item.category] = self.category_counts.get(item.category, 0) + 1
        self.category_correct[item.category] = self.category_correct.get(item.category, 0) + int(is_correct)

    @property
    def buckets(self) -> list[int]:
        return sorted(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def accuracy(self, bucket: int) -> float:
        return self.correct[bucket] / self.counts[bucket]

    def category_accuracy(self, category: str) -> float:
        return self.category_correct[category] / self.category_counts[category]

    @property
    def overall_accuracy(self) -> float:
        return sum(self.correct.values()) / self.total

    def format_table(self) -> str:
        lines = ['distance\taccuracy\tN']
        for bucket in self.buckets:
            lines.append(f'{bucket_label(bucket)}\t{self.accuracy(bucket):.4f}\t{self.counts[bucket]}')
        lines.append(f'all\t{self.overall_accuracy:.4f}\t{self.total}')
        lines.append('')
        lines.append('category\taccuracy\tN')
        for category in sorted(self.category_counts):
            lines.append(f'{category}\t{self.category_accuracy(category):.4f}\t{self.category_counts[category]}')
        return '\n'.join(lines)

    def plot_data(self) -> str:
        '''
        Two numeric columns, distance and accuracy; the open bucket is written as 16.
        '''
        return ''.join(f'{bucket}\t{self.accuracy(bucket)!r}\n' for bucket in self.buckets)

    def write_plot_data(self, file_path) -> None:
        Path(file_path).write_text(self.plot_data(), encoding='utf-8')


def prefers_reference(params: Mapping[str, Tensor], config: ModelConfig, item: ContrastiveItem) -> bool:
    '''
    `True` iff the reference (with end-of-sentence) scores strictly higher than the contrastive variant.
    '''
    (reference, _) = score_sequence(params, config, item.source, with_eos(item.reference))
    (contrastive, _) = score_sequence(params, config, item.source, with_eos(item.contrastive))
    return reference > contrastive


def contrastive_eval(params: Mapping[str, Tensor],
                     config: ModelConfig,
                     items: Sequence[ContrastiveItem],
                     workers: int = 1,
                     ) -> DistanceBucketReport:
    '''
    Scores every item and collects the decisions by distance bucket and category.
    Ties count as incorrect.

    :param workers: Number of worker processes; results are merged in item order.
    '''
    if len(items) == 0:
        raise ValueError('Contrastive evaluation needs at least one item')
    decisions = map_items(prefers_reference, params, config, items, workers)
    report = DistanceBucketReport()
    for (item, decision) in zip(items, decisions):
        report.add(item, decision)
    logger.info(f'Contrastive accuracy {report.overall_accuracy:.4f} over {report.total} items')
    return report


def read_contrastive_tsv(file_path, vocab: Vocabulary, unk: str = 'error') -> list[ContrastiveItem]:
    '''
    Reads items from a UTF-8 file with tab-separated columns source, reference,
    contrastive, distance and category. Tokens are ids or vocabulary words;
    blank lines and lines starting with `#` are skipped.

    :raises DataFormatError: For a malformed line, naming the file and line number.
    '''
    items = []
    with open(file_path, encoding='utf-8') as tsv:
        for (line_number, line) in enumerate(tsv, start=1):
            line = line.rstrip('\n')
            if not line.strip() or line.startswith('#'):
                continue
            fields = line.split('\t')
            where = f'{file_path}:{line_number}'
            if len(fields) != 5:
                raise DataFormatError(f'{where}: expected 5 tab-separated columns, got {len(fields)}')
            try:
                (source, reference, contrastive) = (tuple(vocab.encode(f, unk)) for f in fields[:3])
                distance = int(fields[3])
                items.append(ContrastiveItem(source, reference, contrastive, distance, fields[4].strip()))
            except (ValueError, VocabularyError) as error:
                raise DataFormatError(f'{where}: {error}') from error
            if not source or not reference:
                raise DataFormatError(f'{where}: empty source or reference')
    return items
