import numpy as np
import pytest

from deeprnmt.data import (
    EOS_ID,
    UNK_ID,
    AgreementLexicon,
    SyntheticTask,
    Vocabulary,
    agreement_example,
    generate,
    with_eos,
    )
from deeprnmt.errors import ConfigError, VocabularyError


def test_generation_is_seeded():
    task = SyntheticTask(kind='agreement', vocab=12, max_len=8)
    assert generate(task, 30, seed=3) == generate(task, 30, seed=3)
    assert generate(task, 30, seed=3) != generate(task, 30, seed=4)


@pytest.mark.parametrize('kind', ['copy', 'reverse'])
def test_copy_and_reverse(kind):
    task = SyntheticTask(kind=kind, vocab=9, min_len=2, max_len=6)
    for (source, target) in generate(task, 50, seed=0):
        assert 2 <= len(source) <= 6
        assert all(2 <= t < 9 for t in source)
        assert target == (source if kind == 'copy' else source[::-1])
        assert EOS_ID not in target


def test_agreement_pairs():
    task = SyntheticTask(kind='agreement', vocab=10, min_len=3, max_len=9, min_distance=2, max_distance=5)
    lexicon = AgreementLexicon(task.vocab)
    rng = np.random.default_rng(1)
    distances = set()
    for _ in range(200):
        example = agreement_example(task, rng)
        (source, target) = (example.source, example.target)
        subject = source[example.verb_position - example.distance]
        assert subject in (lexicon.subject_singular, lexicon.subject_plural)
        assert source[example.verb_position] == lexicon.verb
        assert target[example.verb_position] == lexicon.verb_form(subject)
        assert [t for (i, t) in enumerate(target) if i != example.verb_position] == \
            [t for (i, t) in enumerate(source) if i != example.verb_position]
        assert 3 <= len(source) <= 9
        distances.add(example.distance)
    assert distances == {2, 3, 4, 5}


def test_agreement_distance_defaults_to_the_sentence_length():
    task = SyntheticTask(kind='agreement', vocab=8, max_len=5)
    assert task.distance_range == (1, 4)
    assert SyntheticTask(kind='agreement', vocab=8, max_len=21, max_distance=20).validate().distance_range == (1, 20)
    example = agreement_example(task, np.random.default_rng(0), distance=4)
    assert example.distance == 4
    assert len(example.source) == 5


def test_lexicon_flip():
    lexicon = AgreementLexicon(10)
    assert lexicon.flip(lexicon.verb_singular) == lexicon.verb_plural
    assert lexicon.flip(lexicon.verb_plural) == lexicon.verb_singular
    assert lexicon.fillers.tolist() == [7, 8, 9]


@pytest.mark.parametrize('task', [
    SyntheticTask(kind='shuffle'),
    SyntheticTask(min_len=0),
    SyntheticTask(min_len=5, max_len=4),
    SyntheticTask(train_size=0),
    SyntheticTask(vocab=2),
    SyntheticTask(kind='agreement', vocab=7),
    SyntheticTask(kind='agreement', min_distance=3, max_distance=2),
    SyntheticTask(kind='agreement', max_len=3, min_distance=3),
    SyntheticTask(kind='agreement', max_len=10, max_distance=20),
    SyntheticTask(kind='agreement', max_len=20, max_distance=20),
    ])
def test_invalid_tasks(task):
    with pytest.raises(ConfigError):
        task.validate()


def test_generate_needs_pairs():
    with pytest.raises(ValueError):
        generate(SyntheticTask(), 0, seed=0)


def test_vocabulary():
    vocab = Vocabulary(10)
    assert vocab.decode([2, 9, 0, 1]) == 't2 t9 </s> <unk>'
    assert vocab.encode('t2 9 </s> <unk>') == [2, 9, EOS_ID, UNK_ID]
    assert vocab.encode('t10 x', unk='replace') == [UNK_ID, UNK_ID]
    with pytest.raises(VocabularyError):
        vocab.encode('t10')
    with pytest.raises(VocabularyError):
        vocab.token_id('hello')
    with pytest.raises(VocabularyError):
        vocab.word(10)
    with pytest.raises(ValueError):
        Vocabulary(2)
    assert len(vocab) == 10


def test_with_eos():
    tokens = [3, 4]
    assert with_eos(tokens) == [3, 4, EOS_ID]
    assert tokens == [3, 4]
