import numpy as np
import pytest

from deeprnmt.data import EOS_ID, SyntheticTask, generate, make_batches, pad, with_eos


@pytest.fixture
def pairs():
    return [(source, with_eos(target)) for (source, target) in
            generate(SyntheticTask(kind='reverse', vocab=9, max_len=7), 37, seed=2)]


def test_every_pair_appears_once(pairs):
    batches = make_batches(pairs, 8)
    indices = [i for batch in batches for i in batch.indices]
    assert sorted(indices) == list(range(len(pairs)))
    assert [batch.size for batch in batches] == [8, 8, 8, 8, 5]
    assert sum(batch.num_target_tokens for batch in batches) == sum(len(t) for (_, t) in pairs)


def test_batches_are_sorted_by_length(pairs):
    batches = make_batches(pairs, 8)
    keys = [(len(pairs[i][0]), len(pairs[i][1]), i) for batch in batches for i in batch.indices]
    assert keys == sorted(keys)


def test_rows_hold_their_pairs(pairs):
    for batch in make_batches(pairs, 5):
        for (row, index) in enumerate(batch.indices):
            (source, target) = pairs[index]
            assert batch.source[row, batch.source_mask[row]].tolist() == source
            assert batch.target[row, batch.target_mask[row]].tolist() == target
            assert np.all(batch.source[row, len(source):] == EOS_ID)


def test_shuffle_is_seeded(pairs):
    first = make_batches(pairs, 4, rng=np.random.default_rng(0))
    second = make_batches(pairs, 4, rng=np.random.default_rng(0))
    plain = make_batches(pairs, 4)
    assert [b.indices for b in first] == [b.indices for b in second]
    assert sorted(b.indices for b in first) == sorted(b.indices for b in plain)


def test_pad():
    (ids, mask) = pad([[5], [3, 4, 6]])
    assert ids.tolist() == [[5, EOS_ID, EOS_ID], [3, 4, 6]]
    assert mask.tolist() == [[True, False, False], [True, True, True]]
    assert ids.dtype == np.int64


def test_batch_size_must_be_positive(pairs):
    with pytest.raises(ValueError):
        make_batches(pairs, 0)
