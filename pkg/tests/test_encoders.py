import numpy as np
import pytest

from deeprnmt.data import pad
from deeprnmt.errors import DimensionError, EmptySequenceError
from deeprnmt.models import (
    EncoderConfig,
    encode,
    encode_alternating,
    encode_bideep,
    encode_biunidirectional,
    encode_deep_transition,
    encode_shallow,
    init_params,
    parameter_schema,
    )

from .helpers import random_pairs, tiny_config


def random_tokens(rng, batch, length, vocab=7):
    return rng.integers(2, vocab, size=(batch, length))


def test_depth_one_encoders_reduce_to_shallow():
    config = tiny_config(EncoderConfig(kind='shallow'))
    params = init_params(config)
    tokens = random_tokens(np.random.default_rng(0), 3, 5)

    expected = encode_shallow(params, tokens).annotations.data
    for annotations in (encode_deep_transition(params, tokens, L_s=1),
                        encode_alternating(params, tokens, D_s=1),
                        encode_bideep(params, tokens, D_s=1, L_s=1)):
        np.testing.assert_array_equal(annotations.annotations.data, expected)


@pytest.mark.parametrize('encoder', [
    EncoderConfig(kind='deep_transition', transition_depth=(1,)),
    EncoderConfig(kind='alternating', depth=1),
    EncoderConfig(kind='bideep', depth=1, transition_depth=(1,)),
    ])
def test_depth_one_configs_share_the_shallow_parameters(encoder):
    shallow = tiny_config(EncoderConfig(kind='shallow'))
    other = tiny_config(encoder)
    assert parameter_schema(other) == parameter_schema(shallow)

    params = init_params(shallow)
    tokens = random_tokens(np.random.default_rng(1), 2, 4)
    np.testing.assert_array_equal(encode(params, other.encoder, tokens).annotations.data,
                                  encode(params, shallow.encoder, tokens).annotations.data)


ENCODERS = [
    EncoderConfig(kind='shallow'),
    EncoderConfig(kind='deep_transition', transition_depth=(3,)),
    EncoderConfig(kind='alternating', depth=3),
    EncoderConfig(kind='biunidirectional', depth=3),
    EncoderConfig(kind='bideep', depth=2, transition_depth=(2, 3)),
    EncoderConfig(kind='mixed', alt_layers=2, uni_layers=1),
    ]


@pytest.mark.parametrize('encoder', ENCODERS, ids=lambda e: e.kind)
def test_batched_encoding_matches_single_sentences(encoder):
    config = tiny_config(encoder)
    params = init_params(config)
    rng = np.random.default_rng(2)
    sentences = [list(rng.integers(2, 7, size=n)) for n in (1, 4, 2, 5)]
    (tokens, mask) = pad(sentences)
    batched = encode(params, config.encoder, tokens, mask)

    assert batched.annotations.shape == (4, 5, 2 * config.encoder.hidden)
    for (row, sentence) in enumerate(sentences):
        single = encode(params, config.encoder, np.array([sentence]))
        np.testing.assert_allclose(batched.annotations.data[row, :len(sentence)], single.annotations.data[0],
                                   rtol=0, atol=1e-12)


@pytest.mark.parametrize('seed', range(100))
def test_random_batches_encode_like_single_sentences(seed):
    config = tiny_config(ENCODERS[seed % len(ENCODERS)], seed=seed)
    params = init_params(config)
    sentences = [source for (source, _) in random_pairs(4, vocab=7, max_len=6, seed=seed)]
    (tokens, mask) = pad(sentences)
    batched = encode(params, config.encoder, tokens, mask).annotations.data
    for (row, sentence) in enumerate(sentences):
        single = encode(params, config.encoder, np.array([sentence])).annotations.data
        np.testing.assert_allclose(batched[row, :len(sentence)], single[0], rtol=0, atol=1e-12)


@pytest.mark.parametrize('encoder', ENCODERS, ids=lambda e: e.kind)
def test_padding_tokens_do_not_leak(encoder):
    config = tiny_config(encoder)
    params = init_params(config)
    (tokens, mask) = pad([[2, 3, 4, 5], [6, 2]])
    changed = tokens.copy()
    changed[1, 2:] = 6
    first = encode(params, config.encoder, tokens, mask).annotations.data
    second = encode(params, config.encoder, changed, mask).annotations.data
    np.testing.assert_array_equal(first[1, :2], second[1, :2])


def test_alternating_levels_change_direction():
    config = tiny_config(EncoderConfig(kind='alternating', depth=2))
    params = init_params(config)
    tokens = np.array([[2, 3, 4, 5]])
    changed = np.array([[2, 3, 4, 6]])
    first = encode(params, config.encoder, tokens, keep_layer_states=True).layer_states
    second = encode(params, config.encoder, changed, keep_layer_states=True).layer_states

    # the forward part reads left to right on level 1, right to left on level 2
    np.testing.assert_array_equal(first['fwd.level1'][0].data, second['fwd.level1'][0].data)
    assert not np.array_equal(first['fwd.level2'][0].data, second['fwd.level2'][0].data)
    assert not np.array_equal(first['bwd.level1'][0].data, second['bwd.level1'][0].data)


def test_biunidirectional_levels_are_double_width():
    config = tiny_config(EncoderConfig(kind='biunidirectional', depth=3))
    params = init_params(config)
    out = encode(params, config.encoder, np.array([[2, 3, 4]]), keep_layer_states=True)
    assert set(out.layer_states) == {'fwd.level1', 'bwd.level1', 'uni.level2', 'uni.level3'}
    assert out.layer_states['uni.level3'][0].shape == (1, 2 * config.encoder.hidden)
    np.testing.assert_array_equal(out.annotations.data[:, 0], out.layer_states['uni.level3'][0].data)


def test_convenience_encoders_match_configs():
    config = tiny_config(EncoderConfig(kind='bideep', depth=2, transition_depth=(3, 2)))
    params = init_params(config)
    tokens = random_tokens(np.random.default_rng(3), 2, 3)
    np.testing.assert_array_equal(encode_bideep(params, tokens, D_s=2, L_s=(3, 2)).annotations.data,
                                  encode(params, config.encoder, tokens).annotations.data)

    config = tiny_config(EncoderConfig(kind='biunidirectional', depth=2))
    params = init_params(config)
    np.testing.assert_array_equal(encode_biunidirectional(params, tokens, D_s=2).annotations.data,
                                  encode(params, config.encoder, tokens).annotations.data)
    with pytest.raises(DimensionError):
        encode_bideep(params, tokens, D_s=2, L_s=(1, 1, 1))


def test_source_validation():
    config = tiny_config()
    params = init_params(config)
    with pytest.raises(EmptySequenceError):
        encode(params, config.encoder, np.zeros((1, 0), dtype=np.int64))
    with pytest.raises(EmptySequenceError):
        encode(params, config.encoder, np.array([[2, 3]]), np.array([[False, False]]))
    with pytest.raises(DimensionError):
        encode(params, config.encoder, np.array([[2, 3, 4]]), np.array([[True, False, True]]))
    with pytest.raises(DimensionError):
        encode(params, config.encoder, np.array([2, 3]))
    with pytest.raises(DimensionError):
        encode(params, config.encoder, np.array([[2, 9]]))
