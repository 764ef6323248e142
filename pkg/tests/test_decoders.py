import numpy as np
import pytest

from deeprnmt.autodiff import Tensor, ops
from deeprnmt.data import make_batches
from deeprnmt.errors import DimensionError, EmptySequenceError, VocabularyError
from deeprnmt.models import (
    DECODER_VARIANTS,
    DecoderConfig,
    EncoderConfig,
    DecoderState,
    SourceAnnotations,
    encode,
    init_params,
    init_state,
    parameter_schema,
    score_sequence,
    sequence_log_probs,
    step,
    step_baseline,
    step_bideep,
    step_deep_transition,
    step_stacked,
    )

from .helpers import random_batch, random_pairs, tiny_config


def batch_log_probs(params, config, batch):
    return sequence_log_probs(params, config, batch.source, batch.source_mask, batch.target, batch.target_mask).data


def assert_same_model(reduced: DecoderConfig, reference: DecoderConfig):
    reduced_config, reference_config = tiny_config(decoder=reduced), tiny_config(decoder=reference)
    assert parameter_schema(reduced_config) == parameter_schema(reference_config)
    params = init_params(reference_config)
    batch = random_batch(n=3, seed=4)
    np.testing.assert_array_equal(batch_log_probs(params, reduced_config, batch),
                                  batch_log_probs(params, reference_config, batch))


def test_deep_transition_of_depth_two_is_the_baseline():
    assert_same_model(DecoderConfig(kind='deep_transition', depths=(2,)), DecoderConfig(kind='baseline'))


@pytest.mark.parametrize('variant', DECODER_VARIANTS)
def test_stacked_of_depth_one_is_the_baseline(variant):
    assert_same_model(DecoderConfig(kind='stacked', variant=variant, depth=1), DecoderConfig(kind='baseline'))


@pytest.mark.parametrize('variant', DECODER_VARIANTS)
def test_bideep_two_one_is_stacked(variant):
    assert_same_model(DecoderConfig(kind='bideep', variant=variant, depths=(2, 1)),
                      DecoderConfig(kind='stacked', variant=variant, depth=2))


DECODERS = [
    DecoderConfig(kind='baseline'),
    DecoderConfig(kind='deep_transition', depths=(4,)),
    DecoderConfig(kind='stacked', variant='gru', depth=3),
    DecoderConfig(kind='stacked', variant='rgru', depth=3),
    DecoderConfig(kind='stacked', variant='cgru', depth=3),
    DecoderConfig(kind='stacked', variant='crgru', depth=3),
    DecoderConfig(kind='bideep', variant='rgru', depths=(4, 2)),
    DecoderConfig(kind='baseline', output_depth=3, output_inputs='state_only'),
    ]


def decoder_id(decoder):
    return f'{decoder.kind}-{decoder.variant}'


@pytest.mark.parametrize('decoder', DECODERS, ids=decoder_id)
def test_batched_scoring_matches_single_sentences(decoder):
    config = tiny_config(decoder=decoder)
    params = init_params(config)
    pairs = random_pairs(5, vocab=7, max_len=4, seed=8)
    batch = make_batches(pairs, len(pairs))[0]
    batched = batch_log_probs(params, config, batch)

    for (row, index) in enumerate(batch.indices):
        (source, target) = pairs[index]
        (total, per_token) = score_sequence(params, config, source, target)
        np.testing.assert_allclose(batched[row, :len(target)], per_token, rtol=0, atol=1e-12)
        assert np.all(batched[row, len(target):] == 0.0)
        assert total == sum(per_token)
        assert all(value < 0.0 for value in per_token)


@pytest.mark.parametrize('seed', range(100))
def test_random_batches_score_like_single_sentences(seed):
    encoders = [EncoderConfig(kind='shallow'), EncoderConfig(kind='alternating', depth=2),
                EncoderConfig(kind='bideep', depth=2, transition_depth=(2,))]
    config = tiny_config(encoders[seed % len(encoders)], DECODERS[seed % len(DECODERS)], seed=seed)
    params = init_params(config)
    pairs = random_pairs(4, vocab=7, max_len=6, seed=seed)
    batch = make_batches(pairs, len(pairs))[0]
    batched = batch_log_probs(params, config, batch)
    for (row, index) in enumerate(batch.indices):
        (source, target) = pairs[index]
        (_, per_token) = score_sequence(params, config, source, target)
        np.testing.assert_allclose(batched[row, :len(target)], per_token, rtol=0, atol=1e-12)


def test_step_helpers_match_the_configured_step():
    cases = [
        (DecoderConfig(kind='baseline'), lambda p, s, y, C: step_baseline(p, s, y, C)),
        (DecoderConfig(kind='deep_transition', depths=(3,)), lambda p, s, y, C: step_deep_transition(p, s, y, C, 3)),
        (DecoderConfig(kind='stacked', variant='cgru', depth=2),
         lambda p, s, y, C: step_stacked(p, s, y, C, 'cgru', 2)),
        (DecoderConfig(kind='bideep', variant='crgru', depths=(3, 2)),
         lambda p, s, y, C: step_bideep(p, s, y, C, 'crgru', 2, (3, 2))),
        ]
    rng = np.random.default_rng(5)
    for (decoder, helper) in cases:
        config = tiny_config(decoder=decoder)
        params = init_params(config)
        C = encode(params, config.encoder, rng.integers(2, 7, size=(2, 3)))
        state = init_state(C, params, config.decoder.depth)
        y_prev = Tensor(rng.standard_normal((2, config.decoder.embedding)))
        np.testing.assert_array_equal(helper(params, state, y_prev, C).logits.data,
                                      step(params, config, state, y_prev, C).logits.data)


def test_cgru_levels_attend_on_their_own():
    config = tiny_config(decoder=DecoderConfig(kind='stacked', variant='cgru', depth=3))
    params = init_params(config)
    C = encode(params, config.encoder, np.array([[2, 3, 4]]))
    out = step(params, config, init_state(C, params), Tensor(np.zeros((1, config.decoder.embedding))), C)
    assert len(out.contexts) == 3
    assert len(out.state.levels) == 3

    config = tiny_config(decoder=DecoderConfig(kind='stacked', variant='crgru', depth=3))
    params = init_params(config)
    out = step(params, config, init_state(C, params), Tensor(np.zeros((1, config.decoder.embedding))), C)
    assert len(out.contexts) == 1


def test_literal_conditional_state_changes_the_model():
    decoder = DecoderConfig(kind='stacked', variant='crgru', depth=2)
    config = tiny_config(decoder=decoder)
    literal = tiny_config(decoder=DecoderConfig(kind='stacked', variant='crgru', depth=2,
                                                literal_conditional_state=True))
    assert parameter_schema(config) == parameter_schema(literal)
    params = init_params(config)
    batch = random_batch(seed=6)
    assert not np.array_equal(batch_log_probs(params, config, batch), batch_log_probs(params, literal, batch))


def test_initial_state_averages_unmasked_annotations():
    config = tiny_config(decoder=DecoderConfig(kind='stacked', depth=2))
    params = init_params(config)
    rng = np.random.default_rng(7)
    annotations = rng.standard_normal((2, 3, 2 * config.encoder.hidden))
    mask = np.array([[True, True, True], [True, False, False]])
    annotations[1, 1:] = 50.0
    state = init_state(SourceAnnotations(Tensor(annotations), mask), params)

    assert len(state.levels) == 2
    mean = np.stack([annotations[0].mean(axis=0), annotations[1, 0]])
    for level in (1, 2):
        expected = np.tanh(mean @ params[f'dec.init.level{level}.W'].data + params[f'dec.init.level{level}.b'].data)
        np.testing.assert_allclose(state.levels[level - 1].data, expected, rtol=1e-12, atol=1e-14)


def test_state_select_repeats_rows():
    state = DecoderState((Tensor(np.arange(6.0).reshape(3, 2)),), Tensor(np.ones((3, 4))))
    selected = state.select(np.array([2, 2, 0]))
    np.testing.assert_array_equal(selected.levels[0].data, [[4.0, 5.0], [4.0, 5.0], [0.0, 1.0]])
    assert selected.context is None
    assert not selected.levels[0].requires_grad


def test_scoring_errors():
    config = tiny_config()
    params = init_params(config)
    with pytest.raises(EmptySequenceError):
        score_sequence(params, config, [2, 3], [])
    with pytest.raises(EmptySequenceError):
        score_sequence(params, config, [], [2, 0])
    with pytest.raises(VocabularyError):
        score_sequence(params, config, [2, 3], [2, 7])
    with pytest.raises(VocabularyError):
        score_sequence(params, config, [2, 30], [2, 0])


def test_step_shape_errors():
    config = tiny_config(decoder=DecoderConfig(kind='stacked', depth=2))
    params = init_params(config)
    C = encode(params, config.encoder, np.array([[2, 3]]))
    state = init_state(C, params, depth=1)
    with pytest.raises(DimensionError):
        step(params, config, state, Tensor(np.zeros((1, config.decoder.embedding))), C)
    with pytest.raises(DimensionError):
        step_deep_transition(params, state, Tensor(np.zeros((1, config.decoder.embedding))), C, L_t=1)


def test_scores_are_normalized_over_the_vocabulary():
    config = tiny_config(decoder=DecoderConfig(kind='bideep', variant='cgru', depths=(3, 2)))
    params = init_params(config)
    C = encode(params, config.encoder, np.array([[2, 3, 4]]))
    out = step(params, config, init_state(C, params), Tensor(np.zeros((1, config.decoder.embedding))), C)
    assert np.exp(ops.log_softmax(out.logits, axis=-1).data).sum() == pytest.approx(1.0, abs=1e-12)
