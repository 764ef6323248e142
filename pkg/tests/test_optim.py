import math

import numpy as np
import pytest

from deeprnmt.autodiff import Tensor
from deeprnmt.errors import ConfigError, NonFiniteGradientError
from deeprnmt.models import DecoderConfig, EncoderConfig, ParameterSet, init_params
from deeprnmt.train import (
    TrainHyper,
    TrainState,
    clip_grad_norm,
    corpus_cross_entropy,
    global_norm,
    loss,
    optimizer_step,
    summed_log_prob,
    )

from .helpers import random_batch, tiny_config


def make_params():
    return ParameterSet({'w': Tensor(np.array([1.0, -2.0, 3.0]), requires_grad=True),
                         'b': Tensor(np.zeros((2, 2)), requires_grad=True)})


def test_first_step_moves_by_the_learning_rate():
    params = make_params()
    hyper = TrainHyper(lr=0.1)
    grads = {'w': np.array([4.0, -0.5, 0.0]), 'b': np.zeros((2, 2))}
    (params, state) = optimizer_step(TrainState(), params, grads, hyper)
    assert state.step == 1
    np.testing.assert_allclose(params['w'].data, [0.9, -1.9, 3.0], rtol=1e-7)
    np.testing.assert_array_equal(params['b'].data, np.zeros((2, 2)))


def test_moments_accumulate():
    params = make_params()
    hyper = TrainHyper(lr=0.01)
    state = TrainState()
    grad = {'w': np.array([1.0, 1.0, 1.0])}
    for _ in range(3):
        optimizer_step(state, params, grad, hyper)
    assert state.step == 3
    np.testing.assert_allclose(state.m['w'], (1 - 0.9 ** 3) * np.ones(3))
    np.testing.assert_allclose(params['w'].data, np.array([1.0, -2.0, 3.0]) - 0.03, rtol=1e-6)


def test_non_finite_gradients_change_nothing():
    params = make_params()
    state = TrainState()
    before = params.state_dict()
    grads = {'b': np.ones((2, 2)), 'w': np.array([1.0, np.nan, 0.0])}
    with pytest.raises(NonFiniteGradientError) as info:
        optimizer_step(state, params, grads, TrainHyper())
    assert 'w' in str(info.value)
    assert state.step == 0 and not state.m and not state.v
    for name in params:
        np.testing.assert_array_equal(params[name].data, before[name])


def test_gradient_mismatches():
    params = make_params()
    with pytest.raises(KeyError):
        optimizer_step(TrainState(), params, {'u': np.ones(3)}, TrainHyper())
    with pytest.raises(ValueError):
        optimizer_step(TrainState(), params, {'w': np.ones(2)}, TrainHyper())


def test_clipping_keeps_the_direction():
    grads = {'a': np.array([3.0, 0.0]), 'b': np.array([[0.0, 4.0]])}
    assert global_norm(grads) == 5.0

    (clipped, norm) = clip_grad_norm(grads, 1.0)
    assert norm == 5.0
    np.testing.assert_allclose(clipped['a'], [0.6, 0.0])
    np.testing.assert_allclose(clipped['b'], [[0.0, 0.8]])
    assert global_norm(clipped) == pytest.approx(1.0)

    (unclipped, _) = clip_grad_norm(grads, 0.0)
    np.testing.assert_array_equal(unclipped['a'], grads['a'])
    (small, _) = clip_grad_norm(grads, 10.0)
    np.testing.assert_array_equal(small['b'], grads['b'])
    assert global_norm({}) == 0.0


@pytest.mark.parametrize('hyper', [
    TrainHyper(lr=0.0),
    TrainHyper(beta1=1.0),
    TrainHyper(eps=0.0),
    TrainHyper(clip_norm=-1.0),
    TrainHyper(batch_size=0),
    TrainHyper(patience=-1),
    TrainHyper(select_by='accuracy'),
    ])
def test_invalid_hyper(hyper):
    with pytest.raises(ConfigError):
        hyper.validate()


def test_loss_is_the_mean_token_cross_entropy():
    config = tiny_config()
    params = init_params(config)
    batch = random_batch(n=4, seed=1)
    value = loss(params, config, batch)
    total = summed_log_prob(params, config, batch)
    assert value.data.shape == ()
    assert float(value.data) == pytest.approx(-total / batch.num_target_tokens, rel=1e-12)
    assert corpus_cross_entropy(params, config, [batch]) == pytest.approx(float(value.data), rel=1e-12)
    assert float(value.data) > 0
    assert math.isfinite(float(value.data))


def test_corpus_cross_entropy_weights_by_tokens():
    config = tiny_config()
    params = init_params(config)
    (first, second) = (random_batch(n=2, seed=2), random_batch(n=3, seed=3))
    expected = -(summed_log_prob(params, config, first) + summed_log_prob(params, config, second)) / \
        (first.num_target_tokens + second.num_target_tokens)
    assert corpus_cross_entropy(params, config, [first, second]) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize('seed', range(6))
def test_one_small_step_decreases_the_loss(seed):
    architectures = [
        (EncoderConfig(kind='shallow'), DecoderConfig(kind='baseline')),
        (EncoderConfig(kind='alternating', depth=2), DecoderConfig(kind='stacked', variant='rgru', depth=2)),
        (EncoderConfig(kind='bideep', depth=2, transition_depth=(2,)), DecoderConfig(kind='bideep', depths=(3, 2))),
        ]
    (encoder, decoder) = architectures[seed % len(architectures)]
    config = tiny_config(encoder, decoder, seed=seed)
    params = init_params(config)
    batch = random_batch(n=1, seed=seed)

    before = loss(params, config, batch)
    before.backward()
    optimizer_step(TrainState(), params, params.grads(), TrainHyper(lr=1e-4))
    params.zero_grad()
    after = loss(params, config, batch)
    assert float(after.data) < float(before.data), f'{encoder.kind}/{decoder.kind} seed {seed}'


def test_clipping_keeps_the_faulty_gradient_identifiable():
    config = tiny_config()
    params = init_params(config)
    grads = {name: np.full(params[name].shape, 0.1) for name in params}
    faulty = list(grads)[-1]
    grads[faulty].flat[0] = np.nan

    (clipped, norm) = clip_grad_norm(grads, 1.0)
    assert math.isnan(norm)
    assert all(np.isfinite(clipped[name]).all() for name in clipped if name != faulty)
    with pytest.raises(NonFiniteGradientError) as info:
        optimizer_step(TrainState(), params, clipped, TrainHyper())
    assert info.value.tensor_name == faulty
