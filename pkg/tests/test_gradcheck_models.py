import itertools

import pytest

from deeprnmt.autodiff import check_gradients
from deeprnmt.models import DecoderConfig, EncoderConfig, init_params
from deeprnmt.train import loss

from .helpers import DECODERS, ENCODERS, random_batch, tiny_config


def assert_gradients(encoder, decoder, max_entries, **model):
    config = tiny_config(encoder, decoder, **model)
    params = init_params(config)
    batch = random_batch(n=2, seed=config.seed)
    report = check_gradients(lambda: loss(params, config, batch), params, tolerance=1e-4, max_entries=max_entries)
    assert report.passed, report.format()
    assert len(report.checks) == len(params)


@pytest.mark.parametrize('encoder', ENCODERS)
def test_encoder_gradients(encoder):
    assert_gradients(ENCODERS[encoder], DECODERS['baseline'], max_entries=6)


@pytest.mark.parametrize('decoder', DECODERS)
def test_decoder_gradients(decoder):
    assert_gradients(ENCODERS['shallow'], DECODERS[decoder], max_entries=6)


def test_every_entry_of_the_baseline():
    assert_gradients(ENCODERS['shallow'], DECODERS['baseline'], max_entries=None)


def test_gradients_without_layer_norm_and_with_tied_embeddings():
    assert_gradients(ENCODERS['bideep2x2'], DECODERS['stacked_cgru4'], max_entries=6,
                     layer_norm=False, tied_embeddings=True)


def test_gradients_of_the_mixed_encoder_and_deep_output():
    assert_gradients(EncoderConfig(kind='mixed', alt_layers=2, uni_layers=1),
                     DecoderConfig(kind='baseline', output_depth=3, output_inputs='state_only'),
                     max_entries=6)


@pytest.mark.slow
@pytest.mark.parametrize(('encoder', 'decoder'), list(itertools.product(ENCODERS, DECODERS)))
def test_full_architecture_grid(encoder, decoder):
    assert_gradients(ENCODERS[encoder], DECODERS[decoder], max_entries=3)
