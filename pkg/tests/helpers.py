from dataclasses import replace

import numpy as np

from deeprnmt.data import FIRST_CONTENT_ID, make_batches, with_eos
from deeprnmt.models import DecoderConfig, EncoderConfig, ModelConfig


def tiny_config(encoder: EncoderConfig | None = None,
                decoder: DecoderConfig | None = None,
                vocab: int = 7,
                hidden: int = 5,
                embedding: int = 4,
                **kwargs) -> ModelConfig:
    encoder = EncoderConfig() if encoder is None else encoder
    decoder = DecoderConfig() if decoder is None else decoder
    encoder = replace(encoder, hidden=hidden, embedding=embedding)
    decoder = replace(decoder, hidden=hidden, embedding=embedding)
    return ModelConfig(encoder=encoder, decoder=decoder, src_vocab=vocab, tgt_vocab=vocab, **kwargs).validate()


def random_pairs(n: int, vocab: int, max_len: int, seed: int, eos: bool = True):
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n):
        (source_len, target_len) = rng.integers(1, max_len + 1, size=2)
        source = [int(t) for t in rng.integers(FIRST_CONTENT_ID, vocab, size=source_len)]
        target = [int(t) for t in rng.integers(FIRST_CONTENT_ID, vocab, size=target_len)]
        pairs.append((source, with_eos(target) if eos else target))
    return pairs


def random_batch(n: int = 3, vocab: int = 7, max_len: int = 4, seed: int = 0):
    return make_batches(random_pairs(n, vocab, max_len, seed), n)[0]


# Architectures whose gradients and desk-scale learning are checked.
ENCODERS = {
    'shallow': EncoderConfig(kind='shallow'),
    'deep_transition4': EncoderConfig(kind='deep_transition', transition_depth=(4,)),
    'alternating4': EncoderConfig(kind='alternating', depth=4),
    'biunidirectional4': EncoderConfig(kind='biunidirectional', depth=4),
    'bideep2x2': EncoderConfig(kind='bideep', depth=2, transition_depth=(2,)),
    }

DECODERS = {
    'baseline': DecoderConfig(kind='baseline'),
    'deep_transition8': DecoderConfig(kind='deep_transition', depths=(8,)),
    'stacked_gru4': DecoderConfig(kind='stacked', variant='gru', depth=4),
    'stacked_rgru4': DecoderConfig(kind='stacked', variant='rgru', depth=4),
    'stacked_cgru4': DecoderConfig(kind='stacked', variant='cgru', depth=4),
    'stacked_crgru4': DecoderConfig(kind='stacked', variant='crgru', depth=4),
    'bideep_rgru_4_2': DecoderConfig(kind='bideep', variant='rgru', depths=(4, 2)),
    }

