import numpy as np

import random
import os


def seed_everything(seed: int) -> np.random.Generator:
    '''
    Sets a seed to every global source of randomness and returns a fresh
    numpy `Generator` seeded the same way. Library code never draws from the
    global generators; it takes explicit `Generator`s derived from this seed.
    :param seed: Integer. The seed of all random operations.
    :return: `np.random.Generator` seeded with `seed`.
    '''
    if not isinstance(seed, int):
        raise TypeError('Expect `seed` to be an integer')

    os.environ['PYTHONHASHSEED'] = str(seed)
    random.seed(seed)
    np.random.seed(seed)
    return np.random.default_rng(seed)


def spawn_generators(seed: int, n: int) -> list[np.random.Generator]:
    '''
    Derives `n` statistically independent generators from one seed. Used to
    keep e.g. the training and validation data streams disjoint.
    :param seed: Root seed.
    :param n: Number of generators.
    :return: List of generators, deterministic given `seed`.
    '''
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.default_rng(child) for child in children]
