import logging

import numpy as np
import pytest

from deeprnmt.errors import ConfigError
from deeprnmt.log import TqdmLoggingHandler, configure_logging, resolve_level
from deeprnmt.reproduce import seed_everything, spawn_generators


def test_levels(monkeypatch):
    assert resolve_level('DEBUG') == logging.DEBUG
    monkeypatch.setenv('DEEP_RNMT_LOG', 'error')
    assert resolve_level() == logging.ERROR
    monkeypatch.delenv('DEEP_RNMT_LOG')
    assert resolve_level() == logging.INFO
    with pytest.raises(ConfigError):
        resolve_level('verbose')


def test_handler_is_installed_once(capsys):
    logger = configure_logging('info')
    configure_logging('debug')
    handlers = [h for h in logger.handlers if isinstance(h, TqdmLoggingHandler)]
    assert len(handlers) == 1
    assert logger.level == logging.DEBUG

    logging.getLogger('deeprnmt.tests').info('hello from the handler')
    captured = capsys.readouterr()
    assert 'hello from the handler' in captured.err
    assert captured.out == ''
    configure_logging('error')


def test_seeding():
    assert seed_everything(5).integers(1000) == np.random.default_rng(5).integers(1000)
    with pytest.raises(TypeError):
        seed_everything('5')

    first = [g.integers(1 << 30) for g in spawn_generators(9, 3)]
    second = [g.integers(1 << 30) for g in spawn_generators(9, 3)]
    assert first == second
    assert len(set(first)) == 3
