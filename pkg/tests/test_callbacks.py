import numpy as np
import pytest

from deeprnmt.callbacks import Checkpoint, EarlyStopping, TrainingLog, read_training_log
from deeprnmt.callbacks._colors import colors_enabled, paint
from deeprnmt.callbacks.training_log import format_log_line
from deeprnmt.models import init_params, load_checkpoint

from .helpers import tiny_config


class FakeTrainer:
    def __init__(self):
        self.is_training = True
        self.messages = []

    def _log(self, message, level=None):
        self.messages.append(message)


def attach(callback, params=None):
    callback.trainer = FakeTrainer()
    callback.params = params
    return callback


def run_evaluations(callback, values, monitor='valid_ce'):
    for (step, value) in enumerate(values, start=1):
        callback.on_evaluation_end(step, {monitor: value})
        if not callback.trainer.is_training:
            return step
    return None


def test_early_stopping_without_patience():
    stopping = attach(EarlyStopping(0))
    assert run_evaluations(stopping, [3.0, 2.0, 2.5, 1.0]) == 3
    assert stopping.stopped_step == 3
    assert stopping.bad_evaluations == 1


def test_early_stopping_counts_consecutive_misses():
    stopping = attach(EarlyStopping(1))
    assert run_evaluations(stopping, [3.0, 3.0, 2.0, 2.0, 2.5, 1.0]) == 5
    stopping = attach(EarlyStopping(1))
    assert run_evaluations(stopping, [3.0, 3.0, 2.0, 2.0, 1.0, 1.5]) is None
    assert stopping.stopped_step is None


def test_early_stopping_in_max_mode():
    stopping = attach(EarlyStopping(0, monitor='valid_bleu', mode='max'))
    assert run_evaluations(stopping, [0.1, 0.3, 0.3], monitor='valid_bleu') == 3


def test_early_stopping_rejects_bad_arguments():
    with pytest.raises(AssertionError):
        EarlyStopping(-1)
    with pytest.raises(AssertionError):
        EarlyStopping(1, mode='median')


@pytest.mark.parametrize('restore_best', [True, False])
def test_checkpoint_keeps_the_best_parameters(tmp_path, restore_best):
    config = tiny_config()
    params = init_params(config)
    path = tmp_path / 'nested' / 'best.ckpt'
    checkpoint = attach(Checkpoint(path, config, restore_best=restore_best), params)
    checkpoint.on_train_begin()
    assert path.parent.is_dir()

    name = 'dec.out.proj.b'
    for (step, (fill, value)) in enumerate([(1.0, 2.0), (2.0, 1.5), (3.0, 1.5), (4.0, 1.8)], start=1):
        params[name].data[...] = fill
        checkpoint.on_evaluation_end(step, {'valid_ce': value})
    assert (checkpoint.best_step, checkpoint.best_value) == (2, 1.5)

    checkpoint.on_train_end()
    np.testing.assert_array_equal(params[name].data, 2.0 if restore_best else 4.0)
    (saved, _) = load_checkpoint(path)
    np.testing.assert_array_equal(saved[name].data, 2.0)


def test_checkpoint_without_a_file_only_restores():
    config = tiny_config()
    params = init_params(config)
    checkpoint = attach(Checkpoint(None, config, monitor='valid_bleu', mode='max'), params)
    checkpoint.on_train_begin()
    params['emb.src'].data[...] = 0.5
    checkpoint.on_evaluation_end(1, {'valid_bleu': 0.4})
    params['emb.src'].data[...] = -0.5
    checkpoint.on_evaluation_end(2, {'valid_bleu': 0.2})
    checkpoint.on_train_end()
    np.testing.assert_array_equal(params['emb.src'].data, 0.5)


def test_checkpoint_needs_the_monitored_value():
    config = tiny_config()
    checkpoint = attach(Checkpoint(None, config), init_params(config))
    with pytest.raises(ValueError, match='valid_ce'):
        checkpoint.on_evaluation_end(1, {'train_ce': 1.0})


def test_training_log_round_trip(tmp_path):
    path = tmp_path / 'train.log'
    path.write_text('stale\n')
    log = attach(TrainingLog(path))
    log.on_train_begin()
    entries = [{'step': 10, 'train_ce': 1.25, 'valid_ce': 1.5, 'tokens_per_s': 300.0},
               {'step': 20, 'train_ce': 0.1 + 0.2, 'valid_ce': 1.0, 'tokens_per_s': 310.5}]
    for entry in entries:
        log.on_evaluation_end(entry['step'], entry)
    assert path.read_text().splitlines()[0] == '10\t1.25\t1.5\t300.0'
    assert read_training_log(path) == entries


def test_log_line_format():
    assert format_log_line({'step': 3.0, 'train_ce': 2, 'valid_ce': 1.5, 'tokens_per_s': 7}) == '3\t2.0\t1.5\t7.0'


def test_malformed_training_log(tmp_path):
    path = tmp_path / 'train.log'
    path.write_text('1\t2.0\t3.0\n')
    with pytest.raises(ValueError):
        read_training_log(path)


class Terminal:
    def isatty(self):
        return True


def test_colors_follow_the_stream(monkeypatch, tmp_path):
    monkeypatch.delenv('NO_COLOR', raising=False)
    assert colors_enabled(Terminal())
    with open(tmp_path / 'out.txt', 'w') as stream:
        assert not colors_enabled(stream)
    monkeypatch.setenv('NO_COLOR', '1')
    assert not colors_enabled(Terminal())


def test_paint():
    assert paint('x', 'warning', enabled=False) == 'x'
    assert paint('x', 'value').startswith('\033[') and 'x' in paint('x', 'value')
