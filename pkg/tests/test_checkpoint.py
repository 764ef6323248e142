from pathlib import Path

import numpy as np
import pytest

from deeprnmt.errors import CheckpointError
from deeprnmt.models import DecoderConfig, EncoderConfig, init_params, load_checkpoint, save_checkpoint, score_sequence
from deeprnmt.models.checkpoint import MAGIC, check_compatible

from .helpers import tiny_config


@pytest.fixture
def saved(tmp_path):
    config = tiny_config(EncoderConfig(kind='bideep', depth=2, transition_depth=(2,)),
                         DecoderConfig(kind='stacked', variant='rgru', depth=2))
    params = init_params(config)
    path = tmp_path / 'model.ckpt'
    save_checkpoint(params, config, path)
    return (params, config, path)


def test_save_then_load_reproduces_scores(saved):
    (params, config, path) = saved
    (loaded, loaded_config) = load_checkpoint(path)
    assert loaded_config == config
    assert list(loaded) == list(params)
    for name in params:
        np.testing.assert_array_equal(loaded[name].data, params[name].data)
    assert score_sequence(loaded, config, [2, 3, 4], [5, 6, 0]) == score_sequence(params, config, [2, 3, 4], [5, 6, 0])


def test_saving_is_byte_stable(saved, tmp_path):
    (params, config, path) = saved
    again = tmp_path / 'again.ckpt'
    save_checkpoint(params, config, again)
    assert again.read_bytes() == path.read_bytes()
    assert path.read_bytes().startswith(MAGIC)


def test_bad_magic(saved):
    (_, _, path) = saved
    payload = path.read_bytes()
    path.write_bytes(b'NOTACKPT' + payload[len(MAGIC):])
    with pytest.raises(CheckpointError, match='not a checkpoint'):
        load_checkpoint(path)


def test_unsupported_version(saved):
    (_, _, path) = saved
    payload = path.read_bytes()
    path.write_bytes(payload[:8] + np.array([7], dtype='<u4').tobytes() + payload[12:])
    with pytest.raises(CheckpointError, match='version 7'):
        load_checkpoint(path)


@pytest.mark.parametrize('cut', [4, 10, 30, -1])
def test_truncated_file(saved, cut):
    (_, _, path) = saved
    payload = path.read_bytes()
    path.write_bytes(payload[:cut])
    with pytest.raises(CheckpointError, match='Truncated'):
        load_checkpoint(path)


def test_trailing_bytes(saved):
    (_, _, path) = saved
    path.write_bytes(path.read_bytes() + b'\x00')
    with pytest.raises(CheckpointError, match='Trailing'):
        load_checkpoint(path)


def test_expected_config_must_match(saved):
    (_, config, path) = saved
    load_checkpoint(path, expected_config=config)
    with pytest.raises(CheckpointError):
        load_checkpoint(path, expected_config=tiny_config())


def test_compatibility_errors():
    config = tiny_config()
    arrays = {name: tensor.data for (name, tensor) in init_params(config).items()}
    check_compatible(arrays, config)

    names = list(arrays)
    wrong_shape = dict(arrays)
    wrong_shape[names[3]] = np.zeros(2)
    with pytest.raises(CheckpointError, match='shape'):
        check_compatible(wrong_shape, config)

    missing = {name: arrays[name] for name in names[:-1]}
    with pytest.raises(CheckpointError, match='Missing'):
        check_compatible(missing, config)

    extra = {**arrays, 'extra': np.zeros(1)}
    with pytest.raises(CheckpointError, match='Unexpected'):
        check_compatible(extra, config)

    renamed = {('renamed' if name == names[0] else name): value for (name, value) in arrays.items()}
    with pytest.raises(CheckpointError, match='renamed'):
        check_compatible(renamed, config)


GOLDEN = Path(__file__).parent / 'data'


def test_stored_checkpoint_reproduces_its_score(tmp_path):
    checkpoint = GOLDEN / 'tiny_baseline.ckpt'
    stored_score = GOLDEN / 'tiny_baseline.score'
    (source, target) = ([2, 3, 4, 5], [6, 5, 4, 0])
    config = tiny_config()
    if not checkpoint.exists():
        GOLDEN.mkdir(exist_ok=True)
        save_checkpoint(init_params(config), config, checkpoint)
        (total, _) = score_sequence(*load_checkpoint(checkpoint), source, target)
        stored_score.write_text(total.hex() + '\n')
        pytest.skip(f'wrote {checkpoint.name} and {stored_score.name}, commit them under tests/data')

    (params, saved_config) = load_checkpoint(checkpoint)
    assert saved_config == config
    (total, _) = score_sequence(params, saved_config, source, target)
    assert total == float.fromhex(stored_score.read_text().strip())

    save_checkpoint(init_params(config), config, tmp_path / 'fresh.ckpt')
    assert (tmp_path / 'fresh.ckpt').read_bytes() == checkpoint.read_bytes()
