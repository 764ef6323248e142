'''
Checkpoint files.

Layout, all integers little-endian:

    magic      8 bytes  b"DRNMTCKP"
    version    uint32
    config     uint64 byte length + UTF-8 canonical config text
    count      uint64 number of tensors
    per tensor uint64 name length + UTF-8 name, uint64 rank,
               rank x uint64 extents, float64 values in row-major order
'''
from collections.abc import Mapping
from os import PathLike
import logging

import numpy as np

from ..autodiff import Tensor
from ..errors import CheckpointError, ConfigError
from .config import ModelConfig
from .params import ParameterSet, parameter_schema


logger = logging.getLogger(__name__)

MAGIC = b'DRNMTCKP'
FORMAT_VERSION = 1


def _u64(value: int) -> bytes:
    return np.array([value], dtype='<u8').tobytes()


def check_compatible(params: Mapping[str, Tensor] | Mapping[str, np.ndarray], config: ModelConfig) -> None:
    '''
    Raises `CheckpointError` naming the first tensor whose name or shape
    differs from what `config` allocates.
    '''
    expected = [(spec.name, spec.shape) for spec in parameter_schema(config)]
    actual = [(name, tuple(np.shape(value.data if isinstance(value, Tensor) else value)))
              for (name, value) in params.items()]
    for ((want_name, want_shape), (name, shape)) in zip(expected, actual):
        if want_name != name:
            raise CheckpointError(f'Tensor "{name}" found where the config expects "{want_name}"')
        if want_shape != shape:
            raise CheckpointError(f'Tensor "{name}" has shape {shape}, the config expects {want_shape}')
    if len(actual) < len(expected):
        raise CheckpointError(f'Missing tensor "{expected[len(actual)][0]}"')
    if len(actual) > len(expected):
        raise CheckpointError(f'Unexpected tensor "{actual[len(expected)][0]}"')


def save_checkpoint(params: ParameterSet, config: ModelConfig, path: str | PathLike) -> None:
    config = config.validate()
    check_compatible(params, config)
    chunks = [MAGIC, np.array([FORMAT_VERSION], dtype='<u4').tobytes()]
    config_bytes = config.to_text().encode('utf-8')
    chunks += [_u64(len(config_bytes)), config_bytes, _u64(len(params))]
    for (name, tensor) in params.items():
        name_bytes = name.encode('utf-8')
        chunks += [_u64(len(name_bytes)), name_bytes, _u64(tensor.ndim)]
        chunks += [_u64(extent) for extent in tensor.shape]
        chunks.append(np.ascontiguousarray(tensor.data, dtype='<f8').tobytes())
    with open(path, 'wb') as output_file:
        output_file.write(b''.join(chunks))
    logger.info('Saved checkpoint with %d tensors to %s', len(params), path)


class _Reader:
    def __init__(self, payload: bytes) -> None:
        self._payload = payload
        self._offset = 0

    def take(self, size: int, what: str) -> bytes:
        if self._offset + size > len(self._payload):
            raise CheckpointError(f'Truncated checkpoint while reading {what}')
        chunk = self._payload[self._offset:self._offset + size]
        self._offset += size
        return chunk

    def u64(self, what: str) -> int:
        return int(np.frombuffer(self.take(8, what), dtype='<u8')[0])

    @property
    def exhausted(self) -> bool:
        return self._offset == len(self._payload)


def load_checkpoint(path: str | PathLike,
                    expected_config: ModelConfig | None = None,
                    ) -> tuple[ParameterSet, ModelConfig]:
    '''
    Reads a checkpoint.

    :param path: Checkpoint file.
    :param expected_config: When given, the stored tensors must match this config instead of the stored one.
    :return: Parameters and the stored config.
    '''
    with open(path, 'rb') as input_file:
        reader = _Reader(input_file.read())

    if reader.take(len(MAGIC), 'the header') != MAGIC:
        raise CheckpointError(f'{path} is not a checkpoint file')
    version = int(np.frombuffer(reader.take(4, 'the format version'), dtype='<u4')[0])
    if version != FORMAT_VERSION:
        raise CheckpointError(f'Checkpoint format version {version} is not supported (expected {FORMAT_VERSION})')
    config_text = reader.take(reader.u64('the config length'), 'the config').decode('utf-8')
    try:
        config = ModelConfig.from_text(config_text, source=str(path))
    except ConfigError as e:
        raise CheckpointError(f'Checkpoint config is invalid: {e}') from e

    arrays = {}
    for _ in range(reader.u64('the tensor count')):
        name = reader.take(reader.u64('a tensor name length'), 'a tensor name').decode('utf-8')
        rank = reader.u64(f'the rank of "{name}"')
        shape = tuple(reader.u64(f'the shape of "{name}"') for _ in range(rank))
        size = int(np.prod(shape))
        values = np.frombuffer(reader.take(8 * size, f'the values of "{name}"'), dtype='<f8')
        arrays[name] = values.reshape(shape).astype(np.float64)
    if not reader.exhausted:
        raise CheckpointError(f'Trailing bytes after the last tensor in {path}')

    check_compatible(arrays, expected_config.validate() if expected_config is not None else config)
    logger.info('Loaded checkpoint with %d tensors from %s', len(arrays), path)
    return ParameterSet.from_arrays(arrays), config
