from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from functools import partial
import multiprocessing as mp

import numpy as np

from ..autodiff import Tensor, get_dtype, set_precision
from ..models import ModelConfig, ParameterSet


_worker_model = None


def _init_worker(arrays: dict[str, np.ndarray], config_text: str, bits: int) -> None:
    global _worker_model
    set_precision(bits)
    _worker_model = (ParameterSet.from_arrays(arrays, requires_grad=False), ModelConfig.from_text(config_text))


def _run(fn, item):
    (params, config) = _worker_model
    return fn(params, config, item)


def map_items(fn: Callable,
              params: Mapping[str, Tensor],
              config: ModelConfig,
              items: Sequence,
              workers: int = 1,
              ) -> list:
    '''
    Computes `fn(params, config, item)` for every item and returns the results
    in item order. With more than one worker, the parameters are shipped once
    to every process of a pool; `fn` must then be a module-level function.
    '''
    items = list(items)
    if workers < 1:
        raise ValueError(f'workers must be positive, got {workers}')
    if workers == 1 or len(items) <= 1:
        return [fn(params, config, item) for item in items]

    arrays = {name: tensor.data for (name, tensor) in params.items()}
    bits = 8 * np.dtype(get_dtype()).itemsize
    workers = min(workers, len(items))
    with ProcessPoolExecutor(max_workers=workers,
                             mp_context=mp.get_context('spawn'),
                             initializer=_init_worker,
                             initargs=(arrays, config.to_text(), bits),
                             ) as pool:
        chunksize = max(1, len(items) // (4 * workers))
        return list(pool.map(partial(_run, fn), items, chunksize=chunksize))
