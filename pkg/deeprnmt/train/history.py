from collections import defaultdict
import warnings
import json

import matplotlib.pyplot as plt
import numpy as np
from scipy.interpolate import PchipInterpolator


def _add_file_ext(file_name: str, ext: str) -> str:
    if not ext.startswith('.'):
        ext = f'.{ext}'
    return file_name if file_name.endswith(ext) else f'{file_name}{ext}'


class History():
    r'''
    Dict-like object, used to store the values logged at every evaluation.
    Can be accessed by key to get the values over evaluations, for example:

    ```python
    history = History()
    history.update({'step': 500, 'train_ce': 2.31, 'valid_ce': 2.12})
    history.update({'step': 1000, 'train_ce': 1.02, 'valid_ce': 0.97})
    # prints "[2.12, 0.97]"
    print(history['valid_ce'])
    ```

    To get the average value of every key, you can use the property `average`:
    ```python
    # prints "{'step': 750.0, 'train_ce': 1.665, 'valid_ce': 1.545}"
    print(history.average)
    ```

    To visualize training curves, you can call either `plot` or its alias `visualize`:
    ```python
    history.plot('ce', with_valid=True)
    ```
    '''

    def __init__(self, initial_stats=None):
        initial_stats = {} if initial_stats is None else initial_stats
        self._stats_history = defaultdict(list, initial_stats)

    @classmethod
    def from_json(cls, file_name):
        with open(_add_file_ext(file_name, 'json'), 'r') as input_file:
            stats_history = json.load(input_file)
        return History(stats_history)

    def to_json(self, file_name, indent_level=4):
        with open(_add_file_ext(file_name, 'json'), 'w') as output_file:
            json.dump(dict(self._stats_history), output_file, indent=indent_level)

    def update(self, stats):
        for k, v in stats.items():
            if not isinstance(v, float):
                v = float(v)
            self._stats_history[k].append(v)

    def __iter__(self):
        return iter(self._stats_history)

    def __getitem__(self, key):
        if not key in self._stats_history:
            raise KeyError(key)
        return self._stats_history[key]

    def __len__(self):
        return max((len(v) for v in self._stats_history.values()), default=0)

    def items(self):
        return self._stats_history.items()

    def keys(self):
        return self._stats_history.keys()

    @property
    def average(self):
        average_stats = {}
        for k, v in self._stats_history.items():
            average_stats[k] = sum(v) / len(v)
        return average_stats

    def average_of(self, metric_name):
        return self.average[metric_name]

    def best(self, metric_name, mode='min'):
        '''
        Index and value of the best entry of `metric_name`; the earliest one on ties.
        '''
        assert mode in {'min', 'max'}, 'mode must be "min" or "max"'
        values = self[metric_name]
        index = int(np.argmin(values) if mode == 'min' else np.argmax(values))
        return index, values[index]

    def plot(self,
             what: str,
             show: bool = True,
             with_valid: bool = False,
             figsize: tuple[int, int] = (5, 5),
             smooth: bool = True,
             grid: bool = True):
        '''
        Plots `train_<what>` (or `what` itself when logged under that name) over
        training steps, plus `valid_<what>` when `with_valid` is set.
        '''
        name = f'train_{what}' if f'train_{what}' in self._stats_history else what
        stats = {name: self[name]}
        if with_valid:
            valid_what = f'valid_{what}'
            if valid_what in self._stats_history:
                stats[valid_what] = self._stats_history[valid_what]
            else:
                warnings.warn('"with_valid" is set to True, but no "valid_" key was found in history')
        steps = np.asarray(self._stats_history.get('step') or np.arange(1, len(stats[name]) + 1), dtype=float)
        graph_name = what.upper() if len(what) <= 4 else what.capitalize()

        if smooth and len(steps) > 2:
            steps_ = np.linspace(steps.min(), steps.max(), 1000)
            for (key, stat) in stats.items():
                stats[key] = PchipInterpolator(steps, stat)(steps_)
            steps = steps_

        fig, ax = plt.subplots(figsize=figsize, layout='tight')
        for (key, stat) in stats.items():
            ax.plot(steps, stat, label=key)
        ax.set_xlabel('Step')
        ax.set_ylabel(graph_name)
        ax.set_title(f'{graph_name} over training steps')
        ax.legend()

        if show:
            plt.grid(grid)
            plt.show()

        return (fig, ax)

    def visualize(self, *args, **kwargs):
        return self.plot(*args, **kwargs)
