import logging
import sys

from .callback import Callback
from ._colors import colors_enabled, paint


class EarlyStopping(Callback):
    '''
    Callback to prevent overfitting while training.
    Counts consecutive evaluations without a strict improvement of the monitored
    value and stops training once the count exceeds `patience`, so `patience=0`
    stops at the first evaluation that does not improve.

    :param patience: Number of non-improving evaluations that are tolerated.
    :param monitor: Value to monitor (defaults to `"valid_ce"`).
    :param mode: One of `{"min", "max"}`. In `"min"` mode an improvement is a strict
        decrease, in `"max"` mode a strict increase.
    '''

    def __init__(self,
                 patience: int,
                 monitor: str = 'valid_ce',
                 mode: str = 'min',
                 ) -> None:
        assert isinstance(patience, int) and patience >= 0
        assert mode in {'min', 'max'}
        super().__init__()
        self._patience = patience
        self._monitor = monitor
        self._mode = mode
        self._best_value = None
        self._bad_evaluations = 0
        self._stopped_step = None

    @property
    def bad_evaluations(self) -> int:
        return self._bad_evaluations

    @property
    def stopped_step(self) -> int | None:
        return self._stopped_step

    def _is_improvement(self, value):
        if self._best_value is None:
            return True
        if self._mode == 'min':
            return value < self._best_value
        return value > self._best_value

    def on_train_end(self, logs=None):
        if self._stopped_step is not None:
            self.trainer._log(f'Step: {self._stopped_step} - early stopping.')

    def on_evaluation_end(self, step, logs=None):
        value = logs[self._monitor]
        if self._is_improvement(value):
            self._best_value = value
            self._bad_evaluations = 0
            return

        self._bad_evaluations += 1
        self.trainer._log(paint(f'Watch out, {self._monitor} did not improve '
                                f'({self._bad_evaluations}/{self._patience + 1})', 'warning',
                                colors_enabled(sys.stderr)),
                          level=logging.WARNING)
        if self._bad_evaluations > self._patience:
            self._stopped_step = step
            self.trainer.is_training = False
