from pathlib import Path
from typing import Mapping

from . import Callback
from ..models import ModelConfig, save_checkpoint


class Checkpoint(Callback):
    '''
    Callback to keep the best parameters seen at an evaluation.

    The best `state_dict` is held in memory; when training ends the trained
    parameters are restored to it and, if a path is given, written to
    `file_path`, so the checkpoint file always holds the selected model.

    :param file_path: str, `PathLike` or `None`. Path of the checkpoint file; missing
        parent directories are created. With `None` the best parameters are only restored.
    :param config: Model configuration stored alongside the parameters.
    :param monitor: Value to monitor (defaults to `"valid_ce"`).
    :param mode: One of `{"min", "max"}`. For `valid_ce` this should be `"min"`,
        for `valid_bleu` `"max"`. Ties keep the earlier evaluation.
    :param restore_best: `False` to leave the final parameters in place after writing the file.
    '''

    def __init__(self,
                 file_path,
                 config: ModelConfig,
                 monitor: str = 'valid_ce',
                 mode: str = 'min',
                 restore_best: bool = True,
                 ) -> None:
        assert mode in {'min', 'max'}, 'mode must be "min" or "max"'
        super().__init__()
        self._file_path = None if file_path is None else Path(file_path)
        self._config = config
        self._monitor = monitor
        self._mode = mode
        self._restore_best = restore_best
        self._best_state = None
        self._best_value = None
        self._best_step = None

    @property
    def best_step(self) -> int | None:
        return self._best_step

    @property
    def best_value(self) -> float | None:
        return self._best_value

    def _is_best(self, value):
        if self._best_value is None:
            return True
        if self._mode == 'min':
            return value < self._best_value
        return value > self._best_value

    def on_train_begin(self, logs: Mapping | None = None) -> None:
        if self._file_path is None:
            return
        parent = self._file_path.parent
        if parent != Path('.') and not parent.exists():
            parent.mkdir(parents=True, exist_ok=True)
            self.trainer._log(f'Created checkpoint directory: {parent}')

    def on_evaluation_end(self, step: int, logs: Mapping | None = None) -> None:
        if logs is None or logs.get(self._monitor) is None:
            raise ValueError(f'Expected value to monitor "{self._monitor}" not found')

        value = logs[self._monitor]
        if self._is_best(value):
            self._best_state = self.params.state_dict()
            self._best_value = value
            self._best_step = step
            self.trainer._log(f'Step: {step} - new best {self._monitor}: {value:0.4f}')

    def on_train_end(self, logs: Mapping | None = None) -> None:
        if self._best_state is None:
            return
        final_state = None if self._restore_best else self.params.state_dict()
        self.params.load_state_dict(self._best_state)
        if self._file_path is not None:
            self.trainer._log(f'Saving best parameters from step {self._best_step} to {self._file_path}')
            save_checkpoint(self.params, self._config, self._file_path)
        if final_state is not None:
            self.params.load_state_dict(final_state)
