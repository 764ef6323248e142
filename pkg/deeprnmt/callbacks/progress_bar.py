from sys import stderr
import re

from tqdm import tqdm

from . import Callback
from ._colors import colors_enabled, paint


def _format_metrics(metrics: dict[str, float],
                    metric_format: str = '{name}: {value:0.3f}',
                    sep: str = ', ',
                    with_color: bool = True,
                    ) -> str:
    if with_color:
        metric_format = re.sub(r'({value.*})',
                               paint(r'\1', 'value'),
                               metric_format)
    return sep.join(metric_format.format(name=n, value=v) for (n, v) in metrics.items())


class Tqdm(Callback):
    '''
    Callback which prints a pretty-looking progress bar over training steps.
    The description shows the running batch loss and, once available, the
    values of the last evaluation.

    :param desc: Description of the progress bar.
    :param metric_format: Format for each name/value pair (defaults to `"{name}: {value:0.3f}"`).
    :param sep: Separator between metrics (defaults to `", "`).
    :param leave: `True` to leave the bar on screen after training.
    :param output_file: Output file (defaults to `sys.stderr`).
    :param with_color: `False` to print values without ANSI colors. By default colors follow `output_file`.
    '''

    _SHOWN = ('loss', 'train_ce', 'valid_ce', 'valid_bleu')

    def __init__(self,
                 desc: str = 'Training',
                 metric_format: str = '{name}: {value:0.3f}',
                 sep: str = ', ',
                 leave: bool = True,
                 output_file=stderr,
                 with_color: bool | None = None,
                 ) -> None:
        super().__init__()
        self._desc = desc
        self._metric_format = metric_format
        self._sep = sep
        self._leave = leave
        self._output_file = output_file
        self._with_color = colors_enabled(output_file) if with_color is None else with_color
        self._tqdm = None
        self._last_evaluation = {}

    def format_metrics(self, logs):
        shown = {k: v for (k, v) in logs.items() if k in self._SHOWN}
        return _format_metrics(shown,
                               metric_format=self._metric_format,
                               sep=self._sep,
                               with_color=self._with_color)

    def on_train_begin(self, logs=None):
        self._tqdm = tqdm(desc=self._desc,
                          total=self.training_params['max_steps'],
                          leave=self._leave,
                          file=self._output_file,
                          )

    def on_train_end(self, logs=None):
        if self._tqdm is not None:
            # Set miniters and mininterval to 0 so last update displays
            self._tqdm.miniters = 0
            self._tqdm.mininterval = 0
            self._tqdm.refresh()
            self._tqdm.close()

    def on_train_batch_end(self, step, logs=None):
        metrics = {'loss': logs['loss'], **self._last_evaluation}
        self._tqdm.set_description(f'{self._desc} - {self.format_metrics(metrics)}', refresh=False)
        self._tqdm.update(1)

    def on_evaluation_end(self, step, logs=None):
        self._last_evaluation = {k: logs[k] for k in ('valid_ce', 'valid_bleu') if k in logs}
