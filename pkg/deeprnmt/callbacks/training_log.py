from pathlib import Path
from typing import Mapping

from . import Callback


COLUMNS = ('step', 'train_ce', 'valid_ce', 'tokens_per_s')


def format_log_line(logs: Mapping) -> str:
    return '\t'.join([str(int(logs['step']))] + [repr(float(logs[c])) for c in COLUMNS[1:]])


def read_training_log(file_path) -> list[dict[str, float]]:
    '''
    Parses a file written by `TrainingLog` back into one dict per evaluation.
    '''
    rows = []
    for line in Path(file_path).read_text(encoding='utf-8').splitlines():
        if not line.strip():
            continue
        fields = line.split('\t')
        if len(fields) != len(COLUMNS):
            raise ValueError(f'Expected {len(COLUMNS)} tab-separated fields, got {len(fields)}: "{line}"')
        rows.append({'step': int(fields[0]), **{c: float(v) for (c, v) in zip(COLUMNS[1:], fields[1:])}})
    return rows


class TrainingLog(Callback):
    '''
    Callback which appends one tab-separated line per evaluation:
    step, train_ce, valid_ce, tokens_per_s. The file is truncated when training begins.

    :param file_path: str or `PathLike`, path of the log file.
    '''

    def __init__(self, file_path) -> None:
        super().__init__()
        self._file_path = Path(file_path)

    def on_train_begin(self, logs=None):
        self._file_path.parent.mkdir(parents=True, exist_ok=True)
        self._file_path.write_text('', encoding='utf-8')

    def on_evaluation_end(self, step, logs=None):
        with open(self._file_path, 'a', encoding='utf-8') as log_file:
            log_file.write(format_log_line(logs) + '\n')
