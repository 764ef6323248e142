import logging
import os
import sys

from tqdm import tqdm

from .errors import ConfigError


LOG_ENV_VAR = 'DEEP_RNMT_LOG'

_LEVELS = {
    'error': logging.ERROR,
    'info': logging.INFO,
    'debug': logging.DEBUG,
    }


class TqdmLoggingHandler(logging.Handler):
    '''
    Logging handler that writes to stderr through `tqdm.write`, so messages don't break
    an active progress bar and stay out of command output.
    '''

    def emit(self, record: logging.LogRecord) -> None:
        try:
            tqdm.write(self.format(record), file=sys.stderr)
            self.flush()
        except Exception:
            self.handleError(record)


def resolve_level(level: str | None = None) -> int:
    '''
    Resolves a textual log level. When `level` is `None`, the environment
    variable `DEEP_RNMT_LOG` is consulted, falling back to `"info"`.

    :param level: One of `{"error", "info", "debug"}` or `None`.
    :return: Numeric logging level.
    '''
    if level is None:
        level = os.environ.get(LOG_ENV_VAR, 'info')
    key = level.strip().lower()
    if key not in _LEVELS:
        raise ConfigError(f'{LOG_ENV_VAR} must be one of {sorted(_LEVELS)}, got "{level}"')
    return _LEVELS[key]


def configure_logging(level: str | None = None) -> logging.Logger:
    '''
    Installs the tqdm-aware handler on the package logger. Calling it again
    only updates the level.

    :param level: See `resolve_level`.
    :return: The `deeprnmt` logger.
    '''
    logger = logging.getLogger('deeprnmt')
    logger.setLevel(resolve_level(level))
    if not any(isinstance(h, TqdmLoggingHandler) for h in logger.handlers):
        handler = TqdmLoggingHandler()
        handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s %(name)s: %(message)s'))
        logger.addHandler(handler)
    logger.propagate = False
    return logger
