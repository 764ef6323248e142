import os

_ROLES = {
    'value': '\033[38;5;092m{text}\033[0m',
    'warning': '\033[38;5;208m{text}\033[0m',
    }


def colors_enabled(stream) -> bool:
    '''
    ANSI colors only go to interactive terminals, and never when `NO_COLOR` is set.
    '''
    if os.environ.get('NO_COLOR'):
        return False
    isatty = getattr(stream, 'isatty', None)
    return bool(isatty and isatty())


def paint(text: str, role: str, enabled: bool = True) -> str:
    assert role in _ROLES
    if not enabled:
        return text
    return _ROLES[role].format(text=text)
