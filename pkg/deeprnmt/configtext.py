'''
Canonical config text: one `section.key = value` per line, `#` starts a
comment, blank lines are ignored. Values are integers, floats, `true`/`false`,
words, comma-separated integer lists, or `auto` for unset optional values.
'''
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, replace

from .errors import ConfigError


@dataclass(frozen=True)
class Key:
    '''
    :param name: Key as written in the text.
    :param path: Attribute path from the root config object.
    :param kind: `"int"`, `"float"`, `"bool"`, `"str"`, `"optional_int"` or `"int_list"`.
    '''
    name: str
    path: tuple[str, ...]
    kind: str

    def nested(self, *prefix: str) -> 'Key':
        return replace(self, path=prefix + self.path)


def parse_value(key: Key, raw: str):
    raw = raw.strip()
    try:
        if key.kind == 'int':
            return int(raw)
        if key.kind == 'float':
            return float(raw)
        if key.kind == 'bool':
            if raw.lower() not in ('true', 'false'):
                raise ValueError(raw)
            return raw.lower() == 'true'
        if key.kind == 'optional_int':
            return None if raw == 'auto' else int(raw)
        if key.kind == 'int_list':
            return () if raw == 'auto' else tuple(int(part) for part in raw.split(','))
        if not raw:
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ConfigError(f'Invalid value "{raw}" for {key.name} (expected {key.kind})') from None


def format_value(key: Key, value) -> str:
    if key.kind == 'bool':
        return 'true' if value else 'false'
    if key.kind == 'optional_int':
        return 'auto' if value is None else str(value)
    if key.kind == 'int_list':
        return ','.join(str(v) for v in value) if value else 'auto'
    if key.kind == 'float':
        return repr(float(value))
    return str(value)


def parse_lines(text: str, source: str = '<config>') -> dict[str, str]:
    '''
    Raw `key -> value` assignments of a config text; later lines win.
    '''
    assignments = {}
    for (number, line) in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f'{source}:{number}: expected "key = value", got "{line}"')
        (name, value) = (part.strip() for part in line.split('=', 1))
        assignments[name] = value
    return assignments


def parse_override(text: str) -> tuple[str, str]:
    if '=' not in text:
        raise ConfigError(f'Override "{text}" is not of the form key=value')
    (name, value) = (part.strip() for part in text.split('=', 1))
    return name, value


def _get(obj, path: Sequence[str]):
    for attr in path:
        obj = getattr(obj, attr)
    return obj


def _set(obj, path: Sequence[str], value):
    if len(path) == 1:
        return replace(obj, **{path[0]: value})
    return replace(obj, **{path[0]: _set(getattr(obj, path[0]), path[1:], value)})


def apply(obj, keys: Sequence[Key], assignments: Mapping[str, str]):
    '''
    Returns `obj` with every assignment applied. Unknown keys are rejected.
    '''
    by_name = {key.name: key for key in keys}
    for (name, raw) in assignments.items():
        if name not in by_name:
            raise ConfigError(f'Unknown config key "{name}"')
        key = by_name[name]
        obj = _set(obj, key.path, parse_value(key, raw))
    return obj


def to_text(obj, keys: Sequence[Key]) -> str:
    return ''.join(f'{key.name} = {format_value(key, _get(obj, key.path))}\n' for key in keys)
