"""
Registry of path sources and parsing of path specifications such as ``omega-C-margin:C=2,seed=7``.
"""

from typing import Dict, Optional, Tuple, Type

import numpy as np
from more_itertools import nth

from ._PathSource import PathSource
from .PathClasses import AdversarialUpperCrossing, CycleRamp, OmegaCMargin, OmegaInftySpike, OmegaZero
from .Replay import ReplayFile
from .Stochastic import BernoulliSymmetric, UniformBounded
from ..exceptions import ConfigError
from ..protocol import PathEvent

PATH_SOURCES: Dict[str, Type[PathSource]] = {
    source.kind: source for source in (
        BernoulliSymmetric,
        UniformBounded,
        OmegaCMargin,
        OmegaZero,
        OmegaInftySpike,
        AdversarialUpperCrossing,
        CycleRamp,
        ReplayFile,
    )
}


def _parse_value(value: str):
    for convert in (int, float):
        try:
            return convert(value)
        except ValueError:
            pass
    return value


def parse_path_spec(spec: str) -> Tuple[str, dict]:
    """
    Splits ``kind:key=value,key=value`` into the kind and its keyword arguments. Numeric values are converted;
    a replay file may be given without key, e.g. ``replay-file:path.jsonl``.
    """
    kind, _, arguments = spec.strip().partition(':')
    if kind not in PATH_SOURCES:
        raise ValueError(f'unknown path source: {kind}')
    kwargs = {}
    for item in filter(None, (a.strip() for a in arguments.split(','))):
        key, sep, value = item.partition('=')
        if not sep:
            if kind == ReplayFile.kind and 'file' not in kwargs:
                kwargs['file'] = item
                continue
            raise ConfigError(f'malformed path argument "{item}" in "{spec}"')
        kwargs[key.strip()] = value.strip() if key.strip() in ('file', 'psi') else _parse_value(value.strip())
    return kind, kwargs


def make_path_source(spec: str, rng: Optional[np.random.Generator] = None) -> PathSource:
    """Instantiates a path source from its specification; a seed in the specification takes precedence over `rng`."""
    kind, kwargs = parse_path_spec(spec)
    if 'seed' not in kwargs:
        kwargs['rng'] = rng
    try:
        return PATH_SOURCES[kind](**kwargs)
    except TypeError as e:
        raise ConfigError(f'invalid arguments for path source {kind}: {e}') from e


def generate(source: PathSource, n: int) -> PathEvent:
    """Advances `source` to round `n` (counted from its current position, starting at 1) and returns that event."""
    assert n >= 1
    return nth(source, n - 1)
