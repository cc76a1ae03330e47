"""
File formats: JSON-lines path files, CSV tables with round-trip float precision and JSON summaries.
"""

import csv
import json
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

FLOAT_FORMAT = '.17g'


def _format(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if value is None:
        return ''
    return str(value)


def write_rows_csv(path: Union[str, Path], fieldnames: Sequence[str], rows: Iterable[Mapping]):
    """Writes dict-like rows with 17 significant digits per float, so that doubles survive the round trip."""
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_format(row[name]) for name in fieldnames])


def read_rows_csv(path: Union[str, Path]) -> list:
    with open(path, newline='') as f:
        return list(csv.DictReader(f))


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f'{type(obj).__name__} is not JSON serializable')


def write_json(path: Union[str, Path], obj):
    with open(path, 'w') as f:
        json.dump(obj, f, indent=2, sort_keys=True, default=_json_default)
        f.write('\n')


def write_path_jsonl(path: Union[str, Path], events: Iterable) -> int:
    """Writes (c, x) events as one JSON object per line and returns the number of rounds written."""
    n = 0
    with open(path, 'w') as f:
        for c, x in events:
            f.write(json.dumps({'c': float(c), 'x': float(x)}) + '\n')
            n += 1
    return n


def iter_path_jsonl(path: Union[str, Path]) -> Iterator[tuple]:
    """Yields the (c, x) pairs of a JSON-lines path file, skipping blank lines."""
    with open(path) as f:
        for line in f:
            if line.strip():
                record = json.loads(line)
                yield float(record['c']), float(record['x'])
