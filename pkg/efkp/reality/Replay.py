"""
Replay of recorded paths from JSON-lines files.
"""

from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from ._PathSource import PathSource
from ..exceptions import PathExhaustedError
from ..utils.io import iter_path_jsonl


class ReplayFile(PathSource):
    """Emits the rounds stored in a JSON-lines file with one {"c": ..., "x": ...} object per line."""
    kind = 'replay-file'

    def __init__(self, file: Union[str, Path], seed: Optional[int] = None, rng: Optional[np.random.Generator] = None):
        super().__init__(seed, rng)
        self.file = Path(file)
        self._events = iter_path_jsonl(self.file)

    def _next(self) -> Tuple[float, float]:
        try:
            return next(self._events)
        except StopIteration:
            raise PathExhaustedError(f'{self.file} holds only {self.stats.n} rounds') from None

    def params(self) -> dict:
        return {'file': str(self.file)}
