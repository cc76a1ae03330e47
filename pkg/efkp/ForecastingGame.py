"""
Simplified predictably unbounded forecasting game

In every round, Forecaster announces a bound c_n >= 0, Skeptic announces a bet M_n, Reality announces
x_n in [-c_n, c_n] and Skeptic's capital becomes K_n = K_{n-1} + M_n x_n. The engine referees the protocol and the
collateral duty (K_n >= 0) independently of the strategy that is played.
"""

import logging
from dataclasses import dataclass, field
from itertools import islice
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Union

import numpy as np

from .bounds import BoundReport, verify_all_bounds
from .exceptions import CollateralViolation
from .protocol import GameState, PathEvent
from .skeptics._Skeptic import Skeptic
from .utils.io import write_rows_csv

LEDGER_FIELDS = ('n', 'c', 'M', 'x', 'S', 'A2', 'capital', 'log_capital')


@dataclass
class Trajectory:
    """
    Result of a game.

    Attributes
    ----------
    states : List[GameState]
        The initial state followed by the state after every round (only the initial and the final state if the
        ledger was switched off).
    ledger : List[tuple]
        One row (n, c, M, x, S, A2, capital, log_capital) per round, empty if the ledger was switched off.
    bounds : BoundReport
        Bound records collected along the game.
    summary : dict
        Summary statistics that are kept regardless of the ledger setting.
    """
    states: List[GameState]
    ledger: List[tuple] = field(default_factory=list)
    bounds: BoundReport = field(default_factory=BoundReport)
    summary: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def initial(self) -> GameState:
        return self.states[0]

    @property
    def final(self) -> GameState:
        return self.states[-1]

    def forced_ratio(self) -> float:
        """Final capital divided by initial capital."""
        return float(np.exp(self.final.log_capital - self.initial.log_capital))

    def replay_capital(self) -> float:
        """Final capital recomputed from the ledger through K_n = K_{n-1} + M_n x_n."""
        capital = self.initial.capital
        for row in self.ledger:
            capital += row[2] * row[3]
        return capital

    def to_csv(self, path: Union[str, Path]):
        write_rows_csv(path, LEDGER_FIELDS, (dict(zip(LEDGER_FIELDS, row)) for row in self.ledger))


class ForecastingGame:
    r"""
    Referee of the forecasting protocol for a single Skeptic.

    Parameters
    ----------
    skeptic : Skeptic
        Skeptic's strategy.
    record_ledger : bool, default = True
        If False, only summary statistics are kept, which bounds the memory of long games.
    check_bounds : bool, default = False
        If True, the bound records the strategy offers are collected after every round.
    tolerance : float, default = 1e-12
        Largest tolerated negative capital, relative to the previous capital, before a
        :class:`~efkp.exceptions.CollateralViolation` is raised.
    logger : logging.Logger, default = None
        Logger instance used for intermediate output. If None, an internal logger instance will be created.
    verbose : {0, 1, 2, 3}, default = 0
        Verbosity level.
    """
    def __init__(
            self,
            skeptic: Skeptic,
            record_ledger: bool = True,
            check_bounds: bool = False,
            tolerance: float = 1e-12,
            logger: logging.Logger = None,
            verbose: int = 0,
    ):
        self.skeptic = skeptic
        self.record_ledger = record_ledger
        self.check_bounds = check_bounds
        self.tolerance = tolerance

        self._logger = logger if logger is not None else logging.getLogger(self.__class__.__name__)
        self._logger.setLevel([logging.ERROR, logging.WARNING, logging.INFO, logging.DEBUG][verbose])

        self.initial_state = GameState(log_capital=skeptic.log_capital)
        self.state = self.initial_state
        self._states = [self.initial_state]
        self._ledger = []
        self.bounds = BoundReport()
        self.max_log_capital = self.state.log_capital
        self.min_log_capital = self.state.log_capital
        self.max_accounting_error = 0.

    def play_round(self, event: PathEvent) -> GameState:
        """
        Plays one round: Skeptic bets on the announced bound, then Reality's move settles the bet.

        Raises
        ------
        ProtocolViolation
            If the event is not a legal move, i.e. c < 0 or |x| > c.
        CollateralViolation
            If the bet would leave Skeptic with negative capital.
        """
        event = PathEvent(float(event[0]), float(event[1]))
        event.validate()
        before = self.state

        fraction = self.skeptic.fraction(before, event.c)
        growth = fraction * event.x
        if not np.isfinite(growth) or growth < -1. - self.tolerance:
            raise CollateralViolation(f'round {before.n + 1}: bet fraction {fraction} and x={event.x} leave '
                                      f'capital {1. + growth} times the previous capital')
        expected = before.log_capital + (np.log1p(growth) if growth > -1. else -np.inf)

        self.skeptic.observe(event, before.advance(event, expected))
        actual = self.skeptic.log_capital
        if np.isfinite(actual) and np.isfinite(expected):
            error = abs(np.expm1(actual - expected))
            if error > self.max_accounting_error:
                self.max_accounting_error = error
                if error > 1e-10:
                    self._logger.warning(f'round {before.n + 1}: capital deviates from K + M x by {error:.3g}')
        self.state = before.advance(event, actual)

        self.max_log_capital = max(self.max_log_capital, actual)
        self.min_log_capital = min(self.min_log_capital, actual)
        if self.record_ledger:
            self._states.append(self.state)
            bet = fraction * np.exp(before.log_capital)
            self._ledger.append((self.state.n, event.c, bet, event.x, self.state.S, self.state.A2,
                                 self.state.capital, actual))
        if self.check_bounds:
            self.bounds.extend(self.skeptic.bound_records(self.state))
        self._logger.debug(f'round {self.state.n}: c={event.c}, f={fraction}, x={event.x}, log K={actual}')
        return self.state

    def run(
            self,
            path_source: Iterable,
            horizon: int,
            progress_callback: Callable[['ForecastingGame', int], bool] = None,
    ) -> Trajectory:
        r"""
        Plays up to `horizon` rounds with moves drawn from `path_source`.

        Parameters
        ----------
        path_source : Iterable
            Iterable of (c, x) moves, e.g. a :class:`~efkp.reality._PathSource.PathSource`.
        horizon : int
            Number of rounds.
        progress_callback : Callable[['ForecastingGame', int], bool], default = None
            If provided, this function will be called after every round with the game instance and the round
            index. If it returns False, the game is stopped.
        """
        assert horizon >= 0
        for event in islice(path_source, horizon):
            self.play_round(event)
            if progress_callback is not None and progress_callback(self, self.state.n) is False:
                self._logger.info(f'game stopped by callback at round {self.state.n}')
                break
        return self.trajectory()

    def trajectory(self) -> Trajectory:
        states = self._states if self.record_ledger else [self.initial_state, self.state]
        if len(states) == 2 and states[-1] is states[0]:
            states = states[:1]
        return Trajectory(states=list(states), ledger=list(self._ledger), bounds=self.bounds, summary=self.summary())

    def summary(self) -> dict:
        final = self.state
        summary = {
            'rounds': final.n,
            'S': final.S,
            'A2': final.A2,
            'cbar': final.cbar,
            'log_capital': final.log_capital,
            'capital': final.capital,
            'initial_capital': self.initial_state.capital,
            'log_forced_ratio': final.log_capital - self.initial_state.log_capital,
            'max_log_capital': self.max_log_capital,
            'min_log_capital': self.min_log_capital,
            'max_accounting_error': self.max_accounting_error,
        }
        if self.check_bounds:
            summary['bound_checks'] = verify_all_bounds(self.bounds, self._logger)
        return summary


def play_round(game: ForecastingGame, event: PathEvent) -> GameState:
    return game.play_round(event)


def run_game(
        skeptic: Skeptic,
        path_source: Iterable,
        horizon: int,
        progress_callback: Optional[Callable[[ForecastingGame, int], bool]] = None,
        **kwargs,
) -> Trajectory:
    """Plays a fresh game of `horizon` rounds; keyword arguments are handed to :class:`ForecastingGame`."""
    return ForecastingGame(skeptic, **kwargs).run(path_source, horizon, progress_callback)
