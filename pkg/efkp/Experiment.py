"""
Experiment orchestration: configuration, replicated games and export of their results.
"""

import configparser
import logging
import os
from dataclasses import asdict, dataclass, field, fields
from functools import partial
from multiprocessing import Pool
from pathlib import Path
from typing import List, Optional, Tuple, Union, get_args, get_origin, get_type_hints

import numpy as np
from more_itertools import chunked

from .bounds import ALPHA, BoundParams
from .exceptions import CollateralViolation, ConfigError, PathExhaustedError, ProtocolViolation
from .ForecastingGame import ForecastingGame
from .reality.registry import make_path_source, parse_path_spec
from .skeptics.Basic import ConstantProportionSkeptic, MixtureSkeptic
from .skeptics.Sharpness import CYCLE_FIELDS, DynamicStrategy, outer_c_mixture, REENTRY_MODES
from .skeptics.Validity import ValidityMixture
from .skeptics._Skeptic import Skeptic
from .stopping_times import CycleSchedule
from .utils.class_functions import MixtureWeights, build_blocking_weights, get_class_function
from .utils.io import write_json, write_rows_csv

OUTPUT_ROOT_VARIABLE = 'EFKP_OUTPUT_ROOT'

STRATEGIES = ('validity', 'sharpness', 'sharpness-mixture', 'constant')

CONFIG_SECTION = 'experiment'

# exceptions that end a single replication without ending the experiment
GAME_ERRORS = (ProtocolViolation, CollateralViolation, PathExhaustedError)


@dataclass
class ExperimentConfig:
    """
    Serializable description of an experiment.

    Attributes
    ----------
    strategy : {'validity', 'sharpness', 'sharpness-mixture', 'constant'}
        Skeptic's strategy: the validity mixture, the dynamic strategy for a single C, its mixture over
        C = 1..C_max or a single constant-proportion account with proportion `gamma`.
    path : str
        Path source specification, e.g. 'omega-C-margin:C=2'.
    horizon : int
        Rounds per game.
    replications : int
        Number of games; replication i draws its path from the generator seeded with (seed, i).
    record_ledger : bool
        Whether per-round trajectories are written.
    check_bounds : bool
        Whether bound records are collected and written.
    processes : int
        Number of worker processes.
    thresholds : tuple of float, optional
        Explicit cycle thresholds n_1, n_2, ... of the sharpness strategies, replacing n_k = k^(beta k). In INI
        files they are written as a comma-separated list.
    k_min : int
        Smallest certificate window start k at which the validity certificate is expected to hold; records of
        smaller windows are tagged as expected-asymptotic.
    strict : bool
        Whether violations of strict bounds and game errors are reflected in the exit status.
    """
    strategy: str = 'validity'
    path: str = 'bernoulli-symmetric'
    horizon: int = 1000
    replications: int = 1
    seed: int = 0
    psi: str = 'upper'
    beta: float = 5.
    thresholds: Optional[Tuple[float, ...]] = None
    C: float = 1.
    C_max: int = 8
    k_max: int = 10 ** 4
    k_norm: Optional[int] = None
    k_min: int = 1
    gamma: float = 0.
    delta: float = 0.01
    D: Optional[float] = None
    reentry_mode: str = 'A'
    n_nodes: int = 64
    output_dir: Optional[str] = None
    record_ledger: bool = True
    check_bounds: bool = False
    processes: int = 1
    strict: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f'unknown strategy: {self.strategy}')
        if self.reentry_mode not in REENTRY_MODES:
            raise ConfigError(f'unknown re-entry mode: {self.reentry_mode}')
        if self.horizon < 0 or self.replications < 1 or self.processes < 1:
            raise ConfigError('horizon must be non-negative, replications and processes positive')
        if not 0 < self.delta < 1:
            raise ConfigError(f'delta must lie in (0, 1), got {self.delta}')
        if self.k_max < 1 or self.k_min < 1 or self.C_max < 1 or self.C <= 0 or self.gamma < 0 or self.beta <= 0:
            raise ConfigError('k_max, k_min, C_max, C and beta must be positive and gamma non-negative')
        if self.thresholds is not None:
            self.thresholds = tuple(float(t) for t in self.thresholds)
            if not self.thresholds:
                raise ConfigError('thresholds must not be empty')
            try:
                CycleSchedule(self.beta, self.thresholds)
            except ValueError as e:
                raise ConfigError(str(e)) from e
        if self.D is not None and self.D <= 0:
            raise ConfigError(f'D must be positive, got {self.D}')
        try:
            parse_path_spec(self.path)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> 'ExperimentConfig':
        """Reads the [experiment] section of an INI file; missing keys keep their defaults."""
        parser = configparser.ConfigParser()
        parser.optionxform = str
        if not parser.read(path):
            raise ConfigError(f'cannot read configuration file {path}')
        if not parser.has_section(CONFIG_SECTION):
            raise ConfigError(f'{path} has no [{CONFIG_SECTION}] section')
        return cls.from_dict(dict(parser[CONFIG_SECTION]))

    @classmethod
    def from_dict(cls, values: dict) -> 'ExperimentConfig':
        """Builds a configuration from string (or already typed) values."""
        hints = get_type_hints(cls)
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f'unknown configuration keys: {sorted(unknown)}')
        kwargs = {}
        for name, raw in values.items():
            kwargs[name] = _convert(name, raw, hints[name])
        return cls(**kwargs)

    def to_file(self, path: Union[str, Path]):
        parser = configparser.ConfigParser()
        parser.optionxform = str
        parser[CONFIG_SECTION] = {k: _format(v) for k, v in asdict(self).items()}
        with open(path, 'w') as f:
            parser.write(f)

    @property
    def alpha(self) -> float:
        return ALPHA if self.strategy.startswith('sharpness') else 1.

    @property
    def params(self) -> BoundParams:
        return BoundParams(delta=self.delta, C=self.C, alpha=self.alpha, D_override=self.D)

    def resolve_output_dir(self) -> Optional[Path]:
        """The output directory, relative to $EFKP_OUTPUT_ROOT if that is set; None if no output is requested."""
        root = os.environ.get(OUTPUT_ROOT_VARIABLE)
        if self.output_dir is None:
            if root is None:
                return None
            return Path(root) / f'{self.strategy}-{parse_path_spec(self.path)[0]}-{self.seed}'
        output = Path(self.output_dir)
        return Path(root) / output if root is not None and not output.is_absolute() else output

    def make_weights(self) -> Optional[MixtureWeights]:
        if self.strategy != 'validity':
            return None
        return build_blocking_weights(get_class_function(self.psi, clip=True), self.k_max, self.k_norm)

    def make_skeptic(self, weights: Optional[MixtureWeights] = None, logger: logging.Logger = None,
                     verbose: int = 0) -> Skeptic:
        if self.strategy == 'constant':
            return ConstantProportionSkeptic(self.gamma, 1., self.delta, logger=logger, verbose=verbose)
        psi = get_class_function(self.psi, clip=self.strategy == 'validity')
        if self.strategy == 'validity':
            weights = self.make_weights() if weights is None else weights
            return ValidityMixture(psi, self.k_max, self.params, weights=weights, k_min=self.k_min, logger=logger,
                                   verbose=verbose)
        schedule = CycleSchedule(self.beta, self.thresholds)
        if self.strategy == 'sharpness':
            return DynamicStrategy(self.params, psi, schedule, self.reentry_mode, self.n_nodes, logger, verbose)
        return outer_c_mixture(self.params, psi, schedule, self.C_max, reentry_mode=self.reentry_mode,
                               n_nodes=self.n_nodes, logger=logger, verbose=verbose)


def _format(value) -> str:
    if value is None:
        return ''
    if isinstance(value, (list, tuple)):
        return ', '.join(repr(float(v)) for v in value)
    return str(value)


def _convert(name: str, raw, hint):
    if not isinstance(raw, str):
        return raw
    options = [t for t in get_args(hint) if t is not type(None)] or [hint]
    target = options[0]
    if raw.strip().lower() in ('', 'none') and len(options) < len(get_args(hint)):
        return None
    try:
        if get_origin(target) in (list, tuple):
            return tuple(float(item) for item in raw.strip('[]() ').split(',') if item.strip())
        if target is bool:
            if raw.strip().lower() not in configparser.ConfigParser.BOOLEAN_STATES:
                raise ValueError(raw)
            return configparser.ConfigParser.BOOLEAN_STATES[raw.strip().lower()]
        if target is int:
            return int(float(raw)) if 'e' in raw.lower() else int(raw)
        return target(raw.strip())
    except ValueError as e:
        raise ConfigError(f'invalid value for {name}: {raw!r}') from e


@dataclass
class ResultBundle:
    """Per-replication summaries and their aggregate; `output_dir` is None if nothing was written."""
    config: ExperimentConfig
    replications: List[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    output_dir: Optional[Path] = None

    @property
    def violations(self) -> int:
        return self.summary.get('violations', 0)

    @property
    def errors(self) -> int:
        return self.summary.get('errors', 0)

    @property
    def exit_code(self) -> int:
        """Nonzero iff the experiment is strict and recorded a strict violation or a game error."""
        return int(self.config.strict and (self.violations > 0 or self.errors > 0))


def _replication_files(output_dir: Path, index: int) -> dict:
    return {
        'trajectory': output_dir / f'trajectory_{index:05d}.csv',
        'bounds': output_dir / f'bounds_{index:05d}.csv',
        'cycles': output_dir / f'cycles_{index:05d}.csv',
    }


def _cycle_ledgers(skeptic: Skeptic) -> List[DynamicStrategy]:
    if isinstance(skeptic, DynamicStrategy):
        return [skeptic]
    if isinstance(skeptic, MixtureSkeptic):
        return [s for s in skeptic.skeptics if isinstance(s, DynamicStrategy)]
    return []


def run_replication(
        config: ExperimentConfig,
        index: int,
        weights: Optional[MixtureWeights] = None,
        output_dir: Optional[Path] = None,
) -> dict:
    """
    Plays replication `index` of the experiment and writes its files to `output_dir`, if given.

    Games that end with a protocol violation, a collateral violation or an exhausted replay file are reported
    under 'error' rather than raised.
    """
    logger = logging.getLogger(f'replication-{index}')
    rng = np.random.default_rng([config.seed, index])
    skeptic = config.make_skeptic(weights)
    game = ForecastingGame(skeptic, record_ledger=config.record_ledger, check_bounds=config.check_bounds)
    result = {'index': index, 'error': ''}
    try:
        game.run(make_path_source(config.path, rng=rng), config.horizon)
    except GAME_ERRORS as e:
        logger.error(f'game ended in round {game.state.n + 1}: {type(e).__name__}: {e}')
        result['error'] = f'{type(e).__name__}: {e}'
    trajectory = game.trajectory()
    summary = trajectory.summary
    checks = summary.pop('bound_checks', None)
    result.update(summary)
    result['violations'] = checks['violations'] if checks else 0
    result['non_strict_violations'] = checks['non_strict_violations'] if checks else 0

    strategies = _cycle_ledgers(skeptic)
    result['cycles'] = sum(len(s.ledger) for s in strategies)
    result['cycles_advanced'] = sum(r.outcome == 'advanced' for s in strategies for r in s.ledger)

    if output_dir is not None:
        files = _replication_files(output_dir, index)
        if config.record_ledger:
            trajectory.to_csv(files['trajectory'])
        if config.check_bounds:
            trajectory.bounds.to_csv(files['bounds'])
        if strategies:
            rows = [dict(r.as_row(), C=s.params.C) for s in strategies for r in s.cycle_ledger()]
            write_rows_csv(files['cycles'], ('C',) + CYCLE_FIELDS, rows)
    return result


def _aggregate(results: List[dict], alpha: float) -> dict:
    capitals = np.array([r['capital'] for r in results])
    n = len(capitals)
    std = float(np.std(capitals, ddof=1)) if n > 1 else 0.
    return {
        'replications': n,
        'initial_capital': alpha,
        'mean_capital': float(np.mean(capitals)),
        'std_capital': std,
        'stderr_capital': std / np.sqrt(n),
        'min_capital': float(np.min(capitals)),
        'max_log_capital': float(np.max([r['max_log_capital'] for r in results])),
        'max_accounting_error': float(np.max([r['max_accounting_error'] for r in results])),
        'violations': int(sum(r['violations'] for r in results)),
        'non_strict_violations': int(sum(r['non_strict_violations'] for r in results)),
        'errors': int(sum(bool(r['error']) for r in results)),
        'cycles_advanced': int(sum(r['cycles_advanced'] for r in results)),
    }


def run_experiment(config: ExperimentConfig, logger: logging.Logger = None, verbose: int = 0) -> ResultBundle:
    """
    Runs all replications, in parallel if `config.processes` > 1, and writes replications.csv, summary.json and a
    copy of the configuration next to the per-replication files.
    """
    logger = logger if logger is not None else logging.getLogger('run_experiment')
    logger.setLevel([logging.ERROR, logging.WARNING, logging.INFO, logging.DEBUG][verbose])

    output_dir = config.resolve_output_dir()
    if output_dir is not None:
        output_dir.mkdir(parents=True, exist_ok=True)
        config.to_file(output_dir / 'config.ini')
    weights = config.make_weights()
    worker = partial(run_replication, config, weights=weights, output_dir=output_dir)

    results: List[dict] = []
    logger.info(f'running {config.replications} replications of {config.strategy} on {config.path}')
    if config.processes > 1:
        with Pool(config.processes) as pool:
            for batch in chunked(range(config.replications), 8 * config.processes):
                results.extend(pool.map(worker, batch))
                logger.info(f'{len(results)}/{config.replications} replications done')
    else:
        for index in range(config.replications):
            results.append(worker(index))

    bundle = ResultBundle(config, results, _aggregate(results, config.alpha), output_dir)
    for key, value in bundle.summary.items():
        logger.info(f'{key}: {value}')
    if output_dir is not None:
        write_rows_csv(output_dir / 'replications.csv', list(results[0]), results)
        write_json(output_dir / 'summary.json', dict(bundle.summary, config=asdict(config)))
    return bundle
