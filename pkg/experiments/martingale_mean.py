"""
Confirms that the validity mixture preserves its initial capital in expectation, first exactly by enumerating all
symmetric coin-tossing paths of a short horizon, then by Monte Carlo under the symmetric Bernoulli path for a sweep
of horizons: the mean final capital has to lie within three standard errors of 1.

The full-size sweep point is described by martingale_mean.ini next to this script and is run with

    efkp run experiments/martingale_mean.ini
"""

import logging
from itertools import product

import numpy as np

from efkp.bounds import BoundParams
from efkp.Experiment import ExperimentConfig, run_experiment
from efkp.ForecastingGame import run_game
from efkp.skeptics.Validity import ValidityMixture
from efkp.utils.class_functions import ClassFunction, build_blocking_weights

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s: %(message)s')
logger = logging.getLogger('martingale_mean')

N, c = 10, 0.01
psi = ClassFunction.upper()
weights = build_blocking_weights(psi, 500)

capitals = []
for signs in product((-1., 1.), repeat=N):
    skeptic = ValidityMixture(psi, params=BoundParams(alpha=1.), weights=weights)
    trajectory = run_game(skeptic, [(c, s * c) for s in signs], N, record_ledger=False)
    capitals.append(trajectory.final.capital)

mean = float(np.mean(capitals))
logger.info(f'mean final capital over all {len(capitals)} paths: {mean:.15f}')
assert abs(mean - 1.) < 1e-12

for horizon, replications in ((100, 500), (1000, 100), (5000, 20)):
    config = ExperimentConfig(strategy='validity', path='bernoulli-symmetric', horizon=horizon,
                              replications=replications, k_max=200, record_ledger=False)
    summary = run_experiment(config).summary
    deviation = summary['mean_capital'] - 1.
    logger.info(f'N = {horizon}: mean {summary["mean_capital"]:.6f} +- {summary["stderr_capital"]:.2g} '
                f'over {replications} paths')
    assert abs(deviation) <= 3 * summary['stderr_capital']
