"""
Plays the validity mixture against a path that keeps S_n above A_n psi(A_n^2) and evaluates the lower-bound chain
at every hitting round. With the bound capped at delta, the windows starting at k >= 3 contain open accounts only,
so every inequality of the chain holds there; the smaller windows are reported as expected-asymptotic.

The full-size run is

    efkp validity-run --path adversarial-upper-crossing:cap=0.1 --delta 0.1 --kmax 10000 --k-min 3 \
        --horizon 1000000 --check-bounds --no-ledger --strict --out results/certificate
"""

import logging

import numpy as np

from efkp.bounds import EXPECTED_ASYMPTOTIC, BoundParams, verify_all_bounds
from efkp.ForecastingGame import ForecastingGame
from efkp.reality.PathClasses import AdversarialUpperCrossing
from efkp.skeptics.Validity import ValidityMixture

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s: %(message)s')
logger = logging.getLogger('validity_certificate')

params = BoundParams(delta=0.1, C=1., alpha=1.)
skeptic = ValidityMixture('upper', k_max=400, params=params, k_min=3, verbose=2)
game = ForecastingGame(skeptic, record_ledger=False, check_bounds=True, verbose=1)
trajectory = game.run(AdversarialUpperCrossing(C=1., cap=0.1, psi='upper'), 20000)

checks = verify_all_bounds(trajectory)
for bound_id, entry in sorted(checks['bounds'].items()):
    logger.info(f'{bound_id}: {entry}')

final = [r.lhs for r in trajectory.bounds.select('final')]
late = [r for r in trajectory.bounds.select('final') if r.case_id != EXPECTED_ASYMPTOTIC]
logger.info(f'{len(final)} hitting rounds with materialized window, {len(late)} of them with k >= {skeptic.k_min}, '
            f'final capital {trajectory.final.capital:.6g}')
assert late
assert checks['non_strict_violations'] == 0
assert np.all(np.diff(final) >= -1e-12)
