"""
Plays the dynamic sharpness strategy on the beta = 2 schedule along a path that keeps the bound below the freezing
threshold of the open w-accounts until their mixtures have decayed, and prints the cycle ledger. Every completed
cycle with accounts realizes at least its claimed growth factor.

On the margin paths of Omega_C every account of a reachable cycle freezes in its first round; the second run shows
the resulting ledger, in which the claims are reported as missed.
"""

import logging

from efkp.bounds import BoundParams
from efkp.ForecastingGame import ForecastingGame
from efkp.reality.PathClasses import CycleRamp, OmegaCMargin
from efkp.skeptics.Sharpness import DynamicStrategy
from efkp.stopping_times import CycleSchedule

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s: %(message)s')
logger = logging.getLogger('sharpness_cycles')

schedule = CycleSchedule(beta=2.)
skeptic = DynamicStrategy(BoundParams(delta=0.5, C=20., D_override=1.), 'lower', schedule, n_nodes=16, verbose=2)
game = ForecastingGame(skeptic, record_ledger=False, check_bounds=True)
trajectory = game.run(CycleRamp(delta=0.5, schedule=schedule), 2400)

for record in skeptic.cycle_ledger():
    logger.info(record)
growth = trajectory.bounds.select('cycle-growth')
logger.info(f'final capital {trajectory.final.capital:.6g}, A^2 = {trajectory.final.A2:.4g}, '
            f'{len(growth)} completed betting cycles')
assert len(growth) >= 5
assert not any(r.violated for r in growth)
assert all(r.y_start == skeptic.alpha for r in skeptic.ledger)

frozen = DynamicStrategy(BoundParams(C=2., D_override=10.), 'lower', schedule, n_nodes=16)
trajectory = ForecastingGame(frozen, record_ledger=False, check_bounds=True).run(OmegaCMargin(C=2., seed=7), 3000)
missed = [r for r in trajectory.bounds.select('cycle-growth') if r.violated]
logger.info(f'margin path: {len(frozen.ledger)} cycles, {len(missed)} growth claims missed, '
            f'final capital {trajectory.final.capital:.6g}')
assert trajectory.final.capital > 0
