"""
Numerical evidence for the integral test: block integrals of the upper-class function shrink geometrically on
doubly-logarithmic blocks while those of the lower-class function stay bounded below, and the change of time scale
to the cycle index preserves the integral up to a factor of two.
"""

import logging

import numpy as np

from efkp.skeptics.Sharpness import timescale_equivalence_check
from efkp.utils.class_functions import ClassFunction, integral_I_loglog, sum_criterion

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s: %(message)s')
logger = logging.getLogger('class_function_criteria')

for psi in (ClassFunction.upper(), ClassFunction.lower()):
    blocks = []
    for V in (10., 20., 40., 80.):
        blocks.append(integral_I_loglog(psi, V, 2 * V).value)
    logger.info(f'{psi.name}: block integrals {np.array2string(np.array(blocks), precision=4)}')
    logger.info(f'{psi.name}: discretized sum over k in [16, 10^5] = {sum_criterion(psi, 16, 10 ** 5):.6g}')

    report = timescale_equivalence_check(psi, 10, 100)
    for record in report:
        logger.info(f'{psi.name}: time scale {record.case_id}: {record.lhs:.6g} <= {record.rhs:.6g}')
    assert not report.violations(strict_only=False)
