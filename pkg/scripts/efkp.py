import argparse
import json
import logging
import subprocess  # noqa: S404
import sys
from glob import glob
from itertools import islice
from pathlib import Path
from typing import List, Optional

import numpy as np

from efkp.bounds import BoundReport, verify_all_bounds
from efkp.exceptions import EFKPError
from efkp.Experiment import ExperimentConfig, run_experiment
from efkp.reality.registry import make_path_source
from efkp.utils.class_functions import get_class_function, integral_I, sum_criterion
from efkp.utils.io import write_path_jsonl

EXPERIMENTS_FOLDER = Path(__file__).absolute().parent.parent / 'experiments'


def get_experiments() -> List[Path]:
    """Returns a list containing the absolute file paths of all experiment scripts."""
    return [Path(p) for p in sorted(glob(str(EXPERIMENTS_FOLDER / '*.py'))) if Path(p).name != '__init__.py']


def _add_run_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--horizon', type=int, default=1000, help='Rounds per game.')
    parser.add_argument('--path', default='bernoulli-symmetric', help='Path source, e.g. omega-C-margin:C=2.')
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--replications', type=int, default=1)
    parser.add_argument('--processes', type=int, default=1)
    parser.add_argument('--delta', type=float, default=0.01)
    parser.add_argument('--C', type=float, default=1.)
    parser.add_argument('--out', default=None, help='Output directory.')
    parser.add_argument('--check-bounds', action='store_true')
    parser.add_argument('--no-ledger', action='store_true', help='Keep only summaries of the games.')
    parser.add_argument('--strict', action='store_true',
                        help='Exit with status 1 if a strict bound is violated or a game fails.')


def _common_config(args: argparse.Namespace) -> dict:
    return {
        'horizon': args.horizon, 'path': args.path, 'seed': args.seed, 'replications': args.replications,
        'processes': args.processes, 'delta': args.delta, 'C': args.C, 'output_dir': args.out,
        'check_bounds': args.check_bounds, 'record_ledger': not args.no_ledger, 'strict': args.strict,
    }


def _run(config: ExperimentConfig, verbose: int) -> int:
    bundle = run_experiment(config, verbose=verbose)
    print(json.dumps(bundle.summary, indent=2, sort_keys=True))
    return bundle.exit_code


def _verify(directory: Path, logger: logging.Logger) -> int:
    files = sorted(directory.glob('bounds_*.csv'))
    if not files:
        logger.error(f'no bound files in {directory}')
        return 1
    report = BoundReport()
    for file in files:
        report.extend(BoundReport.from_csv(file))
    result = verify_all_bounds(report, logger)
    print(json.dumps(result, indent=2, sort_keys=True, default=float))
    return int(result['violations'] > 0)


def _class_fn(args: argparse.Namespace) -> int:
    psi = get_class_function(args.psi)
    output = {'psi': psi.name}
    if args.at:
        output['values'] = {str(lam): float(psi(lam)) for lam in args.at}
    if args.integral is not None:
        lo, hi = args.integral
        result = integral_I(psi, lo, hi)
        output['integral'] = {'value': result.value, 'error': result.error}
    if args.sum is not None:
        output['sum'] = sum_criterion(psi, *args.sum)
    print(json.dumps(output, indent=2))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point for the `efkp` command."""

    parser = argparse.ArgumentParser(prog='efkp')
    parser.add_argument('-v', '--verbose', action='count', default=1, help='Increase the verbosity (up to -vv).')
    subparsers = parser.add_subparsers(dest='command')

    validity_parser = subparsers.add_parser('validity-run', help='Plays the validity mixture.')
    validity_parser.add_argument('--psi', default='upper', help='upper or a CSV file with (lambda, psi) rows.')
    validity_parser.add_argument('--kmax', type=int, default=10 ** 4, help='Number of materialized accounts.')
    validity_parser.add_argument('--k-min', type=int, default=1,
                                 help='Certificate windows starting below k_min are tagged as expected-asymptotic.')
    _add_run_arguments(validity_parser)

    sharpness_parser = subparsers.add_parser('sharpness-run', help='Plays the dynamic sharpness strategy.')
    sharpness_parser.add_argument('--psi', default='lower', help='lower or a CSV file with (lambda, psi) rows.')
    sharpness_parser.add_argument('--beta', type=float, default=5., help='Schedule exponent of n_k = k^(beta k).')
    sharpness_parser.add_argument('--thresholds', type=float, nargs='+', default=None, metavar='N_K',
                                  help='Explicit cycle thresholds n_1 n_2 ... replacing the power schedule.')
    sharpness_parser.add_argument('--C-max', type=int, default=None,
                                  help='Mix the strategies for C = 1..C_max instead of using --C only.')
    sharpness_parser.add_argument('--D', type=float, default=None, help='Override of the scaling constant D.')
    sharpness_parser.add_argument('--reentry-mode', choices=['A', 'tau'], default='A')
    sharpness_parser.add_argument('--n-nodes', type=int, default=64)
    _add_run_arguments(sharpness_parser)

    verify_parser = subparsers.add_parser('verify', help='Re-evaluates the bound files of an output directory.')
    verify_parser.add_argument('directory', type=Path)

    path_parser = subparsers.add_parser('generate-path', help='Writes a generated path as JSON lines.')
    path_parser.add_argument('--path', required=True, help='Path source specification.')
    path_parser.add_argument('--horizon', type=int, required=True)
    path_parser.add_argument('--seed', type=int, default=None)
    path_parser.add_argument('--out', type=Path, required=True)

    fn_parser = subparsers.add_parser('class-fn', help='Evaluates a class function and its integral test.')
    fn_parser.add_argument('--psi', default='upper')
    fn_parser.add_argument('--at', type=float, nargs='*', default=[], help='Arguments lambda.')
    fn_parser.add_argument('--integral', type=float, nargs=2, default=None, metavar=('LO', 'HI'))
    fn_parser.add_argument('--sum', type=int, nargs=2, default=None, metavar=('K_LO', 'K_HI'))

    run_parser = subparsers.add_parser('run', help='Runs the experiment described by a configuration file.')
    run_parser.add_argument('config', type=Path)

    experiment_parser = subparsers.add_parser('experiment', help='Runs one of the bundled experiment scripts.')
    experiment_parser.add_argument('experiment_name', choices=[e.stem for e in get_experiments()])

    args = parser.parse_args(argv)
    verbose = min(args.verbose, 3)
    logging.basicConfig(level=[logging.ERROR, logging.WARNING, logging.INFO, logging.DEBUG][verbose],
                        format='%(asctime)s - %(levelname)s: %(message)s')
    logger = logging.getLogger('efkp')

    try:
        if args.command == 'validity-run':
            config = ExperimentConfig(strategy='validity', psi=args.psi, k_max=args.kmax, k_min=args.k_min,
                                      **_common_config(args))
            return _run(config, verbose)
        if args.command == 'sharpness-run':
            config = ExperimentConfig(
                strategy='sharpness' if args.C_max is None else 'sharpness-mixture', psi=args.psi, beta=args.beta,
                thresholds=args.thresholds, C_max=args.C_max or 1, D=args.D, reentry_mode=args.reentry_mode,
                n_nodes=args.n_nodes, **_common_config(args))
            return _run(config, verbose)
        if args.command == 'verify':
            return _verify(args.directory, logger)
        if args.command == 'generate-path':
            source = make_path_source(args.path, rng=np.random.default_rng(args.seed))
            n = write_path_jsonl(args.out, islice(source, args.horizon))
            logger.info(f'wrote {n} rounds to {args.out}')
            return 0
        if args.command == 'class-fn':
            return _class_fn(args)
        if args.command == 'run':
            return _run(ExperimentConfig.from_file(args.config), verbose)
        if args.command == 'experiment':
            experiment = [e for e in get_experiments() if e.stem == args.experiment_name][0]
            return subprocess.call([sys.executable, str(experiment)])  # noqa: S603
    except EFKPError as e:
        logger.error(f'{type(e).__name__}: {e}')
        return 1
    parser.print_help()
    return 0


if __name__ == '__main__':
    sys.exit(main())
