"""
Test the path sources, the parsing of path specifications, the replay of recorded paths and the post-hoc
classification into the path classes.
"""

import logging
from itertools import islice

import numpy as np
import pytest

from efkp.exceptions import ConfigError, PathExhaustedError
from efkp.reality.classify import classify_path
from efkp.reality.PathClasses import AdversarialUpperCrossing, CycleRamp, OmegaCMargin, OmegaInftySpike, \
    OmegaZero
from efkp.reality.registry import PATH_SOURCES, generate, make_path_source, parse_path_spec
from efkp.reality.Replay import ReplayFile
from efkp.reality.Stochastic import BernoulliSymmetric
from efkp.stopping_times import CycleSchedule
from efkp.utils.class_functions import ClassFunction
from efkp.utils.io import write_path_jsonl

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s: %(message)s')


def draw(source, n: int):
    c, x = zip(*islice(source, n))
    return np.array(c), np.array(x)


@pytest.mark.parametrize('kind', [k for k in PATH_SOURCES if k != 'replay-file'])
def test_sources_are_legal_and_reproducible(kind: str):
    c1, x1 = draw(make_path_source(kind, rng=np.random.default_rng(5)), 300)
    c2, x2 = draw(make_path_source(kind, rng=np.random.default_rng(5)), 300)
    assert np.all(c1 >= 0)
    assert np.all(np.abs(x1) <= c1)
    assert np.array_equal(c1, c2) and np.array_equal(x1, x2)


def test_bernoulli():
    source = BernoulliSymmetric(seed=0)
    c, x = draw(source, 1000)
    assert np.all(c == 1.)
    assert set(np.unique(x)) == {-1., 1.}
    assert source.stats.A2 == 1000.


def test_omega_zero_bounded():
    source = OmegaZero(c0=1., ratio=0.5, seed=1)
    draw(source, 200)
    assert source.stats.A2 <= 1. / 3. + 1e-12


def test_omega_C_margin():
    source = OmegaCMargin(C=2., margin=0.1, seed=7)
    c, x = draw(source, 500)
    result = classify_path(c, x, 'lower', C=2., margin=0.1, warmup=16)
    assert result.omega_C
    assert result.max_statistic <= 1.8 * (1 + 1e-9)
    assert not result.omega_0
    # the statistic is not bounded by a smaller constant
    assert not classify_path(c, x, 'lower', C=1., warmup=16).omega_C


def test_omega_infty_spike():
    c, x = draw(OmegaInftySpike(start=16, seed=2), 512)
    result = classify_path(c, x, 'lower')
    assert result.omega_infty
    assert result.records == 5
    assert np.all(np.abs(x) == 1.)


def test_omega_zero_classification():
    c, x = draw(OmegaZero(seed=3), 400)
    result = classify_path(c, x)
    assert result.omega_0
    assert not result.omega_infty
    assert result.omega_C is None


def test_adversarial_crossing():
    psi = ClassFunction.upper()
    source = AdversarialUpperCrossing(C=1., warmup=16, psi=psi)
    c, x = draw(source, 500)
    assert np.array_equal(c, x)
    S, A = np.cumsum(x), np.sqrt(np.cumsum(x ** 2))
    assert np.all(S[15:] >= A[15:] * psi(A[15:] ** 2))


def test_adversarial_crossing_respects_cap():
    c, x = draw(AdversarialUpperCrossing(C=1., cap=0.1, warmup=16), 200)
    assert np.array_equal(c, x)
    # the warmup rounds are capped as well, so the running maximum of c is the cap
    assert np.all(c == 0.1)


def test_cycle_ramp():
    schedule, psi = CycleSchedule(beta=2.), ClassFunction.lower()
    c, x = draw(CycleRamp(delta=0.5, schedule=schedule), 1200)
    assert np.array_equal(c[0::2], c[1::2])
    assert np.array_equal(x[0::2], c[0::2]) and np.array_equal(x[1::2], -c[1::2])
    A2 = np.cumsum(x ** 2)
    for k in range(1, 5):
        tau = int(np.argmax(A2 >= schedule.threshold(k)))
        # crossed by the second move of a pair, with the first move below the threshold
        assert tau % 2 == 1
        assert A2[tau - 1] < schedule.threshold(k) <= A2[tau]
    tau = int(np.argmax(A2 >= schedule.threshold(2)))
    assert np.isclose(c[tau + 1], 0.9 * 0.5 / schedule.gamma(2, psi), rtol=1e-12)
    assert make_path_source('cycle-ramp:beta=2,delta=0.5').params()['delta'] == 0.5


def test_parse_path_spec():
    assert parse_path_spec('omega-C-margin:C=2,seed=7') == ('omega-C-margin', {'C': 2, 'seed': 7})
    assert parse_path_spec('uniform-bounded:c_min=0,c_max=0.5') == ('uniform-bounded', {'c_min': 0, 'c_max': 0.5})
    assert parse_path_spec('omega-C-margin:psi=upper') == ('omega-C-margin', {'psi': 'upper'})
    assert parse_path_spec('replay-file:path.jsonl') == ('replay-file', {'file': 'path.jsonl'})
    assert parse_path_spec('bernoulli-symmetric') == ('bernoulli-symmetric', {})


@pytest.mark.parametrize('spec, error', [
    ('nonsense', ValueError),
    ('omega-0:c0', ConfigError),
    ('omega-0:radius=2', ConfigError),
])
def test_invalid_path_spec(spec: str, error):
    with pytest.raises(error):
        make_path_source(spec)


def test_seed_in_spec_takes_precedence():
    c1, _ = draw(make_path_source('uniform-bounded:seed=3', rng=np.random.default_rng(0)), 20)
    c2, _ = draw(make_path_source('uniform-bounded:seed=3', rng=np.random.default_rng(1)), 20)
    assert np.array_equal(c1, c2)


def test_generate():
    source = make_path_source('uniform-bounded:seed=4')
    reference = list(islice(make_path_source('uniform-bounded:seed=4'), 10))
    assert generate(source, 10) == reference[-1]
    assert source.stats.n == 10


def test_replay(tmp_path):
    path = tmp_path / 'path.jsonl'
    events = list(islice(OmegaCMargin(seed=5), 50))
    assert write_path_jsonl(path, events) == 50
    replayed = list(islice(make_path_source(f'replay-file:file={path}'), 50))
    assert replayed == events

    source = ReplayFile(path)
    draw(source, 50)
    with pytest.raises(PathExhaustedError):
        next(source)
