import pytest
from fractions import Fraction

from qwhittaker_torus.dimers import relative_height
from qwhittaker_torus.dynamics import predecessor, sample_configurations
from qwhittaker_torus.errors import MissingPredecessorError
from qwhittaker_torus.gibbs import GibbsParams, Representation, weight
from qwhittaker_torus.lattice import Configuration, Particle, Sector, neighbor_frame
from qwhittaker_torus.utils.rng import SeededRNG
from qwhittaker_torus.verification import (
    FrameSample,
    check_balance,
    check_ergodicity,
    check_identity,
    check_s_identity,
    check_stationarity,
    connect,
    derivative_terms,
    raw_derivative_terms,
    replay,
    replay_is_valid,
    reverse_weight_ratio,
    s1,
    s2,
    total_variation,
    vanishes_identically,
)

THIRD, HALF = Fraction(1, 3), Fraction(1, 2)


# --- Stationarity ---

@pytest.mark.parametrize("q", [THIRD, HALF])
@pytest.mark.parametrize("inhomogeneous", [False, True])
def test_stationarity_exact_small(small_sector, small_states, q, inhomogeneous):
    a = (1, Fraction(5, 2)) if inhomogeneous else (1, 1)
    report = check_stationarity(small_sector, GibbsParams(q, a), states=small_states)
    assert report.mode is Representation.RATIONAL
    assert report.max_residual == 0
    assert report.cross_check_max == 0
    assert report.passed
    assert report.counterexample() is None


@pytest.mark.parametrize("q", [THIRD, HALF])
@pytest.mark.parametrize("a", [(1, 1, 1), (1, 2, HALF)])
def test_stationarity_exact_tall(tall_sector, tall_states, q, a):
    report = check_stationarity(tall_sector, GibbsParams(q, a), states=tall_states)
    assert report.passed
    assert report.to_dict()['max_residual'] == "0"


def test_stationarity_float(tall_sector, tall_states):
    report = check_stationarity(tall_sector, GibbsParams(0.4, (1.0, 2.0, 0.5)), states=tall_states)
    assert report.mode is Representation.FLOAT
    assert report.passed
    assert float(report.max_residual) <= 1e-12


def test_perturbed_measure_fails(small_sector, small_states):
    report = check_stationarity(small_sector, GibbsParams(HALF, (1, 1)), states=small_states, perturb=0)
    assert not report.passed
    assert report.max_residual > 0
    assert report.counterexample() is not None
    assert report.to_dict()['perturbed'] is True


def test_wrong_rates_fail(tall_sector, tall_states):
    def unit_rate(config, p, params):
        return Fraction(1) if neighbor_frame(config, p).B > 0 else Fraction(0)

    report = check_stationarity(tall_sector, GibbsParams(HALF, (1, 1, 1)), states=tall_states, rate_fn=unit_rate)
    assert not report.passed


# --- The S1 = S2 identity ---

def test_s_identity_exact(small_states, tall_states):
    assert check_s_identity(small_states, GibbsParams(HALF, (1, 3))).passed
    report = check_s_identity(tall_states, GibbsParams(THIRD, (1, 2, HALF)))
    assert report.passed
    assert report.states == len(tall_states)
    assert report.max_difference == 0


def test_s_identity_on_sampled_states():
    sector = Sector(9, 4, 3, 2)
    params = GibbsParams(0.5, (1.0, 1.5, 0.75, 2.0))
    for config in sample_configurations(sector, params, count=10, seed=4, spacing=20):
        assert s1(config, params) == pytest.approx(s2(config, params), rel=1e-12)


@pytest.mark.slow
def test_s_identity_on_many_sampled_states():
    sector = Sector(12, 6, 4, 3)
    params = GibbsParams(0.5, (1.0, 1.5, 0.75, 2.0, 1.25, 0.5))
    samples = sample_configurations(sector, params, count=10_000, seed=0, spacing=5)
    assert len(samples) == 10_000
    for config in samples:
        assert s1(config, params) == pytest.approx(s2(config, params), rel=1e-12)


def test_identity_exact_samples():
    report = check_identity(samples=400, seed=1)
    assert report.passed
    assert report.max_difference == 0
    assert report.to_dict()['samples'] == 400


@pytest.mark.slow
def test_identity_exact_samples_full():
    report = check_identity(samples=10_000, seed=0)
    assert report.passed
    assert report.max_difference == 0


def test_identity_float_samples():
    report = check_identity(samples=200, seed=2, qs=(0.3, 0.8))
    assert report.passed


def test_identity_holds_in_q():
    rng = SeededRNG(5)
    for _ in range(3):
        sample = FrameSample.random(rng, HALF, upper=6)
        assert vanishes_identically(sample, upper=6)


def test_frame_sample_constraints():
    with pytest.raises(ValueError):
        FrameSample(q=HALF, A=1, B=2, C=0, D=1, E=0, F=0, b_p1=0, d_p5=1)
    with pytest.raises(ValueError):
        FrameSample(q=HALF, A=1, B=0, C=0, D=3, E=1, F=0, b_p1=0, d_p5=1)


def test_frame_relations_hold_in_states(tall_states, small_states):
    params = GibbsParams(HALF, (1, 2, HALF))
    for state in tall_states:
        for p in state.labels():
            assert raw_derivative_terms(state, p, params) == derivative_terms(
                FrameSample.from_configuration(state, p, params))
    params = GibbsParams(THIRD, (1, 1))
    for state in small_states:
        for p in state.labels():
            terms = raw_derivative_terms(state, p, params)
            assert terms.differences() == (0, 0)


# --- Balance ---

def test_balance_all_pairs(small_states, tall_states):
    for states, params in ((small_states, GibbsParams(HALF, (1, 3))), (tall_states, GibbsParams(THIRD, (1, 2, HALF)))):
        for state in states:
            for p in state.labels():
                result = check_balance(state, p, params, allow_missing=True)
                assert result.equal, (state.to_dict(), p)


def test_balance_missing_predecessor():
    crowded = Configuration.from_rows(6, 3, [[0, 1], [0, 3], [1, 4]])
    params = GibbsParams(HALF, (1, 1, 1))
    with pytest.raises(MissingPredecessorError):
        check_balance(crowded, Particle(0, 1), params)
    result = check_balance(crowded, Particle(0, 1), params, allow_missing=True)
    assert result.lhs == 0 and result.rhs == 0


def test_reverse_weight_ratio(tall_states):
    params = GibbsParams(HALF, (1, 2, HALF))
    checked = 0
    for state in tall_states:
        for p in state.labels():
            try:
                previous, _ = predecessor(state, p)
            except MissingPredecessorError:
                continue
            expected = weight(previous, params).ratio(weight(state, params))
            assert reverse_weight_ratio(state, p, params) == expected
            checked += 1
    assert checked > 0


# --- Ergodicity and explicit connections ---

def test_ergodicity(small_sector, small_states, tall_sector, tall_states):
    assert check_ergodicity(small_sector, GibbsParams(HALF, (1, 1)), states=small_states)
    assert check_ergodicity(tall_sector, GibbsParams(THIRD, (1, 2, HALF)), states=tall_states)


def test_connect_random_pairs(tall_states):
    rng = SeededRNG(0)
    for _ in range(100):
        source, target = rng.choice(tall_states), rng.choice(tall_states)
        moves = connect(source, target)
        assert len(moves) == sum(relative_height(source, target).values())
        path = replay(source, moves)
        assert path[-1] == target
        assert replay_is_valid(source, moves)


def test_connect_randomised_start(small_states):
    rng = SeededRNG(3)
    source, target = small_states[0], small_states[-1]
    first = connect(source, target, rng=rng)
    assert replay(source, first)[-1] == target
    assert len(first) == len(connect(source, target))


def test_connect_to_itself(reference_config):
    assert connect(reference_config, reference_config) == []


def test_total_variation():
    assert total_variation({'a': 0.5, 'b': 0.5}, {'a': 0.5, 'b': 0.5}) == 0
    assert total_variation({'a': 1.0}, {'b': 1.0}) == pytest.approx(1.0)
    assert total_variation({'a': 0.75, 'b': 0.25}, {'a': 0.25, 'b': 0.75}) == pytest.approx(0.5)
