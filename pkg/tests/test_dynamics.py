import pytest
from fractions import Fraction

import pandas as pd

from qwhittaker_torus.dynamics import (
    Direction,
    Family,
    apply_move,
    build_generator,
    enabled_moves,
    family_down,
    family_up,
    predecessor,
    rate,
    reverse_moves,
    reverse_rate,
    sample_configurations,
    simulate,
)
from qwhittaker_torus.dimers import Edge, Face, Step, crossing, to_dimers
from qwhittaker_torus.errors import ContractViolationError, InvalidConfigurationError, MissingPredecessorError
from qwhittaker_torus.gibbs import GibbsParams, Representation, measure_table
from qwhittaker_torus.lattice import Configuration, Particle, Sector, canonical_configuration, neighbor_frame, validate
from qwhittaker_torus.verification import total_variation

HALF = Fraction(1, 2)


@pytest.fixture
def dragging_config():
    """6 x 3 torus where particle (0, 0) drags the particle right above it."""
    return Configuration.from_rows(6, 3, [[0, 3], [0, 4], [2, 5]])


@pytest.fixture
def flat_params():
    return GibbsParams(HALF, (1, 1, 1))


# --- Families and rates ---

def test_family_up_follows_zero_gaps(dragging_config):
    assert validate(dragging_config)
    family = family_up(dragging_config, Particle(0, 0))
    assert family == Family(Particle(0, 0), Direction.UP, (Particle(0, 0), Particle(1, 0)))
    assert family.extreme == Particle(1, 0)
    assert len(family_up(dragging_config, Particle(1, 0))) == 1


def test_rate_value(dragging_config, flat_params):
    # a (1 - q^B)(1 - q^(D+1)) / (1 - q^(C+1)) with B=1, C=1, D=2
    assert rate(dragging_config, Particle(0, 0), flat_params) == Fraction(7, 12)


def test_rate_vanishes_iff_b_is_zero(tall_states):
    params = GibbsParams(Fraction(1, 3), (1, 2, HALF))
    for state in tall_states:
        for p in state.labels():
            assert (rate(state, p, params) == 0) == (neighbor_frame(state, p).B == 0)


def test_rates_at_q_zero(small_states, tall_states):
    for states in (small_states, tall_states):
        params = GibbsParams(Fraction(0), (1,) * states[0].N)
        for state in states:
            assert all(move.rate == 1 for move in enabled_moves(state, params))


def test_apply_move_shifts_whole_family(dragging_config):
    family = family_up(dragging_config, Particle(0, 0))
    successor = apply_move(dragging_config, family)
    assert successor == Configuration.from_rows(6, 3, [[1, 3], [1, 4], [2, 5]])
    assert validate(successor)
    assert successor.position(Particle(1, 0)) == 1


def test_apply_move_contract(dragging_config):
    with pytest.raises(ContractViolationError):
        apply_move(dragging_config, family_up(dragging_config, Particle(2, 1)))
    with pytest.raises(ContractViolationError):
        apply_move(dragging_config, family_down(dragging_config, Particle(0, 0)))


def test_predecessor_undoes_move(dragging_config, flat_params):
    successor = apply_move(dragging_config, family_up(dragging_config, Particle(0, 0)))
    previous, family = predecessor(successor, Particle(1, 0))
    assert previous == dragging_config
    assert family.members == (Particle(1, 0), Particle(0, 0))
    assert reverse_rate(successor, family.extreme, flat_params) == rate(dragging_config, Particle(0, 0), flat_params)


def test_missing_predecessor(small_states, half_params):
    crowded = Configuration.from_rows(6, 3, [[0, 1], [0, 3], [1, 4]])
    assert validate(crowded)
    # the down-family of (0, 1) drags (2, 0) and runs into (0, 0)
    assert family_down(crowded, Particle(0, 1)).members == (Particle(0, 1), Particle(2, 0))
    with pytest.raises(MissingPredecessorError):
        predecessor(crowded, Particle(0, 1))

    # every forward move is seen exactly once from its target
    forward = sum(len(enabled_moves(s, half_params)) for s in small_states)
    backward = sum(len(reverse_moves(s, half_params)) for s in small_states)
    assert forward == backward


def test_moves_preserve_sector(small_states, tall_states, half_params):
    for states, params in ((small_states, half_params), (tall_states, GibbsParams(HALF, (1, 2, HALF)))):
        for state in states:
            for move in enabled_moves(state, params):
                successor = Configuration(state.L, state.N, move.successor.rows)
                assert validate(successor)
                assert successor.sector == state.sector
                members = move.family.members
                for lower, upper in zip(members, members[1:]):
                    frame = neighbor_frame(state, lower)
                    assert frame.F == 0 and frame.p6 == upper
                assert neighbor_frame(state, members[-1]).F != 0


def test_family_sizes_bounded(small_states, tall_states):
    for states in (small_states, tall_states):
        for state in states:
            for p in state.labels():
                assert 1 <= len(family_up(state, p)) <= state.N - 1
                assert 1 <= len(family_down(state, p)) <= state.N - 1


def test_move_flips_two_sites_per_member(small_states, tall_states, half_params):
    for states, params in ((small_states, half_params), (tall_states, GibbsParams(HALF, (1, 2, HALF)))):
        for state in states:
            for move in enabled_moves(state, params):
                flipped = sum(bin(a ^ b).count('1') for a, b in zip(state.occupation, move.successor.occupation))
                assert flipped == 2 * len(move.family)


def _edges(cover):
    return {Edge(kind, x, y) for y, row in enumerate(cover.matching) for x, kind in enumerate(row)}


def _hexagon(x, y, L, N):
    return {Edge(edge.kind, edge.x % L, edge.y % N) for edge, _ in (crossing(Face(x, y), step) for step in Step)}


def test_single_jump_rotates_one_hexagon(small_states, tall_states, half_params):
    for states, params in ((small_states, half_params), (tall_states, GibbsParams(HALF, (1, 2, HALF)))):
        for state in states:
            for move in enabled_moves(state, params):
                if len(move.family) != 1:
                    continue
                before, after = to_dimers(state), to_dimers(move.successor)
                changed = [
                    (x, y) for y in range(state.N) for x in range(state.L)
                    if before.kind_at(x, y) != after.kind_at(x, y)
                ]
                assert len(changed) == 3
                root = move.family.root
                face = _hexagon(state.position(root), root.row, state.L, state.N)
                assert _edges(before) ^ _edges(after) == face


def test_reverse_moves_point_back(tall_states):
    params = GibbsParams(HALF, (1, 2, HALF))
    for state in tall_states:
        for move in reverse_moves(state, params):
            forward = {m.successor: m.rate for m in enabled_moves(move.predecessor, params)}
            assert forward[state] == move.rate


# --- Generator ---

def test_generator_rows_sum_to_zero(small_states, half_params):
    generator = build_generator(small_states, half_params)
    assert generator.representation is Representation.RATIONAL
    assert generator.row_sums() == [0] * len(small_states)
    assert all(value > 0 for _, _, value in generator.entries())


def test_generator_sparse_matches_exact(tall_states):
    params = GibbsParams(HALF, (1, 2, HALF))
    generator = build_generator(tall_states, params)
    matrix = generator.to_sparse()
    assert matrix.shape == (len(tall_states), len(tall_states))
    assert abs(matrix.sum(axis=1)).max() < 1e-12
    for i, j, value in generator.entries():
        assert matrix[i, j] == pytest.approx(float(value))


def test_generator_threads_agree(tall_states):
    params = GibbsParams(HALF, (1, 2, HALF))
    single = build_generator(tall_states, params)
    pooled = build_generator(tall_states, params, threads=4)
    assert single.off_diagonal == pooled.off_diagonal
    assert single.diagonal == pooled.diagonal


# --- Simulation ---

def test_simulation_reproducible(small_sector, half_params):
    start = canonical_configuration(small_sector)
    first = simulate(start, half_params, t_max=50.0, seed=7)
    second = simulate(start, half_params, t_max=50.0, seed=7)
    other = simulate(start, half_params, t_max=50.0, seed=8)
    assert first.events == second.events
    assert first.occupation_times == second.occupation_times
    assert first.events != other.events
    assert first.elapsed == pytest.approx(50.0)


def test_simulation_conserves_sector(tall_sector):
    params = GibbsParams(HALF, (1, 2, HALF)).as_float()
    start = canonical_configuration(tall_sector)
    for seed in range(5):
        trajectory = simulate(start, params, t_max=1e9, seed=seed, max_events=2000, check_invariants=True)
        assert trajectory.event_count == 2000
        final = Configuration(trajectory.final.L, trajectory.final.N, trajectory.final.rows)
        assert validate(final)
        assert final.sector == tall_sector
        assert all(len(row) == 2 for row in final.rows)
        assert trajectory.displacement == sum(size * count for size, count in trajectory.family_sizes.items())


@pytest.mark.slow
def test_million_events_stay_valid():
    sector = Sector(9, 4, 3, 2)
    params = GibbsParams(0.5, (1.0, 1.5, 0.75, 2.0))
    trajectory = simulate(canonical_configuration(sector), params, t_max=1e12, seed=0, record_events=False,
                          track_states=False, max_events=10**6, check_invariants=True)
    assert trajectory.event_count == 10**6
    final = Configuration(trajectory.final.L, trajectory.final.N, trajectory.final.rows)
    assert validate(final)
    assert final.sector == sector


def test_simulation_events_csv(small_sector, half_params, tmp_path):
    trajectory = simulate(canonical_configuration(small_sector), half_params, t_max=20.0, seed=1)
    path = tmp_path / "events.csv"
    trajectory.write_events(path)
    frame = pd.read_csv(path)
    assert list(frame.columns) == ['time', 'root_row', 'root_col', 'family_size']
    assert len(frame) == trajectory.event_count
    assert frame['time'].is_monotonic_increasing
    assert (frame['family_size'] >= 1).all()


def test_simulation_summary(small_sector, half_params):
    trajectory = simulate(canonical_configuration(small_sector), half_params, t_max=20.0, seed=3, track_states=False)
    summary = trajectory.summary()
    assert summary['seed'] == 3
    assert summary['events'] == trajectory.event_count
    assert set(summary) >= {'family_size_histogram', 'jumps_per_row', 'mean_velocity', 'final'}
    assert trajectory.occupation_times['total'] == pytest.approx(20.0)


def test_simulation_preconditions(small_sector, half_params):
    with pytest.raises(ValueError):
        simulate(canonical_configuration(small_sector), half_params, t_max=0, seed=0)
    with pytest.raises(InvalidConfigurationError):
        simulate(Configuration.from_rows(5, 2, [[0, 1], [0, 1]]), half_params, t_max=1.0, seed=0)


def test_occupation_matches_gibbs_measure(small_sector, small_states):
    params = GibbsParams(HALF, (1, 1))
    trajectory = simulate(canonical_configuration(small_sector), params, t_max=2e4, seed=11, record_events=False)
    exact = measure_table(small_states, params, Representation.FLOAT)
    reference = {s.occupation_hex: p for s, p in zip(exact.states, exact.probabilities)}
    assert total_variation(trajectory.occupation_distribution(), reference) < 0.05


@pytest.mark.slow
def test_occupation_matches_gibbs_measure_long_run(small_sector, small_states):
    params = GibbsParams(HALF, (1, 1))
    trajectory = simulate(canonical_configuration(small_sector), params, t_max=1e5, seed=0, record_events=False)
    exact = measure_table(small_states, params, Representation.FLOAT)
    reference = {s.occupation_hex: p for s, p in zip(exact.states, exact.probabilities)}
    assert total_variation(trajectory.occupation_distribution(), reference) < 0.02


def test_sample_configurations(tall_sector, tall_states):
    params = GibbsParams(HALF, (1, 2, HALF))
    samples = sample_configurations(tall_sector, params, count=5, seed=2, spacing=10)
    assert len(samples) == 5
    states = set(tall_states)
    for sample in samples:
        assert validate(sample)
        assert sample in states


def test_canonical_start_on_large_torus():
    sector = Sector(12, 6, 4, 3)
    params = GibbsParams(0.5, (1.0,) * 6)
    trajectory = simulate(canonical_configuration(sector), params, t_max=5.0, seed=0, track_states=False,
                          check_invariants=True)
    assert trajectory.event_count > 0
