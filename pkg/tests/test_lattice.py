import re

import pytest
from fractions import Fraction

from qwhittaker_torus.errors import (
    InvalidConfigurationError,
    ParticleReferenceError,
    SectorError,
    StructuralError,
)
from qwhittaker_torus.lattice import (
    Configuration,
    Particle,
    Sector,
    allowed_positions,
    canonical_configuration,
    gamma_loop,
    is_interlaced,
    neighbor_frame,
    sector_of,
    validate,
)


# --- Sector ---

def test_sector_derived_counts(small_sector):
    assert small_sector.n1 == 4
    assert small_sector.n2 == 5
    assert small_sector.n3 == 1
    assert (small_sector.Nh, small_sector.Nv) == (1, 2)
    assert small_sector.m2 * small_sector.Nv == small_sector.m1 * small_sector.Nh


@pytest.mark.parametrize("L, N, m1, m2, fragment", [
    (5, 2, 1, 1, "m1 > 1"),
    (5, 2, 5, 1, "m1"),
    (5, 2, 2, 0, "m2"),
    (5, 2, 2, 2, "m2"),
    (3, 3, 2, 1, "m1/L + m2/N < 1"),
])
def test_sector_bounds(L, N, m1, m2, fragment):
    with pytest.raises(SectorError, match=re.escape(fragment)):
        Sector(L, N, m1, m2)


# --- Configuration ---

def test_validate_reference(reference_config):
    assert validate(reference_config)


def test_validate_rejects_double_occupation():
    config = Configuration(5, 2, [[0, 0], [1, 3]])
    assert not validate(config)


def test_validate_rejects_vertical_loop():
    # Interlaced, but the up-right loop never winds horizontally
    config = Configuration.from_rows(5, 2, [[0, 1], [0, 1]])
    assert is_interlaced(config)
    assert not validate(config)


def test_structural_errors():
    with pytest.raises(StructuralError):
        Configuration(5, 2, [[0, 2]])
    with pytest.raises(StructuralError):
        Configuration(5, 2, [[0, 2], [1]])
    with pytest.raises(StructuralError):
        Configuration(5, 2, [[0, 7], [1, 3]])


def test_equality_ignores_labels(reference_config):
    relabelled = Configuration(5, 2, [[2, 0], [3, 1]])
    assert relabelled == reference_config
    assert hash(relabelled) == hash(reference_config)
    assert len({relabelled, reference_config}) == 1


def test_occupation_encoding(reference_config):
    assert reference_config.occupation == (0b00101, 0b01010)
    assert reference_config.occupation_hex == "05.0a"
    assert Configuration.from_hex(5, 2, "05.0a") == reference_config


def test_dict_round_trip(reference_config):
    data = reference_config.to_dict()
    assert data == {'L': 5, 'N': 2, 'rows': [[0, 2], [1, 3]]}
    assert Configuration.from_dict(data) == reference_config
    assert Configuration.from_dict({'L': 5, 'N': 2, 'occupation': '05.0a'}) == reference_config


def test_particle_reference_errors(reference_config):
    with pytest.raises(ParticleReferenceError):
        reference_config.position(Particle(2, 0))
    with pytest.raises(ParticleReferenceError):
        reference_config.particle_at(0, 1)


# --- Neighbour frames ---

def test_neighbor_frame_reference(reference_config):
    frame = neighbor_frame(reference_config, Particle(0, 0))
    assert (frame.A, frame.B, frame.C, frame.D, frame.E, frame.F) == (1, 0, 2, 2, 1, 1)
    assert frame.p1 == frame.p4 == Particle(0, 1)
    assert frame.p2 == Particle(1, 0)
    assert frame.p3 == Particle(1, 1)
    assert frame.p6 == Particle(1, 0)


def test_neighbor_labels_stable_after_move(reference_config):
    before = neighbor_frame(reference_config, Particle(1, 0))
    assert allowed_positions(reference_config, Particle(0, 0)) == [4, 0]
    moved = reference_config.moved({Particle(0, 0): 4})
    assert validate(moved)
    after = neighbor_frame(moved, Particle(1, 0))
    assert (after.p1, after.p4, after.p6) == (before.p1, before.p4, before.p6)


def test_gap_tiling(small_states, tall_states):
    for state in small_states + tall_states:
        for r in range(state.N):
            frames = [neighbor_frame(state, Particle(r, i)) for i in range(state.m1)]
            assert sum(f.A + 1 for f in frames) == state.L
            assert sum(f.B + f.C + 1 for f in frames) == state.L
            assert sum(f.B + f.C for f in frames) == state.L - state.m1


def test_frame_gap_consistency(small_states):
    for state in small_states:
        for p in state.labels():
            frame = neighbor_frame(state, p)
            x2 = state.position(frame.p2)
            x3 = state.position(frame.p3)
            assert frame.B + frame.C == (x2 - x3 - 1) % state.L


# --- Sectors and loops ---

def test_gamma_loop_reference(reference_config):
    loop = gamma_loop(reference_config)
    assert set(loop.particles) == set(reference_config.labels())
    assert (loop.Nh, loop.Nv) == (1, 2)
    assert loop.m2(2) == Fraction(1)
    assert sector_of(reference_config) == Sector(5, 2, 2, 1)


def test_sector_independent_of_start(tall_states):
    for state in tall_states[:20]:
        ratios = {gamma_loop(state, p).m2(state.m1) for p in state.labels()}
        assert ratios == {Fraction(state.sector.m2)}


def test_sector_of_invalid_raises():
    with pytest.raises(InvalidConfigurationError):
        sector_of(Configuration.from_rows(5, 2, [[0, 1], [0, 1]]))


# --- Helpers ---

def test_allowed_positions_include_current(small_states):
    for state in small_states:
        for p in state.labels():
            positions = allowed_positions(state, p)
            assert state.position(p) in positions
            for x in positions:
                assert validate(state.moved({p: x}, keep_sector=False))


@pytest.mark.parametrize("L, N, m1, m2", [(5, 2, 2, 1), (4, 3, 2, 1), (7, 3, 3, 1), (9, 4, 3, 2), (12, 6, 4, 3)])
def test_canonical_configuration(L, N, m1, m2):
    config = canonical_configuration(Sector(L, N, m1, m2))
    assert validate(config)
    assert config.sector == Sector(L, N, m1, m2)


def test_shift_preserves_sector(small_states):
    for state in small_states:
        for shifted in (state.shifted(dx=1), state.shifted(dy=1)):
            assert validate(shifted)
            assert sector_of(Configuration(shifted.L, shifted.N, shifted.rows)) == state.sector
