"""
Continuous-time dynamics: families, jump rates, moves, the generator of an
enumerated sector and Monte Carlo trajectories.

A particle p with ``B_p >= 1`` jumps one step right at rate

    a_r(p) (1 - q^B_p) (1 - q^(D_p + 1)) / (1 - q^(C_p + 1))

and drags with it its up-family: the chain of up-right neighbours reached
through ``F = 0`` links. Members are shifted top-down so no site is ever
doubly occupied.
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import scipy.sparse as sp
from tqdm import tqdm

from .errors import (
    ContractViolationError,
    FrozenStateError,
    GeneratorConsistencyError,
    InvalidConfigurationError,
    MissingPredecessorError,
    SectorViolationError,
)
from .gibbs import GibbsParams, Representation, default_representation
from .lattice import Configuration, Particle, Sector, canonical_configuration, neighbor_frame, validate
from .utils.rng import SeededRNG
from .utils.scalars import Scalar, one_minus_q_power

logger = logging.getLogger(__name__)

RateFunction = Callable[[Configuration, Particle, GibbsParams], Scalar]


class Direction(str, Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class Family:
    """Particles moved together: the root first, then successive linked neighbours."""
    root: Particle
    direction: Direction
    members: Tuple[Particle, ...]

    @property
    def extreme(self) -> Particle:
        """Highest member of an up-family, lowest member of a down-family."""
        return self.members[-1]

    def __len__(self) -> int:
        return len(self.members)


def _follow(config: Configuration, p: Particle, direction: Direction) -> Family:
    p = Particle(*p)
    members = [p]
    current = p
    while True:
        frame = neighbor_frame(config, current)
        if direction is Direction.UP:
            if frame.F != 0:
                break
            nxt = frame.p6
        else:
            if frame.C != 0:
                break
            nxt = frame.p3
        if nxt in members or len(members) >= config.N:
            raise SectorViolationError(
                f"The {direction.value}-family of {p} closes a vertical loop; the configuration has m2 = 0."
            )
        members.append(nxt)
        current = nxt
    return Family(p, direction, tuple(members))


def family_up(config: Configuration, p: Particle) -> Family:
    """Chain of up-right neighbours reached from ``p`` through ``F = 0`` links."""
    return _follow(config, p, Direction.UP)


def family_down(config: Configuration, p: Particle) -> Family:
    """Chain of down-left neighbours reached from ``p`` through ``C = 0`` links."""
    return _follow(config, p, Direction.DOWN)


def rate(config: Configuration, p: Particle, params: GibbsParams) -> Scalar:
    """Jump rate of the up-family of ``p``; zero exactly when ``B_p = 0``."""
    frame = neighbor_frame(config, p)
    q = params.q
    return (
        params.activity(frame.particle.row)
        * one_minus_q_power(q, frame.B)
        * one_minus_q_power(q, frame.D + 1)
        / one_minus_q_power(q, frame.C + 1)
    )


def reverse_rate(config: Configuration, lowest: Particle, params: GibbsParams) -> Scalar:
    """
    Rate of the move that produced ``config`` by shifting a family whose lowest
    member is ``lowest``, written with the gaps measured after the move.
    """
    frame = neighbor_frame(config, lowest)
    q = params.q
    return (
        params.activity(frame.particle.row)
        * one_minus_q_power(q, frame.B + 1)
        * one_minus_q_power(q, frame.D)
        / one_minus_q_power(q, frame.C)
    )


class Move(NamedTuple):
    family: Family
    rate: Scalar
    successor: Configuration


class ReverseMove(NamedTuple):
    predecessor: Configuration
    rate: Scalar
    family: Family


def apply_move(config: Configuration, family: Family) -> Configuration:
    """
    Shifts every member of an up-family by +1, highest member first.

    Raises:
        ContractViolationError: for a down-family or a root with ``B = 0``.
    """
    if family.direction is not Direction.UP:
        raise ContractViolationError("Only up-families move forward.")
    if neighbor_frame(config, family.root).B == 0:
        raise ContractViolationError(f"Particle {family.root} has B = 0; its jump rate vanishes.")
    updates = {}
    for member in reversed(family.members):
        updates[member] = config.position(member) + 1
    return config.moved(updates)


def enabled_moves(config: Configuration, params: GibbsParams, rate_fn: RateFunction = rate) -> List[Move]:
    """One move per particle with positive rate, in label order."""
    moves = []
    for p in config.labels():
        r = rate_fn(config, p, params)
        if r > 0:
            family = family_up(config, p)
            moves.append(Move(family, r, apply_move(config, family)))
    return moves


def predecessor(config: Configuration, p: Particle) -> Tuple[Configuration, Family]:
    """
    The configuration obtained by shifting the down-family of ``p`` by -1.

    Raises:
        MissingPredecessorError: when the shifted configuration is not valid
            or leaves the sector.
    """
    family = family_down(config, p)
    updates = {member: config.position(member) - 1 for member in family.members}
    candidate = config.moved(updates, keep_sector=False)
    if not validate(candidate) or candidate.sector != config.sector:
        raise MissingPredecessorError(f"Shifting the down-family of {p} left gives no valid configuration.")
    return candidate, family


def reverse_moves(config: Configuration, params: GibbsParams) -> List[ReverseMove]:
    """Valid predecessors of ``config`` with the rate of the move leading here."""
    result = []
    for p in config.labels():
        try:
            previous, family = predecessor(config, p)
        except MissingPredecessorError:
            continue
        r = reverse_rate(config, family.extreme, params)
        if r > 0:
            result.append(ReverseMove(previous, r, family))
    return result


@dataclass
class Generator:
    """Sparse rate matrix over an ordered list of states."""
    states: List[Configuration]
    off_diagonal: Dict[Tuple[int, int], Scalar]
    diagonal: List[Scalar]
    representation: Representation
    index: Dict[Configuration, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            self.index = {state: i for i, state in enumerate(self.states)}

    def __len__(self) -> int:
        return len(self.states)

    def exit_rate(self, i: int) -> Scalar:
        return -self.diagonal[i]

    def entries(self) -> Iterator[Tuple[int, int, Scalar]]:
        for (i, j), value in sorted(self.off_diagonal.items()):
            yield i, j, value

    def row_sums(self) -> List[Scalar]:
        sums = list(self.diagonal)
        for (i, _), value in self.off_diagonal.items():
            sums[i] += value
        return sums

    def left_multiply(self, pi: Sequence[Scalar]) -> List[Scalar]:
        """``pi . L`` computed entry by entry, exact for exact inputs."""
        result = [pi[j] * self.diagonal[j] for j in range(len(self.states))]
        for (i, j), value in self.off_diagonal.items():
            result[j] += pi[i] * value
        return result

    def to_sparse(self) -> sp.csr_matrix:
        n = len(self.states)
        rows = [i for (i, _) in self.off_diagonal] + list(range(n))
        cols = [j for (_, j) in self.off_diagonal] + list(range(n))
        values = [float(v) for v in self.off_diagonal.values()] + [float(d) for d in self.diagonal]
        return sp.csr_matrix((np.array(values), (np.array(rows), np.array(cols))), shape=(n, n))


def build_generator(
    states: Sequence[Configuration],
    params: GibbsParams,
    rate_fn: RateFunction = rate,
    threads: int = 1,
    progress: bool = False,
) -> Generator:
    """
    Rate matrix of the dynamics restricted to ``states``.

    Raises:
        GeneratorConsistencyError: if a successor is missing from ``states``
            or two roots lead to the same successor.
    """
    states = list(states)
    index = {state: i for i, state in enumerate(states)}
    representation = default_representation(params)
    zero = 0 if representation is Representation.RATIONAL else 0.0

    def moves_of(state):
        return enabled_moves(state, params, rate_fn)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            all_moves = list(pool.map(moves_of, states))
    else:
        all_moves = [moves_of(s) for s in tqdm(states, desc="Generator", unit="state", disable=not progress)]

    off_diagonal = {}
    diagonal = []
    for i, moves in enumerate(all_moves):
        exit_rate = zero
        for move in moves:
            j = index.get(move.successor)
            if j is None:
                raise GeneratorConsistencyError(
                    f"Move of {move.family.root} from {states[i].occupation_hex} leaves the state list "
                    f"(successor {move.successor.occupation_hex})."
                )
            if (i, j) in off_diagonal:
                raise GeneratorConsistencyError(
                    f"Two families of {states[i].occupation_hex} lead to the same successor "
                    f"{move.successor.occupation_hex}."
                )
            off_diagonal[(i, j)] = move.rate
            exit_rate += move.rate
        diagonal.append(-exit_rate)
    logger.info(f"Generator over {len(states)} states with {len(off_diagonal)} transitions")
    return Generator(states, off_diagonal, diagonal, representation, index)


class Event(NamedTuple):
    time: float
    root_row: int
    root_col: int
    family_size: int


@dataclass
class Trajectory:
    seed: int
    initial: Configuration
    final: Configuration
    t_max: float
    events: List[Event] = field(default_factory=list)
    occupation_times: Dict[str, float] = field(default_factory=dict)
    event_count: int = 0
    family_sizes: Counter = field(default_factory=Counter)
    jumps_per_row: Counter = field(default_factory=Counter)
    displacement: int = 0

    @property
    def elapsed(self) -> float:
        return sum(self.occupation_times.values())

    def occupation_distribution(self) -> Dict[str, float]:
        total = self.elapsed
        return {key: value / total for key, value in sorted(self.occupation_times.items())}

    def summary(self) -> Dict:
        n1 = self.initial.N * self.initial.m1
        return {
            'seed': self.seed,
            't_max': self.t_max,
            'elapsed': self.elapsed,
            'events': self.event_count,
            'family_size_histogram': {str(k): v for k, v in sorted(self.family_sizes.items())},
            'jumps_per_row': {str(k): v for k, v in sorted(self.jumps_per_row.items())},
            'mean_velocity': self.displacement / (n1 * self.elapsed) if self.elapsed else 0.0,
            'final': self.final.to_dict(),
        }

    def events_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.events, columns=['time', 'root_row', 'root_col', 'family_size'])

    def write_events(self, path: Union[str, Path]) -> None:
        self.events_frame().to_csv(path, index=False, float_format='%.17g')
        logger.info(f"{len(self.events)} events written to {path}")


class _MoveCache:
    """Enabled moves and cumulative rates per labelled configuration."""

    def __init__(self, params: GibbsParams, limit: int = 200_000):
        self.params = params
        self.limit = limit
        self._table = {}

    def lookup(self, config: Configuration) -> Tuple[List[Move], np.ndarray]:
        key = config.rows
        hit = self._table.get(key)
        if hit is None:
            moves = enabled_moves(config, self.params)
            cumulative = np.cumsum([float(m.rate) for m in moves]) if moves else np.zeros(0)
            if len(self._table) >= self.limit:
                self._table.clear()
            hit = self._table[key] = (moves, cumulative)
        return hit


def walk(
    config: Configuration,
    params: GibbsParams,
    rng: SeededRNG,
    check_invariants: bool = False,
) -> Iterator[Tuple[float, Move]]:
    """
    Endless stream of ``(waiting time, move)`` pairs of the continuous-time chain.

    Raises:
        FrozenStateError: if every rate vanishes.
        InvalidConfigurationError: with ``check_invariants`` when a successor
            is invalid or leaves the sector.
    """
    params = params.as_float()
    cache = _MoveCache(params)
    sector = config.sector
    current = config
    while True:
        moves, cumulative = cache.lookup(current)
        if not moves or cumulative[-1] <= 0:
            raise FrozenStateError(f"No move is possible from {current.occupation_hex}.")
        dt = rng.exponential(float(cumulative[-1]))
        move = moves[rng.weighted_index(cumulative)]
        if check_invariants:
            successor = move.successor
            if not validate(successor) or sector_of_successor(successor) != sector:
                raise InvalidConfigurationError(f"Move of {move.family.root} broke the sector.")
        yield dt, move
        current = move.successor


def sector_of_successor(config: Configuration) -> Sector:
    """Sector recomputed from scratch, ignoring the one carried along by moves."""
    return Configuration(config.L, config.N, config.rows).sector


def simulate(
    config: Configuration,
    params: GibbsParams,
    t_max: float,
    seed: int,
    record_events: bool = True,
    track_states: bool = True,
    max_events: Optional[int] = None,
    check_invariants: bool = False,
) -> Trajectory:
    """
    Runs the chain from ``config`` until time ``t_max`` (or ``max_events``).

    Occupation times are kept per state (keyed by occupation hex) when
    ``track_states`` is set; summary counters are always kept. Equal seeds
    give identical trajectories.
    """
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}.")
    if not validate(config):
        raise InvalidConfigurationError("Simulation needs a valid initial configuration.")
    params.check_rows(config.N)
    rng = SeededRNG(seed)
    trajectory = Trajectory(seed=seed, initial=config, final=config, t_max=float(t_max))
    occupation = trajectory.occupation_times
    t = 0.0
    current = config
    for dt, move in walk(config, params, rng, check_invariants):
        if max_events is not None and trajectory.event_count >= max_events:
            break
        key = current.occupation_hex if track_states else None
        if t + dt >= t_max:
            if track_states:
                occupation[key] = occupation.get(key, 0.0) + (t_max - t)
            t = float(t_max)
            break
        t += dt
        if track_states:
            occupation[key] = occupation.get(key, 0.0) + dt
        root = move.family.root
        size = len(move.family)
        trajectory.event_count += 1
        trajectory.family_sizes[size] += 1
        trajectory.jumps_per_row[root.row] += 1
        trajectory.displacement += size
        if record_events:
            trajectory.events.append(Event(t, root.row, current.position(root), size))
        current = move.successor
    trajectory.final = current
    if not track_states:
        trajectory.occupation_times = {'total': t}
    logger.info(f"Simulated {trajectory.event_count} events up to t={t:.6g} (seed {seed})")
    return trajectory


def sample_configurations(
    sector: Sector,
    params: GibbsParams,
    count: int,
    seed: int,
    spacing: int = 50,
    start: Optional[Configuration] = None,
) -> List[Configuration]:
    """Valid configurations of ``sector`` read off a trajectory every ``spacing`` events."""
    config = start if start is not None else canonical_configuration(sector)
    rng = SeededRNG(seed)
    samples = []
    current = config
    for step, (_, move) in enumerate(walk(config, params, rng), start=1):
        current = move.successor
        if step % spacing == 0:
            samples.append(Configuration(current.L, current.N, current.rows))
            if len(samples) >= count:
                break
    return samples
