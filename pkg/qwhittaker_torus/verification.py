"""
Exact checks of the invariance of the Gibbs measure and of ergodicity.

The stationarity of the measure reduces, state by state, to the equality of
the total exit rate

    S1 = sum_p a_r(p) (1 - q^B_p)(1 - q^(D_p + 1)) / (1 - q^(C_p + 1))

with the weighted entrance rate

    S2 = sum_p a_r(p)+1 (1 - q^(A_p + 1))(1 - q^E_p) / (1 - q^(F_p + 1)).

This module evaluates both sides, the per-move balance relation behind S2,
the algebraic cancellations that prove S1 = S2, the full vector identity
``pi . L = 0`` and the constructive connection between two states.
"""

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from .dimers import Face, Step, crossing, relative_height, to_dimers
from .dynamics import RateFunction, build_generator, predecessor, rate, reverse_moves, reverse_rate
from .enumeration import enumerate_sector
from .errors import MissingPredecessorError, ParameterError, PathError
from .gibbs import GibbsParams, MeasureTable, Representation, measure_table, weight
from .lattice import Configuration, Particle, Sector, neighbor_frame, validate
from .utils.graphs import adjacency, is_strongly_connected, strong_components
from .utils.rng import SeededRNG
from .utils.scalars import Scalar, format_scalar, is_exact, one_minus_q_power, q_power

logger = logging.getLogger(__name__)

IDENTITY_QS = (Fraction(1, 7), Fraction(1, 3), Fraction(1, 2), Fraction(9, 10))


def s1(config: Configuration, params: GibbsParams) -> Scalar:
    """Total exit rate of ``config``."""
    return sum((rate(config, p, params) for p in config.labels()), _zero(params))


def s2_term(config: Configuration, p: Particle, params: GibbsParams) -> Scalar:
    frame = neighbor_frame(config, p)
    q = params.q
    return (
        params.activity(frame.particle.row + 1)
        * one_minus_q_power(q, frame.A + 1)
        * one_minus_q_power(q, frame.E)
        / one_minus_q_power(q, frame.F + 1)
    )


def s2(config: Configuration, params: GibbsParams) -> Scalar:
    """Entrance rate of ``config`` weighted by the Gibbs ratios, in closed form."""
    return sum((s2_term(config, p, params) for p in config.labels()), _zero(params))


def _zero(params: GibbsParams) -> Scalar:
    return Fraction(0) if params.is_exact else 0.0


def _difference(lhs: Scalar, rhs: Scalar) -> Scalar:
    return abs(lhs - rhs)


def _equal(lhs: Scalar, rhs: Scalar, tolerance: float) -> bool:
    if is_exact(lhs) and is_exact(rhs):
        return lhs == rhs
    scale = max(1.0, abs(float(lhs)), abs(float(rhs)))
    return abs(float(lhs) - float(rhs)) <= tolerance * scale


class BalanceResult(NamedTuple):
    particle: Particle
    lhs: Scalar
    rhs: Scalar
    equal: bool


def check_balance(
    config: Configuration,
    p: Particle,
    params: GibbsParams,
    allow_missing: bool = False,
    tolerance: float = 1e-12,
) -> BalanceResult:
    """
    Compares ``pi(eta_p)/pi(eta) * L(eta_p, eta)`` with the closed form
    ``a_r(p)+1 (1 - q^(A+1))(1 - q^E)/(1 - q^(F+1))``.

    With ``allow_missing`` a particle without predecessor contributes
    ``lhs = 0`` and the pair balances only if the closed form vanishes too.

    Raises:
        MissingPredecessorError: if ``eta_p`` does not exist and
            ``allow_missing`` is off.
    """
    p = Particle(*p)
    rhs = s2_term(config, p, params)
    try:
        previous, family = predecessor(config, p)
    except MissingPredecessorError:
        if not allow_missing:
            raise
        lhs = _zero(params)
        return BalanceResult(p, lhs, rhs, _equal(lhs, rhs, tolerance))
    ratio = weight(previous, params).ratio(weight(config, params))
    lhs = ratio * reverse_rate(config, family.extreme, params)
    return BalanceResult(p, lhs, rhs, _equal(lhs, rhs, tolerance))


def reverse_weight_ratio(config: Configuration, p: Particle, params: GibbsParams) -> Scalar:
    """
    ``pi(eta_p)/pi(eta)`` in closed form, from the gaps of ``p`` (top of its
    down-family) and of the lowest member of that family.
    """
    family = predecessor(config, p)[1]
    top = neighbor_frame(config, p)
    low = neighbor_frame(config, family.extreme)
    q = params.q
    numerator = (
        params.activity(top.particle.row + 1)
        * one_minus_q_power(q, low.C)
        * one_minus_q_power(q, top.A + 1)
        * one_minus_q_power(q, top.E)
    )
    denominator = (
        params.activity(low.particle.row)
        * one_minus_q_power(q, low.B + 1)
        * one_minus_q_power(q, low.D)
        * one_minus_q_power(q, top.F + 1)
    )
    return numerator / denominator


@dataclass
class SIdentityReport:
    states: int
    max_difference: Scalar
    failures: List[Dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict:
        return {
            'states': self.states,
            'max_difference': format_scalar(self.max_difference),
            'passed': self.passed,
            'failures': self.failures[:5],
        }


def check_s_identity(states: Iterable[Configuration], params: GibbsParams, tolerance: float = 1e-12) -> SIdentityReport:
    """Evaluates ``|S1 - S2|`` on every state."""
    count = 0
    worst = _zero(params)
    failures = []
    for config in states:
        count += 1
        left, right = s1(config, params), s2(config, params)
        difference = _difference(left, right)
        worst = max(worst, difference)
        if not _equal(left, right, tolerance):
            failures.append({'configuration': config.to_dict(), 's1': format_scalar(left), 's2': format_scalar(right)})
    return SIdentityReport(count, worst, failures)


@dataclass(frozen=True)
class FrameSample:
    """
    Gaps of one particle plus the two auxiliary gaps ``B`` of its right
    neighbour and ``D`` of its up-left neighbour.
    """
    q: Scalar
    A: int
    B: int
    C: int
    D: int
    E: int
    F: int
    b_p1: int
    d_p5: int
    a_r: Scalar = Fraction(1)
    a_r1: Scalar = Fraction(1)

    def __post_init__(self):
        values = (self.A, self.B, self.C, self.D, self.E, self.F, self.b_p1, self.d_p5)
        if any(v < 0 for v in values):
            raise ValueError(f"Gaps must be non-negative, got {values}.")
        if self.B > self.A or self.F > self.A:
            raise ValueError("A frame needs B <= A and F <= A.")
        if self.C > self.D or self.E > self.D:
            raise ValueError("A frame needs C <= D and E <= D.")
        if self.d_p5 < self.D - self.E:
            raise ValueError("A frame needs D_p5 >= D - E.")

    @classmethod
    def random(cls, rng: SeededRNG, q: Scalar, upper: int = 12) -> "FrameSample":
        A = rng.integers(0, upper)
        D = rng.integers(0, upper)
        E = rng.integers(0, D)
        return cls(
            q=q,
            A=A,
            B=rng.integers(0, A),
            C=rng.integers(0, D),
            D=D,
            E=E,
            F=rng.integers(0, A),
            b_p1=rng.integers(0, upper),
            d_p5=rng.integers(D - E, upper),
            a_r=Fraction(rng.integers(1, 5), rng.integers(1, 5)),
            a_r1=Fraction(rng.integers(1, 5), rng.integers(1, 5)),
        )

    @classmethod
    def from_configuration(cls, config: Configuration, p: Particle, params: GibbsParams) -> "FrameSample":
        frame = neighbor_frame(config, p)
        return cls(
            q=params.q,
            A=frame.A, B=frame.B, C=frame.C, D=frame.D, E=frame.E, F=frame.F,
            b_p1=neighbor_frame(config, frame.p1).B,
            d_p5=neighbor_frame(config, frame.p5).D,
            a_r=params.activity(frame.particle.row),
            a_r1=params.activity(frame.particle.row + 1),
        )

    def to_dict(self) -> Dict:
        return {
            'q': format_scalar(self.q), 'A': self.A, 'B': self.B, 'C': self.C, 'D': self.D,
            'E': self.E, 'F': self.F, 'B_p1': self.b_p1, 'D_p5': self.d_p5,
        }


class DerivativeTerms(NamedTuple):
    s10: Scalar
    s11: Scalar
    s20: Scalar
    s21: Scalar

    def differences(self) -> Tuple[Scalar, Scalar]:
        return self.s10 - self.s20, self.s11 - self.s21


def _terms(q, A, B, C, D, E, F, *, d_p1, b_p1, c_p1, c_p6, d_p6, b_p6, b_p5, d_p5, c_p5,
           f_p3, a_p3, e_p3, e_p2, a_p2, f_p2, a_p4, e_p4, f_p4) -> DerivativeTerms:
    def qp(n):
        return q_power(q, n)

    def om(n):
        return one_minus_q_power(q, n)

    s10 = (
        qp(B) * om(D + 1) / om(C + 1)
        - qp(D + 1) * om(B) / om(C + 1)
        + qp(C + 1) * om(B) * om(D + 1) / om(C + 1) ** 2
        + qp(d_p1 + 1) * om(b_p1) / om(c_p1 + 1)
    )
    s11 = (
        - qp(c_p6 + 1) * om(d_p6 + 1) * om(b_p6) / om(c_p6 + 1) ** 2
        - qp(b_p5) * om(d_p5 + 1) / om(c_p5 + 1)
    )
    s20 = (
        qp(f_p3 + 1) * om(a_p3 + 1) * om(e_p3) / om(f_p3 + 1) ** 2
        + qp(e_p2) * om(a_p2 + 1) / om(f_p2 + 1)
    )
    s21 = (
        qp(A + 1) * om(E) / om(F + 1)
        - qp(E) * om(A + 1) / om(F + 1)
        - qp(F + 1) * om(A + 1) * om(E) / om(F + 1) ** 2
        - qp(a_p4 + 1) * om(e_p4) / om(f_p4 + 1)
    )
    return DerivativeTerms(s10, s11, s20, s21)


def derivative_terms(sample: FrameSample) -> DerivativeTerms:
    """
    The four pieces of the derivative of ``S1 - S2`` when one particle is
    slid right, with every neighbour gap written through the gaps of that
    particle and the two auxiliaries.
    """
    A, B, C, D, E, F = sample.A, sample.B, sample.C, sample.D, sample.E, sample.F
    return _terms(
        sample.q, A, B, C, D, E, F,
        d_p1=A, b_p1=sample.b_p1, c_p1=A - B,
        c_p6=F, d_p6=E + F, b_p6=A - F,
        b_p5=E, d_p5=sample.d_p5, c_p5=D - E,
        f_p3=C, a_p3=B + C, e_p3=D - C,
        e_p2=B, a_p2=A + sample.b_p1 - B, f_p2=A - B,
        a_p4=D, e_p4=E + sample.d_p5 - D, f_p4=D - E,
    )


def raw_derivative_terms(config: Configuration, p: Particle, params: GibbsParams) -> DerivativeTerms:
    """The same four pieces read off the actual neighbour frames of ``p``."""
    f = neighbor_frame(config, p)
    f1, f2, f3 = neighbor_frame(config, f.p1), neighbor_frame(config, f.p2), neighbor_frame(config, f.p3)
    f4, f5, f6 = neighbor_frame(config, f.p4), neighbor_frame(config, f.p5), neighbor_frame(config, f.p6)
    return _terms(
        params.q, f.A, f.B, f.C, f.D, f.E, f.F,
        d_p1=f1.D, b_p1=f1.B, c_p1=f1.C,
        c_p6=f6.C, d_p6=f6.D, b_p6=f6.B,
        b_p5=f5.B, d_p5=f5.D, c_p5=f5.C,
        f_p3=f3.F, a_p3=f3.A, e_p3=f3.E,
        e_p2=f2.E, a_p2=f2.A, f_p2=f2.F,
        a_p4=f4.A, e_p4=f4.E, f_p4=f4.F,
    )


@dataclass
class IdentityReport:
    samples: int
    seed: int
    qs: Tuple[Scalar, ...]
    max_difference: Scalar
    failures: List[Dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict:
        return {
            'samples': self.samples,
            'seed': self.seed,
            'q_values': [format_scalar(q) for q in self.qs],
            'max_difference': format_scalar(self.max_difference),
            'passed': self.passed,
            'failures': self.failures[:5],
        }


def degree_bound(upper: int) -> int:
    """
    Degree in q of either difference once its denominators are cleared,
    for frames whose gaps are all at most ``upper``.
    """
    return 4 * upper + 4


def vanishes_identically(sample: FrameSample, upper: int = 12) -> bool:
    """
    True iff both differences vanish as polynomials in q for the gaps of
    ``sample``: they are checked exactly at ``degree_bound(upper) + 1``
    distinct points.
    """
    for k in range(degree_bound(upper) + 1):
        d0, d1 = derivative_terms(replace(sample, q=Fraction(1, k + 2))).differences()
        if d0 != 0 or d1 != 0:
            return False
    return True


def check_identity(
    samples: int = 10_000,
    seed: int = 0,
    qs: Sequence[Scalar] = IDENTITY_QS,
    upper: int = 12,
    tolerance: float = 1e-12,
) -> IdentityReport:
    """
    Evaluates ``S10 - S20`` and ``S11 - S21`` at random frames, cycling
    through ``qs``.

    With exact q every sample must give exactly zero; float q is compared
    against ``tolerance``. :func:`vanishes_identically` upgrades a single
    frame to a check in q.
    """
    rng = SeededRNG(seed)
    worst = Fraction(0) if all(is_exact(q) for q in qs) else 0.0
    failures = []
    for k in range(samples):
        q = qs[k % len(qs)]
        sample = FrameSample.random(rng, q, upper)
        d0, d1 = derivative_terms(sample).differences()
        worst = max(worst, abs(d0), abs(d1))
        zero = (d0 == 0 and d1 == 0) if is_exact(q) else (abs(d0) <= tolerance and abs(d1) <= tolerance)
        if not zero:
            failures.append({'sample': sample.to_dict(), 'S10-S20': format_scalar(d0), 'S11-S21': format_scalar(d1)})
    logger.info(f"Checked {samples} frame samples; max difference {format_scalar(worst)}")
    return IdentityReport(samples, seed, tuple(qs), worst, failures)


@dataclass
class StationarityReport:
    sector: Sector
    params: GibbsParams
    mode: Representation
    residuals: List[Scalar]
    max_residual: Scalar
    tolerance: float
    cross_check_max: Scalar
    states: List[Configuration] = field(default_factory=list, repr=False)
    perturbed: bool = False

    @property
    def passed(self) -> bool:
        if self.mode is Representation.RATIONAL:
            return self.max_residual == 0 and self.cross_check_max == 0
        return float(self.max_residual) <= self.tolerance and float(self.cross_check_max) <= self.tolerance

    def counterexample(self) -> Optional[Dict]:
        if self.passed or not self.residuals:
            return None
        worst = max(range(len(self.residuals)), key=lambda i: abs(self.residuals[i]))
        return {'configuration': self.states[worst].to_dict(), 'residual': format_scalar(self.residuals[worst])}

    def to_dict(self) -> Dict:
        return {
            'sector': self.sector.to_dict(),
            'params': self.params.to_dict(),
            'mode': self.mode.value,
            'states': len(self.residuals),
            'max_residual': format_scalar(self.max_residual),
            'cross_check_max': format_scalar(self.cross_check_max),
            'tolerance': self.tolerance,
            'perturbed': self.perturbed,
            'passed': self.passed,
            'counterexample': self.counterexample(),
        }


def _params_for(params: GibbsParams, mode: Optional[Representation]) -> Tuple[GibbsParams, Representation]:
    if mode is None:
        mode = Representation.RATIONAL if params.is_exact else Representation.FLOAT
    mode = Representation(mode)
    if mode is Representation.RATIONAL:
        if not params.is_exact:
            raise ParameterError("Rational stationarity checks need exact q and activities.")
        return params, mode
    return params.as_float(), mode


def check_stationarity(
    sector: Sector,
    params: GibbsParams,
    mode: Optional[Representation] = None,
    states: Optional[Sequence[Configuration]] = None,
    perturb: Optional[int] = None,
    tolerance: float = 1e-12,
    rate_fn: RateFunction = rate,
    cap: Optional[int] = None,
    threads: int = 1,
    measure: Optional[MeasureTable] = None,
) -> StationarityReport:
    """
    Builds the Gibbs measure and the generator of ``sector`` and evaluates
    ``pi . L`` per state.

    The same identity is cross-checked state by state in the form
    "entrance flow from the enumerated predecessors equals exit rate".
    ``perturb`` doubles the weight of the state with that index first.

    Raises:
        EnumerationLimitError: if the sector is too large to enumerate.
    """
    params.check_rows(sector.N)
    params, mode = _params_for(params, mode)
    if states is None:
        states = enumerate_sector(sector.L, sector.N, sector.m1, sector.m2, cap=cap)
    if measure is None:
        measure = measure_table(states, params, mode)
    if perturb is not None:
        measure = measure.perturbed(perturb)
    pi = measure.probabilities
    generator = build_generator(states, params, rate_fn=rate_fn, threads=threads)
    residuals = generator.left_multiply(pi)
    max_residual = max(abs(r) for r in residuals)

    cross = []
    for i, config in enumerate(states):
        incoming = sum(pi[generator.index[move.predecessor]] * move.rate for move in reverse_moves(config, params))
        cross.append(incoming - pi[i] * generator.exit_rate(i))
    cross_max = max(abs(c) for c in cross)
    report = StationarityReport(
        sector, params, mode, residuals, max_residual, tolerance, cross_max, list(states), perturb is not None,
    )
    logger.info(f"Stationarity on {sector}: max residual {format_scalar(max_residual)} ({mode.value})")
    return report


class ElementaryMove(NamedTuple):
    """The particle at ``(x, row)`` steps to ``x + 1``."""
    row: int
    x: int


def _rotatable_exit(cover, face: Face) -> Optional[Step]:
    for step in (Step.W, Step.N, Step.SE):
        edge, _ = crossing(face, step)
        if not cover.contains(edge):
            return step
    return None


def connect(
    eta: Configuration,
    eta2: Configuration,
    rng: Optional[SeededRNG] = None,
) -> List[ElementaryMove]:
    """
    Single-particle +1 moves carrying ``eta`` to ``eta2``.

    Each round starts at a face where the height of ``eta`` above ``eta2``
    is positive, walks across edges not covered in the current state with
    the white vertex on the left, and rotates the hexagon where the walk
    gets stuck. The move count equals the summed relative height.

    Raises:
        SectorError: if the two configurations lie in different sectors.
        PathError: if a walk closes a loop.
    """
    heights = relative_height(eta, eta2)
    L, N = eta.L, eta.N
    budget = sum(heights.values())
    current = eta
    moves = []
    while any(heights.values()):
        if len(moves) >= budget:
            raise PathError("Connection used more moves than the summed height.")
        positive = [face for face, h in heights.items() if h > 0]
        face = rng.choice(positive) if rng is not None else positive[0]
        cover = to_dimers(current)
        visited = {face}
        while True:
            step = _rotatable_exit(cover, face)
            if step is None:
                break
            face = Face((face.x + step.dx) % L, (face.y + step.dy) % N)
            if face in visited:
                raise PathError(f"Walk over uncovered edges closed a loop at {face}.")
            visited.add(face)
        p = current.particle_at(face.y, face.x)
        current = current.moved({p: face.x + 1})
        heights[face] -= 1
        moves.append(ElementaryMove(face.y, face.x))
    if current != eta2:
        raise PathError("Connection ended away from the target configuration.")
    logger.debug(f"Connected in {len(moves)} moves")
    return moves


def replay(config: Configuration, moves: Iterable[ElementaryMove]) -> List[Configuration]:
    """Every configuration visited when applying ``moves``, starting with ``config``."""
    visited = [config]
    current = config
    for move in moves:
        p = current.particle_at(move.row, move.x)
        current = current.moved({p: move.x + 1}, keep_sector=False)
        visited.append(current)
    return visited


def transition_graph(states: Sequence[Configuration], params: GibbsParams, threads: int = 1):
    generator = build_generator(states, params, threads=threads)
    edges = [(i, j) for i, j, value in generator.entries() if value > 0]
    return adjacency(len(states), edges)


def check_ergodicity(
    sector: Sector,
    params: GibbsParams,
    states: Optional[Sequence[Configuration]] = None,
    cap: Optional[int] = None,
    threads: int = 1,
) -> bool:
    """True iff the positive-rate transitions connect every pair of states of ``sector``."""
    if states is None:
        states = enumerate_sector(sector.L, sector.N, sector.m1, sector.m2, cap=cap)
    graph = transition_graph(states, params, threads)
    connected = is_strongly_connected(graph)
    logger.info(f"Transition graph of {sector}: {len(strong_components(graph))} strong component(s)")
    return connected


def total_variation(p: Dict[str, float], q: Dict[str, float]) -> float:
    """Total-variation distance between two distributions keyed alike."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(float(p.get(k, 0.0)) - float(q.get(k, 0.0))) for k in keys)


def replay_is_valid(config: Configuration, moves: Iterable[ElementaryMove]) -> bool:
    return all(validate(state) for state in replay(config, moves))
