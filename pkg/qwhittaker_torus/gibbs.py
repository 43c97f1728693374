"""
Gibbs measure on a sector: q-Pochhammer symbols, the unnormalised weight of a
configuration, one-particle conditional laws and normalised measure tables.

Every routine works in one of three representations:

  - ``rational``: exact ``Fraction`` arithmetic, used for verification;
  - ``float``: plain floats, used for simulation;
  - ``log``: natural logarithms of the weights, for tori where products
    under- or overflow.
"""

import logging
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import logsumexp
from tqdm import tqdm

from .errors import ParameterError
from .lattice import Configuration, NeighborFrame, Particle, allowed_positions, neighbor_frame
from .utils.scalars import Scalar, all_exact, format_scalar, is_exact, parse_scalar, parse_scalar_list

logger = logging.getLogger(__name__)


class Representation(str, Enum):
    RATIONAL = "rational"
    FLOAT = "float"
    LOG = "log"


class Denominator(str, Enum):
    """Which pair of Pochhammer symbols divides each particle factor."""
    BC = "BC"
    EF = "EF"


@dataclass(frozen=True)
class GibbsParams:
    """``q`` in [0, 1) and one positive activity per row (``a[r]`` for row r)."""
    q: Scalar
    a: Tuple[Scalar, ...]

    def __post_init__(self):
        q = Fraction(self.q) if isinstance(self.q, int) else self.q
        a = tuple(Fraction(x) if isinstance(x, int) else x for x in self.a)
        if not 0 <= q < 1:
            raise ParameterError(f"q must satisfy 0 <= q < 1, got {format_scalar(q)}.")
        if not a:
            raise ParameterError("At least one row activity is required.")
        for k, value in enumerate(a):
            if value <= 0:
                raise ParameterError(f"Activity a[{k}] must be positive, got {format_scalar(value)}.")
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'a', a)

    @classmethod
    def from_strings(cls, q: str, a: str) -> "GibbsParams":
        """``q="1/2"``, ``a="1,2"``; exactness follows the syntax of each entry."""
        return cls(parse_scalar(q), tuple(parse_scalar_list(a)))

    @property
    def N(self) -> int:
        return len(self.a)

    @property
    def is_exact(self) -> bool:
        return is_exact(self.q) and all_exact(self.a)

    def activity(self, row: int) -> Scalar:
        return self.a[row % len(self.a)]

    def check_rows(self, N: int) -> None:
        if len(self.a) != N:
            raise ParameterError(f"Expected {N} row activities, got {len(self.a)}.")

    def as_float(self) -> "GibbsParams":
        return GibbsParams(float(self.q), tuple(float(x) for x in self.a))

    def to_dict(self) -> Dict:
        return {'q': format_scalar(self.q), 'a': [format_scalar(x) for x in self.a]}


def default_representation(params: GibbsParams) -> Representation:
    return Representation.RATIONAL if params.is_exact else Representation.FLOAT


def _resolve(
    params: GibbsParams, representation: Optional[Union[Representation, str]],
) -> Tuple[GibbsParams, Representation]:
    if representation is None:
        return params, default_representation(params)
    representation = Representation(representation)
    if representation is Representation.RATIONAL:
        if not params.is_exact:
            raise ParameterError("Rational arithmetic needs exact q and activities (write them as 'p/r').")
        return params, representation
    return params.as_float(), representation


@dataclass(frozen=True)
class Weight:
    """A positive weight; for the log representation ``value`` holds its logarithm."""
    value: Scalar
    representation: Representation

    def as_float(self) -> float:
        if self.representation is Representation.LOG:
            return math.exp(self.value)
        return float(self.value)

    def log(self) -> float:
        if self.representation is Representation.LOG:
            return float(self.value)
        return math.log(self.value)

    def ratio(self, other: "Weight") -> Scalar:
        """``self / other`` in the common representation (a float for log weights)."""
        if self.representation is not other.representation:
            raise ParameterError("Cannot compare weights held in different representations.")
        if self.representation is Representation.LOG:
            return math.exp(self.value - other.value)
        return self.value / other.value


# q -> [(q;q)_0, (q;q)_1, ...], extended on demand
_EXACT_PREFIXES: Dict[Fraction, List[Fraction]] = {}
_EXACT_LOCK = threading.Lock()


def _exact_pochhammer(q: Fraction, n: int) -> Fraction:
    with _EXACT_LOCK:
        prefix = _EXACT_PREFIXES.setdefault(q, [Fraction(1)])
        while len(prefix) <= n:
            k = len(prefix)
            prefix.append(prefix[-1] * (1 - q ** k))
        return prefix[n]


def q_pochhammer(q: Scalar, n: int) -> Scalar:
    """``(q;q)_n = (1 - q)(1 - q^2)...(1 - q^n)``, with ``(q;q)_0 = 1``."""
    if n < 0:
        raise ParameterError(f"(q;q)_n needs n >= 0, got {n}.")
    if is_exact(q):
        return _exact_pochhammer(Fraction(q), n)
    value = 1.0
    for j in range(1, n + 1):
        value *= 1.0 - q ** j
    return value


def log_q_pochhammer(q: float, n: int) -> float:
    if n < 0:
        raise ParameterError(f"(q;q)_n needs n >= 0, got {n}.")
    q = float(q)
    return sum(math.log1p(-q ** j) for j in range(1, n + 1))


def _activity_exponent(frame: NeighborFrame, alpha: int) -> int:
    return alpha * frame.C - (1 - alpha) * frame.B


def particle_factor(
    frame: NeighborFrame,
    activity: Scalar,
    q: Scalar,
    representation: Representation,
    denominator: Denominator = Denominator.BC,
    alpha: int = 1,
) -> Scalar:
    """One particle's share of the weight, in the requested representation."""
    low1, low2 = (frame.B, frame.C) if denominator is Denominator.BC else (frame.E, frame.F)
    exponent = _activity_exponent(frame, alpha)
    if representation is Representation.LOG:
        return (
            exponent * math.log(activity)
            + log_q_pochhammer(q, frame.A)
            - log_q_pochhammer(q, low1)
            - log_q_pochhammer(q, low2)
        )
    return activity ** exponent * q_pochhammer(q, frame.A) / (q_pochhammer(q, low1) * q_pochhammer(q, low2))


def weight(
    config: Configuration,
    params: GibbsParams,
    representation: Optional[Union[Representation, str]] = None,
    denominator: Union[Denominator, str] = Denominator.BC,
    alpha: int = 1,
) -> Weight:
    """
    Unnormalised Gibbs weight ``prod_p a_r(p)^C_p (q;q)_A_p / ((q;q)_B_p (q;q)_C_p)``.

    Args:
        config: a valid configuration.
        params: q and the row activities.
        representation: defaults to rational for exact params and float otherwise.
        denominator: ``"EF"`` divides by ``(q;q)_E (q;q)_F`` instead; the
            normalised measure is unchanged.
        alpha: integer gauge; the activity exponent becomes
            ``alpha C - (1 - alpha) B``, which changes the weight only by a
            constant per sector.

    Raises:
        InvalidConfigurationError: if the configuration is not valid.
        ParameterError: for rational arithmetic on float parameters or a
            wrong number of activities.
    """
    params.check_rows(config.N)
    config.sector  # raises for invalid configurations
    params, representation = _resolve(params, representation)
    denominator = Denominator(denominator)
    if representation is Representation.LOG:
        total = 0.0
    else:
        total = Fraction(1) if representation is Representation.RATIONAL else 1.0
    for p in config.labels():
        factor = particle_factor(
            neighbor_frame(config, p), params.activity(p.row), params.q, representation, denominator, alpha
        )
        if representation is Representation.LOG:
            total += factor
        else:
            total *= factor
    return Weight(total, representation)


def conditional_weight(
    config: Configuration,
    p: Particle,
    params: GibbsParams,
    representation: Optional[Union[Representation, str]] = None,
) -> Weight:
    """
    Weight of ``p``'s position given all other particles:
    ``a_r^C a_{r+1}^F (q;q)_A (q;q)_D / ((q;q)_B (q;q)_C (q;q)_E (q;q)_F)``.
    """
    params.check_rows(config.N)
    frame = neighbor_frame(config, p)
    params, representation = _resolve(params, representation)
    q = params.q
    a_r = params.activity(frame.particle.row)
    a_up = params.activity(frame.particle.row + 1)
    if representation is Representation.LOG:
        value = (
            frame.C * math.log(a_r) + frame.F * math.log(a_up)
            + log_q_pochhammer(q, frame.A) + log_q_pochhammer(q, frame.D)
            - sum(log_q_pochhammer(q, n) for n in (frame.B, frame.C, frame.E, frame.F))
        )
        return Weight(value, representation)
    numerator = a_r ** frame.C * a_up ** frame.F * q_pochhammer(q, frame.A) * q_pochhammer(q, frame.D)
    denominator = 1
    for n in (frame.B, frame.C, frame.E, frame.F):
        denominator *= q_pochhammer(q, n)
    return Weight(numerator / denominator, representation)


def conditional_law(
    config: Configuration,
    p: Particle,
    params: GibbsParams,
    representation: Optional[Union[Representation, str]] = None,
) -> List[Tuple[int, Scalar]]:
    """Normalised law of ``p``'s position over its allowed positions, others fixed."""
    p = Particle(*p)
    params, representation = _resolve(params, representation)
    if representation is Representation.LOG:
        representation = Representation.FLOAT
    positions = allowed_positions(config, p)
    values = [
        conditional_weight(config.moved({p: x}), p, params, representation).value
        for x in positions
    ]
    total = sum(values)
    return [(x, v / total) for x, v in zip(positions, values)]


@dataclass
class MeasureTable:
    """Normalised Gibbs measure over an enumerated list of states."""
    states: List[Configuration]
    weights: List[Weight]
    probabilities: List[Scalar]
    representation: Representation
    _index: Dict[Configuration, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {state: i for i, state in enumerate(self.states)}

    def __len__(self) -> int:
        return len(self.states)

    def probability(self, config: Configuration) -> Scalar:
        return self.probabilities[self._index[config]]

    def total(self) -> Scalar:
        return sum(self.probabilities)

    def perturbed(self, index: int = 0, factor: Scalar = 2) -> "MeasureTable":
        """The measure obtained by multiplying one state's weight by ``factor`` and renormalising."""
        if self.representation is Representation.LOG:
            weights = list(self.weights)
            weights[index] = Weight(weights[index].value + math.log(factor), Representation.LOG)
            return _normalise(self.states, weights, self.representation)
        weights = list(self.weights)
        weights[index] = Weight(weights[index].value * factor, self.representation)
        return _normalise(self.states, weights, self.representation)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for state, w, prob in zip(self.states, self.weights, self.probabilities):
            if self.representation is Representation.RATIONAL:
                numerator, denominator = w.value.numerator, w.value.denominator
            else:
                numerator, denominator = repr(w.as_float()), 1
            rows.append({
                'occupation': state.occupation_hex,
                'weight_numerator': str(numerator),
                'weight_denominator': str(denominator),
                'probability': float(prob),
            })
        return pd.DataFrame(rows, columns=['occupation', 'weight_numerator', 'weight_denominator', 'probability'])

    def to_csv(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False, float_format='%.17g')
        logger.info(f"Measure table with {len(self)} states written to {path}")


def _normalise(states: List[Configuration], weights: List[Weight], representation: Representation) -> MeasureTable:
    if representation is Representation.LOG:
        logs = np.array([w.value for w in weights])
        log_z = logsumexp(logs)
        probabilities = [float(v) for v in np.exp(logs - log_z)]
    else:
        z = sum(w.value for w in weights)
        probabilities = [w.value / z for w in weights]
    return MeasureTable(list(states), weights, probabilities, representation)


def measure_table(
    states: Sequence[Configuration],
    params: GibbsParams,
    representation: Optional[Union[Representation, str]] = None,
    denominator: Union[Denominator, str] = Denominator.BC,
    alpha: int = 1,
    progress: bool = False,
) -> MeasureTable:
    """
    Normalises the Gibbs weights over ``states``.

    Raises:
        ParameterError: if ``states`` is empty.
    """
    if not states:
        raise ParameterError("Cannot normalise a measure over an empty list of states.")
    params, representation = _resolve(params, representation)
    weights = [
        weight(state, params, representation, denominator, alpha)
        for state in tqdm(states, desc="Weights", unit="state", disable=not progress)
    ]
    table = _normalise(states, weights, representation)
    logger.debug(f"Measure table: {len(table)} states, {representation.value} arithmetic")
    return table
