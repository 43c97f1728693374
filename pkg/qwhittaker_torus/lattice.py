"""
Particle picture of the interlaced system on the discrete torus Z/LZ x Z/NZ.

Each of the N rows carries m1 particles. Particle labels are ``(row, index)``
pairs fixed at construction; moves change positions, never labels. Two
configurations are equal when their occupation functions agree, whatever the
labelling.

Row ``r - 1`` (mod N) is the row *below* row ``r``. The six neighbours of a
particle p at position x are, clockwise from the right: p1 (right, same row),
p2 (down-right), p3 (down-left), p4 (left, same row), p5 (up-left) and p6
(up-right), with horizontal gaps

    A = x1 - x - 1,  B = x2 - x - 1,  C = x - x3,
    D = x - x4 - 1,  E = x - x5 - 1,  F = x6 - x,

all reduced to [0, L).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from .errors import (
    InvalidConfigurationError,
    ParticleReferenceError,
    SectorError,
    StructuralError,
)

logger = logging.getLogger(__name__)


class Particle(NamedTuple):
    """Stable particle label."""
    row: int
    index: int


def check_sector_bounds(L: int, N: int, m1: int, m2: int) -> None:
    """Raises SectorError naming the first violated bound."""
    for name, value in (('L', L), ('N', N), ('m1', m1), ('m2', m2)):
        if not isinstance(value, int) or isinstance(value, bool):
            raise SectorError(f"{name} must be an integer, got {value!r}.")
    if L < 1 or N < 1:
        raise SectorError(f"L and N must be positive, got L={L}, N={N}.")
    if not 1 < m1 < L:
        raise SectorError(f"m1 must satisfy 1 < m1 < L (m1 > 1 is required), got m1={m1}, L={L}.")
    if not 1 <= m2 < N:
        raise SectorError(f"m2 must satisfy 1 <= m2 < N, got m2={m2}, N={N}.")
    total = Fraction(m1, L) + Fraction(m2, N)
    if total >= 1:
        raise SectorError(
            f"sector requires m1/L + m2/N < 1, got {m1}/{L} + {m2}/{N} = {total}."
        )


@dataclass(frozen=True)
class Sector:
    """Torus dimensions and the two conserved quantities (m1, m2)."""
    L: int
    N: int
    m1: int
    m2: int

    def __post_init__(self):
        check_sector_bounds(self.L, self.N, self.m1, self.m2)

    @property
    def n1(self) -> int:
        """Number of vertical dimers (particles)."""
        return self.N * self.m1

    @property
    def n2(self) -> int:
        """Number of north-west dimers."""
        return self.L * self.m2

    @property
    def n3(self) -> int:
        """Number of north-east dimers."""
        return self.N * self.L - self.n1 - self.n2

    @property
    def Nh(self) -> int:
        """Primitive horizontal winding of the up-right loop."""
        return self.m2 // gcd(self.m1, self.m2)

    @property
    def Nv(self) -> int:
        """Primitive vertical winding of the up-right loop."""
        return self.m1 // gcd(self.m1, self.m2)

    @property
    def candidate_bound(self) -> int:
        return comb(self.L, self.m1) ** self.N

    def to_dict(self) -> Dict[str, int]:
        return {
            'L': self.L, 'N': self.N, 'm1': self.m1, 'm2': self.m2,
            'n1': self.n1, 'n2': self.n2, 'Nh': self.Nh, 'Nv': self.Nv,
        }


class Configuration:
    """
    Interlaced particle positions with stable labels.

    ``rows[r][i]`` is the position of particle ``(r, i)``. Instances are
    immutable; moves return new configurations with the same labels.
    """

    __slots__ = ('L', 'N', 'rows', '_sector', '_occupation', '_frames')

    def __init__(self, L: int, N: int, rows: Sequence[Sequence[int]], sector: Optional[Sector] = None):
        if not isinstance(L, int) or not isinstance(N, int) or L < 1 or N < 1:
            raise StructuralError(f"Torus dimensions must be positive integers, got L={L!r}, N={N!r}.")
        rows = tuple(tuple(int(x) for x in row) for row in rows)
        if len(rows) != N:
            raise StructuralError(f"Expected {N} rows, got {len(rows)}.")
        lengths = {len(row) for row in rows}
        if len(lengths) != 1:
            raise StructuralError(f"Rows must all hold the same number of particles, got lengths {sorted(lengths)}.")
        if not rows[0]:
            raise StructuralError("Rows must not be empty.")
        for r, row in enumerate(rows):
            for x in row:
                if not 0 <= x < L:
                    raise StructuralError(f"Position {x} on row {r} is outside [0, {L}).")
        self.L = L
        self.N = N
        self.rows = rows
        self._sector = sector
        self._occupation = None
        self._frames = {}

    # --- constructors ---

    @classmethod
    def from_rows(
        cls, L: int, N: int, rows: Sequence[Iterable[int]], sector: Optional[Sector] = None,
    ) -> "Configuration":
        """Labels each row in increasing position order."""
        return cls(L, N, [sorted(int(x) for x in row) for row in rows], sector=sector)

    @classmethod
    def from_occupation(cls, L: int, N: int, masks: Sequence[int], sector: Optional[Sector] = None) -> "Configuration":
        rows = [[x for x in range(L) if (mask >> x) & 1] for mask in masks]
        return cls(L, N, rows, sector=sector)

    @classmethod
    def from_hex(cls, L: int, N: int, text: str) -> "Configuration":
        try:
            masks = [int(part, 16) for part in text.split('.')]
        except ValueError:
            raise StructuralError(f"'{text}' is not an occupation hex string.")
        if len(masks) != N or any(mask >> L for mask in masks):
            raise StructuralError(f"Occupation string '{text}' does not fit an {L}x{N} torus.")
        return cls.from_occupation(L, N, masks)

    @classmethod
    def from_dict(cls, data: Dict) -> "Configuration":
        """Reads ``{"L", "N", "rows"}`` or ``{"L", "N", "occupation"}``."""
        try:
            L, N = int(data['L']), int(data['N'])
        except (KeyError, TypeError, ValueError):
            raise StructuralError("Configuration objects need integer 'L' and 'N' fields.")
        if 'rows' in data:
            return cls.from_rows(L, N, data['rows'])
        if 'occupation' in data:
            return cls.from_hex(L, N, data['occupation'])
        raise StructuralError("Configuration objects need a 'rows' or an 'occupation' field.")

    # --- accessors ---

    @property
    def m1(self) -> int:
        return len(self.rows[0])

    @property
    def occupation(self) -> Tuple[int, ...]:
        """One L-bit word per row, row 0 first; bit x is set iff site x is occupied."""
        if self._occupation is None:
            self._occupation = tuple(sum(1 << x for x in set(row)) for row in self.rows)
        return self._occupation

    @property
    def occupation_hex(self) -> str:
        width = (self.L + 3) // 4
        return '.'.join(f"{mask:0{width}x}" for mask in self.occupation)

    @property
    def sector(self) -> Sector:
        if self._sector is None:
            self._sector = sector_of(self)
        return self._sector

    def labels(self) -> Iterator[Particle]:
        for r, row in enumerate(self.rows):
            for i in range(len(row)):
                yield Particle(r, i)

    def position(self, p: Particle) -> int:
        try:
            r, i = p
            if r < 0 or i < 0:
                raise IndexError
            return self.rows[r][i]
        except (IndexError, TypeError, ValueError):
            raise ParticleReferenceError(f"No particle labelled {p!r}.")

    def particle_at(self, row: int, x: int) -> Particle:
        """Label of the particle sitting at ``(x, row)``."""
        try:
            return Particle(row, self.rows[row].index(x))
        except (ValueError, IndexError):
            raise ParticleReferenceError(f"No particle at site ({x}, {row}).")

    def moved(self, updates: Dict[Particle, int], keep_sector: bool = True) -> "Configuration":
        """New configuration with some particles at new positions, labels unchanged."""
        rows = [list(row) for row in self.rows]
        for p, x in updates.items():
            self.position(p)
            rows[p.row][p.index] = x % self.L
        return Configuration(self.L, self.N, rows, sector=self._sector if keep_sector else None)

    def shifted(self, dx: int = 0, dy: int = 0) -> "Configuration":
        """Translates every particle by ``dx`` columns and ``dy`` rows."""
        rows = [None] * self.N
        for r, row in enumerate(self.rows):
            rows[(r + dy) % self.N] = [(x + dx) % self.L for x in row]
        return Configuration(self.L, self.N, rows, sector=self._sector)

    def to_dict(self) -> Dict:
        return {'L': self.L, 'N': self.N, 'rows': [sorted(row) for row in self.rows]}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return (self.L, self.N, self.occupation) == (other.L, other.N, other.occupation)

    def __hash__(self) -> int:
        return hash((self.L, self.N, self.occupation))

    def __repr__(self) -> str:
        return f"Configuration(L={self.L}, N={self.N}, rows={[sorted(r) for r in self.rows]})"


@dataclass(frozen=True)
class NeighborFrame:
    """The six neighbours of a particle and the gaps A..F to them."""
    particle: Particle
    p1: Particle
    p2: Particle
    p3: Particle
    p4: Particle
    p5: Particle
    p6: Particle
    A: int
    B: int
    C: int
    D: int
    E: int
    F: int


def _unique_in_window(config: Configuration, row: int, x: int, lo: int, hi: int, forward: bool) -> Tuple[Particle, int]:
    """
    The only particle of ``row`` whose offset from x lies in [lo, hi].

    The offset is ``(y - x) % L`` when ``forward`` and ``(x - y) % L`` otherwise.
    """
    L = config.L
    hits = []
    for j, y in enumerate(config.rows[row]):
        offset = (y - x) % L if forward else (x - y) % L
        if lo <= offset <= hi:
            hits.append((Particle(row, j), offset))
    if len(hits) != 1:
        raise InvalidConfigurationError(
            f"Interlacing broken near site ({x}, {row}): {len(hits)} particles in the window."
        )
    return hits[0]


def neighbor_frame(config: Configuration, p: Particle) -> NeighborFrame:
    """Neighbours p1..p6 of ``p`` and the gaps A..F."""
    cached = config._frames.get(p)
    if cached is not None:
        return cached
    x = config.position(p)
    p = Particle(*p)
    L, N, m1 = config.L, config.N, config.m1
    if m1 < 2:
        raise InvalidConfigurationError("Neighbour frames need at least two particles per row.")
    p1 = Particle(p.row, (p.index + 1) % m1)
    p4 = Particle(p.row, (p.index - 1) % m1)
    A = (config.position(p1) - x - 1) % L
    D = (x - config.position(p4) - 1) % L
    below = (p.row - 1) % N
    above = (p.row + 1) % N
    p2, off2 = _unique_in_window(config, below, x, 1, A + 1, forward=True)
    p3, C = _unique_in_window(config, below, x, 0, D, forward=False)
    p5, off5 = _unique_in_window(config, above, x, 1, D + 1, forward=False)
    p6, F = _unique_in_window(config, above, x, 0, A, forward=True)
    frame = NeighborFrame(p, p1, p2, p3, p4, p5, p6, A, off2 - 1, C, D, off5 - 1, F)
    config._frames[p] = frame
    return frame


def is_interlaced(config: Configuration) -> bool:
    """Every row has distinct sites and every particle sees one p2 and one p3 below."""
    L, N = config.L, config.N
    if config.m1 < 2:
        return False
    for row in config.rows:
        if len(set(row)) != len(row):
            return False
    for r, row in enumerate(config.rows):
        below = config.rows[(r - 1) % N]
        m1 = len(row)
        for i, x in enumerate(row):
            x1 = row[(i + 1) % m1]
            x4 = row[(i - 1) % m1]
            A = (x1 - x - 1) % L
            D = (x - x4 - 1) % L
            down_right = sum(1 for y in below if 1 <= (y - x) % L <= A + 1)
            down_left = sum(1 for y in below if (x - y) % L <= D)
            if down_right != 1 or down_left != 1:
                return False
    return True


@dataclass(frozen=True)
class GammaLoop:
    """The closed chain of up-right neighbours through a particle."""
    particles: Tuple[Particle, ...]
    horizontal_displacement: int
    Nh: int
    Nv: int

    def m2(self, m1: int) -> Fraction:
        return Fraction(m1 * self.Nh, self.Nv)


def gamma_loop(config: Configuration, start: Particle = Particle(0, 0)) -> GammaLoop:
    """Follows up-right neighbours from ``start`` until the chain closes."""
    start = Particle(*start)
    config.position(start)
    visited = [start]
    displacement = 0
    current = start
    for _ in range(config.N * config.m1):
        frame = neighbor_frame(config, current)
        displacement += frame.F
        current = frame.p6
        if current == start:
            steps = len(visited)
            return GammaLoop(tuple(visited), displacement, displacement // config.L, steps // config.N)
        visited.append(current)
    raise InvalidConfigurationError("The up-right chain does not close into a simple loop.")


def _compute_sector(config: Configuration) -> Sector:
    if not is_interlaced(config):
        raise InvalidConfigurationError("Configuration is not interlaced.")
    loop = gamma_loop(config)
    if loop.Nv == 0:
        raise InvalidConfigurationError("Up-right loop has no vertical winding.")
    m2 = loop.m2(config.m1)
    if m2.denominator != 1:
        raise InvalidConfigurationError(f"Winding ratio gives non-integer m2 = {m2}.")
    try:
        return Sector(config.L, config.N, config.m1, int(m2))
    except SectorError as e:
        raise InvalidConfigurationError(f"Configuration lies outside every admissible sector: {e}") from e


def sector_of(config: Configuration) -> Sector:
    """Sector of a valid configuration, read off the winding of the up-right loop."""
    if config._sector is not None:
        return config._sector
    sector = _compute_sector(config)
    config._sector = sector
    return sector


def validate(config: Configuration) -> bool:
    """
    True iff the configuration is interlaced and sits in an admissible sector.

    Interlaced configurations whose up-right loop is purely vertical (m2 = 0,
    no north-west dimer) or that saturate m1/L + m2/N = 1 are rejected.
    """
    try:
        sector = _compute_sector(config)
    except InvalidConfigurationError as e:
        logger.debug(f"Validation failed: {e}")
        return False
    if config._sector is not None and config._sector != sector:
        logger.debug(f"Stored sector {config._sector} disagrees with computed {sector}.")
        return False
    return True


def allowed_positions(config: Configuration, p: Particle) -> List[int]:
    """Positions p may occupy with every other particle fixed, left to right."""
    frame = neighbor_frame(config, p)
    x = config.position(p)
    low = -min(frame.C, frame.E)
    high = min(frame.B, frame.F)
    return [(x + k) % config.L for k in range(low, high + 1)]


def canonical_configuration(sector: Sector) -> Configuration:
    """
    A valid configuration of ``sector`` built from evenly tilted rows.

    Particle i of row y sits at floor((i L N + y m2 L) / (m1 N)) mod L.
    """
    L, N, m1, m2 = sector.L, sector.N, sector.m1, sector.m2
    rows = []
    for y in range(N):
        rows.append(sorted(((i * L * N + y * m2 * L) // (m1 * N)) % L for i in range(m1)))
    config = Configuration(L, N, rows)
    computed = sector_of(config)
    if computed != sector:
        raise InvalidConfigurationError(f"Canonical construction landed in {computed}, expected {sector}.")
    return config
