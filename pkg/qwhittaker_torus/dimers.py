"""
Dimer picture: perfect matchings of the periodised hexagonal lattice, face
paths and height functions.

Coordinates. The white vertex ``w(x, y)`` is the bottom end of the vertical
edge ``V(x, y)`` and the black vertex ``b(x, y)`` its top end. Every white
vertex has three edges, named by their orientation:

    V(x, y)  = w(x, y) - b(x, y)          vertical ("particle" when occupied)
    NE(x, y) = w(x, y) - b(x, y - 1)
    NW(x, y) = w(x, y) - b(x + 1, y - 1)

Face ``f(x, y)`` is the hexagon between ``V(x, y)`` and ``V(x + 1, y)``.
Its six neighbours and the edges crossed to reach them::

         f(x-1,y+1)   f(x,y+1)
              NE(x,y+1)  NW(x,y+1)
    f(x-1,y) V(x,y) [f(x,y)] V(x+1,y) f(x+1,y)
               NW(x,y)   NE(x+1,y)
          f(x,y-1)       f(x+1,y-1)

A crossing counts +1 when the white vertex of the crossed edge is on the
right of the walker and -1 when it is on the left.
"""

import logging
from collections import Counter, deque
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, List, NamedTuple, Sequence, Tuple

from .errors import InvalidConfigurationError, PathError, SectorError
from .lattice import Configuration, Sector

logger = logging.getLogger(__name__)


class EdgeKind(str, Enum):
    VERTICAL = "V"
    NE = "NE"
    NW = "NW"


class Edge(NamedTuple):
    """An edge named by its kind and its white end point ``w(x, y)``."""
    kind: EdgeKind
    x: int
    y: int


class Face(NamedTuple):
    x: int
    y: int


class Step(Enum):
    """Unit moves between adjacent faces, as (dx, dy) in face coordinates."""
    E = (1, 0)
    W = (-1, 0)
    N = (0, 1)
    S = (0, -1)
    NW = (-1, 1)
    SE = (1, -1)

    @property
    def dx(self) -> int:
        return self.value[0]

    @property
    def dy(self) -> int:
        return self.value[1]


def crossing(face: Face, step: Step) -> Tuple[Edge, int]:
    """Edge crossed by ``step`` out of ``face`` and its sign (unwrapped coordinates)."""
    x, y = face
    if step is Step.E:
        return Edge(EdgeKind.VERTICAL, x + 1, y), +1
    if step is Step.W:
        return Edge(EdgeKind.VERTICAL, x, y), -1
    if step is Step.N:
        return Edge(EdgeKind.NW, x, y + 1), -1
    if step is Step.S:
        return Edge(EdgeKind.NW, x, y), +1
    if step is Step.NW:
        return Edge(EdgeKind.NE, x, y + 1), +1
    return Edge(EdgeKind.NE, x + 1, y), -1


@dataclass(frozen=True)
class DimerCover:
    """Perfect matching given by the edge kind used by every white vertex."""
    sector: Sector
    matching: Tuple[Tuple[EdgeKind, ...], ...]

    @property
    def L(self) -> int:
        return self.sector.L

    @property
    def N(self) -> int:
        return self.sector.N

    def kind_at(self, x: int, y: int) -> EdgeKind:
        return self.matching[y % self.N][x % self.L]

    def contains(self, edge: Edge) -> bool:
        return self.kind_at(edge.x, edge.y) == edge.kind

    def counts(self) -> Counter:
        return Counter(kind for row in self.matching for kind in row)

    def vertical_positions(self, y: int) -> List[int]:
        return [x for x, kind in enumerate(self.matching[y % self.N]) if kind == EdgeKind.VERTICAL]

    @property
    def k1(self) -> int:
        """Vertical dimers per row (checked to be row independent)."""
        per_row = {len(self.vertical_positions(y)) for y in range(self.N)}
        if len(per_row) != 1:
            raise InvalidConfigurationError(f"Vertical dimers per row are not constant: {sorted(per_row)}.")
        return per_row.pop()

    @property
    def k2(self) -> int:
        """North-west dimers per column (checked to be column independent)."""
        per_column = {
            sum(1 for y in range(self.N) if self.matching[y][x] == EdgeKind.NW)
            for x in range(self.L)
        }
        if len(per_column) != 1:
            raise InvalidConfigurationError(f"North-west dimers per column are not constant: {sorted(per_column)}.")
        return per_column.pop()

    def is_perfect_matching(self) -> bool:
        L, N = self.L, self.N
        blacks = Counter()
        for y, row in enumerate(self.matching):
            for x, kind in enumerate(row):
                if kind == EdgeKind.VERTICAL:
                    blacks[(x, y)] += 1
                elif kind == EdgeKind.NE:
                    blacks[(x, (y - 1) % N)] += 1
                else:
                    blacks[((x + 1) % L, (y - 1) % N)] += 1
        return len(blacks) == L * N and all(count == 1 for count in blacks.values())


def _pair_run(run: List[int], kinds: List, L: int) -> None:
    if len(run) % 2:
        raise InvalidConfigurationError("Free vertices between two vertical dimers cannot be matched.")
    for j in range(0, len(run), 2):
        a = run[j]
        if a % 2 == 0:
            # b(x) followed by w(x)
            kinds[(a // 2) % L] = EdgeKind.NE
        else:
            # w(x) followed by b(x + 1)
            kinds[(a // 2) % L] = EdgeKind.NW


def to_dimers(config: Configuration) -> DimerCover:
    """Places a vertical dimer at every particle and completes the unique perfect matching."""
    sector = config.sector
    L, N = config.L, config.N
    matching = []
    for y in range(N):
        whites = set(config.rows[y])
        blacks = set(config.rows[(y - 1) % N])
        kinds = [None] * L
        for x in whites:
            kinds[x] = EdgeKind.VERTICAL
        # around the zigzag b(0) w(0) b(1) w(1) ... between rows y-1 and y
        taken = [(k // 2) in (blacks if k % 2 == 0 else whites) for k in range(2 * L)]
        start = taken.index(True)
        run = []
        for step in range(1, 2 * L + 1):
            k = (start + step) % (2 * L)
            if taken[k]:
                _pair_run(run, kinds, L)
                run = []
            else:
                run.append(k)
        matching.append(tuple(kinds))
    cover = DimerCover(sector, tuple(matching))
    logger.debug(f"Dimer cover counts: {dict(cover.counts())}")
    return cover


def from_dimers(cover: DimerCover) -> Configuration:
    rows = [cover.vertical_positions(y) for y in range(cover.N)]
    return Configuration.from_rows(cover.L, cover.N, rows, sector=cover.sector)


@dataclass(frozen=True)
class FacePath:
    """A start face and unit steps, in unwrapped face coordinates."""
    start: Face
    steps: Tuple[Step, ...]

    @classmethod
    def from_faces(cls, faces: Sequence[Tuple[int, int]]) -> "FacePath":
        """Builds a path from consecutive faces given in unwrapped coordinates."""
        if not faces:
            raise PathError("A face path needs at least a start face.")
        by_delta = {step.value: step for step in Step}
        steps = []
        for (x0, y0), (x1, y1) in zip(faces, faces[1:]):
            step = by_delta.get((x1 - x0, y1 - y0))
            if step is None:
                raise PathError(f"Faces ({x0}, {y0}) and ({x1}, {y1}) are not adjacent.")
            steps.append(step)
        return cls(Face(*faces[0]), tuple(steps))

    @classmethod
    def horizontal_loop(cls, start: Face, L: int) -> "FacePath":
        return cls(Face(*start), (Step.E,) * L)

    @classmethod
    def vertical_loop(cls, start: Face, N: int) -> "FacePath":
        return cls(Face(*start), (Step.N,) * N)

    def faces(self) -> Iterator[Face]:
        x, y = self.start
        yield Face(x, y)
        for step in self.steps:
            x, y = x + step.dx, y + step.dy
            yield Face(x, y)

    @property
    def displacement(self) -> Tuple[int, int]:
        return sum(s.dx for s in self.steps), sum(s.dy for s in self.steps)

    def is_closed(self, L: int, N: int) -> bool:
        dx, dy = self.displacement
        return dx % L == 0 and dy % N == 0

    def winding(self, L: int, N: int) -> Tuple[int, int]:
        """Horizontal and vertical winding numbers of a closed path."""
        if not self.is_closed(L, N):
            raise PathError("Winding numbers are defined for closed paths only.")
        dx, dy = self.displacement
        return dx // L, dy // N

    def crossings(self) -> Iterator[Tuple[Edge, int]]:
        face = self.start
        for step in self.steps:
            yield crossing(face, step)
            face = Face(face.x + step.dx, face.y + step.dy)


def height_along(cover: DimerCover, path: FacePath) -> int:
    """Signed number of dimers crossed by ``path``."""
    return sum(sign for edge, sign in path.crossings() if cover.contains(edge))


def centered_height_along(cover: DimerCover, path: FacePath) -> Fraction:
    """
    Height increment measured against the uniform 1/3 reference flow.

    On closed paths this depends only on the winding numbers:
    ``Nh (k1 - L/3) - Nv (k2 - N/3)``.
    """
    third = Fraction(1, 3)
    return sum(
        (sign * ((1 if cover.contains(edge) else 0) - third) for edge, sign in path.crossings()),
        Fraction(0),
    )


def gamma_face_loop(cover: DimerCover, x: int, y: int) -> FacePath:
    """
    Path from the face right of the vertical dimer at ``(x, y)`` that steps
    up when that crosses no dimer and right otherwise, until it closes.
    """
    if cover.kind_at(x, y) != EdgeKind.VERTICAL:
        raise PathError(f"No vertical dimer at ({x}, {y}).")
    L, N = cover.L, cover.N
    start = Face(x, y)
    fx, fy = x, y
    steps = []
    limit = N * L * (L + 1)
    while len(steps) < limit:
        edge, _ = crossing(Face(fx, fy), Step.N)
        step = Step.E if cover.contains(edge) else Step.N
        steps.append(step)
        fx, fy = fx + step.dx, fy + step.dy
        if (fx - start.x) % L == 0 and (fy - start.y) % N == 0:
            return FacePath(start, tuple(steps))
    raise PathError("Up-right face loop did not close.")


def _gradient(eta: DimerCover, eta2: DimerCover, face: Face, step: Step) -> int:
    edge, sign = crossing(face, step)
    return sign * (int(eta.contains(edge)) - int(eta2.contains(edge)))


def relative_height(eta: Configuration, eta2: Configuration) -> Dict[Face, int]:
    """
    Height of ``eta`` relative to ``eta2`` on every face, shifted so that the
    minimum is 0.
    """
    if eta.sector != eta2.sector:
        raise SectorError(f"Relative heights need one sector, got {eta.sector} and {eta2.sector}.")
    return relative_height_of_covers(to_dimers(eta), to_dimers(eta2))


def relative_height_of_covers(cover: DimerCover, cover2: DimerCover) -> Dict[Face, int]:
    L, N = cover.L, cover.N
    origin = Face(0, 0)
    heights = {origin: 0}
    queue = deque([origin])
    while queue:
        face = queue.popleft()
        for step in Step:
            target = Face((face.x + step.dx) % L, (face.y + step.dy) % N)
            value = heights[face] + _gradient(cover, cover2, face, step)
            known = heights.get(target)
            if known is None:
                heights[target] = value
                queue.append(target)
            elif known != value:
                raise SectorError(
                    f"Height gradient is not closed around face {target}; the covers lie in different sectors."
                )
    floor = min(heights.values())
    return {face: h - floor for face, h in sorted(heights.items(), key=lambda item: (item[0].y, item[0].x))}
