"""
Exhaustive enumeration of interlaced configurations on small tori and their
split into sectors.

Rows are built bottom-up: row 0 is any m1-subset of Z/LZ, and every later row
must interlace with the row below it, which means that each cyclic interval
``[y_j, y_{j+1})`` between consecutive particles of the lower row holds
exactly one particle of the upper row. The last row is finally checked
against row 0 to close the torus.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import pandas as pd
from tqdm import tqdm

from .errors import EnumerationLimitError, InvalidConfigurationError, SectorError
from .lattice import Configuration, Sector, check_sector_bounds, sector_of

logger = logging.getLogger(__name__)


def candidate_bound(L: int, N: int, m1: int) -> int:
    """Number of row-by-row subset choices, C(L, m1)^N."""
    return comb(L, m1) ** N


def check_enumeration_cap(L: int, N: int, m1: int, cap: Optional[int] = None) -> int:
    """Raises EnumerationLimitError when C(L, m1)^N exceeds the cap; returns the bound."""
    if cap is None:
        from .config import get_enumeration_cap
        cap = get_enumeration_cap()
    bound = candidate_bound(L, N, m1)
    if bound > cap:
        raise EnumerationLimitError(
            f"Enumerating L={L}, N={N}, m1={m1} means up to {bound} candidates, above the cap of {cap}. "
            f"Raise it with --max-states or QWT_ENUMERATION_CAP."
        )
    return bound


def _upper_choices(lower: Sequence[int], L: int) -> Iterator[Tuple[int, ...]]:
    """All rows interlacing above ``lower``: one site in each cyclic interval [y_j, y_{j+1})."""
    m1 = len(lower)
    intervals = []
    for j, y in enumerate(lower):
        gap = (lower[(j + 1) % m1] - y) % L
        intervals.append([(y + k) % L for k in range(gap)])
    for choice in product(*intervals):
        yield tuple(sorted(choice))


def interlaces(upper: Sequence[int], lower: Sequence[int], L: int) -> bool:
    """True iff every cyclic interval [y_j, y_{j+1}) of ``lower`` holds exactly one site of ``upper``."""
    if len(upper) != len(lower) or len(set(upper)) != len(upper):
        return False
    lower = sorted(lower)
    m1 = len(lower)
    for j, y in enumerate(lower):
        gap = (lower[(j + 1) % m1] - y) % L
        hits = sum(1 for x in upper if (x - y) % L < gap)
        if hits != 1:
            return False
    return True


def _interlaced_row_stacks(L: int, N: int, m1: int, progress: bool) -> Iterator[List[Tuple[int, ...]]]:
    first_rows = list(combinations(range(L), m1))
    for row0 in tqdm(first_rows, desc="Row 0 choices", unit="row", disable=not progress):
        stack = [row0]

        def extend():
            if len(stack) == N:
                if interlaces(stack[0], stack[-1], L):
                    yield list(stack)
                return
            for row in _upper_choices(stack[-1], L):
                stack.append(row)
                yield from extend()
                stack.pop()

        yield from extend()


@dataclass
class SectorCensus:
    """All valid configurations with m1 particles per row, keyed by m2."""
    L: int
    N: int
    m1: int
    sectors: Dict[int, List[Configuration]] = field(default_factory=dict)
    rejected: int = 0

    def sizes(self) -> Dict[int, int]:
        return {m2: len(states) for m2, states in sorted(self.sectors.items())}

    def states(self, m2: int) -> List[Configuration]:
        return self.sectors.get(m2, [])

    def all_states(self) -> List[Configuration]:
        return [state for m2 in sorted(self.sectors) for state in self.sectors[m2]]

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for m2, states in sorted(self.sectors.items()):
            sector = Sector(self.L, self.N, self.m1, m2)
            rows.append({
                'L': self.L, 'N': self.N, 'm1': self.m1, 'm2': m2,
                'Nh': sector.Nh, 'Nv': sector.Nv, 'states': len(states),
            })
        return pd.DataFrame(rows, columns=['L', 'N', 'm1', 'm2', 'Nh', 'Nv', 'states'])


def enumerate_all(L: int, N: int, m1: int, cap: Optional[int] = None, progress: bool = False) -> SectorCensus:
    """
    Builds every valid configuration with ``m1`` particles per row and sorts
    them into sectors.

    Interlaced stacks whose up-right loop gives no admissible sector (m2 = 0
    or m1/L + m2/N >= 1) are counted in ``rejected``.

    Raises:
        SectorError: if ``1 < m1 < L`` or ``N >= 2`` fails.
        EnumerationLimitError: if C(L, m1)^N exceeds the cap.
    """
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in (L, N, m1)):
        raise SectorError(f"L, N and m1 must be integers, got {L!r}, {N!r}, {m1!r}.")
    if not 1 < m1 < L:
        raise SectorError(f"m1 must satisfy 1 < m1 < L (m1 > 1 is required), got m1={m1}, L={L}.")
    if N < 2:
        raise SectorError(f"N must be at least 2 for a sector with 1 <= m2 < N, got N={N}.")
    bound = check_enumeration_cap(L, N, m1, cap)
    logger.info(f"Enumerating L={L}, N={N}, m1={m1} (candidate bound {bound})")

    seen = {}
    census = SectorCensus(L, N, m1)
    for rows in _interlaced_row_stacks(L, N, m1, progress):
        config = Configuration.from_rows(L, N, rows)
        if config in seen:
            continue
        seen[config] = True
        try:
            sector = sector_of(config)
        except InvalidConfigurationError as e:
            logger.debug(f"Dropping {config.occupation_hex}: {e}")
            census.rejected += 1
            continue
        census.sectors.setdefault(sector.m2, []).append(config)

    for m2 in census.sectors:
        census.sectors[m2].sort(key=lambda c: c.occupation)
    logger.info(f"Sector sizes: {census.sizes()} ({census.rejected} interlaced stacks outside every sector)")
    return census


def enumerate_sector(
    L: int, N: int, m1: int, m2: int, cap: Optional[int] = None, progress: bool = False,
) -> List[Configuration]:
    """
    The m2 slice of :func:`enumerate_all`, in lexicographic occupation order.

    Raises:
        SectorError: if (L, N, m1, m2) violates the sector bounds.
    """
    check_sector_bounds(L, N, m1, m2)
    return enumerate_all(L, N, m1, cap=cap, progress=progress).states(m2)
