"""Transition-graph helpers on scipy sparse matrices."""

import logging
from typing import Dict, Iterable, List, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

logger = logging.getLogger(__name__)


def adjacency(n: int, edges: Iterable[Tuple[int, int]]) -> csr_matrix:
    """Boolean adjacency matrix of a directed graph on ``n`` nodes."""
    edges = list(edges)
    if not edges:
        return csr_matrix((n, n), dtype=np.int8)
    rows, cols = zip(*edges)
    data = np.ones(len(edges), dtype=np.int8)
    matrix = csr_matrix((data, (np.array(rows), np.array(cols))), shape=(n, n))
    matrix.eliminate_zeros()
    return matrix


def strong_components(matrix: csr_matrix) -> Dict[int, List[int]]:
    """Strongly connected components as ``label -> sorted node list``."""
    n = matrix.shape[0]
    if n == 0:
        return {}
    count, labels = connected_components(matrix, directed=True, connection='strong')
    groups = {label: [] for label in range(count)}
    for node, label in enumerate(labels):
        groups[int(label)].append(node)
    logger.debug(f"{count} strongly connected components over {n} nodes")
    return groups


def is_strongly_connected(matrix: csr_matrix) -> bool:
    """True for a single strong component; the empty and one-node graphs count as connected."""
    return len(strong_components(matrix)) <= 1
