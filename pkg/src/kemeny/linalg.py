"""Dense LU solves with an explicit singularity check."""
import warnings

import numpy as np
import scipy.linalg

from .errors import SingularSystem


class LU:
    """LU factorization with partial pivoting (LAPACK getrf), reusable across
    right-hand sides.

    Raises SingularSystem if a pivot is zero or negligible relative to the
    largest entry of ``a``.
    """

    def __init__(self, a):
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        with warnings.catch_warnings():
            # an exactly zero pivot is reported below as SingularSystem
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            self._factors = scipy.linalg.lu_factor(a, check_finite=True)
        pivots = np.abs(np.diag(self._factors[0]))
        scale = max(np.abs(a).max(), 1.0)
        if pivots.min() <= n * np.finfo(float).eps * scale:
            raise SingularSystem(
                f"pivot {pivots.min():.3e} is negligible; the system is singular"
            )

    def solve(self, b):
        return scipy.linalg.lu_solve(self._factors, b)


def lu_solve(a, b):
    return LU(a).solve(b)


def strongly_connected(adjacency):
    """Depth-first reachability test on a boolean adjacency matrix.

    The digraph is strongly connected iff every node is reachable from node 0
    both along the edges and along the reversed edges.
    """
    adjacency = np.asarray(adjacency, dtype=bool)

    def reaches_all(adj):
        seen = np.zeros(adj.shape[0], dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in np.flatnonzero(adj[u] & ~seen):
                seen[v] = True
                stack.append(int(v))
        return bool(seen.all())

    return reaches_all(adjacency) and reaches_all(adjacency.T)
