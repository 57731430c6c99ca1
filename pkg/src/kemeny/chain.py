r"""Exact analysis of finite discrete-time Markov chains.

Everything here is a dense linear solve.  For a chain on ``n`` states the
Kemeny function needs one ``(n-1)``-dimensional solve per target state, so
``kemeny_function`` costs O(n^4); chains are capped at ``MAX_STATES``.

Conventions
-----------
States are 0-based indices.  The entry time into ``z`` is
``D_z = min{k >= 0 : X_k = z}`` (so ``D_z = 0`` when starting at ``z``) and the
first return time is ``T_z = min{k >= 1 : X_k = z}``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NegativeEntry,
    NotIrreducible,
    NotSquare,
    RowSumViolation,
    SingularSystem,
    ValidationError,
)
from .linalg import LU, lu_solve, strongly_connected

MAX_STATES = 2000
ROW_SUM_SLACK = 1e-9


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TransitionMatrix:
    """Validated row-stochastic matrix of an irreducible chain.

    Build instances with :func:`validate_stochastic`.
    """

    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _frozen(self.p))

    @property
    def n(self):
        return self.p.shape[0]


@dataclass(frozen=True)
class StationaryDistribution:
    pi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pi", _frozen(self.pi))


@dataclass(frozen=True)
class HittingTimeTable:
    """Moments of the time to reach ``target`` from every starting state."""

    target: int
    mean: np.ndarray
    second_moment: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(self.mean))
        if self.second_moment is not None:
            object.__setattr__(self, "second_moment", _frozen(self.second_moment))


@dataclass(frozen=True)
class OccupationMatrix:
    """``g[x, y]``: expected visits to ``y`` strictly before entering ``target``."""

    target: int
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", _frozen(self.g))


@dataclass(frozen=True)
class KemenyReport:
    """Kemeny function values with the residuals of the identity checks.

    ``residuals`` maps a check name to a float; every entry except
    ``hunter_margin`` and ``khasminskii_margin`` is an absolute discrepancy that
    should be ~0.  The two margins are slack in an inequality and must be >= 0.
    """

    k_values: np.ndarray
    kappa: float
    spread: float
    residuals: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "k_values", _frozen(self.k_values))


def validate_stochastic(raw):
    """Check ``raw`` is a stochastic matrix of an irreducible chain.

    Rows whose sums are off by at most 1e-9 are divided through by their sum;
    anything worse is rejected.  Irreducibility is strong connectivity of the
    digraph of strictly positive entries.

    Raises
    ------
    NotSquare, NegativeEntry, RowSumViolation, NotIrreducible
    """
    p = np.array(raw, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise NotSquare(f"transition matrix must be square, got shape {p.shape}")
    n = p.shape[0]
    if n < 2:
        raise NotSquare("a chain needs at least two states")
    if n > MAX_STATES:
        raise ValidationError(f"chains are capped at {MAX_STATES} states, got {n}")
    if not np.all(np.isfinite(p)):
        raise ValidationError("transition matrix has non-finite entries")
    if np.any(p < 0):
        i, j = np.argwhere(p < 0)[0]
        raise NegativeEntry(f"P[{i}][{j}] = {p[i, j]} is negative")
    sums = p.sum(axis=1)
    bad = np.abs(sums - 1.0) > ROW_SUM_SLACK
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise RowSumViolation(f"row {i} sums to {sums[i]!r}")
    p = p / sums[:, None]
    if not strongly_connected(p > 0):
        raise NotIrreducible("the positive-entry digraph is not strongly connected")
    return TransitionMatrix(p)


def _as_chain(P):
    return P if isinstance(P, TransitionMatrix) else validate_stochastic(P)


def stationary_distribution(P):
    """Solve ``pi P = pi``, ``sum(pi) = 1``.

    The transposed fixed-point system has its last equation replaced by the
    normalization constraint and is solved by dense LU.
    """
    P = _as_chain(P)
    n = P.n
    a = P.p.T - np.eye(n)
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = lu_solve(a, b)
    if np.any(pi <= 0):
        raise SingularSystem("stationary vector is not strictly positive")
    pi = pi / pi.sum()
    if np.abs(pi @ P.p - pi).max() > 1e-10:
        raise SingularSystem("stationary residual exceeds 1e-10")
    return StationaryDistribution(pi)


def _pi_vector(P, pi):
    if pi is None:
        return stationary_distribution(P).pi
    return pi.pi if isinstance(pi, StationaryDistribution) else np.asarray(pi, float)


def dual_chain(P, pi=None):
    r"""Time reversal of ``P`` with respect to its stationary law:
    ``Phat[x, y] = P[y, x] * pi[y] / pi[x]``.
    """
    P = _as_chain(P)
    pi = _pi_vector(P, pi)
    phat = P.p.T * pi[None, :] / pi[:, None]
    return validate_stochastic(phat)


def _others(n, z):
    return np.array([i for i in range(n) if i != z], dtype=int)


def _restricted_factor(p, z):
    keep = _others(p.shape[0], z)
    sub = p[np.ix_(keep, keep)]
    return keep, sub, LU(np.eye(keep.size) - sub)


def _check_target(P, z):
    if not 0 <= z < P.n:
        raise IndexError(f"target state {z} out of range for {P.n} states")


def mean_entry_times(P, z):
    """Mean entry times ``E^x[D_z]`` for all starting states ``x``.

    Solves ``(I - P_R) m = 1`` where ``P_R`` is ``P`` with row and column ``z``
    removed.
    """
    P = _as_chain(P)
    _check_target(P, z)
    keep, _, lu = _restricted_factor(P.p, z)
    mean = np.zeros(P.n)
    mean[keep] = lu.solve(np.ones(keep.size))
    return HittingTimeTable(z, mean)


def entry_time_second_moments(P, z, m1=None):
    """Fill in ``E^x[D_z^2]`` from the one-step recursion

    ``m2(x) = sum_y P[x, y] (1 + 2 m1(y) + m2(y))`` for ``x != z``,
    with ``m1(z) = m2(z) = 0``.
    """
    P = _as_chain(P)
    _check_target(P, z)
    keep, sub, lu = _restricted_factor(P.p, z)
    if m1 is None:
        m1_keep = lu.solve(np.ones(keep.size))
    else:
        m1_keep = np.asarray(m1.mean)[keep]
    m2 = np.zeros(P.n)
    m2[keep] = lu.solve(1.0 + 2.0 * sub @ m1_keep)
    mean = np.zeros(P.n)
    mean[keep] = m1_keep
    return HittingTimeTable(z, mean, m2)


def occupation_matrix(P, z):
    """Expected visit counts before entering ``z``: ``(I - P_R)^{-1}`` embedded
    with a zero row and column at ``z``.  The time-0 visit is counted."""
    P = _as_chain(P)
    _check_target(P, z)
    keep, _, lu = _restricted_factor(P.p, z)
    g = np.zeros((P.n, P.n))
    g[np.ix_(keep, keep)] = lu.solve(np.eye(keep.size))
    return OccupationMatrix(z, g)


def check_occupation_duality(P, pi=None, z=0):
    """Max over ``(x, y)`` of ``|pi_x g[x, y] - pi_y ghat[y, x]|`` where
    ``ghat`` is the occupation matrix of the dual chain for the same target."""
    P = _as_chain(P)
    pi = _pi_vector(P, pi)
    g = occupation_matrix(P, z).g
    ghat = occupation_matrix(dual_chain(P, pi), z).g
    return float(np.abs(pi[:, None] * g - (pi[:, None] * ghat).T).max())


def trace_kemeny(P, pi=None):
    """Independent oracle: ``tr((I - P + 1 pi)^{-1}) - 1``."""
    P = _as_chain(P)
    pi = _pi_vector(P, pi)
    z = np.linalg.inv(np.eye(P.n) - P.p + np.outer(np.ones(P.n), pi))
    return float(np.trace(z) - 1.0)


def _k_from_tables(pi, tables):
    # fixed summation order over targets keeps the result schedule-independent
    k = np.zeros(pi.size)
    for z, table in enumerate(tables):
        k += pi[z] * table.mean
    return k


def kemeny_function(P, *, with_checks=True):
    """Kemeny function ``K(x) = sum_z pi_z E^x[D_z]`` with identity residuals.

    ``K`` is assembled from ``n`` independent entry-time solves.  When
    ``with_checks`` is true the report also carries:

    ``dual_identity``
        ``max_x |K(x) - Ehat^pi[Dhat_Z]|`` (the dual chain's Kemeny constant).
    ``dual_kappa``
        ``|kappa - kappa_hat|``.
    ``trace_identity``
        ``|kappa - (tr((I - P + 1 pi)^{-1}) - 1)|``.
    ``occupation_duality``
        worst ``check_occupation_duality`` over all targets.
    ``return_time_identity``
        ``max_x |K_T(x) - 1 - K(x)|`` with ``E^z[T_z]`` taken from the
        one-step formula ``1 + sum_y P[z, y] E^y[D_z]``.
    ``hunter_margin``
        ``kappa - (n - 1) / 2``.
    ``khasminskii_margin``
        ``min_z (2 C_z^2 - max_x E^x[D_z^2])`` with ``C_z = max_x E^x[D_z]``.
    """
    P = _as_chain(P)
    n = P.n
    pi = stationary_distribution(P).pi
    tables = [entry_time_second_moments(P, z) for z in range(n)]
    k = _k_from_tables(pi, tables)
    kappa = float(pi @ k)
    spread = float(k.max() - k.min())
    residuals = {}
    if with_checks:
        dual = dual_chain(P, pi)
        khat = _k_from_tables(pi, [mean_entry_times(dual, z) for z in range(n)])
        kappa_hat = float(pi @ khat)
        residuals["dual_identity"] = float(np.abs(k - kappa_hat).max())
        residuals["dual_kappa"] = abs(kappa - kappa_hat)
        residuals["trace_identity"] = abs(kappa - trace_kemeny(P, pi))
        residuals["occupation_duality"] = max(
            check_occupation_duality(P, pi, z) for z in range(n)
        )
        return_means = np.array(
            [1.0 + P.p[z] @ tables[z].mean for z in range(n)]
        )
        k_return = np.zeros(n)
        for z, table in enumerate(tables):
            t = table.mean.copy()
            t[z] = return_means[z]
            k_return += pi[z] * t
        residuals["return_time_identity"] = float(np.abs(k_return - 1.0 - k).max())
        residuals["hunter_margin"] = kappa - (n - 1) / 2
        residuals["khasminskii_margin"] = float(min(
            2.0 * t.mean.max() ** 2 - t.second_moment.max() for t in tables
        ))
    return KemenyReport(k, kappa, spread, residuals)
