"""Finite continuous-time chains given by a generator (rate) matrix.

All quantities come from linear solves; no matrix exponentials are used.
Hitting times are ``T_z = inf{t > 0 : X_t = z}``, which vanish when the chain
starts at ``z``.
"""
from dataclasses import dataclass

import numpy as np

from . import chain
from .chain import HittingTimeTable, KemenyReport, StationaryDistribution, _frozen
from .errors import (
    NegativeOffDiagonal,
    NotIrreducible,
    NotSquare,
    RateTooSmall,
    RowSumViolation,
    SingularSystem,
    ValidationError,
)
from .linalg import LU, lu_solve, strongly_connected

ROW_SUM_TOL = 1e-12
DEFAULT_RATE_MARGIN = 1.1


@dataclass(frozen=True)
class GeneratorMatrix:
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", _frozen(self.q))

    @property
    def n(self):
        return self.q.shape[0]

    @property
    def max_exit_rate(self):
        return float(np.abs(np.diag(self.q)).max())


# same fields as the discrete report; values are in units of real time
CtKemenyReport = KemenyReport


def validate_generator(raw):
    """Check ``raw`` is a conservative rate matrix of an irreducible chain.

    Rows must sum to zero within ``1e-12`` times the row's largest rate (at
    least 1e-12 absolute); the diagonal is then reset to minus the off-diagonal
    row sum so the result is exactly conservative.
    """
    q = np.array(raw, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise NotSquare(f"generator must be square, got shape {q.shape}")
    n = q.shape[0]
    if n < 2:
        raise NotSquare("a chain needs at least two states")
    if not np.all(np.isfinite(q)):
        raise ValidationError("generator has non-finite entries")
    off = q - np.diag(np.diag(q))
    if np.any(off < 0):
        i, j = np.argwhere(off < 0)[0]
        raise NegativeOffDiagonal(f"Q[{i}][{j}] = {q[i, j]} is negative")
    sums = q.sum(axis=1)
    scale = np.maximum(np.abs(q).max(axis=1), 1.0)
    bad = np.abs(sums) > ROW_SUM_TOL * scale
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise RowSumViolation(f"row {i} sums to {sums[i]!r}, expected 0")
    np.fill_diagonal(q, -off.sum(axis=1))
    if not strongly_connected(off > 0):
        raise NotIrreducible("the positive-rate digraph is not strongly connected")
    return GeneratorMatrix(q)


def _as_generator(Q):
    return Q if isinstance(Q, GeneratorMatrix) else validate_generator(Q)


def stationary_ct(Q):
    """Solve ``pi Q = 0`` with ``sum(pi) = 1``.

    The normalization row is scaled by the largest exit rate so that ``cQ``
    leads to exactly the scaled linear system when ``c`` is a power of two.
    """
    Q = _as_generator(Q)
    rate = Q.max_exit_rate
    a = Q.q.T.copy()
    a[-1, :] = rate
    b = np.zeros(Q.n)
    b[-1] = rate
    pi = lu_solve(a, b)
    if np.any(pi <= 0):
        raise SingularSystem("stationary vector is not strictly positive")
    return StationaryDistribution(pi / pi.sum())


def _pi_vector(Q, pi):
    if pi is None:
        return stationary_ct(Q).pi
    return pi.pi if isinstance(pi, StationaryDistribution) else np.asarray(pi, float)


def dual_generator(Q, pi=None):
    """``Qhat[x, y] = Q[y, x] pi[y] / pi[x]``, so that
    ``diag(pi) Q = Qhat^T diag(pi)``."""
    Q = _as_generator(Q)
    pi = _pi_vector(Q, pi)
    return validate_generator(Q.q.T * pi[None, :] / pi[:, None])


def mean_hitting_times_ct(Q, z):
    """``E^x[T_z]`` from ``(-Q_R) m = 1`` on the states other than ``z``."""
    Q = _as_generator(Q)
    if not 0 <= z < Q.n:
        raise IndexError(f"target state {z} out of range for {Q.n} states")
    keep = np.array([i for i in range(Q.n) if i != z])
    lu = LU(-Q.q[np.ix_(keep, keep)])
    mean = np.zeros(Q.n)
    mean[keep] = lu.solve(np.ones(keep.size))
    return HittingTimeTable(z, mean)


def _k_values(Q, pi):
    k = np.zeros(Q.n)
    for z in range(Q.n):
        k += pi[z] * mean_hitting_times_ct(Q, z).mean
    return k


def uniformization_crosscheck(Q, rate=None):
    """Compare continuous-time hitting times with those of the uniformized
    chain ``P = I + Q / rate``.

    Each jump of the uniformized chain takes mean time ``1/rate``, so
    ``E^x[T_z] = E^x[D_z] / rate`` with ``D_z`` the entry time under ``P``.
    Returns the largest absolute discrepancy over all ``(x, z)`` and over the
    two Kemeny functions.
    """
    Q = _as_generator(Q)
    if rate is None:
        rate = DEFAULT_RATE_MARGIN * Q.max_exit_rate
    if not rate > 0 or rate < Q.max_exit_rate:
        raise RateTooSmall(
            f"rate {rate} is below the largest exit rate {Q.max_exit_rate}"
        )
    P = chain.validate_stochastic(np.eye(Q.n) + Q.q / rate)
    pi = stationary_ct(Q).pi
    worst = 0.0
    k_ct = np.zeros(Q.n)
    k_dt = np.zeros(Q.n)
    for z in range(Q.n):
        ct = mean_hitting_times_ct(Q, z).mean
        dt = chain.mean_entry_times(P, z).mean
        worst = max(worst, float(np.abs(ct - dt / rate).max()))
        k_ct += pi[z] * ct
        k_dt += pi[z] * dt
    worst = max(worst, float(np.abs(k_ct - k_dt / rate).max()))
    return worst


def kemeny_function_ct(Q, *, with_checks=True, rate=None):
    """Kemeny function ``K(x) = sum_z pi_z E^x[T_z]`` of a generator.

    Residuals: ``dual_kappa`` is ``|kappa - kappa_hat|`` with ``kappa_hat`` the
    Kemeny constant of the dual generator, ``dual_identity`` compares every
    ``K(x)`` with ``kappa_hat``, ``uniformization`` is the value of
    :func:`uniformization_crosscheck` at ``rate``.
    """
    Q = _as_generator(Q)
    pi = stationary_ct(Q).pi
    k = _k_values(Q, pi)
    kappa = float(pi @ k)
    residuals = {}
    if with_checks:
        kappa_hat = float(pi @ _k_values(dual_generator(Q, pi), pi))
        residuals["dual_identity"] = float(np.abs(k - kappa_hat).max())
        residuals["dual_kappa"] = abs(kappa - kappa_hat)
        residuals["uniformization"] = uniformization_crosscheck(Q, rate)
    return CtKemenyReport(k, kappa, float(k.max() - k.min()), residuals)
