"""Robust nullspace property certificates: derivation, exact checking, rescaling.

The l1 robust nullspace property of order ``s`` with constants
``0 < rho < 1`` and ``tau > 0`` (residuals measured in l1) asks that every
vector ``v`` and every support ``S`` with ``|S| <= s`` satisfy

    ||v_S||_1  <=  rho * ||v_{S^c}||_1  +  tau * ||A v||_1.

Certificates arrive two ways: derived from quasi-regular expansion constants
(``certify_from_expansion``), or established exhaustively on small instances
by solving one LP per (support, sign pattern) pair (``nsp_exact``).  The two
routes cross-validate each other.  Certificates transport under positive
diagonal rescaling via ``rescale_certificate``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import comb

import numpy as np

from .matrix import SparseBinaryMatrix, matvec
from .optim import LinearProgram, lp_solve

__all__ = [
    "NotCertifiable",
    "NspBudgetError",
    "NspCertificate",
    "NspViolation",
    "certify_from_expansion",
    "nsp_exact",
    "rescale_certificate",
    "error_bound",
]


class NotCertifiable(ValueError):
    """The requested certificate does not exist under the available theory."""


class NspBudgetError(RuntimeError):
    """Exhaustive NSP verification would exceed the LP budget."""


def _exact(x):
    """Read a parameter as an exact rational; floats are taken at their
    shortest decimal representation (so 0.1 means 1/10)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class NspCertificate:
    """l1 robust NSP constants of a given order, with their provenance.

    ``rho`` and ``tau`` are exact rationals when derived from rational
    expansion data.  Expansion-derived certificates keep the
    ``(theta2s, delta, d)`` they came from.
    """

    order: int
    rho: Fraction | float
    tau: Fraction | float
    norm: str = "l1"
    provenance: str = "expansion-derived"
    theta2s: Fraction | float | None = None
    delta: Fraction | float | None = None
    d: Fraction | float | None = None

    def __post_init__(self):
        if not 0 <= self.rho < 1:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.order < 1:
            raise ValueError("order must be at least 1")


@dataclass(frozen=True)
class NspViolation:
    """Witness vector breaking the NSP inequality at some small support."""

    witness: np.ndarray
    support: tuple[int, ...]
    lhs: float
    rhs: float


def certify_from_expansion(theta2s, delta, d, s: int = 1) -> NspCertificate:
    """Certificate of order ``s`` from the expansion constants of order ``2s``.

    For a quasi-regular lossless expander with degree band ``(d, delta)`` and
    expansion defect ``theta2s`` over left sets of size up to ``2 s``:

        rho = (2 theta2s + 6 delta) / (1 - 4 theta2s - 13 delta)
        tau = 1 / (d (1 - 4 theta2s - 13 delta))

    valid whenever ``6 theta2s + 19 delta < 1``.  Outside that gate no
    certificate exists by this route and :class:`NotCertifiable` is raised.
    Arithmetic is exact over rationals.
    """
    theta = _exact(theta2s)
    dl = _exact(delta)
    dd = _exact(d)
    if theta < 0 or dl < 0:
        raise ValueError("theta2s and delta must be nonnegative")
    if dd <= 0:
        raise ValueError("d must be positive")
    gate = 6 * theta + 19 * dl
    if gate >= 1:
        raise NotCertifiable(
            f"not certifiable by this theorem: 6*theta_2s + 19*delta = {gate} >= 1"
        )
    denom = 1 - 4 * theta - 13 * dl
    rho = (2 * theta + 6 * dl) / denom
    tau = 1 / (dd * denom)
    return NspCertificate(
        order=int(s),
        rho=rho,
        tau=tau,
        provenance="expansion-derived",
        theta2s=theta,
        delta=dl,
        d=dd,
    )


def _violation_from_point(v: np.ndarray, S: tuple[int, ...], rho: float, tau: float, A) -> NspViolation:
    mask = np.zeros(v.size, dtype=bool)
    mask[list(S)] = True
    lhs = float(np.abs(v[mask]).sum())
    rhs = float(rho * np.abs(v[~mask]).sum() + tau * np.abs(matvec(A, v)).sum())
    return NspViolation(witness=v, support=S, lhs=lhs, rhs=rhs)


def nsp_exact(
    A: SparseBinaryMatrix,
    s: int,
    rho,
    tau,
    tol: float = 1e-8,
    override_budget: bool = False,
) -> NspViolation | None:
    """Exhaustively verify the l1 robust NSP of order ``s`` on a small matrix.

    For every support ``S`` with ``|S| <= s`` and every sign pattern on it,
    maximizes the signed mass of ``v_S`` subject to
    ``rho ||v_{S^c}||_1 + tau ||A v||_1 <= 1``.  The property holds iff every
    optimum is at most ``1 + tol``; otherwise the maximizing (or unbounded-ray)
    witness is returned.  Returns ``None`` when the property holds.

    The sweep costs about ``C(n, s) 2^s`` LPs, so it refuses beyond
    ``n <= 24``, ``s <= 3`` unless ``override_budget`` is set.
    """
    n, m = A.n, A.m
    if not 1 <= s <= n:
        raise ValueError(f"order s must lie in 1..{n}")
    rho = float(rho)
    tau = float(tau)
    if rho < 0 or tau < 0:
        raise ValueError("rho and tau must be nonnegative")
    if not override_budget and (n > 24 or s > 3):
        raise NspBudgetError(
            f"exhaustive check over n={n}, s={s} exceeds the default budget "
            f"(~{sum(comb(n, k) * 2**k for k in range(1, s + 1))} LPs); "
            "pass override_budget=True to force it"
        )
    dense = A.to_dense()
    for k in range(1, s + 1):
        for S in combinations(range(n), k):
            Sc = [j for j in range(n) if j not in S]
            # Fixing the first sign to + halves the work (the program is
            # symmetric under v -> -v).
            for signs in product((1.0, -1.0), repeat=k - 1):
                eps = (1.0,) + signs
                result = _nsp_lp(dense, S, Sc, eps, rho, tau)
                status, v, value = result
                if status == "unbounded" or value > 1.0 + tol:
                    return _violation_from_point(v, S, rho, tau, A)
    return None


def _nsp_lp(dense: np.ndarray, S, Sc, eps, rho: float, tau: float):
    """One support/sign cell: max sum_j eps_j v_j over the NSP budget set."""
    m, n = dense.shape
    k = len(S)
    nsc = len(Sc)
    # Variables: v (free, n), a (envelopes |v_j| on S^c), b (envelopes |(Av)_i|).
    nvars = n + nsc + m
    c = np.zeros(nvars)
    for pos, j in enumerate(S):
        c[j] = eps[pos]
    rows = []
    for pos, j in enumerate(Sc):
        row = np.zeros(nvars)
        row[j] = 1.0
        row[n + pos] = -1.0
        rows.append((row, "<=", 0.0))
        row = np.zeros(nvars)
        row[j] = -1.0
        row[n + pos] = -1.0
        rows.append((row, "<=", 0.0))
    for i in range(m):
        row = np.zeros(nvars)
        row[:n] = dense[i]
        row[n + nsc + i] = -1.0
        rows.append((row, "<=", 0.0))
        row = np.zeros(nvars)
        row[:n] = -dense[i]
        row[n + nsc + i] = -1.0
        rows.append((row, "<=", 0.0))
    budget = np.zeros(nvars)
    budget[n : n + nsc] = rho
    budget[n + nsc :] = tau
    rows.append((budget, "<=", 1.0))
    bounds = [(None, None)] * n + [(0.0, None)] * (nsc + m)
    sol = lp_solve(LinearProgram(c, rows, bounds))
    if sol.status == "unbounded":
        ray_v = sol.ray[:n]
        gain = float(c @ sol.ray)
        base = sol.x[:n] if sol.x is not None else np.zeros(n)
        # Walk far enough along the ray that the objective strictly exceeds
        # the budget bound of 1.
        t = (2.0 - float(c[:n] @ base)) / gain
        if t <= 0:
            t = 1.0
        return "unbounded", base + t * ray_v, np.inf
    if sol.status != "optimal":  # pragma: no cover - budget set always feasible
        raise RuntimeError(f"unexpected LP status {sol.status} in NSP check")
    return "optimal", sol.x[:n], float(sol.objective_value)


def rescale_certificate(cert: NspCertificate, w) -> NspCertificate:
    """Transport a certificate from ``A`` to ``A W^{-1}``, ``W = diag(w)``, ``w > 0``.

    The constants become ``rho~ = kappa(W) rho`` and ``tau~ = ||W|| tau`` with
    ``kappa = max(w) / min(w)``; refuses when ``rho~ >= 1`` (the rescaled pair
    is no longer a certificate).
    """
    wl = list(w)
    if len(wl) == 0:
        raise ValueError("w must be nonempty")
    exactable = all(isinstance(v, (int, np.integer, Fraction)) for v in wl)
    if exactable:
        vals = [Fraction(int(v)) if not isinstance(v, Fraction) else v for v in wl]
    else:
        vals = [float(v) for v in wl]
    wmin = min(vals)
    wmax = max(vals)
    if wmin <= 0:
        raise ValueError("all rescaling weights must be positive")
    kappa = wmax / wmin
    new_rho = kappa * cert.rho
    if new_rho >= 1:
        raise NotCertifiable(
            f"rescaled rho = kappa * rho = {kappa} * {cert.rho} >= 1; "
            "certificate does not survive this conditioning"
        )
    return NspCertificate(
        order=cert.order,
        rho=new_rho,
        tau=wmax * cert.tau,
        norm=cert.norm,
        provenance="rescaled",
        theta2s=cert.theta2s,
        delta=cert.delta,
        d=cert.d,
    )


def error_bound(cert: NspCertificate, sigma_s, residual_l1, gap=0) -> float:
    """Decoding error envelope implied by a certificate.

    Returns ``C (2 sigma_s + gap) + D tau residual`` with
    ``C = (1 + rho) / (1 - rho)`` and ``D = 2 / (1 - rho)``; ``gap`` is the
    l1-norm gap ``||z||_1 - ||x||_1`` (zero for any l1 minimizer).  This is
    an upper envelope: the standard contraction argument fixes these
    constants, and nothing downstream assumes they are tight.
    """
    if sigma_s < 0 or residual_l1 < 0 or gap < 0:
        raise ValueError("sigma_s, residual_l1 and gap must be nonnegative")
    C = (1 + cert.rho) / (1 - cert.rho)
    D = 2 / (1 - cert.rho)
    return C * (2 * sigma_s + gap) + D * cert.tau * residual_l1
