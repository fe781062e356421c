"""Quasi-regular lossless expander analysis for sparse binary matrices.

A matrix is viewed as a bipartite graph: columns are left vertices, rows are
right vertices.  The expansion constant ``theta_k`` is the smallest defect
``theta`` such that every left set ``J`` with ``|J| <= k`` satisfies
``|R(J)| >= (1 - theta) * d * |J|``, where ``R(J)`` is the neighborhood and
``d`` the nominal left degree.  Degrees are allowed to fluctuate inside the
band ``[(1 - delta) d, (1 + delta) d]``.

Exact constants come from subset enumeration (guarded by a budget);
``theta_sampled`` gives Monte Carlo lower-bound evidence beyond the budget.
The edge-counting oracles (``collision_count``, ``first_arrival_count``,
``cross_mass``, ``first_arrival_defect``) measure the quantities whose bounds
drive the nullspace-property certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, comb, log

import numpy as np

from .matrix import Seed, SparseBinaryMatrix, matvec

__all__ = [
    "EnumerationBudgetError",
    "ExpansionProfile",
    "DegreeBandResult",
    "FirstArrival",
    "neighborhood",
    "degree_band",
    "fit_degree_band",
    "theta_exact",
    "theta_sampled",
    "required_m",
    "sparsity_gate",
    "collision_count",
    "first_arrival",
    "first_arrival_count",
    "cross_mass",
    "first_arrival_defect",
    "profile_to_csv",
]

ENUMERATION_BUDGET = 10**7
FLOAT_SLACK = 1e-12


class EnumerationBudgetError(RuntimeError):
    """Exact enumeration would exceed the subset budget; use ``theta_sampled``."""


@dataclass(frozen=True)
class ExpansionProfile:
    """Per-cardinality expansion constants with their degree band.

    ``theta[k - 1]`` is the constant for left sets of size at most ``k``;
    ``exact[k - 1]`` records whether it came from full enumeration (an exact
    value) or from sampling (a lower bound).  ``quasi_regular`` is set when
    every column degree lies inside ``[(1 - delta) d, (1 + delta) d]``.
    """

    d: float | Fraction
    delta: float | Fraction
    s_max: int
    theta: tuple
    exact: tuple
    quasi_regular: bool = True

    def theta_at(self, k: int):
        if not 1 <= k <= self.s_max:
            raise ValueError(f"k={k} outside analyzed range 1..{self.s_max}")
        return self.theta[k - 1]

    def is_exact(self, k: int) -> bool:
        if not 1 <= k <= self.s_max:
            raise ValueError(f"k={k} outside analyzed range 1..{self.s_max}")
        return self.exact[k - 1]


@dataclass(frozen=True)
class DegreeBandResult:
    ok: bool
    lo: float | Fraction
    hi: float | Fraction
    violations: tuple[int, ...]


@dataclass(frozen=True)
class FirstArrival:
    """Choice of one left endpoint ``l(i)`` per occupied right vertex ``i``."""

    assignment: dict[int, int]


def neighborhood(A: SparseBinaryMatrix, J) -> np.ndarray:
    """Right-vertex neighborhood ``R(J)`` of a left set, as a sorted array."""
    J = np.unique(np.asarray(list(J), dtype=np.int64))
    if J.size and (J[0] < 0 or J[-1] >= A.n):
        raise ValueError(f"left vertex index outside [0, {A.n})")
    if not J.size:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.concatenate([A.col_support[j] for j in J]))


def degree_band(A: SparseBinaryMatrix, d, delta) -> DegreeBandResult:
    """Check that every column degree lies in ``[(1 - delta) d, (1 + delta) d]``."""
    if d <= 0:
        raise ValueError("nominal degree d must be positive")
    if delta < 0:
        raise ValueError("band half-width delta must be nonnegative")
    lo = (1 - delta) * d
    hi = (1 + delta) * d
    degs = A.degrees
    bad = [j for j in range(A.n) if degs[j] < lo or degs[j] > hi]
    return DegreeBandResult(ok=not bad, lo=lo, hi=hi, violations=tuple(bad))


def fit_degree_band(A: SparseBinaryMatrix) -> tuple[Fraction, Fraction]:
    """Tightest symmetric band containing all column degrees.

    Returns ``(d, delta)`` with ``d = (dmax + dmin) / 2`` and
    ``delta = (dmax - dmin) / (dmax + dmin)`` as exact rationals.
    """
    dmin = int(A.degrees.min())
    dmax = int(A.degrees.max())
    if dmax == 0:
        raise ValueError("matrix has no edges; degree band undefined")
    return Fraction(dmax + dmin, 2), Fraction(dmax - dmin, dmax + dmin)


def _column_masks(A: SparseBinaryMatrix) -> list[int]:
    masks = []
    for sup in A.col_support:
        acc = 0
        for i in sup:
            acc |= 1 << int(i)
        masks.append(acc)
    return masks


def _min_neighborhood_sizes(masks: list[int], s_max: int) -> list[int]:
    """min |R(J)| over |J| = k, for k = 1..s_max (index k in the result)."""
    n = len(masks)
    best = [0] + [float("inf")] * s_max

    def rec(start: int, size: int, acc: int):
        nxt = size + 1
        for i in range(start, n):
            u = acc | masks[i]
            c = u.bit_count()
            if c < best[nxt]:
                best[nxt] = c
            if nxt < s_max:
                rec(i + 1, nxt, u)

    rec(0, 0, 0)
    return best


def _band_delta(A: SparseBinaryMatrix, d):
    """Smallest half-width delta around the given nominal degree d."""
    degs = A.degrees
    spread = max(int(degs.max()) - d, d - int(degs.min()), 0 * d)
    if isinstance(d, Fraction) or isinstance(d, int):
        return Fraction(spread) / Fraction(d)
    return float(spread) / float(d)


def _resolve_degree(A: SparseBinaryMatrix, d):
    """Pick the nominal degree: the common column degree unless overridden."""
    if d is None:
        dmin, dmax = int(A.degrees.min()), int(A.degrees.max())
        if dmin != dmax:
            raise ValueError(
                "column degrees are not constant; pass the nominal degree d "
                "explicitly (e.g. d = m * p for a Bernoulli matrix)"
            )
        d = dmin
    if d <= 0:
        raise ValueError("nominal degree d must be positive")
    if isinstance(d, float) and d.is_integer():
        d = int(d)
    return d


def theta_exact(
    A: SparseBinaryMatrix,
    s_max: int,
    d=None,
    budget: int = ENUMERATION_BUDGET,
) -> ExpansionProfile:
    """Exact expansion constants by enumerating every left set up to ``s_max``.

    ``theta_k`` is the running maximum over cardinalities ``j <= k`` of
    ``1 - min_{|J| = j} |R(J)| / (d j)``, clamped to ``[0, 1]``.  Values are
    exact rationals when ``d`` is an integer or a ``Fraction``, floats
    otherwise.  Refuses (raises :class:`EnumerationBudgetError`) when the
    subset count exceeds ``budget``; use :func:`theta_sampled` then.
    """
    if not 1 <= s_max <= A.n:
        raise ValueError(f"s_max must lie in 1..{A.n}, got {s_max}")
    d = _resolve_degree(A, d)
    total = sum(comb(A.n, j) for j in range(1, s_max + 1))
    if total > budget:
        raise EnumerationBudgetError(
            f"enumerating {total} subsets exceeds the budget of {budget}; "
            "use theta_sampled for lower-bound evidence"
        )
    min_r = _min_neighborhood_sizes(_column_masks(A), s_max)
    rational = isinstance(d, (int, Fraction))
    thetas = []
    running = Fraction(0) if rational else 0.0
    for j in range(1, s_max + 1):
        if rational:
            raw = 1 - Fraction(int(min_r[j]), 1) / (Fraction(d) * j)
        else:
            raw = 1.0 - min_r[j] / (d * j)
        running = max(running, min(max(raw, 0 * raw), 1))
        thetas.append(running)
    delta = _band_delta(A, d)
    return ExpansionProfile(
        d=d,
        delta=delta,
        s_max=s_max,
        theta=tuple(thetas),
        exact=tuple([True] * s_max),
        quasi_regular=True,
    )


def theta_sampled(
    A: SparseBinaryMatrix,
    s_max: int,
    trials: int,
    seed: Seed,
    d=None,
) -> ExpansionProfile:
    """Monte Carlo lower bounds on the expansion constants.

    Samples ``trials`` uniform subsets per cardinality and records the worst
    observed defect; the result never exceeds the exact ``theta_k``.
    """
    if not 1 <= s_max <= A.n:
        raise ValueError(f"s_max must lie in 1..{A.n}, got {s_max}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    d = _resolve_degree(A, d)
    masks = _column_masks(A)
    rng = seed.generator()
    rational = isinstance(d, (int, Fraction))
    thetas = []
    running = Fraction(0) if rational else 0.0
    for k in range(1, s_max + 1):
        min_r = None
        for _ in range(trials):
            J = rng.choice(A.n, size=k, replace=False)
            acc = 0
            for j in J:
                acc |= masks[j]
            c = acc.bit_count()
            if min_r is None or c < min_r:
                min_r = c
        if rational:
            raw = 1 - Fraction(int(min_r), 1) / (Fraction(d) * k)
        else:
            raw = 1.0 - min_r / (d * k)
        running = max(running, min(max(raw, 0 * raw), 1))
        thetas.append(running)
    return ExpansionProfile(
        d=d,
        delta=_band_delta(A, d),
        s_max=s_max,
        theta=tuple(thetas),
        exact=tuple([False] * s_max),
        quasi_regular=True,
    )


def required_m(n, p, delta, C) -> int:
    """Rows needed for the random quasi-regular construction: ``ceil((C/delta^2) log(n)/p)``."""
    if not 0 < p <= 0.5:
        raise ValueError(f"p must lie in (0, 1/2], got {p}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if C <= 0:
        raise ValueError("C must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    return ceil((C / delta**2) * log(n) / p)


def sparsity_gate(p, s, theta) -> bool:
    """Density gate of the random construction: pass iff ``p * s <= 2 theta / (2 - theta)``."""
    if not 0 < theta < Fraction(2, 3):
        raise ValueError(f"theta must lie in (0, 2/3), got {theta}")
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if s < 1:
        raise ValueError("s must be at least 1")
    return p * s <= 2 * theta / (2 - theta)


def _as_index_set(A: SparseBinaryMatrix, S, name: str) -> list[int]:
    S = sorted({int(j) for j in S})
    if S and (S[0] < 0 or S[-1] >= A.n):
        raise ValueError(f"{name} contains a left vertex outside [0, {A.n})")
    return S


def collision_count(A: SparseBinaryMatrix, J, K) -> int:
    """Number of edges from ``K`` landing inside ``R(J)``, for disjoint ``J``, ``K``."""
    J = _as_index_set(A, J, "J")
    K = _as_index_set(A, K, "K")
    if set(J) & set(K):
        raise ValueError("J and K must be disjoint")
    in_rj = np.zeros(A.m, dtype=bool)
    rj = neighborhood(A, J)
    in_rj[rj] = True
    return int(sum(int(in_rj[A.col_support[k]].sum()) for k in K))


def first_arrival(A: SparseBinaryMatrix, S, weights=None) -> FirstArrival:
    """Canonical first-arrival assignment over the left set ``S``.

    Left vertices are visited in non-increasing ``|weights|`` order (ties by
    ascending index; plain ascending index when no weights are given), and
    each right vertex is assigned the first left vertex that reaches it.
    """
    S = _as_index_set(A, S, "S")
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        order = sorted(S, key=lambda j: (-abs(weights[j]), j))
    else:
        order = S
    assignment: dict[int, int] = {}
    for j in order:
        for i in A.col_support[j]:
            assignment.setdefault(int(i), j)
    return FirstArrival(assignment=assignment)


def _check_assignment(A: SparseBinaryMatrix, S: list[int], fa: FirstArrival) -> None:
    rs = set(int(i) for i in neighborhood(A, S))
    dom = set(fa.assignment)
    if dom != rs:
        raise ValueError("assignment domain does not match R(S)")
    sset = set(S)
    for i, j in fa.assignment.items():
        if j not in sset:
            raise ValueError(f"assigned left vertex {j} is not in S")
        if int(i) not in {int(r) for r in A.col_support[j]}:
            raise ValueError(f"assigned left vertex {j} is not adjacent to right vertex {i}")


def first_arrival_count(A: SparseBinaryMatrix, S, fa: FirstArrival) -> int:
    """Number of edges from ``S`` whose left endpoint differs from ``l(i)``."""
    S = _as_index_set(A, S, "S")
    _check_assignment(A, S, fa)
    count = 0
    for j in S:
        for i in A.col_support[j]:
            if fa.assignment[int(i)] != j:
                count += 1
    return count


def cross_mass(A: SparseBinaryMatrix, x, S, T) -> float:
    """``l1`` mass of ``A x_S`` restricted to ``R(T)``, for disjoint ``S``, ``T``."""
    S = _as_index_set(A, S, "S")
    T = _as_index_set(A, T, "T")
    if set(S) & set(T):
        raise ValueError("S and T must be disjoint")
    x = np.asarray(x, dtype=float)
    if x.shape != (A.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({A.n},)")
    xs = np.zeros(A.n)
    xs[S] = x[S]
    y = matvec(A, xs)
    rt = neighborhood(A, T)
    return float(np.abs(y[rt]).sum())


def first_arrival_defect(A: SparseBinaryMatrix, w, fa: FirstArrival) -> float:
    """``||A w - w*||_1`` where ``w*_i = w_{l(i)}`` on ``R(support(w))``.

    ``fa`` must be the canonical first-arrival assignment for ``w`` (built
    with non-increasing-magnitude ordering); anything else is rejected, since
    the defect bound is only guaranteed under that rule.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (A.n,):
        raise ValueError(f"w has shape {w.shape}, expected ({A.n},)")
    S = [int(j) for j in np.nonzero(w)[0]]
    canonical = first_arrival(A, S, weights=w)
    if fa.assignment != canonical.assignment:
        raise ValueError(
            "assignment/support mismatch: fa is not the first-arrival "
            "assignment of support(w) under non-increasing |w| order"
        )
    wstar = np.zeros(A.m)
    for i, j in fa.assignment.items():
        wstar[i] = w[j]
    return float(np.abs(matvec(A, w) - wstar).sum())


def profile_to_csv(profile: ExpansionProfile) -> str:
    """Serialize a profile: a ``d=...,delta=...`` line, then ``k,theta_k,exact`` rows."""
    from .util import fmt9

    lines = [f"d={fmt9(profile.d)},delta={fmt9(profile.delta)}", "k,theta_k,exact"]
    for k in range(1, profile.s_max + 1):
        flag = "true" if profile.is_exact(k) else "false"
        lines.append(f"{k},{fmt9(profile.theta_at(k))},{flag}")
    return "\n".join(lines) + "\n"
