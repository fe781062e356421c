"""Self-contained optimization kernels and the sparse-recovery programs.

Two engines live here: a dense two-phase revised simplex method (Dantzig
pricing with a Bland's-rule fallback once degeneracy piles up) and a
Lawson-Hanson active-set nonnegative least squares solver.  On top of them
sit the decoding programs: equality basis pursuit, l1-ball quadratically
constrained basis pursuit, nonnegative least absolute deviations, and
nonnegative least squares.

Everything is deterministic: pivot choices break ties by lowest index, so a
given program always returns the same vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LpError",
    "InfeasibleError",
    "SolverStallError",
    "LinearProgram",
    "LpSolution",
    "lp_solve",
    "verify_lp_solution",
    "nnls_solve",
    "nnls_kkt_violation",
    "bp_equality",
    "qcbp_l1",
    "nnlad",
]

FEAS_TOL = 1e-9
OPT_TOL = 1e-8
_PIVOT_TOL = 1e-9


class LpError(RuntimeError):
    """Numerical failure or malformed linear program."""


class InfeasibleError(LpError):
    """The constraint system admits no solution."""


class SolverStallError(LpError):
    """Iteration limit hit without convergence."""


@dataclass
class LinearProgram:
    """``maximize objective @ x`` subject to rows ``(a, rel, b)`` and box bounds.

    ``rel`` is one of ``"<="``, ``"="``, ``">="``.  ``bounds[j]`` is a
    ``(lo, hi)`` pair with ``None`` for an unbounded side; if ``bounds`` is
    omitted every variable is free.
    """

    objective: np.ndarray
    constraints: list
    bounds: list | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.ndim != 1:
            raise LpError("objective must be a vector")
        if not np.all(np.isfinite(self.objective)):
            raise LpError("objective must be finite")
        nvar = self.objective.size
        rows = []
        for k, (a, rel, b) in enumerate(self.constraints):
            a = np.asarray(a, dtype=float)
            if a.shape != (nvar,):
                raise LpError(f"constraint {k}: row has shape {a.shape}, expected ({nvar},)")
            if rel not in ("<=", "=", ">="):
                raise LpError(f"constraint {k}: unknown relation {rel!r}")
            b = float(b)
            if not np.isfinite(b) or not np.all(np.isfinite(a)):
                raise LpError(f"constraint {k}: entries must be finite")
            rows.append((a, rel, b))
        self.constraints = rows
        if self.bounds is None:
            self.bounds = [(None, None)] * nvar
        if len(self.bounds) != nvar:
            raise LpError(f"expected {nvar} bound pairs, got {len(self.bounds)}")
        for j, (lo, hi) in enumerate(self.bounds):
            if lo is not None and hi is not None and lo > hi:
                raise LpError(f"variable {j}: empty bound interval [{lo}, {hi}]")

    @property
    def nvar(self) -> int:
        return self.objective.size


@dataclass
class LpSolution:
    """Outcome of :func:`lp_solve`.

    ``basis`` identifies the optimal vertex (standard-form column ids);
    ``duals`` holds one multiplier per constraint row, and ``ray`` carries an
    improving feasible direction when the program is unbounded.
    """

    status: str
    x: np.ndarray | None = None
    objective_value: float | None = None
    basis: tuple | None = None
    duals: np.ndarray | None = None
    ray: np.ndarray | None = None
    feas_tol: float = FEAS_TOL
    opt_tol: float = OPT_TOL


class _Standard:
    """Equivalent program with nonnegative variables only."""

    __slots__ = ("A", "b", "rel", "c", "row_origin", "col_var", "col_sign", "shift", "nvar")

    def __init__(self, lp: LinearProgram):
        nvar = lp.nvar
        shift = np.zeros(nvar)
        col_var, col_sign = [], []
        ub_rows = []  # (std col, width) for two-sided bounds
        for j, (lo, hi) in enumerate(lp.bounds):
            if lo is None and hi is None:
                col_var += [j, j]
                col_sign += [1.0, -1.0]
            elif lo is not None and hi is None:
                shift[j] = lo
                col_var.append(j)
                col_sign.append(1.0)
            elif lo is None:
                shift[j] = hi
                col_var.append(j)
                col_sign.append(-1.0)
            else:
                shift[j] = lo
                ub_rows.append((len(col_var), hi - lo))
                col_var.append(j)
                col_sign.append(1.0)
        self.col_var = np.asarray(col_var, dtype=np.int64)
        self.col_sign = np.asarray(col_sign)
        self.shift = shift
        self.nvar = nvar
        ncol = len(col_var)
        nrow = len(lp.constraints) + len(ub_rows)
        A = np.zeros((nrow, ncol))
        b = np.zeros(nrow)
        rel = []
        origin = []
        for i, (a, r, bi) in enumerate(lp.constraints):
            A[i] = a[self.col_var] * self.col_sign
            b[i] = bi - a @ shift
            rel.append(r)
            origin.append(("con", i))
        for k, (col, width) in enumerate(ub_rows):
            i = len(lp.constraints) + k
            A[i, col] = 1.0
            b[i] = width
            rel.append("<=")
            origin.append(("ub", int(self.col_var[col])))
        self.A = A
        self.b = b
        self.rel = rel
        self.row_origin = origin
        self.c = lp.objective[self.col_var] * self.col_sign

    def to_original(self, u: np.ndarray) -> np.ndarray:
        x = self.shift.copy()
        np.add.at(x, self.col_var, self.col_sign * u)
        return x

    def ray_to_original(self, u_ray: np.ndarray) -> np.ndarray:
        x = np.zeros(self.nvar)
        np.add.at(x, self.col_var, self.col_sign * u_ray)
        return x


_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class _Tableau:
    """Revised simplex state over ``max c @ x, A x = b (b >= 0), x >= 0``.

    The constraint matrix already contains slack/surplus/artificial columns;
    the caller provides a feasible starting basis.
    """

    def __init__(self, A, b, basis):
        self.A = A
        self.b = b
        self.m, self.ncol = A.shape
        self.basis = list(basis)
        self.in_basis = np.zeros(self.ncol, dtype=bool)
        self.in_basis[self.basis] = True
        self.refactor()
        self.degenerate_pivots = 0
        self.bland = False

    def perturb(self, scale: float) -> None:
        """Shift ``b`` inside the current basis span so every basic value is
        strictly positive: breaks degenerate plateaus without affecting
        feasibility of the system (the shift is removed before returning)."""
        i = np.arange(self.m)
        eps = scale * (1.0 + np.mod((i + 1) * _GOLDEN, 1.0))
        self.b = self.b + self.A[:, self.basis] @ eps
        self.xB = self.xB + eps

    def restore_b(self, b_true: np.ndarray) -> None:
        self.b = b_true
        self.xB = self.Binv @ b_true

    def refactor(self):
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            raise LpError("singular basis encountered")
        self.xB = self.Binv @ self.b

    def pivot(self, enter: int, leave_pos: int, direction: np.ndarray):
        piv = direction[leave_pos]
        if abs(piv) <= _PIVOT_TOL * 1e-3:
            raise LpError("vanishing pivot element")
        theta = self.xB[leave_pos] / piv
        binv_r = self.Binv[leave_pos] / piv
        d = direction.copy()
        d[leave_pos] = 0.0
        self.Binv -= np.outer(d, binv_r)
        self.Binv[leave_pos] = binv_r
        self.xB -= theta * d
        self.xB[leave_pos] = theta
        self.in_basis[self.basis[leave_pos]] = False
        self.in_basis[enter] = True
        self.basis[leave_pos] = enter

    def _leaving_row(self, direction: np.ndarray) -> int | None:
        """Lexicographic ratio test: anti-cycling for any entering rule."""
        positive = direction > _PIVOT_TOL
        if not positive.any():
            return None
        ratios = np.where(positive, self.xB / np.where(positive, direction, 1.0), np.inf)
        theta = ratios.min()
        ties = np.flatnonzero(ratios <= theta + 1e-10 * max(1.0, abs(theta)))
        if ties.size == 1:
            return int(ties[0])
        # Break ties lexicographically on the scaled basis-inverse rows
        # (equivalent to an infinitesimal perturbation of b).
        rows = self.Binv[ties] / direction[ties, None]
        order = np.lexsort(rows.T[::-1])
        return int(ties[order[0]])

    def run(self, c: np.ndarray, allowed: np.ndarray, bland_limit: int):
        """Iterate to optimality or detect an unbounded direction.

        Returns ``("optimal", None)`` or ``("unbounded", (enter, direction))``.
        """
        iteration = 0
        cap = 50000 + 50 * (self.m + self.ncol)
        c = np.asarray(c)
        while True:
            iteration += 1
            if iteration % 64 == 0:
                self.refactor()
            if iteration > cap:
                raise SolverStallError("simplex iteration cap exceeded")
            y = c[self.basis] @ self.Binv
            reduced = c - y @ self.A
            tol_enter = _PIVOT_TOL * max(1.0, float(np.abs(y).max(initial=0.0)))
            eligible = allowed & ~self.in_basis & (reduced > tol_enter)
            if not eligible.any():
                return "optimal", None
            if self.bland:
                enter = int(np.flatnonzero(eligible)[0])
            else:
                masked = np.where(eligible, reduced, -np.inf)
                enter = int(np.argmax(masked))
            direction = self.Binv @ self.A[:, enter]
            leave_pos = self._leaving_row(direction)
            if leave_pos is None:
                return "unbounded", (enter, direction)
            if self.xB[leave_pos] <= FEAS_TOL:
                self.degenerate_pivots += 1
                if self.degenerate_pivots > bland_limit:
                    self.bland = True
            self.pivot(enter, leave_pos, direction)

    def duals(self, c: np.ndarray) -> np.ndarray:
        return np.asarray(c)[self.basis] @ self.Binv


def _dual_repair(tab: _Tableau, c: np.ndarray, allowed: np.ndarray) -> None:
    """Dual-simplex steps restoring primal feasibility after de-perturbation.

    Requires a dual-feasible basis (reduced costs <= 0 up to tolerance);
    preserves it while driving the slightly negative basic values out.
    """
    c = np.asarray(c)
    scale = max(1.0, float(np.abs(tab.b).max(initial=0.0)))
    for _ in range(10 * tab.m + 100):
        r = int(np.argmin(tab.xB))
        if tab.xB[r] >= -FEAS_TOL * scale:
            return
        row = tab.Binv[r] @ tab.A
        y = c[tab.basis] @ tab.Binv
        reduced = c - y @ tab.A
        cand = allowed & ~tab.in_basis & (row < -_PIVOT_TOL)
        if not cand.any():
            raise LpError("dual repair found no eligible pivot")
        idx = np.flatnonzero(cand)
        ratios = reduced[idx] / row[idx]
        best = float(ratios.min())
        enter = int(idx[ratios <= best + 1e-10 * max(1.0, abs(best))][0])
        tab.pivot(enter, r, tab.Binv @ tab.A[:, enter])
    raise LpError("dual repair did not converge")


def _solve_standard(std: _Standard, perturb: bool = True):
    """Two-phase simplex on a standardized program.

    Returns ``(status, u, basis, duals_std_rows, ray_u)`` where ``duals``
    aligns with ``std`` row order (zeros for redundant rows dropped in
    phase one).  With ``perturb`` the phase-2 start is shifted inside the
    basis span to sidestep degenerate plateaus, then de-perturbed and
    repaired exactly.
    """
    A = std.A.copy()
    b = std.b.copy()
    rel = list(std.rel)
    nstruct = A.shape[1]
    # Normalize to b >= 0.
    scale = np.ones(len(b))
    for i in range(len(b)):
        if b[i] < 0:
            scale[i] = -1.0
            A[i] = -A[i]
            b[i] = -b[i]
            rel[i] = {"<=": ">=", ">=": "<=", "=": "="}[rel[i]]
    m = len(b)
    if m == 0:
        # Only possible when no constraints and no two-sided bounds: each
        # nonnegative variable is independent.
        if np.any(std.c > _PIVOT_TOL):
            enter = int(np.argmax(std.c))
            ray = np.zeros(nstruct)
            ray[enter] = 1.0
            return "unbounded", np.zeros(nstruct), (), np.zeros(0), ray
        return "optimal", np.zeros(nstruct), (), np.zeros(0), None

    cols = [A]
    slack_col = {}
    label = list(range(nstruct))
    next_id = nstruct
    for i, r in enumerate(rel):
        if r == "<=":
            e = np.zeros((m, 1))
            e[i, 0] = 1.0
            cols.append(e)
            slack_col[i] = next_id
            label.append(next_id)
            next_id += 1
        elif r == ">=":
            e = np.zeros((m, 1))
            e[i, 0] = -1.0
            cols.append(e)
            label.append(next_id)
            next_id += 1
    Afull = np.concatenate(cols, axis=1) if len(cols) > 1 else A
    nplain = Afull.shape[1]

    basis = [-1] * m
    for i, col in slack_col.items():
        basis[i] = col
    # Crash: cover remaining rows with positive-singleton structural columns.
    col_nnz = (np.abs(Afull[:, :nstruct]) > 0).sum(axis=0)
    used = set(basis)
    for i in range(m):
        if basis[i] >= 0:
            continue
        for j in np.flatnonzero((np.abs(Afull[i, :nstruct]) > 0) & (col_nnz == 1)):
            if j not in used and Afull[i, j] > _PIVOT_TOL:
                basis[i] = int(j)
                used.add(int(j))
                break
    art_rows = [i for i in range(m) if basis[i] < 0]
    art_cols = []
    if art_rows:
        arts = np.zeros((m, len(art_rows)))
        for k, i in enumerate(art_rows):
            arts[i, k] = 1.0
            basis[i] = nplain + k
            art_cols.append(nplain + k)
        Afull = np.concatenate([Afull, arts], axis=1)
    ncol = Afull.shape[1]
    is_art = np.zeros(ncol, dtype=bool)
    is_art[art_cols] = True

    tab = _Tableau(Afull, b, basis)
    bland_limit = 3 * (m + ncol)
    row_keep = list(range(m))
    scale_kept = scale

    if art_cols:
        c1 = np.zeros(ncol)
        c1[art_cols] = -1.0
        status, _ = tab.run(c1, np.ones(ncol, dtype=bool), bland_limit)
        assert status == "optimal"  # phase 1 objective is bounded above by 0
        if -(c1[tab.basis] @ tab.xB) > FEAS_TOL * max(1.0, np.abs(b).max()):
            return "infeasible", None, None, None, None
        # Drive remaining artificials out of the basis; rows whose artificial
        # cannot leave are redundant and get dropped.
        drop_positions = []
        for pos in range(m):
            if not is_art[tab.basis[pos]]:
                continue
            row = tab.Binv[pos] @ Afull
            row[is_art] = 0.0
            cand = np.flatnonzero(np.abs(row) > 1e-7)
            if cand.size:
                tab.pivot(int(cand[0]), pos, tab.Binv @ Afull[:, int(cand[0])])
            else:
                drop_positions.append(pos)
        if drop_positions:
            dropped = set(drop_positions)
            keep = [i for i in range(m) if i not in dropped]
            kept_basis = [tab.basis[i] for i in keep]
            Afull = Afull[keep]
            b = b[keep]
            scale_kept = scale[keep]
            row_keep = keep
            m = len(keep)
            tab = _Tableau(Afull, b, kept_basis)

    c2 = np.zeros(ncol)
    c2[:nstruct] = std.c
    if perturb:
        b_true = tab.b.copy()
        tab.perturb(1e-6 * max(1.0, float(b_true.max(initial=0.0))))
        status, extra = tab.run(c2, ~is_art, bland_limit)
        if status == "unbounded":
            # Rays are b-independent, but the base point is perturbed; redo
            # the small unbounded case exactly.
            return _solve_standard(std, perturb=False)
        tab.restore_b(b_true)
        _dual_repair(tab, c2, ~is_art)
        status, extra = tab.run(c2, ~is_art, bland_limit)
        if status == "unbounded":
            return _solve_standard(std, perturb=False)
        if float(tab.xB.min(initial=0.0)) < -FEAS_TOL * max(1.0, float(np.abs(b_true).max(initial=0.0))):
            _dual_repair(tab, c2, ~is_art)
            status, extra = tab.run(c2, ~is_art, bland_limit)
    else:
        status, extra = tab.run(c2, ~is_art, bland_limit)
    u = np.zeros(nstruct)
    for pos, colid in enumerate(tab.basis):
        if colid < nstruct:
            u[colid] = max(tab.xB[pos], 0.0)
    if status == "unbounded":
        enter, direction = extra
        ray = np.zeros(nstruct)
        if enter < nstruct:
            ray[enter] = 1.0
        for pos, colid in enumerate(tab.basis):
            if colid < nstruct:
                ray[colid] -= direction[pos]
        y = tab.duals(c2)
        duals_full = np.zeros(len(std.b))
        for local, orig in enumerate(row_keep):
            duals_full[orig] = scale_kept[local] * y[local]
        return "unbounded", u, tuple(tab.basis), duals_full, ray
    y = tab.duals(c2)
    duals_full = np.zeros(len(std.b))
    for local, orig in enumerate(row_keep):
        duals_full[orig] = scale_kept[local] * y[local]
    return "optimal", u, tuple(tab.basis), duals_full, None


def lp_solve(lp: LinearProgram) -> LpSolution:
    """Solve a linear program to an optimal vertex.

    Returns an :class:`LpSolution` with status ``optimal``, ``infeasible``
    or ``unbounded`` (the latter carrying an improving ray).  Every optimal
    solution is re-verified against feasibility and reduced-cost optimality
    before being returned.
    """
    std = _Standard(lp)
    status, u, basis, duals_std, ray_u = _solve_standard(std)
    if status == "infeasible":
        return LpSolution(status="infeasible")
    x = std.to_original(u)
    ncon = len(lp.constraints)
    duals = duals_std[:ncon] if duals_std is not None else None
    if status == "unbounded":
        ray = std.ray_to_original(ray_u)
        sol = LpSolution(
            status="unbounded",
            x=x,
            objective_value=float(lp.objective @ x),
            basis=basis,
            duals=duals,
            ray=ray,
        )
        verify_lp_solution(lp, sol)
        return sol
    sol = LpSolution(
        status="optimal",
        x=x,
        objective_value=float(lp.objective @ x),
        basis=basis,
        duals=duals,
    )
    verify_lp_solution(lp, sol)
    return sol


def verify_lp_solution(lp: LinearProgram, sol: LpSolution, feas_tol=FEAS_TOL, opt_tol=OPT_TOL):
    """Independent check of a solution: feasibility, dual signs, complementary
    slackness and reduced-cost optimality (or ray validity when unbounded).

    Raises :class:`LpError` on any violation; rebuilt from the raw program
    data, sharing nothing with the simplex iteration.
    """
    if sol.status == "infeasible":
        return
    x = sol.x
    n = lp.nvar
    if x is None or x.shape != (n,):
        raise LpError("solution vector missing or mis-sized")
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None and x[j] < lo - feas_tol * max(1.0, abs(lo)):
            raise LpError(f"variable {j} violates lower bound")
        if hi is not None and x[j] > hi + feas_tol * max(1.0, abs(hi)):
            raise LpError(f"variable {j} violates upper bound")
    slacks = np.zeros(len(lp.constraints))
    for i, (a, rel, b) in enumerate(lp.constraints):
        ax = float(a @ x)
        tol_i = feas_tol * max(1.0, abs(b), float(np.abs(a).max(initial=0.0)) * float(np.abs(x).max(initial=0.0)))
        if rel == "<=" and ax > b + tol_i:
            raise LpError(f"constraint {i} violated: {ax} > {b}")
        if rel == ">=" and ax < b - tol_i:
            raise LpError(f"constraint {i} violated: {ax} < {b}")
        if rel == "=" and abs(ax - b) > tol_i:
            raise LpError(f"constraint {i} violated: {ax} != {b}")
        slacks[i] = b - ax if rel != ">=" else ax - b

    if sol.status == "unbounded":
        ray = sol.ray
        if ray is None:
            raise LpError("unbounded solution carries no ray")
        gain = float(lp.objective @ ray)
        scale_r = max(1.0, float(np.abs(ray).max(initial=0.0)))
        if gain <= opt_tol * scale_r:
            raise LpError("ray does not improve the objective")
        for i, (a, rel, b) in enumerate(lp.constraints):
            ar = float(a @ ray)
            tol_i = feas_tol * max(1.0, float(np.abs(a).max(initial=0.0))) * scale_r * 10
            if rel == "<=" and ar > tol_i:
                raise LpError(f"ray escapes constraint {i}")
            if rel == ">=" and ar < -tol_i:
                raise LpError(f"ray escapes constraint {i}")
            if rel == "=" and abs(ar) > tol_i:
                raise LpError(f"ray escapes constraint {i}")
        for j, (lo, hi) in enumerate(lp.bounds):
            if lo is not None and ray[j] < -feas_tol * scale_r * 10:
                raise LpError(f"ray escapes lower bound of variable {j}")
            if hi is not None and ray[j] > feas_tol * scale_r * 10:
                raise LpError(f"ray escapes upper bound of variable {j}")
        return

    lam = sol.duals
    if lam is None:
        raise LpError("optimal solution carries no duals")
    zscale = max(1.0, float(np.abs(lp.objective).max(initial=0.0)), float(np.abs(lam).max(initial=0.0)))
    z = lp.objective.copy()
    for i, (a, rel, b) in enumerate(lp.constraints):
        if rel == "<=" and lam[i] < -opt_tol * zscale:
            raise LpError(f"dual {i} has the wrong sign for a <= row")
        if rel == ">=" and lam[i] > opt_tol * zscale:
            raise LpError(f"dual {i} has the wrong sign for a >= row")
        if abs(lam[i]) * abs(slacks[i]) > opt_tol * zscale * max(1.0, abs(b), abs(slacks[i])) * 10:
            raise LpError(f"complementary slackness fails on constraint {i}")
        z -= lam[i] * a
    for j, (lo, hi) in enumerate(lp.bounds):
        at_lo = lo is not None and x[j] <= lo + feas_tol * max(1.0, abs(lo)) * 10
        at_hi = hi is not None and x[j] >= hi - feas_tol * max(1.0, abs(hi)) * 10
        tol_j = opt_tol * zscale * 10
        if at_lo and at_hi:
            continue
        if at_lo:
            if z[j] > tol_j:
                raise LpError(f"reduced cost of variable {j} positive at lower bound")
        elif at_hi:
            if z[j] < -tol_j:
                raise LpError(f"reduced cost of variable {j} negative at upper bound")
        else:
            if abs(z[j]) > tol_j:
                raise LpError(f"reduced cost of interior variable {j} nonzero")


def _as_dense(A) -> np.ndarray:
    if hasattr(A, "to_dense"):
        return A.to_dense()
    return np.asarray(A, dtype=float)


def nnls_solve(A, y, max_outer: int | None = None) -> np.ndarray:
    """Nonnegative least squares ``argmin_{x >= 0} ||A x - y||_2``.

    Lawson-Hanson active-set iteration; the KKT conditions are re-verified
    on every solve before returning.  Raises :class:`SolverStallError`
    after ``3 n`` outer iterations (never observed at desk scale).
    """
    A = _as_dense(A)
    y = np.asarray(y, dtype=float)
    if A.ndim != 2 or y.shape != (A.shape[0],):
        raise ValueError("A must be (m, n) and y length m")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
        raise ValueError("inputs must be finite")
    m, n = A.shape
    if max_outer is None:
        max_outer = max(3 * n, 10)
    eps = np.finfo(float).eps
    grad_scale = max(1.0, float(np.abs(A.T @ y).max(initial=0.0)))
    tol = 10 * eps * max(m, n) * grad_scale
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = A.T @ (y - A @ x)
    banned = np.zeros(n, dtype=bool)
    outer = 0
    while True:
        candidates = (~passive) & (~banned) & (w > tol)
        if not candidates.any():
            break
        outer += 1
        if outer > max_outer:
            raise SolverStallError(f"nnls active-set stalled after {max_outer} outer iterations")
        j = int(np.argmax(np.where(candidates, w, -np.inf)))
        passive[j] = True
        inner = 0
        while True:
            inner += 1
            if inner > 10 * n + 10:
                raise SolverStallError("nnls inner loop stalled")
            P = np.flatnonzero(passive)
            z = np.zeros(n)
            z[P], *_ = np.linalg.lstsq(A[:, P], y, rcond=None)
            if z[P].min(initial=np.inf) > 0.0:
                x = z
                break
            shrink = passive & (z <= 0.0) & (x > 0.0)
            drop_now = passive & (z <= 0.0) & (x <= 0.0)
            if not shrink.any():
                # Entering column adds no positive weight; ban it until
                # another variable makes progress.
                passive[drop_now] = False
                if drop_now[j]:
                    banned[j] = True
                break
            alpha = float(np.min(x[shrink] / (x[shrink] - z[shrink])))
            x = x + alpha * (z - x)
            dead = passive & (x <= tol)
            x[dead] = 0.0
            passive[dead] = False
        w = A.T @ (y - A @ x)
        if x[j] > 0.0:
            banned[:] = False
    viol = nnls_kkt_violation(A, y, x)
    if viol > 1e-8:
        raise SolverStallError(f"nnls KKT verification failed: violation {viol:.3e}")
    return x


def nnls_kkt_violation(A, y, x) -> float:
    """Largest KKT violation of a candidate NNLS solution.

    Zero (up to round-off) iff ``x`` minimizes ``||A x - y||_2`` over the
    nonnegative orthant: the gradient must vanish on the support and be
    nonpositive off it, and ``x`` must be nonnegative.
    """
    A = _as_dense(A)
    x = np.asarray(x, dtype=float)
    w = A.T @ (np.asarray(y, dtype=float) - A @ x)
    viol = max(0.0, float(-x.min(initial=0.0)))
    on = x > 0
    if on.any():
        viol = max(viol, float(np.abs(w[on]).max()))
    if (~on).any():
        viol = max(viol, float(w[~on].max(initial=0.0)))
    return viol


def bp_equality(A, y, nonneg: bool = False) -> np.ndarray:
    """l1-minimal solution of ``A z = y`` (basis pursuit with equality data).

    Raises :class:`InfeasibleError` when ``y`` is outside the range of ``A``.
    """
    dense = _as_dense(A)
    m, n = dense.shape
    y = np.asarray(y, dtype=float)
    if y.shape != (m,):
        raise ValueError(f"y has shape {y.shape}, expected ({m},)")
    if nonneg:
        c = -np.ones(n)
        rows = [(dense[i], "=", y[i]) for i in range(m)]
        bounds = [(0.0, None)] * n
        sol = lp_solve(LinearProgram(c, rows, bounds))
        if sol.status != "optimal":
            raise InfeasibleError(f"A z = y has no nonnegative solution (status {sol.status})")
        return sol.x
    # z = zp - zn with zp, zn >= 0; minimize sum(zp + zn).
    c = -np.ones(2 * n)
    block = np.concatenate([dense, -dense], axis=1)
    rows = [(block[i], "=", y[i]) for i in range(m)]
    bounds = [(0.0, None)] * (2 * n)
    sol = lp_solve(LinearProgram(c, rows, bounds))
    if sol.status != "optimal":
        raise InfeasibleError(f"A z = y is infeasible (status {sol.status})")
    return sol.x[:n] - sol.x[n:]


def qcbp_l1(A, y, eta: float, nonneg: bool = False) -> np.ndarray:
    """Basis pursuit with an l1 noise ball: ``min ||z||_1  s.t. ||A z - y||_1 <= eta``.

    Solved as a single LP by splitting ``z`` and the residual into signed
    parts.  Infeasibility (``eta`` below the minimal achievable residual) is
    surfaced as :class:`InfeasibleError`.
    """
    dense = _as_dense(A)
    m, n = dense.shape
    y = np.asarray(y, dtype=float)
    if y.shape != (m,):
        raise ValueError(f"y has shape {y.shape}, expected ({m},)")
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    nz = n if nonneg else 2 * n
    # Variables: z-part block, then u+ and u- (residual split).
    c = np.concatenate([-np.ones(nz), np.zeros(2 * m)])
    zblock = dense if nonneg else np.concatenate([dense, -dense], axis=1)
    rows = []
    for i in range(m):
        row = np.concatenate([zblock[i], -_unit(m, i), _unit(m, i)])
        rows.append((row, "=", y[i]))
    budget = np.concatenate([np.zeros(nz), np.ones(2 * m)])
    rows.append((budget, "<=", float(eta)))
    bounds = [(0.0, None)] * (nz + 2 * m)
    sol = lp_solve(LinearProgram(c, rows, bounds))
    if sol.status != "optimal":
        raise InfeasibleError(f"qcbp_l1 constraint set is empty (status {sol.status})")
    if nonneg:
        return sol.x[:n]
    return sol.x[:n] - sol.x[n : 2 * n]


def nnlad(A, y) -> np.ndarray:
    """Nonnegative least absolute deviations: ``argmin_{z >= 0} ||A z - y||_1``.

    Noise-blind: no tolerance parameter enters the program.  Always feasible;
    ties among minimizers are broken by the deterministic pivot order.
    """
    dense = _as_dense(A)
    m, n = dense.shape
    y = np.asarray(y, dtype=float)
    if y.shape != (m,):
        raise ValueError(f"y has shape {y.shape}, expected ({m},)")
    # Variables: z, r+, r- with A z - r+ + r- = y; minimize sum(r+ + r-).
    c = np.concatenate([np.zeros(n), -np.ones(2 * m)])
    rows = []
    for i in range(m):
        row = np.concatenate([dense[i], -_unit(m, i), _unit(m, i)])
        rows.append((row, "=", y[i]))
    bounds = [(0.0, None)] * (n + 2 * m)
    sol = lp_solve(LinearProgram(c, rows, bounds))
    if sol.status != "optimal":
        raise LpError(f"nnlad unexpectedly returned status {sol.status}")
    return sol.x[:n]


def _unit(m: int, i: int) -> np.ndarray:
    e = np.zeros(m)
    e[i] = 1.0
    return e
