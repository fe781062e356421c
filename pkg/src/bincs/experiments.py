"""Monte Carlo harness: zero-column lower bound and recovery phase transitions.

The sweep machinery plants random nonnegative sparse signals, decodes them
across a grid of ``(n, m, s, p)`` cells, and emits a deterministic CSV whose
bytes depend only on the configuration -- never on worker count or timing.
``transition_summary`` turns sweep records into per-density threshold
estimates ``m*(p)``, the empirical handle on the conjectured transition
``m(p) ~ max(s log(en/s), log(n)/p)``.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from math import exp, expm1, log1p, sqrt

import numpy as np
from scipy.optimize import isotonic_regression

from .matrix import Seed, gen_bernoulli, matvec
from .optim import LpError, bp_equality, nnlad, nnls_solve, qcbp_l1

__all__ = [
    "SweepConfig",
    "SweepRecord",
    "TransitionEstimate",
    "SWEEP_HEADER",
    "zero_column_prob",
    "empirical_zero_column",
    "run_sweep",
    "records_to_csv",
    "write_sweep_csv",
    "isotonic_fit",
    "transition_summary",
]

log = logging.getLogger(__name__)

SWEEP_HEADER = "n,m,s,p,trials,successes,mean_err_l1,max_err_l1,seconds"


def zero_column_prob(n: int, m: int, p: float) -> float:
    """Probability that an ``m x n`` Bernoulli(``p``) matrix has a zero column.

    Exactly ``1 - (1 - (1-p)^m)^n``, evaluated through ``log1p``/``expm1``
    so it stays accurate when ``(1-p)^m`` underflows plain arithmetic.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0
    q = exp(m * log1p(-p))  # P(single column is zero)
    return -expm1(n * log1p(-q))


def empirical_zero_column(n: int, m: int, p: float, trials: int, seed: Seed) -> float:
    """Fraction of sampled Bernoulli matrices containing at least one zero column."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    hits = 0
    for t in range(trials):
        A = gen_bernoulli(n, m, p, seed.child(t))
        if int(A.degrees.min()) == 0:
            hits += 1
    return hits / trials


@dataclass(frozen=True)
class SweepConfig:
    """Grid specification for a recovery sweep.

    Planted signals put i.i.d. uniform ``value_range`` entries on a uniform
    random ``s``-subset, so exact recovery at tolerance ``tol`` is
    unambiguous.  Trial ``t`` of cell ``k`` draws from the substream
    ``(master_seed, k, t)`` -- reruns are bit-identical for any worker count.
    """

    n_values: tuple
    m_values: tuple
    s_values: tuple
    p_values: tuple
    trials: int = 200
    method: str = "nnlad"
    tol: float = 1e-6
    master_seed: int = 0
    value_range: tuple = (1.0, 2.0)

    def __post_init__(self):
        for name in ("n_values", "m_values", "s_values", "p_values"):
            vals = tuple(getattr(self, name))
            object.__setattr__(self, name, vals)
            if not vals:
                raise ValueError(f"{name} must be nonempty")
            if any(v <= 0 for v in vals):
                raise ValueError(f"{name} must be positive")
        if any(p > 0.5 for p in self.p_values):
            raise ValueError("densities p above 1/2 are outside the supported regime")
        if self.method not in ("nnlad", "nnls", "bp_eq", "qcbp_l1"):
            raise ValueError(f"unknown sweep method {self.method!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        lo, hi = self.value_range
        if not 0 < lo <= hi:
            raise ValueError("value_range must satisfy 0 < lo <= hi")

    def cells(self) -> list:
        return list(product(self.n_values, self.m_values, self.s_values, self.p_values))


@dataclass(frozen=True)
class SweepRecord:
    """Aggregate outcome of one grid cell; reproducible from (config, cell)."""

    n: int
    m: int
    s: int
    p: float
    trials: int
    successes: int
    mean_err_l1: float
    max_err_l1: float
    seconds: float = 0.0


def _decode(method: str, A, y):
    if method == "nnlad":
        return nnlad(A, y)
    if method == "nnls":
        return nnls_solve(A, y)
    if method == "bp_eq":
        return bp_equality(A, y, nonneg=True)
    return qcbp_l1(A, y, 0.0, nonneg=True)


def run_cell(config: SweepConfig, cell_index: int, timing: bool = False) -> SweepRecord:
    """Run all trials of one cell; per-trial solver failures count as misses."""
    n, m, s, p = config.cells()[cell_index]
    if s > n:
        raise ValueError(f"cell {cell_index}: sparsity s={s} exceeds n={n}")
    start = time.perf_counter() if timing else 0.0
    root = Seed(config.master_seed).child(cell_index)
    lo, hi = config.value_range
    successes = 0
    errors = []
    for t in range(config.trials):
        trial_seed = root.child(t)
        A = gen_bernoulli(n, m, p, trial_seed.child(0))
        rng = trial_seed.child(1).generator()
        support = rng.choice(n, size=s, replace=False)
        x = np.zeros(n)
        x[support] = rng.uniform(lo, hi, size=s)
        y = matvec(A, x)
        try:
            xhat = _decode(config.method, A, y)
        except LpError as exc:
            log.warning("cell %d trial %d: solver failure: %s", cell_index, t, exc)
            continue
        err = float(np.abs(xhat - x).sum())
        errors.append(err)
        if err <= config.tol * max(1.0, float(np.abs(x).sum())):
            successes += 1
    seconds = time.perf_counter() - start if timing else 0.0
    return SweepRecord(
        n=n,
        m=m,
        s=s,
        p=p,
        trials=config.trials,
        successes=successes,
        mean_err_l1=float(np.mean(errors)) if errors else float("nan"),
        max_err_l1=float(np.max(errors)) if errors else float("nan"),
        seconds=seconds,
    )


def _cell_task(args):
    config, index, timing = args
    return run_cell(config, index, timing)


def run_sweep(config: SweepConfig, workers: int = 1, timing: bool = False) -> list:
    """Run every cell of the grid, optionally across processes.

    The records (and hence the CSV) are identical for any ``workers`` value:
    all randomness is keyed by (cell, trial) and aggregation is
    order-independent.  ``timing=True`` fills the ``seconds`` field with
    measured wall time, which trades away byte-reproducibility.
    """
    cells = config.cells()
    tasks = [(config, i, timing) for i in range(len(cells))]
    if workers <= 1:
        records = [run_cell(config, i, timing) for i in range(len(cells))]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_cell_task, tasks))
    records.sort(key=lambda r: (r.n, r.m, r.s, r.p))
    return records


def records_to_csv(records) -> str:
    from .util import fmt9

    lines = [SWEEP_HEADER]
    for r in records:
        lines.append(
            ",".join(
                [
                    str(r.n),
                    str(r.m),
                    str(r.s),
                    fmt9(r.p),
                    str(r.trials),
                    str(r.successes),
                    fmt9(r.mean_err_l1),
                    fmt9(r.max_err_l1),
                    fmt9(r.seconds),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_sweep_csv(records, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(records_to_csv(records))


def isotonic_fit(values, weights=None) -> np.ndarray:
    """Nondecreasing least-squares fit (pool-adjacent-violators)."""
    res = isotonic_regression(np.asarray(values, dtype=float), weights=weights, increasing=True)
    return np.asarray(res.x)


@dataclass(frozen=True)
class TransitionEstimate:
    """Smallest m reaching the target success level for one (n, s, p) group."""

    n: int
    s: int
    p: float
    m_star: int | None
    rate_at_m_star: float | None
    halfwidth: float | None

    @property
    def determined(self) -> bool:
        return self.m_star is not None


def transition_summary(records, success_level: float = 0.95, z: float = 1.96) -> list:
    """Per-(n, s, p) threshold estimates from sweep records.

    Success rates over the m-grid are monotone-regularized (isotonic fit
    weighted by trial counts) before thresholding; the reported halfwidth is
    the binomial normal-approximation ``z * sqrt(r (1 - r) / trials)`` at the
    threshold cell.  Groups that never reach ``success_level`` come back
    undetermined (``m_star = None``).
    """
    groups: dict = {}
    for r in records:
        groups.setdefault((r.n, r.s, r.p), []).append(r)
    out = []
    for (n, s, p), recs in sorted(groups.items()):
        recs = sorted(recs, key=lambda r: r.m)
        ms = [r.m for r in recs]
        rates = np.array([r.successes / r.trials for r in recs])
        weights = np.array([float(r.trials) for r in recs])
        fitted = isotonic_fit(rates, weights)
        m_star = rate = half = None
        for i, m in enumerate(ms):
            if fitted[i] >= success_level:
                m_star = int(m)
                rate = float(rates[i])
                half = z * sqrt(max(rate * (1 - rate), 0.0) / recs[i].trials)
                break
        out.append(
            TransitionEstimate(n=n, s=s, p=p, m_star=m_star, rate_at_m_star=rate, halfwidth=half)
        )
    return out
