"""Sparse binary measurement matrices stored as per-column support lists.

A matrix here is simultaneously a 0/1 measurement matrix and the adjacency
matrix of a bipartite graph: column ``j`` is the left vertex ``j`` and its
support lists the right vertices (rows) it touches.  Storage is column-major
because every structural question asked downstream (degrees, neighborhoods,
expansion) iterates over columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MatrixFormatError",
    "Seed",
    "SparseBinaryMatrix",
    "gen_bernoulli",
    "gen_left_regular",
    "matvec",
    "adjoint_apply",
    "write_matrix",
    "read_matrix",
]


class MatrixFormatError(ValueError):
    """Malformed SBM file; ``line`` is the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Seed:
    """Root of a reproducible stream tree.

    ``Seed(master).child(k)`` derives the substream for trial ``k``;
    deeper children key columns, trials within cells, and so on.  Identical
    ``(master, path)`` pairs reproduce identical draws bit-for-bit, on any
    machine and under any parallel schedule, because every consumer owns
    its own counter-derived generator.
    """

    master: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.master) < 2**64:
            raise ValueError("master seed must be a 64-bit unsigned integer")

    def child(self, *indices: int) -> "Seed":
        return Seed(self.master, self.path + tuple(int(i) for i in indices))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master, spawn_key=self.path)
        return np.random.default_rng(ss)


class SparseBinaryMatrix:
    """0/1 matrix of shape ``(m, n)`` with per-column sorted row indices.

    Immutable after construction; safe to share read-only across workers.

    Parameters
    ----------
    m, n : int
        Number of rows (right vertices) and columns (left vertices).
    col_support : sequence of integer arrays
        ``col_support[j]`` lists the rows ``i`` with ``A[i, j] = 1``,
        strictly ascending, each in ``[0, m)``.
    """

    __slots__ = ("m", "n", "col_support", "_edge_rows", "_edge_cols", "_degrees")

    def __init__(self, m: int, n: int, col_support):
        m = int(m)
        n = int(n)
        if m < 1 or n < 1:
            raise ValueError(f"dimensions must be positive, got m={m}, n={n}")
        if len(col_support) != n:
            raise ValueError(f"expected {n} support lists, got {len(col_support)}")
        cols = []
        for j, sup in enumerate(col_support):
            arr = np.asarray(sup, dtype=np.int64)
            if arr.ndim != 1:
                raise ValueError(f"column {j}: support must be one-dimensional")
            if arr.size:
                if arr[0] < 0 or arr[-1] >= m:
                    raise ValueError(f"column {j}: row index out of range [0, {m})")
                if np.any(np.diff(arr) <= 0):
                    raise ValueError(f"column {j}: support not strictly ascending")
            arr.flags.writeable = False
            cols.append(arr)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "col_support", tuple(cols))
        degrees = np.array([c.size for c in cols], dtype=np.int64)
        degrees.flags.writeable = False
        object.__setattr__(self, "_degrees", degrees)
        if degrees.sum():
            edge_rows = np.concatenate(cols)
            edge_cols = np.repeat(np.arange(n, dtype=np.int64), degrees)
        else:
            edge_rows = np.empty(0, dtype=np.int64)
            edge_cols = np.empty(0, dtype=np.int64)
        edge_rows.flags.writeable = False
        edge_cols.flags.writeable = False
        object.__setattr__(self, "_edge_rows", edge_rows)
        object.__setattr__(self, "_edge_cols", edge_cols)

    def __setattr__(self, name, value):
        raise AttributeError("SparseBinaryMatrix is immutable")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    @property
    def degrees(self) -> np.ndarray:
        """Column degrees (number of ones per column)."""
        return self._degrees

    @property
    def nnz(self) -> int:
        return int(self._degrees.sum())

    def to_dense(self) -> np.ndarray:
        """Materialize as a dense float array (for desk-scale linear algebra)."""
        dense = np.zeros((self.m, self.n))
        dense[self._edge_rows, self._edge_cols] = 1.0
        return dense

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseBinaryMatrix):
            return NotImplemented
        return (
            self.m == other.m
            and self.n == other.n
            and all(np.array_equal(a, b) for a, b in zip(self.col_support, other.col_support))
        )

    def __hash__(self):
        return hash((self.m, self.n, tuple(int(d) for d in self._degrees)))

    def __repr__(self):
        return f"SparseBinaryMatrix(m={self.m}, n={self.n}, nnz={self.nnz})"


def gen_bernoulli(n: int, m: int, p: float, seed: Seed) -> SparseBinaryMatrix:
    """Sample an ``m x n`` matrix with i.i.d. Bernoulli(``p``) entries.

    Each column draws its degree from Binomial(``m``, ``p``) and then a
    uniform subset of rows of that size, which is equal in distribution to
    i.i.d. entries but costs O(nnz) instead of O(mn) -- the interesting
    regime is vanishing ``p``.  Column ``j`` uses the substream
    ``seed.child(j)``, so the result does not depend on generation order.
    """
    n = int(n)
    m = int(m)
    if n < 1 or m < 1:
        raise ValueError(f"dimensions must be positive, got n={n}, m={m}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    cols = []
    for j in range(n):
        rng = seed.child(j).generator()
        deg = int(rng.binomial(m, p))
        cols.append(np.sort(rng.choice(m, size=deg, replace=False)))
    return SparseBinaryMatrix(m, n, cols)


def gen_left_regular(n: int, m: int, d: int, seed: Seed) -> SparseBinaryMatrix:
    """Sample a uniformly random left ``d``-regular bipartite adjacency matrix.

    Every column is an independent uniform ``d``-subset of the ``m`` rows.
    """
    n = int(n)
    m = int(m)
    d = int(d)
    if n < 1 or m < 1:
        raise ValueError(f"dimensions must be positive, got n={n}, m={m}")
    if not 1 <= d <= m:
        raise ValueError(f"degree d must satisfy 1 <= d <= m, got d={d}, m={m}")
    cols = []
    for j in range(n):
        rng = seed.child(j).generator()
        cols.append(np.sort(rng.choice(m, size=d, replace=False)))
    return SparseBinaryMatrix(m, n, cols)


def matvec(A: SparseBinaryMatrix, x) -> np.ndarray:
    """Compute ``A @ x`` by sparse accumulation."""
    x = np.asarray(x, dtype=float)
    if x.shape != (A.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({A.n},)")
    return np.bincount(A._edge_rows, weights=x[A._edge_cols], minlength=A.m)


def adjoint_apply(A: SparseBinaryMatrix, t) -> np.ndarray:
    """Compute ``A.T @ t``; entry ``j`` sums ``t`` over the support of column ``j``."""
    t = np.asarray(t, dtype=float)
    if t.shape != (A.m,):
        raise ValueError(f"t has shape {t.shape}, expected ({A.m},)")
    return np.bincount(A._edge_cols, weights=t[A._edge_rows], minlength=A.n)


def write_matrix(A: SparseBinaryMatrix, path) -> None:
    """Write ``A`` in the SBM text format.

    Line 1 is ``SBM <m> <n>``; line ``j + 2`` is column ``j`` as
    ``<deg_j> <i_1> ... <i_deg_j>`` with strictly ascending 0-based row
    indices.  ASCII, LF-terminated.
    """
    with open(path, "w", newline="\n") as fh:
        fh.write(f"SBM {A.m} {A.n}\n")
        for sup in A.col_support:
            if sup.size:
                fh.write(f"{sup.size} " + " ".join(str(int(i)) for i in sup) + "\n")
            else:
                fh.write("0\n")


def read_matrix(path) -> SparseBinaryMatrix:
    """Read an SBM text file; inverse of :func:`write_matrix`.

    Raises
    ------
    MatrixFormatError
        On malformed header, wrong token counts, out-of-range indices, or
        non-ascending supports, naming the offending line.
    """
    with open(path) as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MatrixFormatError("empty file", line=1)
    header = lines[0].split()
    if len(header) != 3 or header[0] != "SBM":
        raise MatrixFormatError(f"expected header 'SBM <m> <n>', got {lines[0]!r}", line=1)
    try:
        m, n = int(header[1]), int(header[2])
    except ValueError:
        raise MatrixFormatError(f"non-integer dimensions in header {lines[0]!r}", line=1)
    if m < 1 or n < 1:
        raise MatrixFormatError(f"dimensions must be positive, got m={m}, n={n}", line=1)
    if len(lines) - 1 != n:
        raise MatrixFormatError(
            f"expected {n} column lines after the header, found {len(lines) - 1}",
            line=len(lines),
        )
    cols = []
    for j in range(n):
        lineno = j + 2
        try:
            tokens = [int(tok) for tok in lines[j + 1].split()]
        except ValueError:
            raise MatrixFormatError(f"non-integer token in column {j}", line=lineno)
        if not tokens:
            raise MatrixFormatError(f"empty line for column {j}", line=lineno)
        deg, idx = tokens[0], tokens[1:]
        if deg != len(idx):
            raise MatrixFormatError(
                f"column {j} declares degree {deg} but lists {len(idx)} indices", line=lineno
            )
        for i in idx:
            if not 0 <= i < m:
                raise MatrixFormatError(
                    f"column {j}: row index {i} outside [0, {m})", line=lineno
                )
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise MatrixFormatError(f"column {j}: indices not strictly ascending", line=lineno)
        cols.append(np.asarray(idx, dtype=np.int64))
    return SparseBinaryMatrix(m, n, cols)
