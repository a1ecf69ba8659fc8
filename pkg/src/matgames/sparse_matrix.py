"""Immutable sparse matrix with constant-time entry/norm/sampling access.

Provides the access modes the solvers rely on: entry queries, per-line and
global norms/statistics, and O(1) weighted sampling of nonzero positions
inside a row/column or globally, all precomputed at build time.

Indices are 0-based in this API; Matrix Market files are 1-based and are
converted on load.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import InputError, StructuralError


@dataclass(frozen=True)
class MatrixStats:
    max_row_norm1: float
    max_row_norm2: float
    max_col_norm1: float
    max_col_norm2: float
    nnz: int
    rcs: int
    frob: float
    amax: float


class _AliasTable:
    __slots__ = ("prob", "alias")

    def __init__(self, weights):
        self.prob, self.alias = _kernels.alias_build(np.asarray(weights, dtype=np.float64))

    def draw(self, rng):
        return int(_kernels.alias_draw(self.prob, self.alias, rng.random(), rng.random()))


class SparseMatrix:
    """Built once via :func:`build` or :func:`load_matrix_market`; then read-only."""

    def __init__(self, csr):
        csr = csr.tocsr()
        csr.sum_duplicates()
        csr.eliminate_zeros()
        csr.sort_indices()
        self.m, self.n = csr.shape
        self.csr = csr
        self.csc = csr.tocsc()
        self.csc.sort_indices()
        self.nnz = int(csr.nnz)

        self.row_nnz = np.diff(csr.indptr)
        self.col_nnz = np.diff(self.csc.indptr)
        if np.any(self.row_nnz == 0):
            i = int(np.argmin(self.row_nnz))
            raise StructuralError(f"row {i} has no nonzero entries")
        if np.any(self.col_nnz == 0):
            j = int(np.argmin(self.col_nnz))
            raise StructuralError(f"column {j} has no nonzero entries")

        absdata = np.abs(csr.data)
        sqdata = csr.data * csr.data
        self.row_norm1 = np.add.reduceat(absdata, csr.indptr[:-1])
        self.row_norm2 = np.sqrt(np.add.reduceat(sqdata, csr.indptr[:-1]))
        cabs = np.abs(self.csc.data)
        csq = self.csc.data * self.csc.data
        self.col_norm1 = np.add.reduceat(cabs, self.csc.indptr[:-1])
        self.col_norm2 = np.sqrt(np.add.reduceat(csq, self.csc.indptr[:-1]))

        self.rcs = int(max(self.row_nnz.max(), self.col_nnz.max()))
        self.frob = float(np.sqrt(sqdata.sum()))
        self.amax = float(absdata.max())

        # row index of each CSR-ordered nonzero, for global entry sampling
        self._csr_rows = np.repeat(np.arange(self.m), self.row_nnz)

        # per-line alias tables over nonzero positions
        self._row_tab = {
            1: [_AliasTable(absdata[csr.indptr[i]:csr.indptr[i + 1]]) for i in range(self.m)],
            2: [_AliasTable(sqdata[csr.indptr[i]:csr.indptr[i + 1]]) for i in range(self.m)],
        }
        cp = self.csc.indptr
        self._col_tab = {
            1: [_AliasTable(cabs[cp[j]:cp[j + 1]]) for j in range(self.n)],
            2: [_AliasTable(csq[cp[j]:cp[j + 1]]) for j in range(self.n)],
        }

        self._global_tab = {
            "entry_sq": _AliasTable(sqdata),
            "row_l1sq": _AliasTable(self.row_norm1 ** 2),
            "col_l1sq": _AliasTable(self.col_norm1 ** 2),
        }

    # -- access ---------------------------------------------------------

    def entry(self, i, j):
        if not (0 <= i < self.m and 0 <= j < self.n):
            raise IndexError(f"entry index ({i},{j}) out of range for {self.m}x{self.n}")
        lo, hi = self.csr.indptr[i], self.csr.indptr[i + 1]
        pos = np.searchsorted(self.csr.indices[lo:hi], j)
        if pos < hi - lo and self.csr.indices[lo + pos] == j:
            return float(self.csr.data[lo + pos])
        return 0.0

    def row_entries(self, i):
        """(column indices, values) of row i, ascending columns."""
        lo, hi = self.csr.indptr[i], self.csr.indptr[i + 1]
        return self.csr.indices[lo:hi], self.csr.data[lo:hi]

    def col_entries(self, j):
        lo, hi = self.csc.indptr[j], self.csc.indptr[j + 1]
        return self.csc.indices[lo:hi], self.csc.data[lo:hi]

    def line_norm(self, axis, k, p):
        if axis == "row":
            if not 0 <= k < self.m:
                raise IndexError(f"row {k} out of range")
            return float(self.row_norm1[k] if p == 1 else self.row_norm2[k])
        if axis == "col":
            if not 0 <= k < self.n:
                raise IndexError(f"column {k} out of range")
            return float(self.col_norm1[k] if p == 1 else self.col_norm2[k])
        raise ValueError(f"axis must be 'row' or 'col', got {axis!r}")

    def stats(self):
        return MatrixStats(
            max_row_norm1=float(self.row_norm1.max()),
            max_row_norm2=float(self.row_norm2.max()),
            max_col_norm1=float(self.col_norm1.max()),
            max_col_norm2=float(self.col_norm2.max()),
            nnz=self.nnz,
            rcs=self.rcs,
            frob=self.frob,
            amax=self.amax,
        )

    # -- sampling -------------------------------------------------------

    def sample_in_line(self, axis, k, p, rng):
        """Index within line k drawn with probability |A_kj|^p / ||line||_p^p.

        p=0 (columns only) draws uniformly over the stored nonzeros.
        """
        if axis == "row":
            lo = self.csr.indptr[k]
            if p == 0:
                raise ValueError("p=0 sampling is defined for columns only")
            pos = self._row_tab[p][k].draw(rng)
            return int(self.csr.indices[lo + pos])
        if axis == "col":
            lo = self.csc.indptr[k]
            if p == 0:
                cnt = self.col_nnz[k]
                pos = min(int(rng.random() * cnt), cnt - 1)
            else:
                pos = self._col_tab[p][k].draw(rng)
            return int(self.csc.indices[lo + pos])
        raise ValueError(f"axis must be 'row' or 'col', got {axis!r}")

    def sample_global(self, kind, rng):
        tab = self._global_tab.get(kind)
        if tab is None:
            raise ValueError(f"unknown global sampler {kind!r}")
        k = tab.draw(rng)
        if kind == "entry_sq":
            return int(self._csr_rows[k]), int(self.csr.indices[k])
        return k

    # -- products -------------------------------------------------------

    def matvec(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise InputError(f"matvec expects length {self.n}, got {x.shape}")
        return self.csr @ x

    def matvec_t(self, y):
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.m,):
            raise InputError(f"matvec_t expects length {self.m}, got {y.shape}")
        return self.csc.T @ y

    def to_dense(self):
        return self.csr.toarray()


def build(triplets, m, n):
    """Build from (i, j, value) triplets (0-based); duplicates are summed and
    exact-zero sums dropped."""
    if m < 1 or n < 1:
        raise InputError("matrix dimensions must be positive")
    rows, cols, vals = [], [], []
    for i, j, v in triplets:
        if not (0 <= i < m and 0 <= j < n):
            raise InputError(f"triplet index ({i},{j}) out of range for {m}x{n}")
        if not np.isfinite(v):
            raise InputError(f"nonfinite value at ({i},{j})")
        rows.append(i)
        cols.append(j)
        vals.append(float(v))
    coo = sp.coo_matrix((vals, (rows, cols)), shape=(m, n))
    return SparseMatrix(coo.tocsr())


def load_matrix_market(path):
    """Parse MatrixMarket 'coordinate real general|symmetric'.

    Symmetric files mirror off-diagonal entries. Errors carry 1-based line
    numbers.
    """
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise InputError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) != 5 or header[0] != "%%MatrixMarket":
        raise InputError(f"{path}:1: not a MatrixMarket header")
    _, obj, fmt, field, symm = (t.lower() for t in header)
    if obj != "matrix" or fmt != "coordinate":
        raise InputError(f"{path}:1: only 'matrix coordinate' files are supported")
    if field != "real":
        raise InputError(f"{path}:1: unsupported field {field!r} (only 'real')")
    if symm not in ("general", "symmetric"):
        raise InputError(f"{path}:1: unsupported symmetry {symm!r}")

    idx = 1
    while idx < len(lines) and (lines[idx].startswith("%") or not lines[idx].strip()):
        idx += 1
    if idx == len(lines):
        raise InputError(f"{path}:{idx}: missing size line")
    size_parts = lines[idx].split()
    if len(size_parts) != 3:
        raise InputError(f"{path}:{idx + 1}: size line must be 'm n nnz'")
    try:
        m, n, nnz = (int(t) for t in size_parts)
    except ValueError:
        raise InputError(f"{path}:{idx + 1}: size line must be three integers") from None
    if symm == "symmetric" and m != n:
        raise InputError(f"{path}:{idx + 1}: symmetric matrix must be square")

    triplets = []
    count = 0
    for lineno in range(idx + 1, len(lines)):
        raw = lines[lineno].strip()
        if not raw or raw.startswith("%"):
            continue
        parts = raw.split()
        if len(parts) != 3:
            raise InputError(f"{path}:{lineno + 1}: expected 'i j value'")
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise InputError(f"{path}:{lineno + 1}: malformed entry") from None
        if not (1 <= i <= m and 1 <= j <= n):
            raise InputError(f"{path}:{lineno + 1}: index ({i},{j}) out of range")
        triplets.append((i - 1, j - 1, v))
        if symm == "symmetric" and i != j:
            triplets.append((j - 1, i - 1, v))
        count += 1
    if count != nnz:
        raise InputError(f"{path}: size line declares {nnz} entries, found {count}")
    return build(triplets, m, n)
