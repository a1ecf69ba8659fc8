"""Stochastic gradient estimators for the bilinear operator
g(z) = (A^T z^y + b, -A z^x + c).

Three families:
  * sublinear coordinate estimators (one matrix entry per block, reference
    g(0)),
  * variance-reduced coordinate estimators (one entry per block, reference
    g(w0), value scaled by the iterate difference), and
  * variance-reduced row/column estimators (one full line per block).

Every family comes in the geometry-specific variants listed in KINDS. Values
are exact ratios entry/probability, so full enumeration over index pairs
reproduces g(z) — the certification tests rely on that identity.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

FAMILIES = ("SublinearCoord", "VrCoord", "VrRowCol")
VARIANTS = ("L1L1", "L2L1v1", "L2L1v2", "L2L1v3", "L2L2oblivious", "L2L2dynamic")
ROWCOL_VARIANTS = ("L1L1", "L2L1v2", "L2L2oblivious")


@dataclass(frozen=True)
class EstimatorKind:
    family: str
    variant: str

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown estimator family {self.family!r}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown estimator variant {self.variant!r}")
        if self.family == "VrRowCol" and self.variant not in ROWCOL_VARIANTS:
            raise ConfigError(
                f"row-column estimators support {ROWCOL_VARIANTS}, not {self.variant!r}")

    @property
    def geometry(self):
        return {"L1L1": "L1L1", "L2L1v1": "L2L1", "L2L1v2": "L2L1",
                "L2L1v3": "L2L1", "L2L2oblivious": "L2L2",
                "L2L2dynamic": "L2L2"}[self.variant]


@dataclass
class GradEstimate:
    x_idx: np.ndarray
    x_val: np.ndarray
    y_idx: np.ndarray
    y_val: np.ndarray
    reference: str  # 'zero' | 'w0'


def l_constants(A):
    """The coordinate smoothness constants of the estimator lemmas."""
    mr1 = float(A.row_norm1.max())
    mr2 = float(A.row_norm2.max())
    mc1 = float(A.col_norm1.max())
    mc2 = float(A.col_norm2.max())
    sr1 = float(np.sum(A.row_norm1 ** 2))
    sc1 = float(np.sum(A.col_norm1 ** 2))
    frob2 = A.frob ** 2
    l21_v1 = math.sqrt(mr1 ** 2 + frob2)
    l21_v2 = math.sqrt(2.0 * A.rcs * mr2 ** 2)
    l21_v3 = math.sqrt(mr1 ** 2 + mr1 * mc1)
    l21_best = math.sqrt(mr1 ** 2 + min(frob2, A.rcs * mr2 ** 2, mr1 * mc1))
    return {
        "L11": max(mr2, mc2),
        "L21": {"v1": l21_v1, "v2": l21_v2, "v3": l21_v3, "best": l21_best},
        "L22": math.sqrt(sr1 + sc1),
        "L22_max": max(math.sqrt(sr1), math.sqrt(sc1)),
        "Lmax": A.amax,
        "Lrc": {"L1L1": A.amax, "L2L2": A.frob, "L2L1": mr2},
    }


def geometry_constant(kind, consts):
    """The certified estimator constant L for a kind (step sizes use this;
    centered families carry an extra sqrt(2) where the lemmas do)."""
    v = kind.variant
    if kind.family == "SublinearCoord":
        if v == "L1L1":
            return math.sqrt(2.0) * consts["L11"]
        if v.startswith("L2L1"):
            return consts["L21"][{"L2L1v1": "v1", "L2L1v2": "v2", "L2L1v3": "v3"}[v]]
        return consts["L22"]
    if kind.family == "VrCoord":
        if v == "L1L1":
            return math.sqrt(2.0) * consts["L11"]
        if v.startswith("L2L1"):
            return math.sqrt(2.0) * consts["L21"][
                {"L2L1v1": "v1", "L2L1v2": "v2", "L2L1v3": "v3"}[v]]
        return math.sqrt(2.0) * consts["L22"]
    # VrRowCol
    if v == "L1L1":
        return math.sqrt(2.0) * consts["Lrc"]["L1L1"]
    if v.startswith("L2L1"):
        return math.sqrt(2.0) * consts["Lrc"]["L2L1"]
    # the Frobenius bound is stated against the squared distance, which is
    # twice the ball divergence, hence the sqrt(2) here as well
    return math.sqrt(2.0) * consts["Lrc"]["L2L2"]


class DenseView:
    """IterateView over plain arrays, with exact inverse-cdf sampling.

    weights: optional dict of named weight vectors for the x block
    ('colnnz', 'col_l1'), matching the maintainer weights solvers use.
    """

    def __init__(self, x, y, x0=None, y0=None, weights=None):
        self.x = np.asarray(x, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        self.x0 = None if x0 is None else np.asarray(x0, dtype=np.float64)
        self.y0 = None if y0 is None else np.asarray(y0, dtype=np.float64)
        self.weights = weights or {}

    def _blockv(self, block):
        return self.x if block == "x" else self.y

    def _refv(self, block):
        return self.x0 if block == "x" else self.y0

    def _wvec(self, block, w_kind):
        if w_kind == "ones":
            return np.ones_like(self._blockv(block))
        return self.weights[w_kind]

    def get(self, block, j):
        return float(self._blockv(block)[j])

    @staticmethod
    def _draw(mass, rng):
        tot = mass.sum()
        if tot <= 0:
            raise ValueError("zero-mass distribution")
        c = np.cumsum(mass)
        return int(np.searchsorted(c, rng.random() * tot, side="right").clip(0, len(mass) - 1))

    def sample_value(self, block, rng):
        return self._draw(self._blockv(block), rng)

    def sample_weighted_sq(self, block, w_kind, rng):
        v = self._blockv(block)
        return self._draw(self._wvec(block, w_kind) * v * v, rng)

    def weighted_normsq(self, block, w_kind):
        v = self._blockv(block)
        return float(np.sum(self._wvec(block, w_kind) * v * v))

    def sample_centered_sq(self, block, w_kind, rng):
        d = self._blockv(block) - self._refv(block)
        return self._draw(self._wvec(block, w_kind) * d * d, rng)

    def centered_weighted_normsq(self, block, w_kind):
        d = self._blockv(block) - self._refv(block)
        return float(np.sum(self._wvec(block, w_kind) * d * d))


class Reference:
    """Reference-point bundle for VR estimators: w0, g(w0), and alias
    samplers proportional to the w0 blocks (simplex mixtures need them)."""

    def __init__(self, A, w0, gx, gy):
        from . import _kernels
        self.w0 = w0
        self.gx = gx
        self.gy = gy
        self._tabs = {}
        for block, vec in (("x", w0.x), ("y", w0.y)):
            if np.any(vec > 0) and np.all(vec >= 0):
                self._tabs[block] = _kernels.alias_build(np.asarray(vec, dtype=np.float64))

    def sample_w0(self, block, rng):
        prob, alias = self._tabs[block]
        from . import _kernels
        return int(_kernels.alias_draw(prob, alias, rng.random(), rng.random()))

    def block(self, name):
        return self.w0.x if name == "x" else self.w0.y


def make_reference(A, b, c, w0):
    """g(w0) = (A^T w0^y + b, -A w0^x + c) plus sampling tables."""
    m, n = A.m, A.n
    b = np.zeros(n) if b is None else np.asarray(b, dtype=np.float64)
    c = np.zeros(m) if c is None else np.asarray(c, dtype=np.float64)
    gx = A.matvec_t(w0.y) + b
    gy = -A.matvec(w0.x) + c
    return Reference(A, w0, gx, gy)


# ---------------------------------------------------------------------------
# sublinear family
# ---------------------------------------------------------------------------

def _sub_x(kind, A, view, rng):
    """Sample (i, j) and value for the x-block sparse part A_ij z^y_i / p_ij."""
    v = kind.variant
    if v == "L1L1":
        i = view.sample_value("y", rng)
        j = A.sample_in_line("row", i, 2, rng)
        return j, A.row_norm2[i] ** 2 / A.entry(i, j)
    if v.startswith("L2L1") or v == "L2L2dynamic":
        if v == "L2L2dynamic":
            nsq = view.weighted_normsq("y", "ones")
            if nsq == 0.0:
                return None, 0.0
            i = view.sample_weighted_sq("y", "ones", rng)
            j = A.sample_in_line("row", i, 1, rng)
            aij = A.entry(i, j)
            return j, math.copysign(A.row_norm1[i], aij) * nsq / view.get("y", i)
        i = view.sample_value("y", rng)
        j = A.sample_in_line("row", i, 1, rng)
        aij = A.entry(i, j)
        return j, math.copysign(A.row_norm1[i], aij)
    # L2L2oblivious
    i = A.sample_global("row_l1sq", rng)
    j = A.sample_in_line("row", i, 1, rng)
    aij = A.entry(i, j)
    tot = float(np.sum(A.row_norm1 ** 2))
    return j, math.copysign(1.0, aij) * view.get("y", i) * tot / A.row_norm1[i]


def _sub_y(kind, A, view, rng):
    """Sample (i, j) and value for the y-block sparse part -A_ij z^x_j / q_ij."""
    v = kind.variant
    if v == "L1L1":
        j = view.sample_value("x", rng)
        i = A.sample_in_line("col", j, 2, rng)
        return i, -A.col_norm2[j] ** 2 / A.entry(i, j)
    if v == "L2L1v1":
        i, j = A.sample_global("entry_sq", rng)
        return i, -view.get("x", j) * A.frob ** 2 / A.entry(i, j)
    if v == "L2L1v2":
        s = view.weighted_normsq("x", "colnnz")
        if s == 0.0:
            return None, 0.0
        j = view.sample_weighted_sq("x", "colnnz", rng)
        i = A.sample_in_line("col", j, 0, rng)
        return i, -A.entry(i, j) * s / view.get("x", j)
    if v == "L2L1v3":
        s = view.weighted_normsq("x", "col_l1")
        if s == 0.0:
            return None, 0.0
        j = view.sample_weighted_sq("x", "col_l1", rng)
        i = A.sample_in_line("col", j, 1, rng)
        return i, -math.copysign(1.0, A.entry(i, j)) * s / view.get("x", j)
    if v == "L2L2dynamic":
        nsq = view.weighted_normsq("x", "ones")
        if nsq == 0.0:
            return None, 0.0
        j = view.sample_weighted_sq("x", "ones", rng)
        i = A.sample_in_line("col", j, 1, rng)
        aij = A.entry(i, j)
        return i, -math.copysign(A.col_norm1[j], aij) * nsq / view.get("x", j)
    # L2L2oblivious
    j = A.sample_global("col_l1sq", rng)
    i = A.sample_in_line("col", j, 1, rng)
    aij = A.entry(i, j)
    tot = float(np.sum(A.col_norm1 ** 2))
    return i, -math.copysign(1.0, aij) * view.get("x", j) * tot / A.col_norm1[j]


def estimate_sublinear(kind, A, view, rng):
    if kind.family != "SublinearCoord":
        raise ConfigError("estimate_sublinear requires a SublinearCoord kind")
    jx, valx = _sub_x(kind, A, view, rng)
    iy, valy = _sub_y(kind, A, view, rng)
    return GradEstimate(
        x_idx=np.array([] if jx is None else [jx], dtype=np.int64),
        x_val=np.array([] if jx is None else [valx]),
        y_idx=np.array([] if iy is None else [iy], dtype=np.int64),
        y_val=np.array([] if iy is None else [valy]),
        reference="zero",
    )


# ---------------------------------------------------------------------------
# VR coordinate family
# ---------------------------------------------------------------------------

def _mix_sample(view, ref, block, rng):
    """Draw from (value + 2*ref)/3, the 'sampling from the sum' mixture."""
    if rng.random() < 1.0 / 3.0:
        return view.sample_value(block, rng)
    return ref.sample_w0(block, rng)


def _vr_x(kind, A, view, ref, rng):
    v = kind.variant
    y0 = ref.block("y")
    if v == "L1L1":
        i = _mix_sample(view, ref, "y", rng)
        j = A.sample_in_line("row", i, 2, rng)
        yi = view.get("y", i)
        mix = (yi + 2.0 * y0[i]) / 3.0
        return j, (yi - y0[i]) * A.row_norm2[i] ** 2 / (mix * A.entry(i, j))
    if v.startswith("L2L1"):
        i = _mix_sample(view, ref, "y", rng)
        j = A.sample_in_line("row", i, 1, rng)
        yi = view.get("y", i)
        mix = (yi + 2.0 * y0[i]) / 3.0
        return j, (yi - y0[i]) * math.copysign(A.row_norm1[i], A.entry(i, j)) / mix
    if v == "L2L2dynamic":
        nsq = view.centered_weighted_normsq("y", "ones")
        if nsq == 0.0:
            return None, 0.0
        i = view.sample_centered_sq("y", "ones", rng)
        d = view.get("y", i) - y0[i]
        if d == 0.0:  # roundoff in the descent landed on a zero-mass coord
            return None, 0.0
        j = A.sample_in_line("row", i, 1, rng)
        return j, math.copysign(A.row_norm1[i], A.entry(i, j)) * nsq / d
    # L2L2oblivious
    i = A.sample_global("row_l1sq", rng)
    j = A.sample_in_line("row", i, 1, rng)
    d = view.get("y", i) - y0[i]
    tot = float(np.sum(A.row_norm1 ** 2))
    return j, math.copysign(1.0, A.entry(i, j)) * d * tot / A.row_norm1[i]


def _vr_y(kind, A, view, ref, rng):
    v = kind.variant
    x0 = ref.block("x")
    if v == "L1L1":
        j = _mix_sample(view, ref, "x", rng)
        i = A.sample_in_line("col", j, 2, rng)
        xj = view.get("x", j)
        mix = (xj + 2.0 * x0[j]) / 3.0
        return i, -(xj - x0[j]) * A.col_norm2[j] ** 2 / (mix * A.entry(i, j))
    if v == "L2L1v1":
        i, j = A.sample_global("entry_sq", rng)
        d = view.get("x", j) - x0[j]
        return i, -d * A.frob ** 2 / A.entry(i, j)
    if v == "L2L1v2":
        s = view.centered_weighted_normsq("x", "colnnz")
        if s == 0.0:
            return None, 0.0
        j = view.sample_centered_sq("x", "colnnz", rng)
        d = view.get("x", j) - x0[j]
        if d == 0.0:
            return None, 0.0
        i = A.sample_in_line("col", j, 0, rng)
        return i, -A.entry(i, j) * s / d
    if v == "L2L1v3":
        s = view.centered_weighted_normsq("x", "col_l1")
        if s == 0.0:
            return None, 0.0
        j = view.sample_centered_sq("x", "col_l1", rng)
        d = view.get("x", j) - x0[j]
        if d == 0.0:
            return None, 0.0
        i = A.sample_in_line("col", j, 1, rng)
        return i, -math.copysign(1.0, A.entry(i, j)) * s / d
    if v == "L2L2dynamic":
        nsq = view.centered_weighted_normsq("x", "ones")
        if nsq == 0.0:
            return None, 0.0
        j = view.sample_centered_sq("x", "ones", rng)
        d = view.get("x", j) - x0[j]
        if d == 0.0:
            return None, 0.0
        i = A.sample_in_line("col", j, 1, rng)
        return i, -math.copysign(A.col_norm1[j], A.entry(i, j)) * nsq / d
    # L2L2oblivious
    j = A.sample_global("col_l1sq", rng)
    i = A.sample_in_line("col", j, 1, rng)
    d = view.get("x", j) - x0[j]
    tot = float(np.sum(A.col_norm1 ** 2))
    return i, -math.copysign(1.0, A.entry(i, j)) * d * tot / A.col_norm1[j]


def estimate_vr(kind, A, ref, view, rng):
    if kind.family != "VrCoord":
        raise ConfigError("estimate_vr requires a VrCoord kind")
    jx, valx = _vr_x(kind, A, view, ref, rng)
    iy, valy = _vr_y(kind, A, view, ref, rng)
    return GradEstimate(
        x_idx=np.array([] if jx is None else [jx], dtype=np.int64),
        x_val=np.array([] if jx is None else [valx]),
        y_idx=np.array([] if iy is None else [iy], dtype=np.int64),
        y_val=np.array([] if iy is None else [valy]),
        reference="w0",
    )


# ---------------------------------------------------------------------------
# VR row-column family
# ---------------------------------------------------------------------------

def estimate_rowcol_vr(kind, A, ref, view, rng):
    if kind.family != "VrRowCol":
        raise ConfigError("estimate_rowcol_vr requires a VrRowCol kind")
    v = kind.variant
    y0 = ref.block("y")
    x0 = ref.block("x")

    # row choice (x block): sparse part = t_x * (row i of A)
    if v in ("L1L1", "L2L1v2"):
        i = _mix_sample(view, ref, "y", rng)
        yi = view.get("y", i)
        tx = (yi - y0[i]) / ((yi + 2.0 * y0[i]) / 3.0)
    else:  # L2L2oblivious: p_i = ||a_i||_2^2 / ||A||_F^2
        i = _rowsq_sample(A, "row", rng)
        yi = view.get("y", i)
        tx = (yi - y0[i]) * A.frob ** 2 / A.row_norm2[i] ** 2

    # column choice (y block): sparse part = -t_y * (column j of A)
    if v == "L1L1":
        j = _mix_sample(view, ref, "x", rng)
        xj = view.get("x", j)
        ty = (xj - x0[j]) / ((xj + 2.0 * x0[j]) / 3.0)
    elif v == "L2L1v2":  # dynamic q_j = (x - x0)_j^2 / ||x - x0||^2
        nsq = view.centered_weighted_normsq("x", "ones")
        if nsq == 0.0:
            j, ty = None, 0.0
        else:
            j = view.sample_centered_sq("x", "ones", rng)
            d = view.get("x", j) - x0[j]
            if d == 0.0:
                j, ty = None, 0.0
            else:
                ty = nsq / d
    else:  # L2L2oblivious: q_j = ||a_:j||_2^2 / ||A||_F^2
        j = _rowsq_sample(A, "col", rng)
        xj = view.get("x", j)
        ty = (xj - x0[j]) * A.frob ** 2 / A.col_norm2[j] ** 2

    cols, rvals = A.row_entries(i)
    x_idx, x_val = cols.astype(np.int64), tx * rvals
    if j is None:
        y_idx = np.array([], dtype=np.int64)
        y_val = np.array([])
    else:
        rows, cvals = A.col_entries(j)
        y_idx, y_val = rows.astype(np.int64), -ty * cvals
    return GradEstimate(x_idx=x_idx, x_val=np.asarray(x_val),
                        y_idx=y_idx, y_val=np.asarray(y_val), reference="w0")


def _rowsq_sample(A, axis, rng):
    """Line index proportional to squared line l2 norm (cached alias)."""
    cache = getattr(A, "_l2sq_tabs", None)
    if cache is None:
        from . import _kernels
        cache = {
            "row": _kernels.alias_build(A.row_norm2 ** 2),
            "col": _kernels.alias_build(A.col_norm2 ** 2),
        }
        A._l2sq_tabs = cache
    from . import _kernels
    prob, alias = cache[axis]
    return int(_kernels.alias_draw(prob, alias, rng.random(), rng.random()))


# ---------------------------------------------------------------------------
# exact probability evaluation (test hook)
# ---------------------------------------------------------------------------

def prob_eval(kind, A, block, i, j, z, w0=None, weights=None):
    """Probability that the estimator's `block` sampler draws the matrix
    position (i, j); z and w0 are Points (dense)."""
    aij = A.entry(i, j)
    if aij == 0.0:
        return 0.0
    v = kind.variant
    x, y = np.asarray(z.x, dtype=np.float64), np.asarray(z.y, dtype=np.float64)
    x0 = None if w0 is None else np.asarray(w0.x, dtype=np.float64)
    y0 = None if w0 is None else np.asarray(w0.y, dtype=np.float64)
    weights = weights or {}

    if kind.family == "SublinearCoord":
        if block == "x":
            if v == "L1L1":
                return y[i] * aij ** 2 / A.row_norm2[i] ** 2
            if v.startswith("L2L1"):
                return y[i] * abs(aij) / A.row_norm1[i]
            if v == "L2L2dynamic":
                return (y[i] ** 2 / float(y @ y)) * abs(aij) / A.row_norm1[i]
            tot = float(np.sum(A.row_norm1 ** 2))
            return (A.row_norm1[i] ** 2 / tot) * abs(aij) / A.row_norm1[i]
        if v == "L1L1":
            return x[j] * aij ** 2 / A.col_norm2[j] ** 2
        if v == "L2L1v1":
            return aij ** 2 / A.frob ** 2
        if v == "L2L1v2":
            cs = weights["colnnz"]
            return x[j] ** 2 / float(np.sum(cs * x * x))
        if v == "L2L1v3":
            cl = weights["col_l1"]
            return abs(aij) * x[j] ** 2 / float(np.sum(cl * x * x))
        if v == "L2L2dynamic":
            return (x[j] ** 2 / float(x @ x)) * abs(aij) / A.col_norm1[j]
        tot = float(np.sum(A.col_norm1 ** 2))
        return (A.col_norm1[j] ** 2 / tot) * abs(aij) / A.col_norm1[j]

    if kind.family == "VrCoord":
        if block == "x":
            if v == "L1L1":
                return ((y[i] + 2 * y0[i]) / 3.0) * aij ** 2 / A.row_norm2[i] ** 2
            if v.startswith("L2L1"):
                return ((y[i] + 2 * y0[i]) / 3.0) * abs(aij) / A.row_norm1[i]
            if v == "L2L2dynamic":
                d = y - y0
                return (d[i] ** 2 / float(d @ d)) * abs(aij) / A.row_norm1[i]
            tot = float(np.sum(A.row_norm1 ** 2))
            return (A.row_norm1[i] ** 2 / tot) * abs(aij) / A.row_norm1[i]
        if v == "L1L1":
            return ((x[j] + 2 * x0[j]) / 3.0) * aij ** 2 / A.col_norm2[j] ** 2
        if v == "L2L1v1":
            return aij ** 2 / A.frob ** 2
        if v == "L2L1v2":
            cs = weights["colnnz"]
            d = x - x0
            return d[j] ** 2 / float(np.sum(cs * d * d))
        if v == "L2L1v3":
            cl = weights["col_l1"]
            d = x - x0
            return abs(aij) * d[j] ** 2 / float(np.sum(cl * d * d))
        if v == "L2L2dynamic":
            d = x - x0
            return (d[j] ** 2 / float(d @ d)) * abs(aij) / A.col_norm1[j]
        tot = float(np.sum(A.col_norm1 ** 2))
        return (A.col_norm1[j] ** 2 / tot) * abs(aij) / A.col_norm1[j]

    # VrRowCol: probabilities over the sampled line index only
    if block == "x":
        if v in ("L1L1", "L2L1v2"):
            return (y[i] + 2 * y0[i]) / 3.0
        return A.row_norm2[i] ** 2 / A.frob ** 2
    if v == "L1L1":
        return (x[j] + 2 * x0[j]) / 3.0
    if v == "L2L1v2":
        d = x - x0
        return d[j] ** 2 / float(d @ d)
    return A.col_norm2[j] ** 2 / A.frob ** 2


def coord_value(kind, A, block, i, j, z, w0=None, weights=None):
    """Emitted estimator value if the `block` sampler lands on (i, j); dense
    companion of prob_eval, so enumeration can reproduce the estimate exactly.
    For VrRowCol this is the line multiplier (sparse part = value * line)."""
    aij = A.entry(i, j)
    v = kind.variant
    x, y = np.asarray(z.x, dtype=np.float64), np.asarray(z.y, dtype=np.float64)
    x0 = None if w0 is None else np.asarray(w0.x, dtype=np.float64)
    y0 = None if w0 is None else np.asarray(w0.y, dtype=np.float64)
    sgn = math.copysign(1.0, aij) if aij != 0.0 else 0.0

    if kind.family == "SublinearCoord":
        if block == "x":
            if v == "L1L1":
                return A.row_norm2[i] ** 2 / aij
            if v.startswith("L2L1"):
                return sgn * A.row_norm1[i]
            if v == "L2L2dynamic":
                return sgn * A.row_norm1[i] * float(y @ y) / y[i]
            return sgn * y[i] * float(np.sum(A.row_norm1 ** 2)) / A.row_norm1[i]
        if v == "L1L1":
            return -A.col_norm2[j] ** 2 / aij
        if v == "L2L1v1":
            return -x[j] * A.frob ** 2 / aij
        if v == "L2L1v2":
            cs = weights["colnnz"]
            return -aij * float(np.sum(cs * x * x)) / x[j]
        if v == "L2L1v3":
            cl = weights["col_l1"]
            return -sgn * float(np.sum(cl * x * x)) / x[j]
        if v == "L2L2dynamic":
            return -sgn * A.col_norm1[j] * float(x @ x) / x[j]
        return -sgn * x[j] * float(np.sum(A.col_norm1 ** 2)) / A.col_norm1[j]

    if kind.family == "VrCoord":
        if block == "x":
            d = y - y0
            if v == "L1L1":
                return d[i] * A.row_norm2[i] ** 2 / (((y[i] + 2 * y0[i]) / 3.0) * aij)
            if v.startswith("L2L1"):
                return d[i] * sgn * A.row_norm1[i] / ((y[i] + 2 * y0[i]) / 3.0)
            if v == "L2L2dynamic":
                return sgn * A.row_norm1[i] * float(d @ d) / d[i]
            return sgn * d[i] * float(np.sum(A.row_norm1 ** 2)) / A.row_norm1[i]
        d = x - x0
        if v == "L1L1":
            return -d[j] * A.col_norm2[j] ** 2 / (((x[j] + 2 * x0[j]) / 3.0) * aij)
        if v == "L2L1v1":
            return -d[j] * A.frob ** 2 / aij
        if v == "L2L1v2":
            cs = weights["colnnz"]
            return -aij * float(np.sum(cs * d * d)) / d[j]
        if v == "L2L1v3":
            cl = weights["col_l1"]
            return -sgn * float(np.sum(cl * d * d)) / d[j]
        if v == "L2L2dynamic":
            return -sgn * A.col_norm1[j] * float(d @ d) / d[j]
        return -sgn * d[j] * float(np.sum(A.col_norm1 ** 2)) / A.col_norm1[j]

    # VrRowCol multipliers
    if block == "x":
        d = y - y0
        if v in ("L1L1", "L2L1v2"):
            return 3.0 * d[i] / (y[i] + 2 * y0[i])
        return d[i] * A.frob ** 2 / A.row_norm2[i] ** 2
    d = x - x0
    if v == "L1L1":
        return 3.0 * d[j] / (x[j] + 2 * x0[j])
    if v == "L2L1v2":
        return float(d @ d) / d[j]
    return d[j] * A.frob ** 2 / A.col_norm2[j] ** 2
