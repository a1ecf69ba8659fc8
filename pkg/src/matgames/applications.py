"""End-to-end reductions: l2 regression, minimum enclosing ball (MinEB) and
maximum inscribed ball (MaxIB).

All three reduce to bilinear saddle-point problems and call the stochastic
solvers; MinEB/MaxIB work on a normalized copy of the input and undo the
normalization on the way out.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import sparse_matrix as sm
from .errors import ConfigError, InputError
from .solvers.strongly_monotone import composite_gap, solve_strongly_monotone


@dataclass
class RegressionProblem:
    A: object            # SparseMatrix, m x n
    b: np.ndarray        # m-vector
    mu: float            # smallest eigenvalue of A'A
    eps: float           # target ||x - x*||_2


@dataclass
class BallProblem:
    points: np.ndarray = None       # MinEB: m x d
    halfspaces: tuple = None        # MaxIB: (A m x d, b m)
    eps: float = 0.05
    r_bound: float = None           # MaxIB enclosing-radius upper bound


# ---------------------------------------------------------------------------
# regression
# ---------------------------------------------------------------------------

def regression_solve(prob, seed=0, alpha=None, max_phases=None):
    """Solve min_x ||Ax - b||_2 to ||x - x*||_2 <= eps in expectation.

    Phases re-center a quadratic proximal term at the previous phase output;
    each phase runs outer extragradient steps on the (beta,beta)-strongly
    monotone subproblem, with inner stochastic steps sampling one row and one
    column per iteration proportional to the squared centered iterate.
    """
    A, b, mu, eps = prob.A, np.asarray(prob.b, dtype=np.float64), prob.mu, prob.eps
    if mu <= 0:
        raise ConfigError("regression needs mu > 0")
    m, n = A.m, A.n
    if b.shape != (m,):
        raise InputError(f"b has length {b.shape[0]}, matrix has {m} rows")
    if eps <= 0:
        raise ConfigError("eps must be positive")

    Ad = A.to_dense()
    rows_l1 = np.abs(Ad).sum(axis=1)
    cols_l1 = np.abs(Ad).sum(axis=0)
    L = max(math.sqrt(float(np.sum(rows_l1 ** 2))),
            math.sqrt(float(np.sum(cols_l1 ** 2))))
    assert L > 0
    beta = math.sqrt(mu)
    if alpha is None:
        alpha = max(L / math.sqrt(A.nnz), beta)
    eta = alpha / (4.0 * L * L)
    T = int(math.ceil(4.0 / (eta * alpha)))
    # contraction alpha/(alpha+beta) per outer step; push the divergence to
    # the anchored optimum below (eps^2/80) of its starting value each phase
    K = int(math.ceil(math.log(80.0 / (eps * eps)) / math.log1p(beta / alpha)))
    if max_phases is None:
        max_phases = max(8, int(math.ceil(4.0 * math.log(max(2.0, 1.0 / eps)))))

    rng = np.random.default_rng(seed)
    x_anchor = np.zeros(n)
    zx, zy = np.zeros(n), np.zeros(m)
    kap = 1.0 / (1.0 + eta * alpha / 2.0)
    w1 = alpha / (alpha + 2.0 * beta)
    w2 = 2.0 * beta / (alpha + 2.0 * beta)
    w3 = 1.0 / (alpha + 2.0 * beta)

    for _ in range(max_phases):
        for _k in range(K):
            x0, y0 = zx, zy
            g0x = Ad.T @ y0 + beta * (x0 - x_anchor)
            g0y = -(Ad @ x0 - b) + beta * y0
            xt, yt = x0.copy(), y0.copy()
            sx = np.zeros(n)
            sy = np.zeros(m)
            for _t in range(T):
                dy = yt - y0
                gx = g0x
                wy = dy * dy
                ty_ = wy.sum()
                if ty_ > 0.0:
                    i = int(np.searchsorted(np.cumsum(wy), rng.random() * ty_))
                    if i >= m:
                        i = m - 1
                    if dy[i] != 0.0:
                        gx = g0x + Ad[i] * (ty_ / dy[i])
                dx = xt - x0
                gy = g0y
                wx = dx * dx
                tx_ = wx.sum()
                if tx_ > 0.0:
                    j = int(np.searchsorted(np.cumsum(wx), rng.random() * tx_))
                    if j >= n:
                        j = n - 1
                    if dx[j] != 0.0:
                        gy = g0y - Ad[:, j] * (tx_ / dx[j])
                xt = kap * (xt + (eta * alpha / 2.0) * x0 - eta * gx)
                yt = kap * (yt + (eta * alpha / 2.0) * y0 - eta * gy)
                nrm = math.sqrt(float(yt @ yt))
                if nrm > 1.0:
                    yt = yt / nrm
                sx += xt
                sy += yt
            xh, yh = sx / T, sy / T
            zx = w1 * x0 + w2 * xh - w3 * (Ad.T @ yh + beta * (xh - x_anchor))
            zy = w1 * y0 + w2 * yh + w3 * (Ad @ xh - b - beta * yh)
            nrm = math.sqrt(float(zy @ zy))
            if nrm > 1.0:
                zy = zy / nrm
        x_anchor = zx.copy()
        # ||x - x*|| <= ||A'(Ax - b)|| / mu; stop once that certifies eps/2
        resid = float(np.linalg.norm(Ad.T @ (Ad @ x_anchor - b)))
        if resid / mu <= eps / 2.0:
            break
    return x_anchor


# ---------------------------------------------------------------------------
# minimum enclosing ball
# ---------------------------------------------------------------------------

def _dedupe_rows(pts):
    seen = {}
    for row in pts:
        seen[tuple(row)] = True
    return len(seen)


def min_eb(points, eps=0.05, seed=0, alpha=None, inner_iters=None):
    """Minimum enclosing ball of a point set: (center, radius) with radius
    within a (1+eps) factor of optimal.

    Reduction: after shifting the centroid to the origin and scaling the
    farthest point to norm 1, the ball is the saddle point of a problem over
    (center, point weights) with a small entropy term keeping the weights
    interior; the center block is constrained to a radius-2 ball, which is
    loose enough to never bind at the optimum (the center lies in the hull).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise InputError("min_eb needs at least 2 points (m x d array)")
    m, d = pts.shape
    shift = pts.mean(axis=0)
    work = pts - shift
    scale = float(np.max(np.linalg.norm(work, axis=1)))
    if scale == 0.0:
        return shift, 0.0
    work = work / scale
    # the matrix wants every row/column nonzero; a point sitting exactly on
    # the centroid, or a coordinate all points share, would violate that
    tau = 1e-9
    for i in np.flatnonzero(np.all(work == 0.0, axis=1)):
        work[i, 0] = tau
    for j in np.flatnonzero(np.all(work == 0.0, axis=0)):
        work[0, j] = tau

    # min_x max_y sum_i y_i * ||x - a_i||^2 / 2 with entropy smoothing on y
    epsp = eps / (32.0 * math.log(max(m, 3)))
    trip = [(i, j, -work[i, j]) for i in range(m) for j in range(d)
            if work[i, j] != 0.0]
    A = sm.build(trip, m, d)
    cvec = -0.5 * np.sum(work * work, axis=1)
    setup = geo.make_setup("L2L1", d, m, x_radius=2.0)
    if alpha is None:
        # small instances: favor cheap inner loops over outer contraction
        alpha = max(1.0, float(np.max(np.abs(work))) * math.sqrt(m))
    rep = solve_strongly_monotone(setup, A, b=None, c=cvec, mu_x=1.0,
                                  mu_y=epsp, eps=eps / 16.0, seed=seed,
                                  alpha=alpha, inner_iters=inner_iters)
    center = rep.z.x * scale + shift
    radius = float(np.max(np.linalg.norm(pts - center, axis=1)))
    return center, radius


def welzl_reference(points, seed=0):
    """Exact minimum enclosing ball by move-to-front recursion (test oracle;
    fine for a few thousand points in dimension up to 4)."""
    pts = [np.asarray(p, dtype=np.float64) for p in np.asarray(points, dtype=np.float64)]
    if len(pts) == 0:
        raise InputError("welzl_reference needs at least one point")
    d = pts[0].shape[0]
    rng = np.random.default_rng(seed)
    order = list(rng.permutation(len(pts)))
    pts = [pts[i] for i in order]

    def ball_of(support):
        if not support:
            return np.zeros(d), 0.0
        if len(support) == 1:
            return support[0].copy(), 0.0
        # circumcenter within the affine hull of the support points:
        # c = p0 + V'lam with 2 V V' lam = ||p_i - p0||^2 rowwise
        p0 = support[0]
        V = np.array([p - p0 for p in support[1:]])
        rhs = 0.5 * np.sum(V * V, axis=1)
        lam, *_ = np.linalg.lstsq(V @ V.T, rhs, rcond=None)
        c = p0 + V.T @ lam
        return c, float(np.linalg.norm(c - p0))

    def mtf(k, support):
        c, r = ball_of(support)
        if len(support) == d + 1:
            return c, r
        for idx in range(k):
            p = pts[idx]
            if float(np.linalg.norm(p - c)) > r * (1.0 + 1e-12) + 1e-14:
                c, r = mtf(idx, support + [p])
                pts.insert(0, pts.pop(idx))
        return c, r

    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10 * len(pts) + 100))
    try:
        c, r = mtf(len(pts), [])
    finally:
        sys.setrecursionlimit(old)
    return c, r


# ---------------------------------------------------------------------------
# maximum inscribed ball
# ---------------------------------------------------------------------------

def _box_radius_bound(Anorm, bnorm):
    """Enclosing-radius bound from per-axis extents of the polytope
    {x : Ax + b >= 0} (rows unit norm, origin feasible)."""
    m, d = Anorm.shape
    ext = np.zeros((d, 2))
    for k in range(d):
        for s, col in ((1.0, 0), (-1.0, 1)):
            dirs = s * Anorm[:, k]
            mask = dirs < 0.0
            if not np.any(mask):
                raise InputError(
                    f"polytope is unbounded along axis {k}; pass an explicit "
                    "enclosing-radius bound")
            ext[k, col] = float(np.min(bnorm[mask] / -dirs[mask]))
    corner = np.max(ext, axis=1)
    return float(np.linalg.norm(corner))


def max_ib(halfspaces_a, halfspaces_b, eps=0.05, r_bound=None, seed=0,
           alpha=None, inner_iters=None, max_stages=50):
    """Largest ball inscribed in {x : <a_i,x> + b_i >= 0}: (center, radius)
    with radius >= (1-eps) of optimal.

    Warm start: halve an entropy weight mu from ||b||_inf until lower and
    upper radius certificates from the stage solution agree within a factor
    8; then one accurate solve at the certified scale.
    """
    Am = np.asarray(halfspaces_a, dtype=np.float64)
    bv = np.asarray(halfspaces_b, dtype=np.float64)
    if Am.ndim != 2 or bv.shape != (Am.shape[0],):
        raise InputError("halfspaces must be (m x d matrix, m offsets)")
    m, d = Am.shape
    norms = np.linalg.norm(Am, axis=1)
    if np.any(norms == 0.0):
        raise InputError("zero normal vector in halfspace list")
    Anorm = Am / norms[:, None]
    bnorm = bv / norms
    if np.any(bnorm <= 0.0):
        raise InputError("origin must be strictly inside the polytope")
    R = r_bound if r_bound is not None else _box_radius_bound(Anorm, bnorm)
    if R <= 0:
        raise InputError("enclosing-radius bound must be positive")

    # saddle point over the unit ball: value r* of max_x min_y y'(2R A)x + y'b
    twoR = 2.0 * R
    trip = [(i, j, -twoR * Anorm[i, j]) for i in range(m) for j in range(d)
            if Anorm[i, j] != 0.0]
    A = sm.build(trip, m, d)
    setup = geo.make_setup("L2L1", d, m)
    if alpha is None:
        alpha = max(1.0, twoR * math.sqrt(m))
    logm = math.log(max(m, 3))

    def stage(mu, gap_target):
        rep = solve_strongly_monotone(setup, A, b=None, c=bnorm, mu_x=mu,
                                      mu_y=mu, eps=gap_target,
                                      seed=seed, alpha=alpha,
                                      inner_iters=inner_iters)
        xs, ys = rep.z.x, rep.z.y
        axv = twoR * (Anorm @ xs)
        r_lo = float(np.min(axv + bnorm))
        aty = twoR * (Anorm.T @ ys)
        r_hi = float(np.linalg.norm(aty)) + float(bnorm @ ys)
        return xs, r_lo, r_hi

    mu = float(np.max(np.abs(bnorm)))
    assert mu > 0
    r_hat = None
    for _ in range(max_stages):
        xs, r_lo, r_hi = stage(mu, mu / 4.0)
        # entropy/quadratic terms move the value by at most ~mu*(2+log m)
        r_hi_adj = r_hi + mu * (2.0 + logm)
        if r_lo > 0.0 and r_hi_adj <= 8.0 * r_lo:
            r_hat = r_hi_adj
            break
        mu /= 2.0
    if r_hat is None:
        raise InputError("could not certify a finite inscribed radius; the "
                         "polytope may be unbounded for the given bound")
    if r_hat > 2.0 * R:
        r_hat = 2.0 * R

    mu_f = eps * r_hat / (64.0 * logm)
    xs, r_lo, r_hi = stage(mu_f, eps * r_hat / 32.0)
    center = twoR * xs
    radius = float(np.min(Anorm @ center + bnorm))
    return center, radius
