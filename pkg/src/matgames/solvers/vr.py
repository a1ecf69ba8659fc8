"""Variance-reduced solver: outer extragradient steps with exact gradients,
inner loops of centered stochastic mirror steps around the current anchor."""

import math

import numpy as np
from scipy.special import logsumexp

from .. import geometry as geo
from ..errors import ConfigError
from ..estimators import (EstimatorKind, estimate_rowcol_vr, estimate_vr,
                          geometry_constant, l_constants, make_reference)
from ..exp_maintainer import ApproxExpMaintainer
from .common import (BallState, Counters, MaintainerView, SolveReport, Stopwatch,
                     TraceRow, as_vec, ball_build_plan, estimator_weight_vectors,
                     require_no_simplex_linear)


def default_vr_kind(setup, A=None, rowcol=False):
    if rowcol:
        return EstimatorKind("VrRowCol",
                             {"L1L1": "L1L1", "L2L1": "L2L1v2",
                              "L2L2": "L2L2oblivious"}[setup.tag])
    if setup.tag == "L1L1":
        return EstimatorKind("VrCoord", "L1L1")
    if setup.tag == "L2L1":
        if A is None:
            return EstimatorKind("VrCoord", "L2L1v3")
        c = l_constants(A)["L21"]
        best = min(("v1", "v2", "v3"), key=lambda k: c[k])
        return EstimatorKind("VrCoord", "L2L1" + best)
    return EstimatorKind("VrCoord", "L2L2dynamic")


def truncate(v, delta):
    """Floor simplex coordinates at delta and renormalize; keeps the next
    anchor bounded away from the boundary at O(alpha*delta*dim) gap cost."""
    if delta <= 0:
        return v
    w = np.maximum(v, delta)
    return w / w.sum()


def relaxed_oracle_value(setup, A, b, c, w0, wt, alpha):
    """max_u <g(wt), wt - u> - alpha * V_{w0}(u), in closed form."""
    n, m = setup.x_domain.dim, setup.y_domain.dim
    bv = np.zeros(n) if b is None else np.asarray(b, dtype=np.float64)
    cv = np.zeros(m) if c is None else np.asarray(c, dtype=np.float64)
    gx = A.matvec_t(wt.y) + bv
    gy = -A.matvec(wt.x) + cv
    total = float(gx @ wt.x + gy @ wt.y)
    for dom, g, w0b in ((setup.x_domain, gx, w0.x), (setup.y_domain, gy, w0.y)):
        if dom.kind == "simplex":
            total -= -alpha * float(logsumexp(np.log(np.maximum(w0b, 1e-300)) - g / alpha))
        else:
            u = dom.project(w0b - g / alpha)
            total -= float(g @ u) + alpha * 0.5 * float(np.sum((u - w0b) ** 2))
    return total


class _AemState:
    """Simplex-block inner iterate: multiplicative steps with a per-step
    dense drift, held in an approximate exponential maintainer.

    Per step: log w <- kappa*log w + v - sparse_scale*clip(clip_scale*val).
    """

    def __init__(self, x0, v, kappa, clip_scale, sparse_scale, dims_total):
        lam = float(dims_total) ** -5
        eps_pad = float(dims_total) ** -8
        self.aem = ApproxExpMaintainer(x0, v, kappa, eps_pad, lam)
        self.clip_scale = clip_scale
        self.sparse_scale = sparse_scale
        self.count = 0

    def step(self, idx, val):
        self.aem.dense_step()
        if len(idx):
            cexp = np.clip(self.clip_scale * np.asarray(val), -1.0, 1.0)
            self.aem.mult_sparse(np.asarray(idx, dtype=np.int64),
                                 -self.sparse_scale * cexp)
        self.aem.update_sum()
        self.count += 1

    def get(self, j):
        return self.aem.get(j)

    def sample(self, rng):
        return self.aem.sample(rng)

    def average(self):
        s = self.aem.get_sum_all() / max(1, self.count)
        s = np.maximum(s, 0.0)
        return s / s.sum()

    def work(self):
        return self.aem.total_work()


class _BallInner:
    """Ball-block inner iterate
    z_t = proj(kappa*z_{t-1} + v - sparse_scale*sparse)."""

    def __init__(self, start, v, kappa, sparse_scale, radius, weights=None,
                 center=None, sampling=False):
        self.state = BallState(start.copy(), radius=radius, dense_dir=v,
                               weights=weights, center=center, sampling=sampling)
        self.kappa = kappa
        self.sparse_scale = sparse_scale
        self.count = 0

    def step(self, idx, val):
        st = self.state
        st.scale(self.kappa)
        st.add_dense(1.0)
        for j, vj in zip(idx, val):
            st.add_sparse(int(j), -self.sparse_scale * float(vj))
        st.project()
        st.update_sum()
        self.count += 1

    def get(self, j):
        return self.state.get(j)

    def sample(self, rng):
        return self.state.sample(rng)

    def euclid_normsq(self):
        return self.state.euclid_normsq()

    def weighted_normsq(self):
        return self.state.weighted_normsq()

    def centered_normsq(self):
        return self.state.centered_normsq()

    def average(self):
        return self.state.sum_values() / max(1, self.count)

    def work(self):
        return self.state.work()


def inner_loop(setup, A, b, c, kind, w0, alpha, rng, counters=None,
               eta=None, iters=None, L=None):
    """Stochastic proximal inner loop anchored at w0; returns the average of
    the T iterates (start point excluded)."""
    n, m = setup.x_domain.dim, setup.y_domain.dim
    consts = l_constants(A)
    if L is None:
        L = geometry_constant(kind, consts)
    if eta is None:
        eta = alpha / (20.0 * L * L)
    T = int(iters) if iters is not None else int(math.ceil(6.0 / (eta * alpha)))
    kappa = 1.0 / (1.0 + eta * alpha / 2.0)
    dims_total = m + n
    rowcol = kind.family == "VrRowCol"
    wvecs = estimator_weight_vectors(A)

    # anchor, floored on simplex blocks so divergences stay bounded
    lam = float(dims_total) ** -5
    w0x, w0y = w0.x, w0.y
    # floor at 2*lam before renormalizing so the result stays >= lam
    if setup.x_domain.kind == "simplex":
        w0x = np.maximum(w0x, 2.0 * lam); w0x = w0x / w0x.sum()
    if setup.y_domain.kind == "simplex":
        w0y = np.maximum(w0y, 2.0 * lam); w0y = w0y / w0y.sum()
    w0 = geo.Point(w0x, w0y)
    ref = make_reference(A, b, c, w0)
    if counters is not None:
        counters.matvecs += 2

    if setup.x_domain.kind == "simplex":
        vx = (1.0 - kappa) * np.log(w0.x) - eta * kappa * ref.gx
        xs = _AemState(w0.x, vx, kappa, eta, kappa, dims_total)
        x_wk, x_cent = "ones", False
    else:
        x_wk, x_samp, x_cent = ball_build_plan(kind, "x")
        w = None if x_wk == "ones" else wvecs[x_wk]
        vx = (1.0 - kappa) * w0.x - eta * kappa * ref.gx
        xs = _BallInner(w0.x, vx, kappa, eta * kappa, setup.x_domain.radius,
                        weights=w, center=w0.x if x_cent else None, sampling=x_samp)
    if setup.y_domain.kind == "simplex":
        vy = (1.0 - kappa) * np.log(w0.y) - eta * kappa * ref.gy
        ys = _AemState(w0.y, vy, kappa, eta, kappa, dims_total)
        y_wk, y_cent = "ones", False
    else:
        y_wk, y_samp, y_cent = ball_build_plan(kind, "y")
        vy = (1.0 - kappa) * w0.y - eta * kappa * ref.gy
        ys = _BallInner(w0.y, vy, kappa, eta * kappa, setup.y_domain.radius,
                        center=w0.y if y_cent else None, sampling=y_samp)

    view = MaintainerView(xs, ys, x_wk, y_wk, x_cent, y_cent)
    for _ in range(T):
        if rowcol:
            est = estimate_rowcol_vr(kind, A, ref, view, rng)
        else:
            est = estimate_vr(kind, A, ref, view, rng)
        xs.step(est.x_idx, est.x_val)
        ys.step(est.y_idx, est.y_val)

    if counters is not None:
        counters.coords_touched += xs.work() + ys.work()
    zx = xs.average()
    zy = ys.average()
    return geo.Point(setup.x_domain.project(zx), setup.y_domain.project(zy)), T


# restores the constant dropped inside the O(.) of the optimal oracle
# strength: T = ceil(6/(eta*alpha)) = 120 L^2/alpha^2 inner steps balance
# against the per-outer O(nnz') cost exactly when alpha carries sqrt(120)
_ALPHA_BALANCE = math.sqrt(120.0)


def _default_alpha(setup, A, eps, consts, L_cap):
    m, n = A.m, A.n
    lg = math.log(max(m * n, 2))
    if setup.tag == "L1L1":
        nnzp = A.nnz + (m + n) * lg ** 3
        raw = consts["L11"] * lg ** 2 / math.sqrt(nnzp)
        floor = eps / 3.0
    elif setup.tag == "L2L1":
        nnzp = A.nnz + m * math.log(max(m, 2)) * lg ** 2
        raw = (consts["L21"]["best"] * math.log(max(m, 2)) * lg
               / math.sqrt(nnzp))
        floor = eps / 3.0
    else:
        raw = consts["L22"] / math.sqrt(max(A.nnz, 1))
        floor = eps / 3.0
    alpha = max(floor, _ALPHA_BALANCE * raw)
    # the oracle needs alpha <= L; the clamp only binds on instances too
    # small or dense for the sparsity term to pay off
    return min(alpha, L_cap) if L_cap > floor else alpha


def solve_vr(setup, A, b=None, c=None, kind=None, eps=0.01, seed=0, alpha=None,
             K=None, inner_eta=None, inner_iters=None, trace_gap=False):
    """Outer extragradient with variance-reduced stochastic inner loops.

    Expected gap of the averaged half-iterates is <= alpha*Theta/K + 2eps/3,
    which the default K brings to eps.
    """
    n, m = setup.x_domain.dim, setup.y_domain.dim
    if (A.m, A.n) != (m, n):
        raise ConfigError(f"matrix is {A.m}x{A.n}, setup wants {m}x{n}")
    kind = kind or default_vr_kind(setup, A)
    if kind.family not in ("VrCoord", "VrRowCol"):
        raise ConfigError("solve_vr needs a VrCoord or VrRowCol estimator")
    if kind.geometry != setup.tag:
        raise ConfigError(f"estimator {kind.variant} does not match setup {setup.tag}")
    b = as_vec(b, n, "b")
    c = as_vec(c, m, "c")
    require_no_simplex_linear(setup, b, c)
    for dom in (setup.x_domain, setup.y_domain):
        if dom.kind == "ball" and np.any(dom.center != 0.0):
            raise ConfigError("ball blocks must be origin-centered here; "
                              "recenter the problem first")

    consts = l_constants(A)
    if alpha is None:
        alpha = _default_alpha(setup, A, eps, consts,
                               geometry_constant(kind, consts))
    has_simplex = setup.tag != "L2L2"
    eps_outer = 2.0 * eps / 3.0 if has_simplex else 0.0
    eps_inner = eps / 3.0 if has_simplex else 0.0
    if K is None:
        K = int(math.ceil((3.0 if has_simplex else 1.0) * alpha * setup.theta / eps))
    K = max(K, 1)
    delta = (eps_outer - eps_inner) / (alpha * (m + n)) if has_simplex else 0.0

    bv = np.zeros(n) if b is None else b
    cv = np.zeros(m) if c is None else c
    rng = np.random.default_rng(seed)
    sw = Stopwatch()
    counters = Counters()
    trace = []
    z = geo.Point(setup.x_domain.center_point(), setup.y_domain.center_point())
    xsum = np.zeros(n)
    ysum = np.zeros(m)
    inner_total = 0

    for k in range(1, K + 1):
        zhalf, T = inner_loop(setup, A, b, c, kind, z, alpha, rng, counters,
                              eta=inner_eta, iters=inner_iters)
        inner_total += T
        gx = A.matvec_t(zhalf.y) + bv
        gy = -A.matvec(zhalf.x) + cv
        counters.matvecs += 2
        zx = _outer_step(setup.x_domain, z.x, gx, alpha)
        zy = _outer_step(setup.y_domain, z.y, gy, alpha)
        if setup.x_domain.kind == "simplex":
            zx = truncate(zx, delta)
        if setup.y_domain.kind == "simplex":
            zy = truncate(zy, delta)
        z = geo.Point(zx, zy)
        xsum += zhalf.x
        ysum += zhalf.y
        g = float("nan")
        if trace_gap:
            zz = geo.Point(setup.x_domain.project(xsum / k),
                           setup.y_domain.project(ysum / k))
            g = geo.gap(setup, A, b, c, zz)
            counters.matvecs += 2
        trace.append(TraceRow(k, sw.ns(), g, counters.coords_touched, counters.matvecs))

    zbar = geo.Point(setup.x_domain.project(xsum / K), setup.y_domain.project(ysum / K))
    final_gap = geo.gap(setup, A, b, c, zbar)
    counters.matvecs += 2
    return SolveReport(z=zbar, gap=final_gap, iterations=K, elapsed_ns=sw.ns(),
                       coords_touched=counters.coords_touched,
                       matvecs=counters.matvecs, trace=trace,
                       extras={"alpha": alpha, "K": K, "inner_iters_total": inner_total,
                               "delta": delta, "kind": (kind.family, kind.variant)})


def _outer_step(domain, zb, g, alpha):
    """argmin <g, z> + alpha * V_{zb}(z) over the domain."""
    if domain.kind == "simplex":
        logits = np.log(np.maximum(zb, 1e-300)) - g / alpha
        logits -= logits.max()
        w = np.exp(logits)
        return w / w.sum()
    return domain.project(zb - g / alpha)
