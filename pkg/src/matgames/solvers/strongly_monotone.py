"""Solver for regularized problems
F(x,y) = y'Ax + b'x - c'y + mu_x*V_{xa}(x) - mu_y*V_{ya}(y),
which are strongly monotone; the last iterate converges linearly in the
composite gap. Inner loops reuse the variance-reduced estimators with
closed-form composite proximal steps."""

import math

import numpy as np
from scipy.special import logsumexp

from .. import geometry as geo
from ..errors import ConfigError
from ..estimators import (estimate_rowcol_vr, estimate_vr, geometry_constant,
                          l_constants, make_reference)
from .common import (Counters, MaintainerView, SolveReport, Stopwatch, TraceRow,
                     as_vec, ball_build_plan, estimator_weight_vectors)
from .vr import _AemState, _BallInner, default_vr_kind


def _reg_grad_block(domain, z, anchor, mu):
    if mu == 0.0:
        return np.zeros_like(z)
    if domain.kind == "simplex":
        return mu * (np.log(np.maximum(z, 1e-300)) - np.log(anchor))
    return mu * (z - anchor)


def composite_gap(setup, A, b, c, mu_x, mu_y, anchor, z):
    """Exact duality gap of the regularized objective at z, O(nnz)."""
    n, m = setup.x_domain.dim, setup.y_domain.dim
    bv = np.zeros(n) if b is None else np.asarray(b, dtype=np.float64)
    cv = np.zeros(m) if c is None else np.asarray(c, dtype=np.float64)
    ax = A.matvec(z.x)
    aty = A.matvec_t(z.y)

    def max_reg(dom, v, cen, mu):
        # max over dom of <v,u> - mu*V_{cen}(u)
        if mu == 0.0:
            if dom.kind == "simplex":
                return float(v.max())
            return float(v @ dom.center) + dom.radius * float(np.linalg.norm(v))
        if dom.kind == "simplex":
            return mu * float(logsumexp(np.log(cen) + v / mu))
        u = dom.project(cen + v / mu)
        return float(v @ u) - mu * 0.5 * float(np.sum((u - cen) ** 2))

    upper = (float(bv @ z.x)
             + mu_x * geo.bregman_block(setup.x_domain, anchor.x, z.x)
             + max_reg(setup.y_domain, ax - cv, anchor.y, mu_y))
    lower = (-float(cv @ z.y)
             - mu_y * geo.bregman_block(setup.y_domain, anchor.y, z.y)
             - max_reg(setup.x_domain, -(aty + bv), anchor.x, mu_x))
    return upper - lower


def solve_strongly_monotone(setup, A, b=None, c=None, mu_x=1.0, mu_y=1.0,
                            eps=1e-3, seed=0, kind=None, anchor=None,
                            alpha=None, max_outer=None, inner_eta=None,
                            inner_iters=None, trace_gap=False):
    """Outer proximal extragradient with contraction factor alpha/(alpha+mu),
    mu = sqrt(mu_x*mu_y); stops when the exact composite gap of the last
    iterate drops below eps."""
    n, m = setup.x_domain.dim, setup.y_domain.dim
    if (A.m, A.n) != (m, n):
        raise ConfigError(f"matrix is {A.m}x{A.n}, setup wants {m}x{n}")
    if mu_x <= 0 or mu_y <= 0:
        raise ConfigError("mu_x and mu_y must be positive")
    kind = kind or default_vr_kind(setup, A)
    if kind.family not in ("VrCoord", "VrRowCol"):
        raise ConfigError("solve_strongly_monotone needs a VR estimator")
    if kind.geometry != setup.tag:
        raise ConfigError(f"estimator {kind.variant} does not match setup {setup.tag}")
    b = as_vec(b, n, "b")
    c = as_vec(c, m, "c")

    dims_total = m + n
    lam = float(dims_total) ** -5
    if anchor is None:
        anchor = geo.Point(setup.x_domain.center_point(), setup.y_domain.center_point())
    ax_, ay_ = anchor.x.copy(), anchor.y.copy()
    if setup.x_domain.kind == "simplex":
        ax_ = np.maximum(ax_, 2.0 * lam); ax_ /= ax_.sum()
    if setup.y_domain.kind == "simplex":
        ay_ = np.maximum(ay_, 2.0 * lam); ay_ /= ay_.sum()
    anchor = geo.Point(ax_, ay_)

    mu = math.sqrt(mu_x * mu_y)
    rho = math.sqrt(mu_x / mu_y)
    consts = l_constants(A)
    L = geometry_constant(kind, consts)
    if alpha is None:
        alpha = max(mu, L / math.sqrt(A.nnz))
    if max_outer is None:
        # contraction (alpha/(alpha+mu))^K; generous default cap
        per = math.log1p(mu / alpha)
        target = math.log(((rho + 1.0 / rho) * setup.theta + 1.0)
                          * max(1.0, 1.0 / eps)) + 10.0
        max_outer = max(4, int(math.ceil(target / per)))

    rng = np.random.default_rng(seed)
    sw = Stopwatch()
    counters = Counters()
    trace = []
    z = geo.Point(anchor.x.copy(), anchor.y.copy())
    gap0 = composite_gap(setup, A, b, c, mu_x, mu_y, anchor, z)
    counters.matvecs += 2
    k = 0
    gap_now = gap0
    while gap_now > eps and k < max_outer:
        k += 1
        zhalf = _inner_composite(setup, A, b, c, kind, z, anchor, mu_x, mu_y,
                                 rho, alpha, rng, counters, inner_eta,
                                 inner_iters, consts, L)
        gx = (A.matvec_t(zhalf.y) + (0 if b is None else b)
              + _reg_grad_block(setup.x_domain, zhalf.x, anchor.x, mu_x))
        gy = (-A.matvec(zhalf.x) + (0 if c is None else c)
              + _reg_grad_block(setup.y_domain, zhalf.y, anchor.y, mu_y))
        counters.matvecs += 2
        zx = _prox_two_centers(setup.x_domain, gx, z.x, alpha * rho, zhalf.x, mu_x)
        zy = _prox_two_centers(setup.y_domain, gy, z.y, alpha / rho, zhalf.y, mu_y)
        if setup.x_domain.kind == "simplex":
            zx = np.maximum(zx, 2.0 * lam); zx /= zx.sum()
        if setup.y_domain.kind == "simplex":
            zy = np.maximum(zy, 2.0 * lam); zy /= zy.sum()
        z = geo.Point(zx, zy)
        gap_now = composite_gap(setup, A, b, c, mu_x, mu_y, anchor, z)
        counters.matvecs += 2
        trace.append(TraceRow(k, sw.ns(), gap_now if trace_gap else float("nan"),
                              counters.coords_touched, counters.matvecs))

    return SolveReport(z=z, gap=gap_now, iterations=k, elapsed_ns=sw.ns(),
                       coords_touched=counters.coords_touched,
                       matvecs=counters.matvecs, trace=trace,
                       extras={"alpha": alpha, "mu": mu, "rho": rho,
                               "initial_gap": gap0,
                               "kind": (kind.family, kind.variant)})


def _prox_two_centers(domain, g, z1, a1, z2, a2):
    """argmin <g,z> + a1*V_{z1}(z) + a2*V_{z2}(z) over the domain."""
    if domain.kind == "simplex":
        logits = (a1 * np.log(np.maximum(z1, 1e-300))
                  + a2 * np.log(np.maximum(z2, 1e-300)) - g) / (a1 + a2)
        logits -= logits.max()
        w = np.exp(logits)
        return w / w.sum()
    return domain.project((a1 * z1 + a2 * z2 - g) / (a1 + a2))


def _inner_composite(setup, A, b, c, kind, w0, anchor, mu_x, mu_y, rho, alpha,
                     rng, counters, inner_eta, inner_iters, consts, L):
    """T stochastic composite proximal steps anchored at w0; returns the
    iterate average (start point excluded)."""
    n, m = setup.x_domain.dim, setup.y_domain.dim
    dims_total = m + n
    eta = inner_eta if inner_eta is not None else alpha / (10.0 * L * L)
    T = int(inner_iters) if inner_iters is not None else int(math.ceil(8.0 / (eta * alpha)))
    wvecs = estimator_weight_vectors(A)
    rowcol = kind.family == "VrRowCol"
    lam = float(dims_total) ** -5

    w0x, w0y = w0.x, w0.y
    if setup.x_domain.kind == "simplex":
        w0x = np.maximum(w0x, 2.0 * lam); w0x = w0x / w0x.sum()
    if setup.y_domain.kind == "simplex":
        w0y = np.maximum(w0y, 2.0 * lam); w0y = w0y / w0y.sum()
    w0 = geo.Point(w0x, w0y)
    ref = make_reference(A, b, c, w0)
    # the regularizer is handled exactly through the anchor proximity term,
    # so the dense reference part is the bilinear gradient only
    gx0, gy0 = ref.gx, ref.gy
    counters.matvecs += 2

    def build(block):
        dom = setup.x_domain if block == "x" else setup.y_domain
        mu_b = mu_x if block == "x" else mu_y
        rho_b = rho if block == "x" else 1.0 / rho
        w0b = w0.x if block == "x" else w0.y
        anc = anchor.x if block == "x" else anchor.y
        g0 = gx0 if block == "x" else gy0
        a_ = eta * mu_b
        b_ = eta * alpha * rho_b / 2.0
        c_ = rho_b
        D = a_ + b_ + c_
        kap = c_ / D
        if dom.kind == "simplex":
            v = (a_ * np.log(anc) + b_ * np.log(w0b) - eta * g0) / D
            st = _AemState(w0b, v, kap, eta, 1.0 / D, dims_total)
            return st, "ones", False
        wk, samp, cent = ball_build_plan(kind, block)
        w = None if wk == "ones" else wvecs[wk]
        v = (a_ * anc + b_ * w0b - eta * g0) / D
        st = _BallInner(w0b, v, kap, eta / D, dom.radius, weights=w,
                        center=w0b if cent else None, sampling=samp)
        return st, wk, cent

    xs, x_wk, x_cent = build("x")
    ys, y_wk, y_cent = build("y")
    view = MaintainerView(xs, ys, x_wk, y_wk, x_cent, y_cent)
    for _ in range(T):
        if rowcol:
            est = estimate_rowcol_vr(kind, A, ref, view, rng)
        else:
            est = estimate_vr(kind, A, ref, view, rng)
        xs.step(est.x_idx, est.x_val)
        ys.step(est.y_idx, est.y_val)
    counters.coords_touched += xs.work() + ys.work()
    return geo.Point(setup.x_domain.project(xs.average()),
                     setup.y_domain.project(ys.average()))
