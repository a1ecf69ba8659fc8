"""Sublinear primal-dual solver: one sampled matrix entry per block and
per iteration, iterates kept implicit so each step costs polylog time."""

import math

import numpy as np

from .. import geometry as geo
from ..errors import ConfigError
from ..estimators import (EstimatorKind, estimate_sublinear, l_constants)
from ..iterate_maintainers import IterateMaintainer
from .common import (BallState, Counters, MaintainerView, SolveReport, Stopwatch,
                     TraceRow, as_vec, ball_build_plan, estimator_weight_vectors,
                     require_no_simplex_linear)


def default_sublinear_kind(setup, A=None):
    if setup.tag == "L1L1":
        return EstimatorKind("SublinearCoord", "L1L1")
    if setup.tag == "L2L1":
        if A is None:
            return EstimatorKind("SublinearCoord", "L2L1v3")
        c = l_constants(A)["L21"]
        best = min(("v1", "v2", "v3"), key=lambda k: c[k])
        return EstimatorKind("SublinearCoord", "L2L1" + best)
    return EstimatorKind("SublinearCoord", "L2L2dynamic")


class _SimplexState:
    """Simplex-block iterate held in an IM1 multiplicative maintainer."""

    def __init__(self, n):
        self.mt = IterateMaintainer("IM1", np.full(n, 1.0 / n), sampling=True,
                                    simplex_mode=True)

    def step(self, j, cexp, ):
        # multiply coordinate j by exp(-cexp), renormalize
        xj = self.mt.get(j)
        self.mt.add_sparse(j, (math.exp(-cexp) - 1.0) * xj)
        self.mt.scale(1.0 / self.mt.get_norm())

    def update_sum(self):
        self.mt.update_sum()

    def get(self, j):
        return self.mt.get(j)

    def sample(self, rng):
        return self.mt.sample(rng)

    def sum_values(self):
        return self.mt.sum_values()

    def work(self):
        return self.mt.work


def solve_sublinear(setup, A, b=None, c=None, kind=None, eps=0.05, seed=0,
                    eta=None, iters=None, trace_every=0, gap_every=0):
    """Averaged stochastic mirror descent with clipped sparse updates.

    Returns a SolveReport whose z has expected gap <= eps at the default
    eta / iteration count.
    """
    n, m = setup.x_domain.dim, setup.y_domain.dim
    if (A.m, A.n) != (m, n):
        raise ConfigError(f"matrix is {A.m}x{A.n}, setup wants {m}x{n}")
    kind = kind or default_sublinear_kind(setup, A)
    if kind.family != "SublinearCoord":
        raise ConfigError("solve_sublinear needs a SublinearCoord estimator")
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
    if eta is None:
        if setup.tag == "L1L1":
            eta = eps / (18.0 * consts["L11"] ** 2)
        elif setup.tag == "L2L1":
            lv = consts["L21"][{"L2L1v1": "v1", "L2L1v2": "v2", "L2L1v3": "v3"}[kind.variant]]
            eta = eps / (9.0 * lv ** 2)
        else:
            eta = eps / (9.0 * consts["L22"] ** 2)
    T = int(iters) if iters is not None else int(math.ceil(6.0 * setup.theta / (eta * eps)))
    assert T >= 1

    wvecs = estimator_weight_vectors(A)
    rng = np.random.default_rng(seed)
    sw = Stopwatch()
    counters = Counters()

    # block states
    if setup.x_domain.kind == "simplex":
        xs = _SimplexState(n)
        x_wk, x_cent = "ones", False
    else:
        x_wk, x_samp, x_cent = ball_build_plan(kind, "x")
        w = None if x_wk == "ones" else wvecs[x_wk]
        xs = BallState(np.zeros(n), radius=setup.x_domain.radius,
                       dense_dir=b, weights=w, sampling=x_samp)
    if setup.y_domain.kind == "simplex":
        ys = _SimplexState(m)
        y_wk, y_cent = "ones", False
    else:
        y_wk, y_samp, y_cent = ball_build_plan(kind, "y")
        ys = BallState(np.zeros(m), radius=setup.y_domain.radius,
                       dense_dir=c, sampling=y_samp)

    view = MaintainerView(xs, ys, x_wk, y_wk, x_cent, y_cent)
    has_b = b is not None and np.any(b != 0)
    has_c = c is not None and np.any(c != 0)

    def apply_block(state, domain, idx, val, has_lin):
        if domain.kind == "simplex":
            if len(idx):
                cexp = float(np.clip(eta * val[0], -1.0, 1.0))
                state.step(int(idx[0]), cexp)
        else:
            if len(idx):
                state.add_sparse(int(idx[0]), -eta * float(val[0]))
            if has_lin:
                state.add_dense(-eta)
            state.project()
        state.update_sum()

    trace = []
    xs.update_sum()
    ys.update_sum()
    count = T + 1  # average includes the start point

    def record(it, with_gap):
        counters.coords_touched = xs.work() + ys.work()
        g = float("nan")
        if with_gap:
            zz = geo.Point(xs.sum_values() / max(1, it + 1), ys.sum_values() / max(1, it + 1))
            zz = geo.Point(setup.x_domain.project(zz.x), setup.y_domain.project(zz.y))
            g = geo.gap(setup, A, b, c, zz)
            counters.matvecs += 2
        trace.append(TraceRow(it, sw.ns(), g, counters.coords_touched, counters.matvecs))

    for t in range(1, T + 1):
        est = estimate_sublinear(kind, A, view, rng)
        apply_block(xs, setup.x_domain, est.x_idx, est.x_val, has_b)
        apply_block(ys, setup.y_domain, est.y_idx, est.y_val, has_c)
        if trace_every and (t % trace_every == 0 or t == T):
            record(t, bool(gap_every and t % gap_every == 0))

    zbar = geo.Point(setup.x_domain.project(xs.sum_values() / count),
                     setup.y_domain.project(ys.sum_values() / count))
    counters.coords_touched = xs.work() + ys.work()
    final_gap = geo.gap(setup, A, b, c, zbar)
    counters.matvecs += 2
    return SolveReport(z=zbar, gap=final_gap, iterations=T, elapsed_ns=sw.ns(),
                       coords_touched=counters.coords_touched,
                       matvecs=counters.matvecs, trace=trace,
                       extras={"eta": eta, "T": T, "kind": (kind.family, kind.variant)})
