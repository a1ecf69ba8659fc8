"""Deterministic extragradient (mirror-prox) baseline: two exact gradient
evaluations per iteration, step size 1/L for the geometry's operator norm."""

import math

import numpy as np
import scipy.sparse.linalg as spla

from .. import geometry as geo
from ..errors import ConfigError
from .common import Counters, SolveReport, Stopwatch, TraceRow, as_vec


def _operator_norm(setup, A):
    if setup.tag == "L1L1":
        return A.amax
    if setup.tag == "L2L1":
        return float(A.row_norm2.max())
    # L2L2: spectral norm
    if min(A.m, A.n) <= 2:
        return float(np.linalg.norm(A.to_dense(), 2))
    try:
        s = spla.svds(A.csr.astype(np.float64), k=1, return_singular_vectors=False)
        return float(s[0])
    except Exception:
        # power iteration fallback
        v = np.ones(A.n) / math.sqrt(A.n)
        for _ in range(200):
            w = A.matvec_t(A.matvec(v))
            nrm = np.linalg.norm(w)
            if nrm == 0:
                return 0.0
            v = w / nrm
        return math.sqrt(nrm)


def _prox(domain, zb, g, eta):
    if domain.kind == "simplex":
        logits = np.log(np.maximum(zb, 1e-300)) - eta * g
        logits -= logits.max()
        w = np.exp(logits)
        return w / w.sum()
    return domain.project(zb - eta * g)


def solve_mirror_prox(setup, A, b=None, c=None, eps=1e-2, seed=0, eta=None,
                      max_iters=1000000, check_every=10, trace_every=0):
    """Runs until the exact gap of the averaged iterate is <= eps."""
    n, m = setup.x_domain.dim, setup.y_domain.dim
    if (A.m, A.n) != (m, n):
        raise ConfigError(f"matrix is {A.m}x{A.n}, setup wants {m}x{n}")
    b = as_vec(b, n, "b")
    c = as_vec(c, m, "c")
    bv = np.zeros(n) if b is None else b
    cv = np.zeros(m) if c is None else c
    L = _operator_norm(setup, A)
    if eta is None:
        eta = 1.0 / max(L, 1e-300)

    sw = Stopwatch()
    counters = Counters()
    trace = []
    z = geo.Point(setup.x_domain.center_point(), setup.y_domain.center_point())
    xsum = np.zeros(n)
    ysum = np.zeros(m)
    gap_val = math.inf
    t = 0
    while t < max_iters:
        t += 1
        gx = A.matvec_t(z.y) + bv
        gy = -A.matvec(z.x) + cv
        wx = _prox(setup.x_domain, z.x, gx, eta)
        wy = _prox(setup.y_domain, z.y, gy, eta)
        gx = A.matvec_t(wy) + bv
        gy = -A.matvec(wx) + cv
        z = geo.Point(_prox(setup.x_domain, z.x, gx, eta),
                      _prox(setup.y_domain, z.y, gy, eta))
        counters.matvecs += 4
        xsum += wx
        ysum += wy
        if t % check_every == 0 or t == max_iters:
            zbar = geo.Point(setup.x_domain.project(xsum / t),
                             setup.y_domain.project(ysum / t))
            gap_val = geo.gap(setup, A, b, c, zbar)
            counters.matvecs += 2
            if trace_every and (t % trace_every == 0):
                trace.append(TraceRow(t, sw.ns(), gap_val,
                                      counters.coords_touched, counters.matvecs))
            if gap_val <= eps:
                break

    zbar = geo.Point(setup.x_domain.project(xsum / t), setup.y_domain.project(ysum / t))
    gap_val = geo.gap(setup, A, b, c, zbar)
    counters.matvecs += 2
    return SolveReport(z=zbar, gap=gap_val, iterations=t, elapsed_ns=sw.ns(),
                       coords_touched=counters.coords_touched,
                       matvecs=counters.matvecs, trace=trace,
                       extras={"eta": eta, "L": L})
