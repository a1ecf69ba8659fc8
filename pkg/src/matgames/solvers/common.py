"""Shared solver plumbing: instrumentation, reports, block states and the
iterate view the estimators sample from."""

import time
from dataclasses import dataclass, field

import numpy as np

from .. import geometry as geo
from ..errors import ConfigError
from ..iterate_maintainers import IterateMaintainer


@dataclass
class Counters:
    coords_touched: int = 0
    matvecs: int = 0


@dataclass
class TraceRow:
    iteration: int
    elapsed_ns: int
    gap: float            # nan when not evaluated at this row
    coords_touched: int
    matvecs: int


@dataclass
class SolveReport:
    z: geo.Point
    gap: float
    iterations: int
    elapsed_ns: int
    coords_touched: int
    matvecs: int
    trace: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)


class Stopwatch:
    def __init__(self):
        self.t0 = time.perf_counter_ns()

    def ns(self):
        return time.perf_counter_ns() - self.t0


def require_no_simplex_linear(setup, b, c):
    """Sparse-update solvers cannot absorb a dense linear term into a
    multiplicative simplex step; reject it up front."""
    if setup.x_domain.kind == "simplex" and b is not None and np.any(np.asarray(b) != 0):
        raise ConfigError("linear x-term is not supported when x lives on a simplex "
                          "for this solver; drop --b or switch method")
    if setup.y_domain.kind == "simplex" and c is not None and np.any(np.asarray(c) != 0):
        raise ConfigError("linear y-term is not supported when y lives on a simplex "
                          "for this solver; drop --c or switch method")


def as_vec(v, dim, name):
    if v is None:
        return None
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (dim,):
        raise ConfigError(f"{name} must have length {dim}, got {v.shape}")
    return v


class BallState:
    """Ball-block iterate: a primary maintainer (possibly weighted or
    centered, for sampling) plus, when the primary tracks a weighted norm, a
    plain mirror that tracks the euclidean norm for projections."""

    def __init__(self, x0, radius=1.0, dense_dir=None, weights=None,
                 center=None, sampling=False):
        self.radius = float(radius)
        n = len(x0)
        plain = weights is None or np.all(weights == 1.0)
        if center is not None:
            self.primary = IterateMaintainer(
                "CIM2", x0, v=dense_dir, w=weights, center=center, sampling=sampling)
        elif not plain:
            self.primary = IterateMaintainer(
                "WIM2", x0, v=dense_dir, w=weights, sampling=sampling)
        else:
            self.primary = IterateMaintainer("IM2", x0, v=dense_dir, sampling=sampling)
        self.mirror = None
        if not plain:
            self.mirror = IterateMaintainer("IM2", x0, v=dense_dir, sampling=False)
        self._each = [self.primary] + ([self.mirror] if self.mirror is not None else [])
        self.n = n

    def scale(self, cfac):
        for mt in self._each:
            mt.scale(cfac)

    def add_sparse(self, j, cval):
        for mt in self._each:
            mt.add_sparse(j, cval)

    def add_dense(self, cfac):
        for mt in self._each:
            mt.add_dense(cfac)

    def project(self):
        mt = self.mirror if self.mirror is not None else self.primary
        nu = mt.get_norm()
        if nu > self.radius:
            self.scale(self.radius / nu)

    def update_sum(self):
        for mt in self._each:
            mt.update_sum()

    def get(self, j):
        return self.primary.get(j)

    def values(self):
        return self.primary.values()

    def sum_values(self):
        return self.primary.sum_values()

    def euclid_normsq(self):
        mt = self.mirror if self.mirror is not None else self.primary
        nu = mt.get_norm()
        return nu * nu

    def weighted_normsq(self):
        nu = self.primary.get_norm()
        return nu * nu

    def centered_normsq(self):
        return self.primary.centered_normsq()

    def sample(self, rng):
        return self.primary.sample(rng)

    def work(self):
        return sum(mt.work for mt in self._each)


class MaintainerView:
    """Adapter exposing the estimator IterateView protocol over live block
    states. Each ball state is built with the weight/centering the chosen
    estimator variant needs; w_kind arguments are checked against that."""

    def __init__(self, x_state, y_state, x_w_kind="ones", y_w_kind="ones",
                 x_centered=False, y_centered=False):
        self._st = {"x": x_state, "y": y_state}
        self._wk = {"x": x_w_kind, "y": y_w_kind}
        self._cent = {"x": x_centered, "y": y_centered}

    def _ball(self, block, w_kind):
        st = self._st[block]
        if w_kind != self._wk[block]:
            raise ConfigError(
                f"{block}-block maintainer carries weights {self._wk[block]!r}, "
                f"estimator needs {w_kind!r}")
        return st

    def get(self, block, j):
        return self._st[block].get(j)

    def sample_value(self, block, rng):
        # simplex blocks only: IM1 / AEM sample proportional to the value
        return self._st[block].sample(rng)

    def sample_weighted_sq(self, block, w_kind, rng):
        return self._ball(block, w_kind).sample(rng)

    def weighted_normsq(self, block, w_kind):
        st = self._st[block]
        if w_kind == "ones":
            return st.euclid_normsq()
        return self._ball(block, w_kind).weighted_normsq()

    def sample_centered_sq(self, block, w_kind, rng):
        assert self._cent[block]
        return self._ball(block, w_kind).sample(rng)

    def centered_weighted_normsq(self, block, w_kind):
        assert self._cent[block]
        return self._ball(block, w_kind).centered_normsq()


def estimator_weight_vectors(A):
    return {"colnnz": A.col_nnz.astype(np.float64), "col_l1": A.col_norm1.copy()}


def ball_build_plan(kind, block):
    """(w_kind, sampling, centered) the given estimator needs from a ball
    block state; w_kind names a vector in estimator_weight_vectors or 'ones'."""
    v = kind.variant
    centered = kind.family in ("VrCoord", "VrRowCol")
    if block == "x":
        if kind.family == "VrRowCol":
            if v == "L2L1v2":
                return ("ones", True, centered)
            return ("ones", False, False)
        if v == "L2L1v2":
            return ("colnnz", True, centered)
        if v == "L2L1v3":
            return ("col_l1", True, centered)
        if v == "L2L2dynamic":
            return ("ones", True, centered)
        return ("ones", False, False)
    # y block is a ball only in L2L2
    if v == "L2L2dynamic":
        return ("ones", True, centered)
    return ("ones", False, False)
