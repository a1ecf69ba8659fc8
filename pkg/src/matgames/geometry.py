"""Domain geometries: simplex/ball blocks, divergences, clipping, exact gap.

Three setups are supported, keyed by which block lives where:
L1L1 (simplex x simplex), L2L1 (ball x simplex), L2L2 (ball x ball).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Domain:
    kind: str            # 'simplex' | 'ball'
    dim: int
    center: np.ndarray = None
    radius: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError("domain dim must be >= 1")
        if self.kind == "ball":
            c = self.center if self.center is not None else np.zeros(self.dim)
            object.__setattr__(self, "center", np.asarray(c, dtype=np.float64))
            if self.radius <= 0:
                raise ConfigError("ball radius must be positive")
        elif self.kind != "simplex":
            raise ConfigError(f"unknown domain kind {self.kind!r}")

    def center_point(self):
        if self.kind == "simplex":
            return np.full(self.dim, 1.0 / self.dim)
        return self.center.copy()

    def contains(self, z, tol=1e-9):
        z = np.asarray(z)
        if self.kind == "simplex":
            return bool(np.all(z >= -tol) and abs(z.sum() - 1.0) <= tol * max(1.0, self.dim))
        return bool(np.linalg.norm(z - self.center) <= self.radius * (1.0 + tol))

    def project(self, z):
        """Euclidean ball projection; simplex blocks renormalize nonnegatives."""
        if self.kind == "simplex":
            w = np.maximum(z, 0.0)
            s = w.sum()
            return w / s if s > 0 else np.full(self.dim, 1.0 / self.dim)
        d = z - self.center
        nrm = np.linalg.norm(d)
        if nrm <= self.radius:
            return np.asarray(z, dtype=np.float64)
        return self.center + d * (self.radius / nrm)


@dataclass(frozen=True)
class Setup:
    tag: str             # 'L1L1' | 'L2L1' | 'L2L2'
    x_domain: Domain
    y_domain: Domain

    def __post_init__(self):
        expect = {
            "L1L1": ("simplex", "simplex"),
            "L2L1": ("ball", "simplex"),
            "L2L2": ("ball", "ball"),
        }
        if self.tag not in expect:
            raise ConfigError(f"unknown setup tag {self.tag!r}")
        ex, ey = expect[self.tag]
        if self.x_domain.kind != ex or self.y_domain.kind != ey:
            raise ConfigError(f"{self.tag} requires x={ex}, y={ey}")

    @property
    def theta(self):
        m, n = self.y_domain.dim, self.x_domain.dim
        if self.tag == "L1L1":
            return math.log(m * n)
        if self.tag == "L2L1":
            return 0.5 + math.log(m)
        return 1.0

    def domains(self):
        return {"x": self.x_domain, "y": self.y_domain}


@dataclass
class Point:
    x: np.ndarray
    y: np.ndarray

    def block(self, name):
        return self.x if name == "x" else self.y

    def copy(self):
        return Point(self.x.copy(), self.y.copy())


def make_setup(tag, n, m, x_center=None, x_radius=1.0, y_center=None, y_radius=1.0):
    if tag == "L1L1":
        return Setup(tag, Domain("simplex", n), Domain("simplex", m))
    if tag == "L2L1":
        return Setup(tag, Domain("ball", n, x_center, x_radius), Domain("simplex", m))
    if tag == "L2L2":
        return Setup(tag, Domain("ball", n, x_center, x_radius),
                     Domain("ball", m, y_center, y_radius))
    raise ConfigError(f"unknown setup tag {tag!r}")


def clip_block(domain, g):
    """Componentwise sign(v)*min(|v|,1) on simplex blocks; identity on balls."""
    if domain.kind == "simplex":
        return np.clip(g, -1.0, 1.0)
    return np.asarray(g, dtype=np.float64)


def clip(setup, gx, gy):
    return clip_block(setup.x_domain, gx), clip_block(setup.y_domain, gy)


class KLInfinityFlag:
    """Set when a KL divergence hit a zero denominator (returned +inf)."""

    def __init__(self):
        self.hit = False


def bregman_block(domain, z, zp, flag=None):
    z = np.asarray(z, dtype=np.float64)
    zp = np.asarray(zp, dtype=np.float64)
    if domain.kind == "ball":
        d = z - zp
        return 0.5 * float(d @ d)
    # KL with the 0 log 0 = 0 convention
    bad = (zp > 0) & (z <= 0)
    if np.any(bad):
        if flag is not None:
            flag.hit = True
        return math.inf
    pos = zp > 0
    val = float(np.sum(zp[pos] * np.log(zp[pos] / z[pos]))) + float(z.sum() - zp.sum())
    return val


def bregman(setup, z, zp, flag=None):
    return (bregman_block(setup.x_domain, z.x, zp.x, flag)
            + bregman_block(setup.y_domain, z.y, zp.y, flag))


def local_norm_sq_block(domain, w, delta):
    delta = np.asarray(delta, dtype=np.float64)
    if domain.kind == "simplex":
        return float(np.sum(np.asarray(w) * delta * delta))
    return float(delta @ delta)


def local_norm_sq(setup, w, dx, dy):
    return (local_norm_sq_block(setup.x_domain, w.x, dx)
            + local_norm_sq_block(setup.y_domain, w.y, dy))


def _best_response_max(domain, v):
    """max over the domain of <v, y>."""
    v = np.asarray(v, dtype=np.float64)
    if domain.kind == "simplex":
        return float(v.max())
    return float(v @ domain.center) + domain.radius * float(np.linalg.norm(v))


def gap(setup, A, b, c, z):
    """Exact duality gap of f(x,y) = y'Ax + b'x - c'y at z, in O(nnz)."""
    b = np.zeros(setup.x_domain.dim) if b is None else np.asarray(b, dtype=np.float64)
    c = np.zeros(setup.y_domain.dim) if c is None else np.asarray(c, dtype=np.float64)
    ax = A.matvec(z.x)
    aty = A.matvec_t(z.y)
    upper = float(b @ z.x) + _best_response_max(setup.y_domain, ax - c)
    lower = -float(c @ z.y) - _best_response_max(setup.x_domain, -(aty + b))
    return upper - lower


def setup_constants(setup):
    return {
        "theta": setup.theta,
        "center": Point(setup.x_domain.center_point(), setup.y_domain.center_point()),
    }
