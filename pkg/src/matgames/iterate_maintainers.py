"""Implicit iterate maintainers.

Each maintainer represents a dense vector x through x = xi_u*u + xi_v*v plus
a running sum s = u' + sigma_u*u + sigma_v*v, so that Scale / AddDense /
UpdateSum cost O(1) and AddSparse costs O(log n) (tree path) or O(1) without
sampling support. Variants:

  IM1   p=1, v absent, x >= 0; samples j with probability x_j / ||x||_1.
  IM2   p=2 with a fixed dense direction v; samples j prop. to x_j^2.
  WIM2  IM2 with a weight vector w; norm/sampling in <.,.>_w.
  CIM2  WIM2 with a reference x0; samples j prop. to w_j (x - x0)_j^2 and
        reports ||x - x0||_w^2 in O(1).

Numerical-stability restarts re-baseline the representation whenever the
tracked norm drifts too far from its value at the last restart or after
ceil(n/2) AddSparse calls; in simplex mode (IM1) tiny coordinates are floored
during a restart.
"""

import math

import numpy as np

from . import _kernels


class IterateMaintainer:
    def __init__(self, variant, x0, v=None, w=None, center=None, sampling=True,
                 simplex_mode=False, stability_dim=None):
        if variant not in ("IM1", "IM2", "WIM2", "CIM2"):
            raise ValueError(f"unknown variant {variant!r}")
        x0 = np.asarray(x0, dtype=np.float64).copy()
        n = x0.shape[0]
        self.variant = variant
        self.n = n
        self.p = 1 if variant == "IM1" else 2
        self.sampling = sampling
        self.simplex_mode = simplex_mode
        self.work = 0

        if variant == "IM1":
            if np.any(x0 < 0):
                raise ValueError("IM1 requires a nonnegative start point")
            if v is not None:
                raise ValueError("IM1 has no dense direction")
            v = np.zeros(n)
        else:
            v = np.zeros(n) if v is None else np.asarray(v, dtype=np.float64).copy()

        if variant in ("WIM2", "CIM2"):
            w = np.ones(n) if w is None else np.asarray(w, dtype=np.float64).copy()
            if np.any(w < 0):
                raise ValueError("weights must be nonnegative")
        else:
            w = np.ones(n)
        self.w = w
        self.x0ref = None
        if variant == "CIM2":
            self.x0ref = (np.zeros(n) if center is None
                          else np.asarray(center, dtype=np.float64).copy())

        self.u = x0
        self.v = v
        self.usum = np.zeros(n)
        self.xi_u = 1.0
        self.xi_v = 0.0
        self.sig_u = 0.0
        self.sig_v = 0.0
        self.wv_normsq = float(np.sum(w * v * v))

        size = 1
        while size < max(n, 2):
            size *= 2
        self._size = size
        self._tree = None
        self._logn = max(1, size.bit_length())
        if sampling:
            self._rebuild_tree()

        self._recompute_scalars()
        self._nu_init = max(self.nu, 1e-300)
        self._adds_since_restart = 0
        self._restart_cap = (n + 1) // 2
        sdim = n if stability_dim is None else int(stability_dim)
        self._nu_factor = float(sdim) ** 8

    # -- internals ------------------------------------------------------

    def _payload_row(self, j, du):
        """Tree payload increment when u_j grows by du."""
        w = self.w[j]
        uj = self.u[j]  # value before the update
        vj = self.v[j]
        if self.variant == "IM1":
            return np.array([du])
        row = [w * (2.0 * uj * du + du * du), w * du * vj, 0.0]
        if self.variant == "CIM2":
            row += [0.0, w * du * self.x0ref[j], 0.0]
        return np.array(row)

    def _leaf_payload(self):
        u, v, w = self.u, self.v, self.w
        if self.variant == "IM1":
            return u[:, None].copy()
        cols = [w * u * u, w * u * v, w * v * v]
        if self.variant == "CIM2":
            x0 = self.x0ref
            cols += [w * x0 * x0, w * u * x0, w * v * x0]
        return np.column_stack(cols)

    def _rebuild_tree(self):
        size = self._size
        k = 1 if self.variant == "IM1" else (6 if self.variant == "CIM2" else 3)
        tree = np.zeros((2 * size, k))
        tree[size:size + self.n] = self._leaf_payload()
        _kernels.tree_build(tree, size)
        self._tree = tree
        self.work += 2 * size

    def _recompute_scalars(self):
        x = self.values()
        if self.p == 1:
            self.nu = float(np.abs(x).sum())
        else:
            self.nu = math.sqrt(float(np.sum(self.w * x * x)))
        self.iota = float(np.sum(self.w * x * self.v))

    def _maybe_restart(self):
        if (self._adds_since_restart >= self._restart_cap
                or self.nu > self._nu_init * self._nu_factor
                or self.nu < self._nu_init / self._nu_factor):
            self._restart()

    def _restart(self):
        x = self.values()
        s_part = self.sig_u * self.u + self.sig_v * self.v
        if self.simplex_mode:
            floor = x.max() / self._nu_factor
            x = np.maximum(x, floor)
        self.usum += s_part
        self.u = x
        self.xi_u = 1.0
        self.xi_v = 0.0
        self.sig_u = 0.0
        self.sig_v = 0.0
        self._recompute_scalars()
        self._nu_init = max(self.nu, 1e-300)
        self._adds_since_restart = 0
        if self.sampling:
            self._rebuild_tree()
        self.work += self.n

    # -- updates --------------------------------------------------------

    def scale(self, c):
        if c == 0.0 or not np.isfinite(c):
            raise ValueError("Scale factor must be finite and nonzero")
        self.xi_u *= c
        self.xi_v *= c
        self.nu *= abs(c)
        self.iota *= c
        self.work += 1
        self._maybe_restart()

    def add_sparse(self, j, c):
        xj = self.xi_u * self.u[j] + self.xi_v * self.v[j]
        if self.variant == "IM1" and c < -xj - 1e-12 * max(1.0, abs(xj)):
            raise ValueError("IM1 AddSparse would drive a coordinate negative")
        du = c / self.xi_u
        if self.p == 1:
            self.nu += c
            if self.nu < 0.0:
                self.nu = 0.0
        else:
            wj = self.w[j]
            nsq = self.nu * self.nu + 2.0 * c * wj * xj + c * c * wj
            self.nu = math.sqrt(nsq) if nsq > 0.0 else 0.0
            self.iota += c * self.w[j] * self.v[j]
        if self.sampling:
            row = self._payload_row(j, du)
            _kernels.tree_path_add(self._tree, self._size, j, row)
            self.work += self._logn
        self.u[j] += du
        self.usum[j] -= self.sig_u * du
        self._adds_since_restart += 1
        self.work += 1
        self._maybe_restart()

    def add_dense(self, c):
        if self.variant == "IM1":
            raise ValueError("AddDense is undefined for IM1")
        self.xi_v += c
        nsq = self.nu * self.nu + 2.0 * c * self.iota + c * c * self.wv_normsq
        self.nu = math.sqrt(nsq) if nsq > 0.0 else 0.0
        self.iota += c * self.wv_normsq
        self.work += 1
        self._maybe_restart()

    def update_sum(self):
        self.sig_u += self.xi_u
        self.sig_v += self.xi_v
        self.work += 1

    # -- queries --------------------------------------------------------

    def get(self, j):
        self.work += 1
        return self.xi_u * self.u[j] + self.xi_v * self.v[j]

    def get_sum(self, j):
        self.work += 1
        return self.usum[j] + self.sig_u * self.u[j] + self.sig_v * self.v[j]

    def get_norm(self):
        self.work += 1
        return self.nu

    def centered_normsq(self):
        """||x - x0||_w^2 in O(1) (CIM2 only)."""
        if self.variant != "CIM2":
            raise ValueError("centered_normsq requires CIM2")
        if not self.sampling:
            x = self.values() - self.x0ref
            return float(np.sum(self.w * x * x))
        # same dot product the sampler uses, so a positive result here
        # guarantees the sampling mass is positive too
        val = float(self._tree[1] @ self._sample_coef())
        self.work += 1
        return max(val, 0.0)

    def values(self):
        """Dense x (O(n); for tests, traces and restarts)."""
        return self.xi_u * self.u + self.xi_v * self.v

    def sum_values(self):
        return self.usum + self.sig_u * self.u + self.sig_v * self.v

    def _sample_coef(self):
        xu, xv = self.xi_u, self.xi_v
        if self.variant == "IM1":
            return np.array([1.0])
        if self.variant == "CIM2":
            return np.array([xu * xu, 2.0 * xu * xv, xv * xv, 1.0, -2.0 * xu, -2.0 * xv])
        return np.array([xu * xu, 2.0 * xu * xv, xv * xv])

    def sample(self, rng):
        if not self.sampling:
            raise ValueError("maintainer built without sampling support")
        coef = self._sample_coef()
        total = float(self._tree[1] @ coef)
        if total <= 0.0:
            raise ValueError("sampling from an all-zero mass")
        j = int(_kernels.tree_descend_dot(self._tree, self._size, coef, rng.random()))
        self.work += self._logn
        if j >= self.n:  # roundoff pushed the descent into a padded leaf
            j = self.n - 1
        return j
