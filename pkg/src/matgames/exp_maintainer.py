"""Multiplicative-weights maintenance structures.

ScalarMaintainer (SCM) keeps, for a fixed base vector bx in [lam, 1]^n and
exponent vector bg, multiplicative approximations of bx o exp(sigma*bg) for
any queried decay sigma, under coordinate deletions and running-sum
accumulation, in O(p) per query after O(n p) per-bucket setup.

ApproxExpMaintainer (AEM) composes O(log n) SCMs, binomial-heap style, to
maintain a simplex iterate x proportional to exp(delta) under the update mix
  DenseStep:   delta <- kappa*delta + v        (fixed dense v)
  MultSparse:  delta_j <- delta_j + g_j        (sparse exact)
returning an eps-padded x-hat, with sampling and running sums.

Numerics: each SCM bucket evaluates its truncated Taylor sums in the shifted
variable s = (t + R/sigma_hat) * sigma_hat / R in [0, 1], so every series term
is nonnegative (no alternating-series cancellation), and exp prefactors are
carried in log domain; bucket k serves sigma <= sigma_hat_k so the series
argument never exceeds R. Norms are exposed both linearly and as logs, since
exponents can reach ~1e6.
"""

import math

import numpy as np

from . import _kernels

_R_CAP = 340.0  # keeps e^R and the coefficient products inside float64 range
_EXACT_CAP = 64  # blocks up to this size skip the buckets and go closed-form


def _powers(base, p):
    """Rows base_i^q for q = 0..p, all-nonnegative cumulative products."""
    n = base.shape[0]
    out = np.empty((n, p + 1))
    out[:, 0] = 1.0
    if p > 0:
        np.cumprod(np.broadcast_to(base[:, None], (n, p)), axis=1, out=out[:, 1:])
    return out


_QDIV_CACHE = {}


def _qdiv_for(p):
    arr = _QDIV_CACHE.get(p)
    if arr is None:
        arr = np.arange(1, p + 1, dtype=np.float64)
        _QDIV_CACHE[p] = arr
    return arr


class ScalarMaintainer:
    def __init__(self, bx, bg, sigma_min, eps_scm, lam_scm):
        bx = np.asarray(bx, dtype=np.float64).copy()
        bg = np.asarray(bg, dtype=np.float64).copy()
        if bx.ndim != 1 or bx.shape != bg.shape:
            raise ValueError("bx and bg must be equal-length vectors")
        if np.any(bx < lam_scm * (1 - 1e-12)) or np.any(bx > 1 + 1e-12):
            raise ValueError("bx entries must lie in [lam_scm, 1]")
        if not (0.0 < sigma_min <= 1.0):
            raise ValueError("sigma_min must be in (0, 1]")
        self.n = bx.shape[0]
        self.bx = bx
        self.bg = bg
        self.sigma_min = float(sigma_min)
        self.eps_scm = float(eps_scm)
        self.lam_scm = float(lam_scm)
        self.K = max(0, int(math.ceil(-math.log2(self.sigma_min) - 1e-12)))

        self.alive = np.ones(self.n, dtype=bool)
        self.alive_count = self.n
        self.bxl1 = float(bx.sum())
        self.order = np.argsort(-bg, kind="stable")  # descending bg
        self._max_ptr = 0
        self.u = np.zeros(self.n)          # folded running sums
        self.version = 0                   # bumped whenever values change

        # blocks of bounded size are evaluated in closed form; their per-op
        # cost is a handful of vector ops on <= _EXACT_CAP floats, so no
        # Taylor buckets or trees are ever built for them
        self._exact = self.n <= _EXACT_CAP
        if self._exact:
            self._logbx = np.log(bx)
            self._esum = np.zeros(self.n)
            self.R = None
            self.p = None
            self.work = 0
            return

        self.eps_p = eps_scm / 10.0
        self.R = 2.0 * math.log(2.0 * self.n / (lam_scm * self.eps_p))
        if self.R > _R_CAP:
            raise ValueError(f"truncation radius R={self.R:.1f} exceeds float64 budget")
        self.p = int(math.ceil(2.0 * self.R + 2.0 * math.log(1.0 / self.eps_p) + 4.0))

        size = 1
        while size < max(self.n, 2):
            size *= 2
        self.size = size
        self._trees = {}                   # bucket k -> (2*size, p+1) payload
        self._mu = {}
        self._coef = {}                    # bucket k -> running-sum coefficients
        self._frozen = []                  # retired (tree, coef) sum snapshots
        self._ghost = {}                   # bucket k -> deleted-leaf coefficient sum
        self._pend = {}                    # bucket k -> deferred (j, row) subtractions
        self._qdiv = _qdiv_for(self.p)
        self._wkey = None
        self._wcached = None
        self.work = 0

    # -- bucket plumbing ------------------------------------------------

    def _sigma_hat(self, k):
        return min(1.0, (2.0 ** k) * self.sigma_min) if k < self.K else 1.0

    def _bucket_index(self, sigma):
        if sigma <= self.sigma_min:
            return 0
        k = int(math.ceil(math.log2(sigma / self.sigma_min) - 1e-12))
        k = min(k, self.K)
        while sigma > (2.0 ** k) * self.sigma_min * (1 + 1e-12) and k < self.K:
            k += 1
        return k

    def _max_bg(self):
        order = self.order
        while self._max_ptr < self.n and not self.alive[order[self._max_ptr]]:
            self._max_ptr += 1
        if self._max_ptr >= self.n:
            raise ValueError("no live coordinates")
        return float(self.bg[order[self._max_ptr]])

    def _shat(self, mu, shat_scale):
        """Shifted truncated exponent in [0,1] for every coordinate."""
        s = (self.bg - mu) * shat_scale + 1.0
        return np.clip(s, 0.0, 1.0)

    def _build_bucket(self, k):
        mu = self._max_bg()
        sh = self._sigma_hat(k)
        s = self._shat(mu, sh / self.R)
        tree = np.empty((2 * self.size, self.p + 1))
        tree[:2] = 0.0
        tree[self.size + self.n:] = 0.0   # leaves past n; internals get rebuilt
        leaves = tree[self.size:self.size + self.n]
        leaves[:, 0] = 1.0
        if self.p > 0:
            np.cumprod(np.broadcast_to(s[:, None], (self.n, self.p)), axis=1,
                       out=leaves[:, 1:])
        leaves *= self.bx[:, None]
        leaves[~self.alive] = 0.0
        _kernels.tree_build(tree, self.size)
        self._trees[k] = tree
        self._mu[k] = mu
        self._coef[k] = np.zeros(self.p + 1)
        self._ghost[k] = np.zeros(self.p + 1)
        self._pend[k] = []
        self.work += self.alive_count

    def _ensure_bucket(self, k):
        if k not in self._trees:
            self._build_bucket(k)
            # sigma is non-decreasing in normal use, so lower buckets are
            # stale; retire them without touching every coordinate and let
            # sum queries read the frozen snapshots directly
            for kk in [x for x in self._trees if x < k]:
                self._retire_bucket(kk)
        return self._trees[k]

    def _retire_bucket(self, kk):
        tree = self._trees.pop(kk)
        coef = self._coef.pop(kk)
        self._mu.pop(kk)
        self._ghost.pop(kk)
        self._pend.pop(kk)
        if coef.any():
            self._frozen.append((tree, coef))

    def _flush_dead(self, k):
        """Apply the deferred dead-leaf subtractions to bucket k's tree."""
        tree = self._trees[k]
        for j, row in self._pend[k]:
            _kernels.tree_path_add(tree, self.size, j, -row)
            self.work += self.size.bit_length()
        self._pend[k].clear()
        self._ghost[k][:] = 0.0

    def _bucket_total(self, k, tree, w):
        """Live-mass total tree@w minus ghost mass; flushes the deferred
        subtractions when the ghost share gets large enough to hurt
        cancellation or sampling rejection rates."""
        g = self._ghost[k]
        if g[0] == 0.0:
            return float(tree[1] @ w)
        gd = float(g @ w)
        t = float(tree[1] @ w)
        if gd <= 0.5 * t:
            return t - gd
        self._flush_dead(k)
        return float(tree[1] @ w)

    def _weights(self, k, sigma):
        """Taylor weights tau^q/q! with tau = sigma*R/sigma_hat_k <= R."""
        tau = sigma * self.R / self._sigma_hat(k)
        key = (k, tau)
        if key == self._wkey:
            return self._wcached, tau
        w = np.empty(self.p + 1)
        w[0] = 1.0
        np.cumprod(tau / self._qdiv, out=w[1:])
        self._wkey = key
        self._wcached = w
        return w, tau

    def _check_sigma(self, sigma):
        if sigma == 0.0:
            return
        if not (self.sigma_min * (1 - 1e-9) <= sigma <= 1.0 + 1e-12):
            raise ValueError(f"sigma={sigma} outside {{0}} U [{self.sigma_min}, 1]")

    def _exact_dist(self, sigma):
        """Closed-form normalized bx o exp(sigma*bg); zeros at deleted slots."""
        ls = np.where(self.alive, self._logbx + sigma * self.bg, -np.inf)
        w = np.exp(ls - ls.max())
        return w / w.sum()

    # -- queries --------------------------------------------------------

    def log_norm(self, sigma):
        """log of Z[sigma], the (1 +- eps_scm) approximation of
        ||bx o exp(sigma*bg)||_1 over live coordinates."""
        self._check_sigma(sigma)
        if self.alive_count == 0:
            raise ValueError("no live coordinates")
        if self._exact:
            ls = np.where(self.alive, self._logbx + sigma * self.bg, -np.inf)
            mx = float(ls.max())
            self.work += 1
            return mx + math.log(float(np.exp(ls - mx).sum()))
        if sigma == 0.0:
            return math.log(self.bxl1)
        k = self._bucket_index(sigma)
        tree = self._ensure_bucket(k)
        w, tau = self._weights(k, sigma)
        total = self._bucket_total(k, tree, w)
        self.work += 1
        return sigma * self._mu[k] - tau + math.log(total)

    def get_norm(self, sigma):
        return math.exp(self.log_norm(sigma))

    def get(self, j, sigma):
        """Coordinate j of the normalized x-hat[sigma] distribution."""
        self._check_sigma(sigma)
        if not self.alive[j]:
            raise ValueError(f"coordinate {j} is deleted")
        if self._exact:
            self.work += 1
            return float(self._exact_dist(sigma)[j])
        if sigma == 0.0:
            return float(self.bx[j]) / self.bxl1
        k = self._bucket_index(sigma)
        tree = self._ensure_bucket(k)
        w, _ = self._weights(k, sigma)
        denom = self._bucket_total(k, tree, w)
        self.work += 2
        return float(tree[self.size + j] @ w) / denom

    def get_all(self, sigma):
        """Dense x-hat[sigma] (zeros at deleted coordinates); O(n p)."""
        self._check_sigma(sigma)
        if self._exact:
            return self._exact_dist(sigma)
        if sigma == 0.0:
            out = np.where(self.alive, self.bx, 0.0)
            return out / self.bxl1
        k = self._bucket_index(sigma)
        tree = self._ensure_bucket(k)
        w, _ = self._weights(k, sigma)
        leaves = tree[self.size:self.size + self.n]
        vals = leaves @ w
        return vals / self._bucket_total(k, tree, w)

    def sample(self, sigma, rng):
        self._check_sigma(sigma)
        if self.alive_count == 0:
            raise ValueError("no live coordinates")
        if self._exact:
            cum = np.cumsum(self._exact_dist(sigma))
            self.work += 1
            j = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            return min(j, self.n - 1)
        if sigma == 0.0:
            sigma = 0.0
            k = 0
        else:
            k = self._bucket_index(sigma)
        tree = self._ensure_bucket(k)
        if sigma == 0.0:
            w = np.zeros(self.p + 1)
            w[0] = 1.0
        else:
            w, _ = self._weights(k, sigma)
        self._bucket_total(k, tree, w)  # bounds the dead mass before drawing
        for _ in range(32):
            j = int(_kernels.tree_descend_dot(tree, self.size, w, rng.random()))
            self.work += self.size.bit_length()
            if j < self.n and self.alive[j]:
                return j
            # hit a deferred-deleted leaf; redraw (the live-conditional
            # distribution is exact under rejection)
        self._flush_dead(k)
        j = int(_kernels.tree_descend_dot(tree, self.size, w, rng.random()))
        self.work += self.size.bit_length()
        if j >= self.n or not self.alive[j]:
            # roundoff fell into a dead slot; fall back to the live max
            self._max_bg()
            j = int(self.order[self._max_ptr])
        return j

    # -- running sums ---------------------------------------------------

    def update_sum(self, gamma, sigma):
        """s <- s + gamma * x-hat[sigma], implicitly."""
        if gamma == 0.0:
            return
        self._check_sigma(sigma)
        if self._exact:
            self._esum += gamma * self._exact_dist(sigma)
            self.work += 1
            return
        if sigma == 0.0:
            k = 0
            tree = self._ensure_bucket(k)
            w = np.zeros(self.p + 1)
            w[0] = 1.0
        else:
            k = self._bucket_index(sigma)
            tree = self._ensure_bucket(k)
            w, _ = self._weights(k, sigma)
        denom = self._bucket_total(k, tree, w)
        self._coef[k] += (gamma / denom) * w
        self.work += 2

    def get_sum(self, j):
        val = self.u[j]
        if self._exact:
            self.work += 1
            return float(val + self._esum[j])
        for k, tree in self._trees.items():
            val += float(tree[self.size + j] @ self._coef[k])
        for tree, coef in self._frozen:
            val += float(tree[self.size + j] @ coef)
        self.work += 1 + len(self._trees) + len(self._frozen)
        return float(val)

    def get_sum_all(self):
        """Dense running sums for live coordinates (deleted ones hold their
        value frozen at deletion time)."""
        out = self.u.copy()
        if self._exact:
            return out + self._esum
        for k, tree in self._trees.items():
            out += tree[self.size:self.size + self.n] @ self._coef[k]
        for tree, coef in self._frozen:
            out += tree[self.size:self.size + self.n] @ coef
        return out

    # -- deletion -------------------------------------------------------

    def delete(self, j):
        """Remove coordinate j; returns its frozen running-sum total."""
        if not self.alive[j]:
            raise ValueError(f"double delete of coordinate {j}")
        pending = self.get_sum(j)
        self.u[j] = pending
        self.version += 1
        if self._exact:
            self._esum[j] = 0.0
            self.alive[j] = False
            self.alive_count -= 1
            self.bxl1 -= float(self.bx[j])
            return pending
        for k, tree in self._trees.items():
            row = tree[self.size + j]
            if row[0] != 0.0:
                # defer the tree subtraction: record the leaf as ghost mass
                # and let norm queries correct for it until a flush
                self._ghost[k] += row
                self._pend[k].append((j, row.copy()))
                row[:] = 0.0
                self.work += 1
        for tree, coef in self._frozen:
            # the pending amount just moved into u[j]; blank the leaf so the
            # snapshot is not added again by later sum queries
            if tree[self.size + j].any():
                tree[self.size + j] = 0.0
                self.work += 1
        self.alive[j] = False
        self.alive_count -= 1
        self.bxl1 -= float(self.bx[j])
        if self.alive_count == 0:
            return pending
        new_max = self._max_bg()
        for k in list(self._trees):
            if new_max < self._mu[k] - self.R / (2.0 * self._sigma_hat(k)):
                self._reset_bucket(k, new_max)
        return pending

    def _reset_bucket(self, k, new_max):
        tree = self._trees[k]
        coef = self._coef[k]
        live = self.alive
        if coef[1:].any():
            leaves = tree[self.size:self.size + self.n]
            fold = leaves[:, 1:] @ coef[1:]
            self.u[live] += fold[live]
            coef[1:] = 0.0
        sh = self._sigma_hat(k)
        s = self._shat(new_max, sh / self.R)
        rows = _powers(s, self.p)
        rows *= self.bx[:, None]
        rows[~live] = 0.0
        tree[:] = 0.0
        tree[self.size:self.size + self.n] = rows
        _kernels.tree_build(tree, self.size)
        self._mu[k] = new_max
        self._ghost[k][:] = 0.0
        self._pend[k].clear()
        self.work += self.alive_count


class ApproxExpMaintainer:
    def __init__(self, x0, v, kappa, eps, lam):
        x0 = np.asarray(x0, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64).copy()
        if not (0.0 <= kappa < 1.0):
            raise ValueError("kappa must be in [0, 1)")
        if np.any(x0 < lam * (1 - 1e-12)):
            raise ValueError("x0 has an entry below the floor lam")
        if abs(x0.sum() - 1.0) > 1e-6:
            raise ValueError("x0 must lie on the simplex")
        self.n = x0.shape[0]
        self.v = v
        self.kappa = float(kappa)
        self.eps = float(eps)
        self.lam = float(lam)
        self.eps_scm = eps / 10.0
        self.lam_scm = min(eps / self.n, lam)
        self.sigma_min = 1.0 - kappa
        self.K = int(math.ceil(math.log2(self.n + 1)))
        self.vbar = v / (1.0 - kappa)

        self.clock = 0                     # dense steps so far; per-rank tau is
                                           # clock minus the rank's birth time
        self.ranks = {}                    # rank -> dict(scm, coords, log_gamma, born)
        self.coord_rank = np.full(self.n, -1, dtype=np.int64)
        self.coord_local = np.zeros(self.n, dtype=np.int64)
        self.u = np.zeros(self.n)
        self.work = 0
        self.merge_events = []             # (op_index, rank, size) for amortization tests
        self._op_index = 0

        # nursery: freshly reinserted coordinates live in one flat buffer,
        # each with its own birth time, evaluated in closed form; the heap
        # merge cascade only runs when the buffer fills
        self.ncap = max(4, min(64, self.n // 3))
        self._nb_coord = np.zeros(self.ncap, dtype=np.int64)
        self._nb_delta0 = np.zeros(self.ncap)
        self._nb_born = np.zeros(self.ncap, dtype=np.int64)
        self._nb_esum = np.zeros(self.ncap)
        self.n_count = 0
        self._nlw_cache = (-1, None)
        self._ver = 0
        self._lw_cache = (-1, None)

        self._make_rank(self.K, np.arange(self.n), np.log(x0))

    # -- rank construction ---------------------------------------------

    def _make_rank(self, r, coords, delta):
        log_gamma = float(delta.max())
        floor = math.log(self.lam_scm) + log_gamma
        delta = np.maximum(delta, floor)
        bx = np.exp(delta - log_gamma)
        bg = self.vbar[coords] - delta
        scm = ScalarMaintainer(bx, bg, self.sigma_min, self.eps_scm, self.lam_scm)
        self.ranks[r] = {"scm": scm, "coords": np.asarray(coords, dtype=np.int64),
                         "log_gamma": log_gamma, "born": self.clock}
        self.coord_rank[coords] = r
        self.coord_local[coords] = np.arange(len(coords))

    def _sigma(self, rank):
        return 1.0 - self.kappa ** (self.clock - self.ranks[rank]["born"])

    # -- nursery --------------------------------------------------------

    def _nursery_lw(self):
        """Current absolute log-weights of the buffered coordinates."""
        if self._nlw_cache[0] == self._ver:
            return self._nlw_cache[1]
        k = self.n_count
        decay = self.kappa ** (self.clock - self._nb_born[:k]).astype(np.float64)
        lw = decay * self._nb_delta0[:k] + (1.0 - decay) * self.vbar[self._nb_coord[:k]]
        self._nlw_cache = (self._ver, lw)
        return lw

    def _nursery_add(self, j, delta_j):
        slot = self.n_count
        self._nb_coord[slot] = j
        self._nb_delta0[slot] = delta_j
        self._nb_born[slot] = self.clock
        self._nb_esum[slot] = 0.0
        self.coord_rank[j] = -2
        self.coord_local[j] = slot
        self.n_count += 1
        self.work += 1
        self._nlw_cache = (-1, None)
        self._lw_cache = (-1, None)
        if self.n_count == self.ncap:
            self._flush_nursery()

    def _nursery_remove(self, slot):
        """Freeze the slot's pending sum into u and swap-delete it."""
        j = int(self._nb_coord[slot])
        self.u[j] += self._nb_esum[slot]
        self.coord_rank[j] = -1
        last = self.n_count - 1
        if slot != last:
            self._nb_coord[slot] = self._nb_coord[last]
            self._nb_delta0[slot] = self._nb_delta0[last]
            self._nb_born[slot] = self._nb_born[last]
            self._nb_esum[slot] = self._nb_esum[last]
            self.coord_local[self._nb_coord[slot]] = slot
        self.n_count = last
        self.work += 1
        self._nlw_cache = (-1, None)
        self._lw_cache = (-1, None)

    def _flush_nursery(self):
        k = self.n_count
        lw = self._nursery_lw()
        coords = self._nb_coord[:k].copy()
        self.u[coords] += self._nb_esum[:k]
        deltas = np.asarray(lw, dtype=np.float64).copy()
        self.coord_rank[coords] = -1
        self.n_count = 0
        self.work += k
        self._nlw_cache = (-1, None)
        self._lw_cache = (-1, None)
        self._merge_batch(coords.tolist(), deltas.tolist())

    def _delta_of(self, rank, locals_):
        """Exact current delta for the given local indices of a rank."""
        entry = self.ranks[rank]
        scm = entry["scm"]
        sig = self._sigma(rank)
        return (entry["log_gamma"] + np.log(scm.bx[locals_]) + sig * scm.bg[locals_])

    # -- updates --------------------------------------------------------

    def dense_step(self):
        self.clock += 1
        self._op_index += 1
        self._ver += 1
        self.work += 1

    def mult_sparse(self, indices, values):
        """delta_j <- delta_j + g_j for each (j, g_j); exact on the support."""
        vals = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            raise ValueError("MultSparse values must be finite")
        self._op_index += 1
        for j, gj in zip(np.asarray(indices, dtype=np.int64), vals):
            self._reinsert(int(j), float(gj))

    def _reinsert(self, j, gj):
        self._ver += 1
        r = int(self.coord_rank[j])
        if r == -2:
            slot = int(self.coord_local[j])
            delta_j = float(self._nursery_lw()[slot]) + gj
            self._nursery_remove(slot)
        else:
            loc = int(self.coord_local[j])
            entry = self.ranks[r]
            delta_j = float(self._delta_of(r, np.array([loc]))[0]) + gj
            self.u[j] += entry["scm"].delete(loc)
            self.coord_rank[j] = -1
            if entry["scm"].alive_count == 0:
                self.work += entry["scm"].work
                del self.ranks[r]
        self._nursery_add(j, delta_j)

    def _merge_batch(self, new_coords, new_delta):
        tr = 0
        while 2 ** tr < len(new_coords):
            tr += 1
        while tr in self.ranks:
            old = self.ranks.pop(tr)
            scm = old["scm"]
            self.work += scm.work
            live = scm.alive
            locs = np.nonzero(live)[0]
            coords = old["coords"][locs]
            sums = scm.get_sum_all()
            self.u[coords] += sums[locs]
            deltas = (old["log_gamma"] + np.log(scm.bx[locs])
                      + (1.0 - self.kappa ** (self.clock - old["born"])) * scm.bg[locs])
            new_coords.extend(coords.tolist())
            new_delta.extend(deltas.tolist())
            self.work += len(locs)
            tr += 1
        # ranks 0..K-1 hold < 2^K coordinates in total, so even after
        # absorbing an occupied top rank the merged set fits at rank K
        tr = min(tr, self.K)
        if len(new_coords) > 2 ** tr or tr in self.ranks:
            raise AssertionError("rank overflow; invariant violated")
        self._make_rank(tr, np.array(new_coords, dtype=np.int64),
                        np.array(new_delta))
        self.merge_events.append((self._op_index, tr, len(new_coords)))
        self._lw_cache = (-1, None)

    # -- queries --------------------------------------------------------

    def _log_weights(self):
        """(sorted ranks, log-weights, total); the nursery, when occupied,
        contributes one extra trailing log-weight entry."""
        if self._lw_cache[0] == self._ver:
            return self._lw_cache[1]
        ranks = sorted(self.ranks)
        vals = []
        for r in ranks:
            entry = self.ranks[r]
            scm = entry["scm"]
            key = (self.clock, scm.version)
            cached = entry.get("lncache")
            if cached is not None and cached[0] == key:
                vals.append(cached[1])
            else:
                val = entry["log_gamma"] + scm.log_norm(self._sigma(r))
                entry["lncache"] = (key, val)
                vals.append(val)
        if self.n_count:
            nlw = self._nursery_lw()
            nmx = float(nlw.max())
            vals.append(nmx + math.log(float(np.exp(nlw - nmx).sum())))
        lw = np.array(vals)
        mx = lw.max()
        log_gamma_total = mx + math.log(np.exp(lw - mx).sum())
        self._lw_cache = (self._ver, (ranks, lw, log_gamma_total))
        return ranks, lw, log_gamma_total

    def get(self, j):
        r = int(self.coord_rank[j])
        if r == -1:
            raise ValueError(f"coordinate {j} is not live")
        ranks, lw, lg = self._log_weights()
        if r == -2:
            self.work += 1
            return math.exp(float(self._nursery_lw()[int(self.coord_local[j])]) - lg)
        entry = self.ranks[r]
        wr = math.exp(lw[ranks.index(r)] - lg)
        return wr * entry["scm"].get(int(self.coord_local[j]), self._sigma(r))

    def get_all(self):
        """Dense x-hat; O(n p)."""
        ranks, lw, lg = self._log_weights()
        out = np.zeros(self.n)
        for idx, r in enumerate(ranks):
            entry = self.ranks[r]
            vals = entry["scm"].get_all(self._sigma(r))
            live = entry["scm"].alive
            coords = entry["coords"][live]
            out[coords] = math.exp(lw[idx] - lg) * vals[live]
        if self.n_count:
            out[self._nb_coord[:self.n_count]] = np.exp(self._nursery_lw() - lg)
        return out

    def sample(self, rng):
        ranks, lw, lg = self._log_weights()
        probs = np.exp(lw - lg)
        rtarget = rng.random() * probs.sum()
        acc = 0.0
        pick = len(lw) - 1
        for idx in range(len(lw)):
            acc += probs[idx]
            if rtarget < acc:
                pick = idx
                break
        self.work += 1
        if pick >= len(ranks):
            nw = np.exp(self._nursery_lw() - lg)
            cum = np.cumsum(nw)
            slot = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            return int(self._nb_coord[min(slot, self.n_count - 1)])
        r = ranks[pick]
        entry = self.ranks[r]
        loc = entry["scm"].sample(self._sigma(r), rng)
        return int(entry["coords"][loc])

    def update_sum(self, gamma=1.0):
        ranks, lw, lg = self._log_weights()
        for idx, r in enumerate(ranks):
            weight = gamma * math.exp(lw[idx] - lg)
            self.ranks[r]["scm"].update_sum(weight, self._sigma(r))
        if self.n_count:
            self._nb_esum[:self.n_count] += gamma * np.exp(self._nursery_lw() - lg)
        self.work += 1

    def get_sum(self, j):
        r = int(self.coord_rank[j])
        if r == -1:
            return float(self.u[j])
        if r == -2:
            return float(self.u[j] + self._nb_esum[int(self.coord_local[j])])
        return float(self.u[j]
                     + self.ranks[r]["scm"].get_sum(int(self.coord_local[j])))

    def get_sum_all(self):
        out = self.u.copy()
        for entry in self.ranks.values():
            live = entry["scm"].alive
            coords = entry["coords"][live]
            sums = entry["scm"].get_sum_all()
            out[coords] += sums[live]
        if self.n_count:
            out[self._nb_coord[:self.n_count]] += self._nb_esum[:self.n_count]
        return out

    def total_work(self):
        w = self.work
        for entry in self.ranks.values():
            w += entry["scm"].work
        return w
