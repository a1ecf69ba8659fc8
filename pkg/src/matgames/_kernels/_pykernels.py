"""Pure-python fallback kernels.

Same call signatures as the compiled ``_ckernels`` module; numpy-vectorized
where possible. All randomness comes in as uniforms so both backends draw
identically from the same stream.
"""

import numpy as np

BACKEND = "python"


def alias_build(weights):
    """Vose alias tables for a finite distribution proportional to weights."""
    w = np.asarray(weights, dtype=np.float64)
    n = w.shape[0]
    if n == 0:
        raise ValueError("empty weight vector")
    total = w.sum()
    if total <= 0 or not np.isfinite(total):
        raise ValueError("weights must have positive finite sum")
    prob = np.empty(n, dtype=np.float64)
    alias = np.zeros(n, dtype=np.int64)
    scaled = w * (n / total)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            small.append(l)
        else:
            large.append(l)
    for l in large:
        prob[l] = 1.0
    for s in small:
        prob[s] = 1.0  # numerical leftovers
    return prob, alias


def alias_draw(prob, alias, u1, u2):
    n = prob.shape[0]
    k = int(u1 * n)
    if k >= n:
        k = n - 1
    return k if u2 < prob[k] else int(alias[k])


def alias_draw_batch(prob, alias, u1, u2):
    n = prob.shape[0]
    k = np.minimum((u1 * n).astype(np.int64), n - 1)
    take = u2 < prob[k]
    return np.where(take, k, alias[k])


def tree_build(payload, size):
    """Fill internal nodes of a complete binary sum tree.

    payload: (2*size, k) array; leaves occupy rows [size, 2*size);
    internal node i = child 2i + child 2i+1; row 0 unused.
    """
    lo = size
    while lo > 1:
        half = lo // 2
        payload[half:lo] = payload[2 * half:2 * lo:2] + payload[2 * half + 1:2 * lo:2]
        lo = half


def tree_path_add(payload, size, leaf, row):
    """Add row to leaf node and every ancestor."""
    i = size + leaf
    while i >= 1:
        payload[i] += row
        i >>= 1


def tree_descend_dot(payload, size, coef, r):
    """Weighted descent: node mass = dot(payload[node], coef); returns leaf index.

    r is a uniform in [0,1); target mass r * root. Negative masses from
    roundoff are clamped to 0.
    """
    root = float(payload[1] @ coef)
    target = r * root
    i = 1
    while i < size:
        left = 2 * i
        lmass = float(payload[left] @ coef)
        if lmass < 0.0:
            lmass = 0.0
        rmass = float(payload[left + 1] @ coef)
        if target < lmass or (rmass <= 0.0 and lmass > 0.0):
            i = left
        else:
            target -= lmass
            i = left + 1
    return i - size
