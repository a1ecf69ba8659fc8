"""Full-enumeration certification of every estimator kind: probabilities sum
to one, enumerated expectations reproduce the bilinear gradient exactly, and
enumerated second moments respect the variance bounds."""

import math

import numpy as np
import pytest

from matgames import geometry as geo
from matgames.errors import ConfigError
from matgames.estimators import (DenseView, EstimatorKind, ROWCOL_VARIANTS,
                                 VARIANTS, coord_value, estimate_rowcol_vr,
                                 estimate_sublinear, estimate_vr,
                                 geometry_constant, l_constants,
                                 make_reference, prob_eval)
from matgames.sparse_matrix import build
from matgames.solvers.common import estimator_weight_vectors

ALL_KINDS = ([EstimatorKind("SublinearCoord", v) for v in VARIANTS]
             + [EstimatorKind("VrCoord", v) for v in VARIANTS]
             + [EstimatorKind("VrRowCol", v) for v in ROWCOL_VARIANTS])


def random_instance(rng, m, n, density=0.75):
    dense = rng.normal(size=(m, n))
    dense[rng.random((m, n)) > density] = 0.0
    for i in range(m):
        if not dense[i].any():
            dense[i, rng.integers(n)] = rng.normal() or 0.5
    for j in range(n):
        if not dense[:, j].any():
            dense[rng.integers(m), j] = rng.normal() or 0.5
    trip = [(i, j, dense[i, j]) for i in range(m) for j in range(n)
            if dense[i, j] != 0.0]
    return build(trip, m, n), dense


def random_point(rng, setup):
    def blockv(dom):
        if dom.kind == "simplex":
            v = rng.random(dom.dim) + 0.05
            return v / v.sum()
        v = rng.normal(size=dom.dim)
        return dom.project(v * rng.uniform(0.2, 1.2))
    return geo.Point(blockv(setup.x_domain), blockv(setup.y_domain))


def local_weight(dom, w):
    return w if dom.kind == "simplex" else np.ones(dom.dim)


def enumerate_blocks(kind, A, dense, z, w0, weights):
    """(prob sums, expectation vectors, second-moment fn) by enumeration."""
    m, n = dense.shape
    positions = [(i, j) for i in range(m) for j in range(n) if dense[i, j] != 0.0]
    out = {}
    for block, dim in (("x", n), ("y", m)):
        if kind.family == "VrRowCol":
            lines = range(m) if block == "x" else range(n)
            probs, vecs = [], []
            for li in lines:
                # pair the line index with one of its nonzero entries
                if block == "x":
                    ii, jj = li, int(np.nonzero(dense[li])[0][0])
                else:
                    ii, jj = int(np.nonzero(dense[:, li])[0][0]), li
                p = prob_eval(kind, A, block, ii, jj, z, w0, weights)
                mult = coord_value(kind, A, block, ii, jj, z, w0, weights) if p > 0 else 0.0
                line = dense[li] if block == "x" else -dense[:, li]
                probs.append(p)
                vecs.append(mult * line)
            out[block] = (np.array(probs), np.array(vecs))
        else:
            probs, idxs, vals = [], [], []
            for (i, j) in positions:
                p = prob_eval(kind, A, block, i, j, z, w0, weights)
                if p == 0.0:
                    continue
                probs.append(p)
                idxs.append(j if block == "x" else i)
                vals.append(coord_value(kind, A, block, i, j, z, w0, weights))
            out[block] = (np.array(probs), np.array(idxs, dtype=int),
                          np.array(vals))
    return out


@pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: f"{k.family}-{k.variant}")
@pytest.mark.parametrize("seed", [0, 3])
def test_enumeration_certifies_expectation_and_probs(kind, seed):
    rng = np.random.default_rng(seed)
    m, n = 5, 4
    A, dense = random_instance(rng, m, n)
    setup = geo.make_setup(kind.geometry, n, m)
    z = random_point(rng, setup)
    w0 = random_point(rng, setup) if kind.family != "SublinearCoord" else None
    weights = estimator_weight_vectors(A)

    enum = enumerate_blocks(kind, A, dense, z, w0, weights)
    dy = z.y if w0 is None else z.y - w0.y
    dx = z.x if w0 is None else z.x - w0.x
    want_x = dense.T @ dy
    want_y = -dense @ dx

    for block, want, dim in (("x", want_x, n), ("y", want_y, m)):
        if kind.family == "VrRowCol":
            probs, vecs = enum[block]
            assert probs.sum() == pytest.approx(1.0, abs=1e-12)
            got = probs @ vecs
        else:
            probs, idxs, vals = enum[block]
            assert probs.sum() == pytest.approx(1.0, abs=1e-12)
            got = np.zeros(dim)
            np.add.at(got, idxs, probs * vals)
        assert np.allclose(got, want, atol=1e-9), (block, got, want)


@pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: f"{k.family}-{k.variant}")
def test_second_moment_respects_certified_constant(kind):
    rng = np.random.default_rng(11)
    m, n = 5, 4
    A, dense = random_instance(rng, m, n)
    setup = geo.make_setup(kind.geometry, n, m)
    weights = estimator_weight_vectors(A)
    L = geometry_constant(kind, l_constants(A))
    for trial in range(20):
        z = random_point(rng, setup)
        w0 = random_point(rng, setup) if kind.family != "SublinearCoord" else None
        enum = enumerate_blocks(kind, A, dense, z, w0, weights)
        w = random_point(rng, setup)
        lwx = local_weight(setup.x_domain, w.x)
        lwy = local_weight(setup.y_domain, w.y)
        moment = 0.0
        for block, lw in (("x", lwx), ("y", lwy)):
            if kind.family == "VrRowCol":
                probs, vecs = enum[block]
                moment += float(probs @ ((vecs * vecs) @ lw))
            else:
                probs, idxs, vals = enum[block]
                moment += float(np.sum(probs * lw[idxs] * vals * vals))
        if kind.family == "SublinearCoord":
            bound = L * L
        else:
            bound = L * L * geo.bregman(setup, w0, z)
        assert moment <= bound * (1 + 1e-9), (trial, moment, bound)


@pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: f"{k.family}-{k.variant}")
def test_draws_land_on_enumerated_values(kind):
    """Every sampled estimate must coincide with coord_value at a position
    of positive probability."""
    rng = np.random.default_rng(21)
    m, n = 4, 4
    A, dense = random_instance(rng, m, n, density=0.9)
    setup = geo.make_setup(kind.geometry, n, m)
    weights = estimator_weight_vectors(A)
    z = random_point(rng, setup)
    if kind.family == "SublinearCoord":
        view = DenseView(z.x, z.y, weights=weights)
        draw = lambda: estimate_sublinear(kind, A, view, rng)
        w0 = None
    else:
        w0 = random_point(rng, setup)
        ref = make_reference(A, None, None, w0)
        view = DenseView(z.x, z.y, x0=w0.x, y0=w0.y, weights=weights)
        if kind.family == "VrCoord":
            draw = lambda: estimate_vr(kind, A, ref, view, rng)
        else:
            draw = lambda: estimate_rowcol_vr(kind, A, ref, view, rng)

    for _ in range(200):
        est = draw()
        if kind.family == "VrRowCol":
            # sparse part is multiplier * line; recover the line from its support
            if len(est.x_idx):
                cand = [ii for ii in range(m)
                        if np.array_equal(np.nonzero(dense[ii])[0], est.x_idx)]
                assert any(
                    np.allclose(est.x_val,
                                coord_value(kind, A, "x", ii,
                                            int(np.nonzero(dense[ii])[0][0]),
                                            z, w0, weights)
                                * dense[ii, est.x_idx], rtol=1e-9, atol=1e-12)
                    for ii in cand)
            if len(est.y_idx):
                cand = [jj for jj in range(n)
                        if np.array_equal(np.nonzero(dense[:, jj])[0], est.y_idx)]
                assert any(
                    np.allclose(est.y_val,
                                -coord_value(kind, A, "y",
                                             int(np.nonzero(dense[:, jj])[0][0]),
                                             jj, z, w0, weights)
                                * dense[est.y_idx, jj], rtol=1e-9, atol=1e-12)
                    for jj in cand)
            continue
        if len(est.x_idx):
            j = int(est.x_idx[0])
            vals = [coord_value(kind, A, "x", i, j, z, w0, weights)
                    for i in range(m)
                    if prob_eval(kind, A, "x", i, j, z, w0, weights) > 0]
            assert any(math.isclose(float(est.x_val[0]), v, rel_tol=1e-9)
                       for v in vals), (j, est.x_val, vals)
        if len(est.y_idx):
            i = int(est.y_idx[0])
            vals = [coord_value(kind, A, "y", i, j, z, w0, weights)
                    for j in range(n)
                    if prob_eval(kind, A, "y", i, j, z, w0, weights) > 0]
            assert any(math.isclose(float(est.y_val[0]), v, rel_tol=1e-9)
                       for v in vals), (i, est.y_val, vals)


def test_kind_validation():
    with pytest.raises(ConfigError):
        EstimatorKind("Nope", "L1L1")
    with pytest.raises(ConfigError):
        EstimatorKind("VrCoord", "L3L3")
    with pytest.raises(ConfigError):
        EstimatorKind("VrRowCol", "L2L1v1")
    assert EstimatorKind("VrCoord", "L2L1v3").geometry == "L2L1"


def test_family_mismatch_rejected():
    rng = np.random.default_rng(0)
    A, _ = random_instance(rng, 3, 3)
    view = DenseView(np.full(3, 1 / 3), np.full(3, 1 / 3))
    with pytest.raises(ConfigError):
        estimate_sublinear(EstimatorKind("VrCoord", "L1L1"), A, view, rng)
    with pytest.raises(ConfigError):
        estimate_vr(EstimatorKind("SublinearCoord", "L1L1"), A, None, view, rng)
    with pytest.raises(ConfigError):
        estimate_rowcol_vr(EstimatorKind("VrCoord", "L1L1"), A, None, view, rng)


def test_l_constants_against_dense_formulas():
    rng = np.random.default_rng(2)
    A, dense = random_instance(rng, 6, 5)
    c = l_constants(A)
    r1 = np.abs(dense).sum(axis=1)
    c1 = np.abs(dense).sum(axis=0)
    assert c["L11"] == pytest.approx(max(np.linalg.norm(dense, axis=1).max(),
                                         np.linalg.norm(dense, axis=0).max()))
    assert c["L22"] == pytest.approx(math.sqrt(np.sum(r1 ** 2) + np.sum(c1 ** 2)))
    assert c["L21"]["v1"] == pytest.approx(
        math.sqrt(r1.max() ** 2 + np.sum(dense ** 2)))
    assert c["L21"]["v3"] == pytest.approx(
        math.sqrt(r1.max() ** 2 + r1.max() * c1.max()))
    assert c["Lrc"]["L1L1"] == pytest.approx(np.abs(dense).max())
