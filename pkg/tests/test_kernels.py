import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardyeq import kernels
from hardyeq.discrete import KINDS, InequalitySpec, LogGrid, OperatorKind
from hardyeq.weights import PiecewisePowerWeight

BACKENDS = kernels.available_backends()
DOM = (1e-2, 1e2)


def _spec(tag, q=2.0, r=1.5, p=2.0, n=40, mult=False, s=1.0):
    grid = LogGrid(*DOM, n)
    u = PiecewisePowerWeight((DOM[0], 1.0, DOM[1]), (1.0, 1.0), (0.5, -2.0))
    w = PiecewisePowerWeight.power(-1.5, 1.0, DOM)
    v = PiecewisePowerWeight.power(0.3, 2.0, DOM)
    kind = OperatorKind(tag, r, u) if KINDS[tag][1] else OperatorKind(tag)
    m = (lambda x: 1.0 + np.sqrt(x)) if mult else None
    return InequalitySpec(kind, p, q, w, v, grid, multiplier=m, inner_power=s)


def _args(spec):
    pr = spec.problem
    return pr.args, pr.p, pr.Vm


@pytest.mark.skipif("cython" not in BACKENDS, reason="extension not built")
@pytest.mark.parametrize("tag", sorted(KINDS))
@pytest.mark.parametrize("q", [0.7, 2.0, np.inf])
def test_backends_agree(tag, q):
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    spec = _spec(tag, q=q, mult=True, s=0.5)
    args, p, Vm = _args(spec)
    rng = np.random.default_rng(1)
    h = rng.exponential(size=spec.grid.n)
    np.testing.assert_allclose(cy.primitive(h, args[0], args[1], args[2]),
                               py.primitive(h, args[0], args[1], args[2]), rtol=1e-13)
    np.testing.assert_allclose(cy.apply(h, *args[:-2]), py.apply(h, *args[:-2]), rtol=1e-12)
    assert cy.lhs(h, *args) == pytest.approx(py.lhs(h, *args), rel=1e-12)
    assert cy.ratio(h, *args, p, Vm) == pytest.approx(py.ratio(h, *args, p, Vm), rel=1e-12)
    vc, gc = cy.lhs_grad(h, *args)
    vp, gp = py.lhs_grad(h, *args)
    assert vc == pytest.approx(vp, rel=1e-12)
    np.testing.assert_allclose(gc, gp, rtol=1e-10, atol=1e-14 * np.abs(gp).max())


@pytest.mark.skipif("cython" not in BACKENDS, reason="extension not built")
def test_sweep_agrees():
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    spec = _spec("hardy_then_copson", q=1.5)
    args, p, Vm = _args(spec)
    h0 = np.random.default_rng(2).exponential(size=spec.grid.n)
    h1, h2 = h0.copy(), h0.copy()
    r1 = py.sweep(h1, np.array([1.5, 1.1]), *args, p, Vm)
    r2 = cy.sweep(h2, np.array([1.5, 1.1]), *args, p, Vm)
    assert r1 == pytest.approx(r2, rel=1e-12)
    np.testing.assert_allclose(h1, h2, rtol=1e-12)
    assert r1 >= py.ratio(h0, *args, p, Vm)


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("tag", sorted(KINDS))
@pytest.mark.parametrize("q,r", [(2.0, 1.5), (0.8, 0.6)])
def test_gradient_matches_finite_differences(name, tag, q, r):
    be = BACKENDS[name]
    spec = _spec(tag, q=q, r=r, mult=True, s=0.7)
    args, _, _ = _args(spec)
    rng = np.random.default_rng(3)
    h = rng.uniform(0.5, 2.0, spec.grid.n)
    val, g = be.lhs_grad(h, *args)
    for _ in range(4):
        d = h * rng.normal(size=h.size)
        eps = 1e-6
        fd = (np.log(be.lhs(h + eps * d, *args)) - np.log(be.lhs(h - eps * d, *args))) / (2 * eps)
        assert g @ d == pytest.approx(fd, rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_sup_norm_gradient_hits_argmax(name):
    be = BACKENDS[name]
    spec = _spec("hardy", q=np.inf)
    args, _, _ = _args(spec)
    h = np.ones(spec.grid.n)
    val, g = be.lhs_grad(h, *args)
    assert np.count_nonzero(g) > 0
    j = 5
    hp = h.copy()
    hp[j] *= 1 + 1e-7
    fd = (np.log(be.lhs(hp, *args)) - np.log(val)) / (1e-7 * h[j])
    assert g[j] == pytest.approx(fd, rel=1e-4, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, 10.0), min_size=16, max_size=16),
       st.sampled_from(sorted(KINDS)), st.floats(0.1, 100.0))
def test_ratio_is_scale_invariant(vals, tag, lam):
    h = np.asarray(vals)
    if not h.any():
        return
    spec = _spec(tag, n=16)
    pr = spec.problem
    assert pr.ratio(lam * h) == pytest.approx(pr.ratio(h), rel=1e-10)


def test_backend_selection_reports_name():
    assert kernels.BACKEND in BACKENDS
    assert kernels.backend.NAME == kernels.BACKEND
