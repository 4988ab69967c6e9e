import math

import numpy as np
import pytest

from hardyeq.discrete import GridFunction, InequalitySpec, LogGrid, OperatorKind
from hardyeq.errors import BudgetExceeded, NotApplicable
from hardyeq.functionals import (
    bradley_l1_copson,
    bradley_l1_hardy,
    hardy_constant,
    iterated_copson_copson,
)
from hardyeq.solver import (
    METHODS,
    atom_search,
    best_constant,
    k_atom_search,
    multistart_ascent,
    power_iteration,
)
from hardyeq.weights import PiecewisePowerWeight as P

WIDE = (1e-4, 1e4)
DOM = (1e-3, 1e3)

# Frozen from n = 4096 runs (see the regression tests below).
PIN_CLASSICAL = 1.9110721504590544
PIN_Q_BELOW_P = 1.0790784690039876


def _spec(tag, p, q, w, v, n=256, dom=DOM, **kw):
    return InequalitySpec(OperatorKind(tag), p, q, w, v, LogGrid(*dom, n), **kw)


def _classical(n=1024):
    return _spec("hardy", 2.0, 2.0, P.power(-2.0, 1.0, WIDE), P.power(0.0, 1.0, WIDE), n, WIDE)


def _mirror(n=1024):
    return _spec("copson", 2.0, 2.0, P.power(0.0, 1.0, WIDE), P.power(2.0, 1.0, WIDE), n, WIDE)


def _step_w(dom):
    return P((dom[0], 1.0, dom[1]), (1.0, 1.0), (0.0, -3.0))


def _seven_twelfths(n=256, dom=DOM):
    return _spec("hardy", 2.0, 1.0, _step_w(dom), P.power(0.0, 1.0, dom), n, dom)


def _cc(n=256):
    kind = OperatorKind("copson_then_copson", 2.0, P.power(-1.0, 1.0, DOM))
    return InequalitySpec(kind, 2.0, 2.0, P.power(-1.0, 1.0, DOM), P.power(2.0, 1.0, DOM),
                          LogGrid(*DOM, n))


# -- estimate invariants -------------------------------------------------------

@pytest.mark.parametrize("method", ["atom", "k_atom", "power_iteration", "multistart_ascent"])
def test_value_is_ratio_of_witness(method):
    sp = _spec("hardy", 2.0, 3.0, P.power(-2.5, 1.0, DOM), P.power(0.3, 1.0, DOM), 128)
    fn = {"atom": atom_search, "k_atom": k_atom_search, "power_iteration": power_iteration,
          "multistart_ascent": lambda s: multistart_ascent(s, restarts=8)}[method]
    est = fn(sp)
    assert est.method == method
    assert est.value == pytest.approx(sp.ratio_of(est.witness), rel=1e-10)
    assert est.value >= atom_search(sp).value * (1 - 1e-12)
    assert est.witness.values.max() == 1.0 and est.support().size >= 1


# -- atoms -----------------------------------------------------------------------

def test_atom_unit_weights_l1():
    one = P.power(0.0, 1.0, DOM)
    est = atom_search(_spec("hardy", 1.0, 1.0, one, one, 512))
    assert est.value == pytest.approx(DOM[1] - DOM[0], rel=1e-3)
    assert est.details["cell"] == 0


def test_atom_scale_invariant():
    sp = _seven_twelfths()
    est = atom_search(sp)
    for c in (1e-5, 3.0, 1e7):
        h = GridFunction(sp.grid, c * est.witness.values)
        assert sp.ratio_of(h) == pytest.approx(est.value, rel=1e-12)


def test_k_atom_with_one_atom_is_atom_search():
    sp = _seven_twelfths()
    a, k = atom_search(sp), k_atom_search(sp, k=1)
    assert k.value == a.value
    np.testing.assert_array_equal(k.witness.values, a.witness.values)


@pytest.mark.xfail(strict=True, reason="three or fewer atoms cannot reach a spread optimiser "
                   "when q < p; observed k_atom / F ~ 0.33")
def test_k_atom_within_band_of_functional_q_below_p():
    dom = (1e-4, 1e4)
    sp = _seven_twelfths(dom=dom)
    F = hardy_constant(sp.w, sp.v, 2.0, 1.0).value
    est = k_atom_search(sp, k=2)
    assert F <= est.value <= 4 * F


def test_best_constant_within_band_of_functional_q_below_p():
    dom = (1e-4, 1e4)
    sp = _seven_twelfths(dom=dom)
    F = hardy_constant(sp.w, sp.v, 2.0, 1.0).value
    assert F <= best_constant(sp).value <= 4 * F


def test_more_atoms_never_decrease():
    sp = _seven_twelfths(n=128)
    v1 = k_atom_search(sp, k=1, subgrid_size=12).value
    v2 = k_atom_search(sp, k=2, subgrid_size=12).value
    v3 = k_atom_search(sp, k=3, subgrid_size=12).value
    assert v1 <= v2 <= v3


def test_k_atom_budget():
    with pytest.raises(BudgetExceeded):
        k_atom_search(_seven_twelfths(), k=3, subgrid_size=24)
    with pytest.raises(BudgetExceeded):
        k_atom_search(_seven_twelfths(), k=2, budget=500)


def test_q_equals_one_matches_closed_form():
    # For q = 1 and v = 1 the sharp constant is (int W_*(t)**2 dt)**(1/2),
    # W_*(t) = int_t^xn w; the discrete optimum sits just below it.
    sp = _seven_twelfths(n=512)
    t = np.geomspace(*DOM, 400_001)
    Ws = sp.w.upper(t)
    exact = math.sqrt(np.sum(np.diff(t) * (Ws[1:] ** 2 + Ws[:-1] ** 2) / 2))
    got = best_constant(sp).value
    assert exact * 0.995 <= got <= exact * (1 + 1e-6)


# -- power iteration ------------------------------------------------------------------

@pytest.mark.xfail(strict=True, reason="the truncated problem's optimum is ~1.911 on "
                   "(1e-4, 1e4), 4.4% below 2")
def test_power_iteration_classical_constant_two_percent():
    assert power_iteration(_classical()).value == pytest.approx(2.0, rel=0.02)


def test_power_iteration_classical_constant_approaches_two():
    vals = [power_iteration(_spec("hardy", 2.0, 2.0, P.power(-2.0, 1.0, d),
                                  P.power(0.0, 1.0, d), 1024, d)).value
            for d in ((1e-4, 1e4), (1e-12, 1e12), (1e-40, 1e40))]
    assert vals[0] < vals[1] < vals[2] < 2.0
    assert vals[2] == pytest.approx(2.0, rel=0.02)


def test_copson_mirror_matches():
    h, c = power_iteration(_classical()), power_iteration(_mirror())
    assert c.value == pytest.approx(h.value, rel=0.01)


def test_power_iteration_trace_non_decreasing():
    est = power_iteration(_classical())
    tr = np.asarray(est.details["trace"])
    assert est.converged
    assert np.all(np.diff(tr) >= -1e-10 * tr[:-1])
    assert est.value == pytest.approx(tr.max(), rel=1e-12)


@pytest.mark.parametrize("p,q", [(1.0, 2.0), (2.0, 1.5), (3.0, 1.0)])
def test_power_iteration_not_applicable(p, q):
    sp = _spec("hardy", p, q, P.power(-2.0, 1.0, DOM), P.power(0.0, 1.0, DOM), 64)
    with pytest.raises(NotApplicable):
        power_iteration(sp)


# -- multistart ascent ------------------------------------------------------------------

def test_ascent_beats_atoms_and_is_deterministic():
    sp = _seven_twelfths(n=128)
    a = multistart_ascent(sp, restarts=8, seed=3)
    b = multistart_ascent(sp, restarts=8, seed=3)
    assert a.value >= atom_search(sp).value
    assert a.value == b.value
    np.testing.assert_array_equal(a.witness.values, b.witness.values)


def test_ascent_copson_copson_within_band():
    sp = _cc()
    F = iterated_copson_copson(sp.u, sp.v, sp.w, 2.0, 2.0, 2.0).value
    assert F <= multistart_ascent(sp).value <= 8 * F


# -- dispatcher -----------------------------------------------------------------------------

def test_dispatcher_is_transparent():
    sp = _seven_twelfths(n=128)
    best = best_constant(sp, methods=METHODS, restarts=8)
    direct = {"atom": atom_search(sp).value, "k_atom": k_atom_search(sp).value,
              "multistart_ascent": multistart_ascent(sp, restarts=8).value}
    assert best.details["all"] == direct
    assert best.value == max(direct.values())
    pi = best_constant(_classical(), methods=("power_iteration",))
    assert pi.value == power_iteration(_classical()).value
    assert set(pi.details["all"]) == {"atom", "power_iteration"}
    with pytest.raises(ValueError):
        best_constant(sp, methods=("simplex",))


def test_dispatcher_skips_inapplicable_power_iteration():
    sp = _seven_twelfths(n=64)
    assert "power_iteration" not in best_constant(sp, restarts=4).details["all"]


def test_regression_pin_classical():
    est = best_constant(_classical(), methods=("power_iteration",))
    assert est.value == pytest.approx(PIN_CLASSICAL, rel=1e-4)


def test_regression_pin_q_below_p():
    est = best_constant(_seven_twelfths(n=1024))
    assert est.value == pytest.approx(PIN_Q_BELOW_P, rel=1e-4)


# -- lower-bound semantics against Bradley ----------------------------------------------------

BRADLEY = [
    ("hardy", _step_w(DOM), P.power(0.0, 1.0, DOM), 2.0),
    ("hardy", P.power(-2.0, 1.0, DOM), P((DOM[0], 1.0, DOM[1]), (1.0, 1.0), (0.5, -0.5)), 1.0),
    ("copson", P.power(0.0, 1.0, DOM), P.power(2.0, 1.0, DOM), 1.5),
    ("copson", P((DOM[0], 1.0, DOM[1]), (1.0, 1.0), (1.0, -2.0)), P.power(-1.0, 1.0, DOM), 3.0),
]


@pytest.mark.parametrize("tag,w,v,q", BRADLEY)
def test_methods_never_exceed_bradley(tag, w, v, q):
    sp = _spec(tag, 1.0, q, w, v, 512)
    exact = (bradley_l1_hardy if tag == "hardy" else bradley_l1_copson)(w, v, q).value
    est = best_constant(sp, methods=METHODS)
    for val in est.details["all"].values():
        assert val <= exact * (1 + 1e-6)
    assert est.value >= 0.98 * exact


@pytest.mark.parametrize("lam", [1e-3, 7.3, 1e5])
@pytest.mark.parametrize("p", [1.0, 2.0])
def test_scaling_in_v(lam, p):
    w = P.power(-2.5, 1.0, DOM)
    v = P((DOM[0], 1.0, DOM[1]), (1.0, 1.0), (0.3, -0.4))
    a = best_constant(_spec("hardy", p, 2.5, w, v, 128), restarts=8).value
    b = best_constant(_spec("hardy", p, 2.5, w, v.scaled(lam), 128), restarts=8).value
    assert b == pytest.approx(a * lam ** (-1.0 / p), rel=1e-8)
