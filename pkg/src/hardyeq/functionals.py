"""Characterization functionals for Hardy, Copson and iterated inequalities.

Each functional is evaluated from closed-form weight integrals plus one
outer numeric pass: a supremum over grid and breakpoint candidates with a
local refinement, or a Gauss integral on a breakpoint-aware log mesh.

The ``L^p`` versions (``p > 1``) share an engine with the ``L^1``
versions: with ``V = int v**(1-p')``, every ``L^p`` quantity equals the
``L^1`` quantity for exponents ``(q/p, r/p)`` and factor ``V**(p-1)`` in
place of ``esssup 1/v``, raised to ``1/p``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from ._quad import Mesh
from .errors import ConditionViolated
from .transforms import conjugate

__all__ = [
    "FunctionalValue",
    "bradley_l1_hardy",
    "bradley_l1_copson",
    "hardy_constant",
    "copson_constant",
    "iterated_hardy_copson_l1",
    "iterated_hardy_copson",
    "iterated_copson_copson_l1",
    "iterated_copson_copson",
    "regime_letter",
]

DEFAULT_N = 512
_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FunctionalValue:
    """Value of a characterization functional.

    Attributes
    ----------
    value : float
        Sum of ``parts`` (or the single part).
    regime : str
        Label of the exponent case used, e.g. ``"hardy_copson(b)"``.
    parts : dict
        Named sub-values before summation.
    finite : bool
    """

    value: float
    regime: str
    parts: dict = field(default_factory=dict)
    finite: bool = True

    @classmethod
    def of(cls, regime, parts):
        val = float(sum(parts.values()))
        return cls(val, regime, {k: float(v) for k, v in parts.items()}, bool(np.isfinite(val)))

    def root(self, p: float) -> "FunctionalValue":
        """Every part raised to ``1/p``, then summed."""
        return FunctionalValue.of(self.regime, {k: v ** (1.0 / p) for k, v in self.parts.items()})

    def relabel(self, regime, names=None) -> "FunctionalValue":
        parts = self.parts if names is None else {names.get(k, k): v for k, v in self.parts.items()}
        return FunctionalValue.of(regime, parts)


def regime_letter(q_ge: bool, r_ge: bool) -> str:
    """Case letter from ``Q >= 1`` and ``R >= 1``."""
    return {(True, True): "a", (False, True): "b", (True, False): "c", (False, False): "d"}[
        (q_ge, r_ge)]


def _qprime(q):
    return q / (1.0 - q)


class _Ctx:
    """Shared mesh, sup candidates and helpers for one evaluation."""

    def __init__(self, weights, n):
        doms = [w.domain for w in weights]
        x0, xn = doms[0]
        for d in doms[1:]:
            if not (np.isclose(d[0], x0, rtol=1e-12) and np.isclose(d[1], xn, rtol=1e-12)):
                raise ValueError("weights must share a domain")
        brk = np.unique(np.concatenate([np.asarray(w.interior_breakpoints(), float)
                                        for w in weights] + [np.empty(0)]))
        self.x0, self.xn, self.breaks = x0, xn, brk
        self.mesh = Mesh(x0, xn, max(n // 2, 16), brk)
        self.X = self.mesh.nodes
        self.Wt = self.mesh.wt.ravel()
        cand = np.concatenate((np.geomspace(x0, xn, n), brk, brk * (1.0 - 1e-12)))
        self.cand = np.unique(np.clip(cand, x0, xn))

    def integral(self, vals):
        with np.errstate(all="ignore"):
            return float(np.sum(np.where(self.Wt > 0, vals * self.Wt, 0.0)))

    def _refine(self, f, pts, i):
        lo = pts[max(i - 1, 0)]
        hi = pts[min(i + 1, pts.size - 1)]
        if hi <= lo:
            return pts[i], -np.inf
        res = minimize_scalar(lambda s: -float(f(np.array([np.exp(s)]))[0]),
                              bounds=(np.log(lo), np.log(hi)), method="bounded",
                              options={"xatol": 1e-10})
        return float(np.exp(res.x)), -float(res.fun)

    def sup(self, f):
        """``sup f`` over the domain with a Brent step around the best candidate."""
        pts = self.cand
        with np.errstate(all="ignore"):
            vals = np.nan_to_num(f(pts), nan=-np.inf)
        i = int(np.argmax(vals))
        best = vals[i]
        if np.isfinite(best):
            _, ref = self._refine(f, pts, i)
            if np.isfinite(ref) and ref > best:
                best = ref
        return float(best)

    def suffix_sup(self, f, xq):
        """``sup_{t >= x} f(t)`` for each ``x`` in ``xq``."""
        pts = np.unique(np.concatenate((self.cand, self.X)))
        with np.errstate(all="ignore"):
            vals = np.nan_to_num(f(pts), nan=-np.inf)
        inner = np.flatnonzero((vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:])) + 1
        if inner.size:
            top = inner[np.argsort(vals[inner])[-32:]]
            extra = [self._refine(f, pts, i) for i in top]
            ex = np.array([e for e in extra if np.isfinite(e[1])]).reshape(-1, 2)
            if ex.size:
                order = np.argsort(np.concatenate((pts, ex[:, 0])), kind="stable")
                pts = np.concatenate((pts, ex[:, 0]))[order]
                vals = np.concatenate((vals, ex[:, 1]))[order]
        suf = np.maximum.accumulate(vals[::-1])[::-1]
        k = np.searchsorted(pts, xq, side="left")
        tail = np.where(k < pts.size, suf[np.clip(k, 0, pts.size - 1)], -np.inf)
        with np.errstate(all="ignore"):
            own = np.nan_to_num(f(xq), nan=-np.inf)
        return np.maximum(tail, own)

    def sup_above_2d(self, f2, tq, iters=40):
        """``sup_{x >= t} f2(x, t)`` for each ``t`` in ``tq``.

        Grid maximum per row, then a vectorised golden-section search in
        ``log x`` on the bracket around each row's best candidate.
        """
        P = self.cand
        out = np.empty(tq.size)
        with np.errstate(all="ignore"):
            for lo in range(0, tq.size, 512):
                t = tq[lo:lo + 512]
                v = np.where(P[None, :] >= t[:, None], f2(P[None, :], t[:, None]), -np.inf)
                v = np.nan_to_num(v, nan=-np.inf)
                own = np.nan_to_num(f2(t, t), nan=-np.inf)
                k = np.argmax(v, axis=1)
                best = np.maximum(v[np.arange(t.size), k], own)
                a = np.log(np.maximum(P[np.maximum(k - 1, 0)], t))
                b = np.log(P[np.minimum(k + 1, P.size - 1)])
                b = np.maximum(a, b)

                def g(s):
                    return np.nan_to_num(f2(np.exp(s), t), nan=-np.inf)

                c = b - _INVPHI * (b - a)
                d = a + _INVPHI * (b - a)
                fc, fd = g(c), g(d)
                for _ in range(iters):
                    left = fc >= fd
                    a, b = np.where(left, a, c), np.where(left, d, b)
                    c, d = (np.where(left, b - _INVPHI * (b - a), d),
                            np.where(left, c, a + _INVPHI * (b - a)))
                    fnew = g(np.where(left, c, d))
                    fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
                out[lo:lo + 512] = np.maximum(best, np.maximum(fc, fd))
        return out

def _check_q(q, name="q"):
    if not (0 < q < np.inf):
        raise ValueError(f"{name} must lie in (0, inf)")


# ---------------------------------------------------------------------------
# single-level (Bradley-type) engine
# ---------------------------------------------------------------------------

def _bradley(direction, w, Q, lam, ctx):
    """Hardy (``direction='hardy'``) or Copson ``L^1`` functional with factor ``lam``."""
    tailw = w.upper if direction == "hardy" else w.lower
    if Q >= 1:
        return "sup", {"A": ctx.sup(lambda x: tailw(x) ** (1.0 / Q) * lam(x))}
    qp = _qprime(Q)
    X = ctx.X
    val = ctx.integral(tailw(X) ** qp * w(X) * lam(X) ** qp) ** (1.0 / qp)
    return "integral", {"B": val}


def _l1_lam(v, direction):
    return v.inv_sup_below if direction == "hardy" else v.inv_sup_above


def bradley_l1_hardy(w, v, q, n=DEFAULT_N) -> FunctionalValue:
    """Functional for ``||int_0^x h||_{q,w} <= C ||h||_{1,v}``.

    For ``q >= 1`` this is the exact best constant
    ``sup_x (int_x w)**(1/q) esssup_{(0,x]} 1/v``; for ``q < 1`` the
    integral form with ``q' = q/(1-q)``.
    """
    _check_q(q)
    ctx = _Ctx([w, v], n)
    case, parts = _bradley("hardy", w, q, _l1_lam(v, "hardy"), ctx)
    return FunctionalValue.of(f"bradley_hardy({'i' if q >= 1 else 'ii'})", parts)


def bradley_l1_copson(w, v, q, n=DEFAULT_N) -> FunctionalValue:
    """Mirror of :func:`bradley_l1_hardy` for ``int_x^inf h``."""
    _check_q(q)
    ctx = _Ctx([w, v], n)
    case, parts = _bradley("copson", w, q, _l1_lam(v, "copson"), ctx)
    return FunctionalValue.of(f"bradley_copson({'i' if q >= 1 else 'ii'})", parts)


def _lp_lam(v, p, direction):
    base = v.pow(1.0 - conjugate(p))
    if direction == "hardy":
        if base.diverges_at_zero:
            raise ConditionViolated("v^(1-p') is not integrable at 0")
        cum = base.lower
    else:
        if base.diverges_at_infinity:
            raise ConditionViolated("v^(1-p') is not integrable at infinity")
        cum = base.upper
    return lambda x: cum(x) ** (p - 1.0)


def _check_p(p):
    if not (1.0 < p < np.inf):
        raise ValueError("p must lie in (1, inf)")


def hardy_constant(w, v, p, q, n=DEFAULT_N) -> FunctionalValue:
    """Muckenhoupt-type functional of the ``L^p -> L^q_w`` Hardy operator.

    ``p <= q``: ``sup_x (int_x w)**(1/q) (int_0^x v**(1-p'))**(1/p')``.
    ``q < p``: the integral condition with exponent ``(p-q)/(pq)``.
    """
    _check_p(p)
    _check_q(q)
    ctx = _Ctx([w, v], n)
    case, parts = _bradley("hardy", w, q / p, _lp_lam(v, p, "hardy"), ctx)
    return FunctionalValue.of(f"hardy({'a' if p <= q else 'b'})", parts).root(p)


def copson_constant(w, v, p, q, n=DEFAULT_N) -> FunctionalValue:
    """Mirror of :func:`hardy_constant` for the Copson operator."""
    _check_p(p)
    _check_q(q)
    ctx = _Ctx([w, v], n)
    case, parts = _bradley("copson", w, q / p, _lp_lam(v, p, "copson"), ctx)
    return FunctionalValue.of(f"copson({'a' if p <= q else 'b'})", parts).root(p)


# ---------------------------------------------------------------------------
# iterated engines; u is the inner weight, w the outer one
# ---------------------------------------------------------------------------

def _iter_hardy_copson(u, w, Q, R, lam, ctx):
    Us, W = u.upper, w.lower
    X = ctx.X
    mesh = ctx.mesh
    letter = regime_letter(Q >= 1, R >= 1)
    parts = {}

    def tail_uw(x):
        return mesh.tail(lambda t: Us(t) ** (Q / R) * w(t), x)

    if letter in ("a", "c"):
        parts["F2"] = ctx.sup(lambda x: tail_uw(x) ** (1.0 / Q) * lam(x))
    if letter == "a":
        parts["F1"] = ctx.sup(lambda x: W(x) ** (1.0 / Q) * Us(x) ** (1.0 / R) * lam(x))
    if letter in ("b", "d"):
        qp = _qprime(Q)
        vals = tail_uw(X) ** qp * Us(X) ** (Q / R) * lam(X) ** qp * w(X)
        parts["F4"] = ctx.integral(vals) ** (1.0 / qp)
    if letter == "b":
        qp = _qprime(Q)
        S = ctx.suffix_sup(lambda t: Us(t) ** (1.0 / R) * lam(t), X)
        parts["F3"] = ctx.integral(S ** qp * W(X) ** qp * w(X)) ** (1.0 / qp)
    if letter in ("c", "d"):
        rp = _qprime(R)

        def inner_tail(t):
            return mesh.tail(lambda x: Us(x) ** rp * u(x) * lam(x) ** rp, t)

        if letter == "c":
            parts["F5"] = ctx.sup(lambda t: W(t) ** (1.0 / Q) * inner_tail(t) ** (1.0 / rp))
        else:
            qp = _qprime(Q)
            vals = W(X) ** qp * w(X) * inner_tail(X) ** (qp / rp)
            parts["F6"] = ctx.integral(vals) ** (1.0 / qp)
    order = {"a": ("F1", "F2"), "b": ("F3", "F4"), "c": ("F2", "F5"), "d": ("F4", "F6")}[letter]
    return letter, {k: parts[k] for k in order}


def _iter_copson_copson(u, w, Q, R, lam, ctx):
    U, W = u.lower, w.lower
    X = ctx.X
    mesh = ctx.mesh
    letter = regime_letter(Q >= 1, R >= 1)
    parts = {}

    def head_I(t):
        # int_{x0}^t w(s) (int_s^t u)**(Q/R) ds
        return mesh.head_param(lambda s, tt: w(s) * np.maximum(U(tt) - U(s), 0.0) ** (Q / R), t)

    if letter in ("a", "c"):
        parts["E1"] = ctx.sup(lambda t: head_I(t) ** (1.0 / Q) * lam(t))
    if letter in ("b", "d"):
        qp = _qprime(Q)
        M3 = ctx.sup_above_2d(
            lambda x, t: np.maximum(U(x) - U(t), 0.0) ** (Q / R) * lam(x) ** qp, X)
        parts["E3"] = ctx.integral(head_I(X) ** qp * w(X) * M3) ** (1.0 / qp)
    if letter == "b":
        qp = _qprime(Q)
        M2 = ctx.sup_above_2d(
            lambda x, t: np.maximum(U(x) - U(t), 0.0) ** (qp / R) * lam(x) ** qp, X)
        parts["E2"] = ctx.integral(W(X) ** qp * w(X) * M2) ** (1.0 / qp)
    if letter in ("c", "d"):
        rp = _qprime(R)

        def inner_tail(t):
            return mesh.tail_param(
                lambda x, tt: np.maximum(U(x) - U(tt), 0.0) ** rp * u(x) * lam(x) ** rp, t)

        if letter == "c":
            parts["E4"] = ctx.sup(lambda t: W(t) ** (1.0 / Q) * inner_tail(t) ** (1.0 / rp))
        else:
            qp = _qprime(Q)
            vals = W(X) ** qp * w(X) * inner_tail(X) ** (qp / rp)
            parts["E5"] = ctx.integral(vals) ** (1.0 / qp)
    order = {"a": ("E1",), "b": ("E2", "E3"), "c": ("E1", "E4"), "d": ("E3", "E5")}[letter]
    return letter, {k: parts[k] for k in order}


def _sup1(parts):
    return {k + "^1": v for k, v in parts.items()}


def iterated_hardy_copson_l1(u, v, w, q, r, n=DEFAULT_N) -> FunctionalValue:
    """Functional for ``||(int_x^inf (int_0^t h)**r u dt)**(1/r)||_{q,w} <= C ||h||_{1,v}``.

    Parts are ``F1^1 .. F6^1``; the case is chosen by ``q >= 1`` and ``r >= 1``.
    """
    _check_q(q)
    _check_q(r, "r")
    ctx = _Ctx([u, v, w], n)
    letter, parts = _iter_hardy_copson(u, w, q, r, _l1_lam(v, "hardy"), ctx)
    return FunctionalValue.of(f"hardy_copson_l1({letter})", _sup1(parts))


def iterated_hardy_copson(u, v, w, p, q, r, n=DEFAULT_N) -> FunctionalValue:
    """``L^p`` version of :func:`iterated_hardy_copson_l1` (parts ``F1 .. F6``)."""
    _check_p(p)
    _check_q(q)
    _check_q(r, "r")
    ctx = _Ctx([u, v, w], n)
    letter, parts = _iter_hardy_copson(u, w, q / p, r / p, _lp_lam(v, p, "hardy"), ctx)
    return FunctionalValue.of(f"hardy_copson({letter})", parts).root(p)


def iterated_copson_copson_l1(u, v, w, q, r, n=DEFAULT_N) -> FunctionalValue:
    """Functional for ``||(int_x^inf (int_t^inf h)**r u dt)**(1/r)||_{q,w} <= C ||h||_{1,v}``.

    Parts are ``E1^1 .. E5^1``.
    """
    _check_q(q)
    _check_q(r, "r")
    ctx = _Ctx([u, v, w], n)
    letter, parts = _iter_copson_copson(u, w, q, r, _l1_lam(v, "copson"), ctx)
    return FunctionalValue.of(f"copson_copson_l1({letter})", _sup1(parts))


def iterated_copson_copson(u, v, w, p, q, r, n=DEFAULT_N) -> FunctionalValue:
    """``L^p`` version of :func:`iterated_copson_copson_l1` (parts ``E1 .. E5``)."""
    _check_p(p)
    _check_q(q)
    _check_q(r, "r")
    ctx = _Ctx([u, v, w], n)
    letter, parts = _iter_copson_copson(u, w, q / p, r / p, _lp_lam(v, p, "copson"), ctx)
    return FunctionalValue.of(f"copson_copson({letter})", parts).root(p)
