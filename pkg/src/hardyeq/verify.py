"""Numerical checks of the equivalence theorems and characterizations.

An equivalence theorem rewrites an inequality with an ``L^p`` right side
into one with a weighted ``L^1`` right side whose best constant is ``C^p``.
:func:`verify_equivalence` estimates both constants and checks that
``C_orig / C_red**theta`` lies in ``[1/K, K]`` with ``theta = 1/p``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import functionals as fn
from .discrete import InequalitySpec, LogGrid, OperatorKind
from .errors import DegenerateInstance, HypothesisViolated, RegimeMismatch
from .solver import BestConstantEstimate, best_constant
from .transforms import make_reduction_pair
from .weights import PiecewisePowerWeight

__all__ = [
    "Theorem",
    "THEOREMS",
    "resolve_theorem",
    "reduce_spec",
    "EquivalenceReport",
    "verify_equivalence",
    "verify_characterization",
    "random_spec",
    "to_original",
    "to_reduced",
]

HARDY_KINDS = ("hardy", "hardy_then_copson", "hardy_then_hardy")
COPSON_KINDS = ("copson", "copson_then_copson", "copson_then_hardy")


@dataclass(frozen=True)
class Theorem:
    """One rewrite rule.

    Attributes
    ----------
    key : str
        Canonical id (``"1.5"``, ``"cor1.3"``, ...).
    side : {"hardy", "copson", None}
        Direction of the primitive; ``None`` for the identity.
    kinds : tuple
        Operator tags the theorem applies to.
    q_inf : bool or None
        ``True`` requires ``q = inf``, ``False`` requires finite ``q``,
        ``None`` allows both.
    multiplier : bool
        Rewrite puts a power of the primitive inside ``T`` instead of
        changing the exponents.
    """

    key: str
    side: Optional[str]
    kinds: tuple
    q_inf: Optional[bool]
    multiplier: bool = False
    title: str = ""


THEOREMS = {
    t.key: t
    for t in (
        Theorem("identity", None, tuple(HARDY_KINDS + COPSON_KINDS), None, title="identity"),
        Theorem("1.5", "hardy", HARDY_KINDS, False, title="hardy-side reduction"),
        Theorem("1.6", "copson", COPSON_KINDS, False, title="copson-side reduction"),
        Theorem("1.7", "hardy", HARDY_KINDS, True, title="hardy-side reduction, sup norm"),
        Theorem("1.8", "copson", COPSON_KINDS, True, title="copson-side reduction, sup norm"),
        Theorem("cor1.3", "hardy", HARDY_KINDS, None, True, title="hardy-side multiplier form"),
        Theorem("cor1.4", "copson", COPSON_KINDS, None, True, title="copson-side multiplier form"),
        Theorem("4.1", "hardy", ("hardy",), False, title="weighted Hardy"),
        Theorem("4.2", "copson", ("copson",), False, title="weighted Copson"),
        Theorem("4.8", "hardy", ("hardy_then_copson",), False, title="iterated hardy-copson"),
        Theorem("4.9", "copson", ("copson_then_copson",), False, title="iterated copson-copson"),
    )
}

_ALIASES = {"cor 1.3": "cor1.3", "c1.3": "cor1.3", "cor 1.4": "cor1.4", "c1.4": "cor1.4",
            "id": "identity"}


def resolve_theorem(theorem_id) -> Theorem:
    key = str(theorem_id).strip().lower()
    key = _ALIASES.get(key, key)
    if key.startswith("thm"):
        key = key[3:].strip()
    if key not in THEOREMS:
        raise KeyError(f"unknown theorem id {theorem_id!r}; known: {sorted(THEOREMS)}")
    return THEOREMS[key]


def to_original(c_red: float, theta: float) -> float:
    """Original constant from the reduced one."""
    return c_red ** theta


def to_reduced(c_orig: float, theta: float) -> float:
    return c_orig ** (1.0 / theta)


def _check(spec: InequalitySpec, th: Theorem):
    if spec.multiplier is not None or spec.inner_power != 1.0:
        raise HypothesisViolated("spec is already a reduced instance")
    if not isinstance(spec.v, PiecewisePowerWeight):
        raise HypothesisViolated("right-hand weight must be piecewise power")
    if spec.kind.tag not in th.kinds:
        raise HypothesisViolated(f"theorem {th.key} does not cover kind {spec.kind.tag}")
    if th.side is None:
        return
    if not (1.0 < spec.p < np.inf):
        raise HypothesisViolated(f"theorem {th.key} needs 1 < p < inf (got p={spec.p})")
    if th.q_inf is True and not np.isinf(spec.q):
        raise HypothesisViolated(f"theorem {th.key} needs q = inf")
    if th.q_inf is False and not (0 < spec.q < np.inf):
        raise HypothesisViolated(f"theorem {th.key} needs 0 < q < inf")
    if spec.kind.iterated and not (0 < spec.kind.r < np.inf):
        raise HypothesisViolated("inner exponent r must lie in (0, inf)")


def reduce_spec(spec: InequalitySpec, theorem_id) -> InequalitySpec:
    """Rewrite ``spec`` into the ``L^1`` form given by ``theorem_id``.

    The reduced spec carries ``meta["theta"] = 1/p``: its best constant is
    the original one raised to the power ``p``.

    Raises
    ------
    HypothesisViolated
        With the failing condition named.
    """
    th = resolve_theorem(theorem_id)
    _check(spec, th)
    if th.side is None:
        return spec
    p = spec.p
    try:
        pair = make_reduction_pair(spec.v, p, th.side)
    except Exception as exc:  # ConditionViolated
        raise HypothesisViolated(str(exc)) from exc
    meta = {"theorem": th.key, "theta": 1.0 / p, "source": spec.label}
    if th.multiplier:
        mult = pair.power(2.0 * (1.0 - 1.0 / p))
        return InequalitySpec(spec.kind, 1.0, spec.q, spec.w, pair.power(-1.0), spec.grid,
                              spec.seed, multiplier=mult, inner_power=1.0 / p,
                              label=f"{spec.label}|{th.key}", meta=meta)
    kind = spec.kind.with_r(spec.kind.r / p) if spec.kind.iterated else spec.kind
    if np.isinf(spec.q):
        q, w = np.inf, spec.w.pow(p)
    else:
        q, w = spec.q / p, spec.w
    return InequalitySpec(kind, 1.0, q, w, pair.power(1.0 - 2.0 * p), spec.grid, spec.seed,
                          label=f"{spec.label}|{th.key}", meta=meta)


@dataclass(frozen=True, eq=False)
class EquivalenceReport:
    """Outcome of one comparison.

    ``ratio = c_orig / c_red**theta``; the verdict is ``1/K <= ratio <= K``
    (or ``1/B <= ratio <= A`` for characterizations).
    """

    theorem: str
    original: InequalitySpec
    estimate: BestConstantEstimate
    reduced: Optional[InequalitySpec]
    reduced_estimate: Optional[BestConstantEstimate]
    theta: float
    c_orig: float
    c_red: float
    ratio: float
    window: tuple
    verdict: bool
    regime: str = ""
    parts: dict = field(default_factory=dict)


DEFAULT_METHODS = ("atom", "power_iteration", "multistart_ascent")


def verify_equivalence(spec: InequalitySpec, theorem_id, K: float = 16.0,
                       methods=DEFAULT_METHODS, restarts: int = 8) -> EquivalenceReport:
    """Estimate both best constants and compare them through ``theta``.

    Raises
    ------
    HypothesisViolated
        From :func:`reduce_spec`.
    DegenerateInstance
        If either constant is below ``1e-12``.
    """
    if not K > 1:
        raise ValueError("window K must exceed 1")
    th = resolve_theorem(theorem_id)
    red = reduce_spec(spec, th.key)
    est = best_constant(spec, methods, restarts=restarts)
    if red is spec:
        est_r, theta = est, 1.0
    else:
        est_r = best_constant(red, methods, restarts=restarts)
        theta = red.meta["theta"]
    c0, c1 = est.value, est_r.value
    if not (c0 > 1e-12 and c1 > 1e-12):
        raise DegenerateInstance(f"best constants {c0:.3g}, {c1:.3g} too small")
    ratio = c0 / to_original(c1, theta)
    ok = bool(1.0 / K <= ratio <= K)
    return EquivalenceReport(th.key, spec, est, red, est_r, theta, c0, c1, ratio,
                             (1.0 / K, K), ok)


def characterization(spec: InequalitySpec, n: Optional[int] = None):
    """Functional value matching ``spec`` and whether it is an exact equality."""
    if spec.multiplier is not None or spec.inner_power != 1.0:
        raise RegimeMismatch("no characterization for reduced instances with a multiplier")
    if np.isinf(spec.q):
        raise RegimeMismatch("no characterization implemented for q = inf")
    tag, p, q = spec.kind.tag, spec.p, spec.q
    n = n or spec.grid.n
    u, v, w = spec.kind.u, spec.v, spec.w
    if p == 1.0:
        if tag == "hardy":
            return fn.bradley_l1_hardy(w, v, q, n=n), q >= 1
        if tag == "copson":
            return fn.bradley_l1_copson(w, v, q, n=n), q >= 1
        if tag == "hardy_then_copson":
            return fn.iterated_hardy_copson_l1(u, v, w, q, spec.kind.r, n=n), False
        if tag == "copson_then_copson":
            return fn.iterated_copson_copson_l1(u, v, w, q, spec.kind.r, n=n), False
    else:
        if tag == "hardy":
            return fn.hardy_constant(w, v, p, q, n=n), False
        if tag == "copson":
            return fn.copson_constant(w, v, p, q, n=n), False
        if tag == "hardy_then_copson":
            return fn.iterated_hardy_copson(u, v, w, p, q, spec.kind.r, n=n), False
        if tag == "copson_then_copson":
            return fn.iterated_copson_copson(u, v, w, p, q, spec.kind.r, n=n), False
    raise RegimeMismatch(f"no characterization covers kind {tag}")


def verify_characterization(spec: InequalitySpec, A: Optional[float] = None,
                            B: Optional[float] = None, methods=DEFAULT_METHODS,
                            restarts: int = 8) -> EquivalenceReport:
    """Compare the solver's lower bound with the characterization functional.

    Passes when ``F / B <= C_est <= A F``.  Defaults: ``A = B = 1.05``
    when the functional is the exact best constant, ``A = B = 8``
    otherwise.
    """
    F, exact = characterization(spec)
    if A is None:
        A = 1.05 if exact else 8.0
    if B is None:
        B = 1.05 if exact else 8.0
    est = best_constant(spec, methods, restarts=restarts)
    ratio = est.value / F.value if F.value > 0 else np.inf
    ok = bool(1.0 / B <= ratio <= A)
    return EquivalenceReport("characterization", spec, est, None, None, 1.0, est.value,
                             F.value, ratio, (1.0 / B, A), ok, F.regime, dict(F.parts))


# ---------------------------------------------------------------------------
# random admissible instances
# ---------------------------------------------------------------------------

def _random_weight(rng, domain, lo, hi, first=None, last=None, max_seg=3):
    """Piecewise power weight with exponents in ``[lo, hi]``.

    ``first``/``last`` optionally constrain the end exponents to an interval.
    The weight is continuous at its breakpoints and its value at ``x = 1``
    (or the nearest domain point) is of order one, which keeps the best
    constants of random instances well away from under- and overflow.
    """
    x0, xn = domain
    m = int(rng.integers(1, max_seg + 1))
    inner = np.sort(np.exp(rng.uniform(np.log(x0) * 0.6, np.log(xn) * 0.6, m - 1)))
    bps = np.concatenate(([x0], inner, [xn]))
    ex = rng.uniform(lo, hi, m)
    if first is not None:
        ex[0] = rng.uniform(*first)
    if last is not None:
        ex[-1] = rng.uniform(*last)
    c = np.ones(m)
    for k in range(1, m):
        c[k] = c[k - 1] * bps[k] ** (ex[k - 1] - ex[k])
    w = PiecewisePowerWeight(tuple(bps), tuple(c), tuple(ex))
    level = np.exp(rng.uniform(-1.0, 1.0)) / float(w(min(max(1.0, x0), xn)))
    return w.scaled(level)


def random_spec(theorem_id, seed: int, grid: LogGrid, kind: Optional[str] = None,
                ) -> InequalitySpec:
    """Seeded random instance satisfying the hypotheses of ``theorem_id``.

    The right-hand weight's end exponent is drawn so that ``v**(1-p')`` is
    integrable at 0 (hardy side) or at infinity (copson side).
    """
    th = resolve_theorem(theorem_id)
    rng = np.random.default_rng(seed)
    dom = grid.domain
    if kind is None:
        kinds = th.kinds if th.side is not None else ("hardy",)
        kind = kinds[int(rng.integers(len(kinds)))]
    p = float(rng.choice([1.5, 2.0, 2.5, 3.0]))
    if th.q_inf is True:
        q = np.inf
    elif th.q_inf is None and rng.random() < 0.25:
        q = np.inf
    else:
        q = float(rng.choice([0.75, 1.0, 1.5, 2.0, 3.0, 4.0]))
    side = th.side or "hardy"
    # v**(1-p') integrable at 0 <=> a0 < p-1 ; at infinity <=> a_last > p-1
    if side == "hardy":
        v = _random_weight(rng, dom, -1.0, 2.0, first=(-1.0, 0.9 * (p - 1.0)))
    else:
        v = _random_weight(rng, dom, 0.0, 3.0, last=(1.1 * (p - 1.0), p + 1.0))
    w = _random_weight(rng, dom, -3.0, 1.0)
    if KIND_ITERATED[kind]:
        r = float(rng.choice([0.75, 1.0, 2.0, 3.0]))
        ok = OperatorKind(kind, r, _random_weight(rng, dom, -3.0, 1.0))
    else:
        ok = OperatorKind(kind)
    return InequalitySpec(ok, p, q, w, v, grid, seed=seed, label=f"{th.key}#{seed}")


KIND_ITERATED = {k: k not in ("hardy", "copson") for k in HARDY_KINDS + COPSON_KINDS}
