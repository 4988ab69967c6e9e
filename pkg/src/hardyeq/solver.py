"""Lower-bound estimators for the best constant of a discretised inequality.

Every method returns a witness ``h`` together with its ratio, so each
value is a certified lower bound on the discrete optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional

import numpy as np

from .discrete import GridFunction, InequalitySpec
from .errors import BudgetExceeded, NotApplicable

__all__ = [
    "BestConstantEstimate",
    "atom_search",
    "k_atom_search",
    "power_iteration",
    "multistart_ascent",
    "best_constant",
    "METHODS",
]

METHODS = ("atom", "k_atom", "power_iteration", "multistart_ascent")
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class BestConstantEstimate:
    """Best ratio found and the grid function attaining it."""

    value: float
    witness: GridFunction
    method: str
    iterations: int = 0
    converged: bool = True
    details: dict = field(default_factory=dict)

    def support(self, rel: float = 1e-6):
        """Cells carrying at least ``rel`` of the largest height."""
        h = self.witness.values
        return np.flatnonzero(h >= rel * h.max()) if h.max() > 0 else np.empty(0, int)


def _estimate(spec, h, method, iterations=0, converged=True, **details):
    h = np.where(spec.problem.active, np.asarray(h, float), 0.0)
    h = h / h.max()
    val = spec.problem.ratio(h)
    return BestConstantEstimate(val, GridFunction(spec.grid, h), method, int(iterations),
                                bool(converged), details)


def atom_search(spec: InequalitySpec) -> BestConstantEstimate:
    """Best single-cell indicator (height 1)."""
    pr = spec.problem
    vals = pr.atom_ratios()
    j = int(np.argmax(vals))
    h = np.zeros(pr.n)
    h[j] = 1.0
    return _estimate(spec, h, "atom", iterations=int(pr.active.sum()), cell=j)


def _golden(f, a, b, iters):
    """Maximise ``f`` on ``[a, b]``; returns ``(t, f(t), evaluations)``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc, iters + 2) if fc >= fd else (d, fd, iters + 2)


def k_atom_search(spec: InequalitySpec, k: int = 2, subgrid_size: int = 24,
                  budget: int = 100_000, iters: int = 25,
                  span: float = 12.0) -> BestConstantEstimate:
    """Exhaustive search over supports of at most ``k`` cells of a coarse subgrid.

    Single atoms range over the full grid.  For each support the relative
    heights (in log scale, normalised by the cell masses of ``v``) are
    tuned one coordinate at a time by golden-section search on
    ``[-span, span]``.

    Raises
    ------
    BudgetExceeded
        If the number of ratio evaluations would exceed ``budget``.
    """
    if not 1 <= k <= 3:
        raise ValueError("k must be 1, 2 or 3")
    if not 2 <= subgrid_size <= 24:
        raise ValueError("subgrid_size must lie in [2, 24]")
    pr = spec.problem
    best = atom_search(spec)
    act = np.flatnonzero(pr.active)
    sub = np.unique(act[np.round(np.linspace(0, act.size - 1, min(subgrid_size, act.size))).astype(int)])
    per = iters + 2
    need = sum(math.comb(sub.size, m) * (m - 1) * per for m in range(2, k + 1))
    if need + act.size > budget:
        raise BudgetExceeded(f"k={k} on {sub.size} cells needs {need} evaluations (budget {budget})")
    scale = pr.Vm ** (-1.0 / pr.p)
    h = np.zeros(pr.n)
    bval, bh = best.value, best.witness.values.copy()
    evals = act.size
    for m in range(2, k + 1):
        for supp in combinations(sub, m):
            idx = np.array(supp)
            logc = np.zeros(m)

            def f(t, i):
                logc[i] = t
                h[idx] = scale[idx] * np.exp(logc)
                return pr.ratio(h)

            for i in range(1, m):
                t, val, ne = _golden(lambda t: f(t, i), -span, span, iters)
                logc[i] = t
                evals += ne
            h[idx] = scale[idx] * np.exp(logc)
            val = pr.ratio(h)
            if val > bval:
                bval, bh = val, h.copy()
            h[idx] = 0.0
            if evals > budget:
                raise BudgetExceeded(f"used {evals} evaluations (budget {budget})")
    return _estimate(spec, bh, "k_atom", iterations=evals, k=k, subgrid=int(sub.size))


def power_iteration(spec: InequalitySpec, max_iter: int = 500, tol: float = 1e-8,
                    h0: Optional[np.ndarray] = None) -> BestConstantEstimate:
    """Nonlinear power method for ``1 < p <= q < inf``.

    Each step sets ``h_j`` proportional to ``(dLHS/dh_j / vmass_j)**(1/(p-1))``
    and keeps the best ratio seen; ``details["trace"]`` holds the ratio
    after every step.

    Raises
    ------
    NotApplicable
        Outside ``1 < p <= q < inf``.
    """
    p, q = spec.p, spec.q
    if not (1.0 < p <= q < np.inf):
        raise NotApplicable("power iteration needs 1 < p <= q < inf")
    pr = spec.problem
    act = pr.active
    h = np.where(act, 1.0, 0.0) if h0 is None else np.where(act, np.asarray(h0, float), 0.0)
    best, bh = pr.ratio(h), h.copy()
    prev = best
    trace = [best]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        _, g = pr.lhs_grad(h)
        g = np.where(act, np.maximum(g, 0.0), 0.0)
        if not np.any(g > 0):
            break
        hn = np.zeros_like(h)
        hn[act] = (g[act] / pr.Vm[act]) ** (1.0 / (p - 1.0))
        hn /= hn.max()
        h = hn
        val = pr.ratio(h)
        trace.append(val)
        if val > best:
            best, bh = val, h.copy()
        if abs(val - prev) <= tol * max(abs(prev), 1e-300):
            converged = True
            break
        prev = val
    return _estimate(spec, bh, "power_iteration", iterations=it, converged=converged,
                     trace=trace)


def _ascend(pr, h, max_steps=400, tol=1e-11):
    """Log-space gradient ascent with step control; returns ``(h, ratio, steps)``."""
    act = pr.active
    p, s = pr.p, pr.s
    h = np.where(act, h, 0.0)
    cur = pr.ratio(h)
    eta = 0.5
    steps = 0
    stall = 0
    while steps < max_steps and eta > 1e-10:
        steps += 1
        lhs, gl = pr.lhs_grad(h)
        if lhs <= 0:
            break
        hp = np.zeros_like(h)
        hp[act] = h[act] ** p * pr.Vm[act]
        grad = h * gl / s - hp / hp.sum()
        grad[~act] = 0.0
        gmax = np.max(np.abs(grad))
        if gmax == 0:
            break
        while eta > 1e-10:
            trial = h * np.exp(np.clip(eta * grad / gmax, -30, 30))
            trial /= trial.max()
            val = pr.ratio(trial)
            if val > cur:
                gain = (val - cur) / cur
                h, cur = trial, val
                eta *= 1.5
                stall = stall + 1 if gain < tol else 0
                break
            eta *= 0.5
        if stall >= 5:
            break
    return h, cur, steps


def multistart_ascent(spec: InequalitySpec, restarts: int = 32, seed: Optional[int] = None,
                      extra_starts: Iterable = (), max_steps: int = 400,
                      polish: bool = True) -> BestConstantEstimate:
    """Multiplicative ascent of the ratio from seeded random and atom starts.

    Starts: the best single atoms, ``extra_starts``, and random log-uniform
    profiles (dense and sparse) drawn from ``default_rng(seed)``.  Each run
    takes log-space gradient steps accepted only when the ratio increases;
    the best run then gets multiplicative coordinate sweeps.
    """
    pr = spec.problem
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    act = np.flatnonzero(pr.active)
    n = pr.n
    scale = np.where(pr.active, pr.Vm, 1.0) ** (-1.0 / pr.p)
    atoms = pr.atom_ratios()
    starts = []
    for j in np.argsort(-atoms, kind="stable")[: max(2, restarts // 8)]:
        h = np.full(n, 1e-6) * scale
        h[j] = scale[j]
        starts.append(h)
    extra = [np.asarray(h, float) for h in extra_starts]
    for h in extra:
        starts.append(np.maximum(h, 1e-12 * np.max(h)))
    target = len(starts) + restarts
    while len(starts) < target:
        if len(starts) % 2:
            h = scale * np.exp(rng.uniform(-4.0, 4.0, n))
        else:
            h = np.full(n, 1e-6) * scale
            pick = rng.choice(act, size=min(3, act.size), replace=False)
            h[pick] = scale[pick] * np.exp(rng.uniform(-2.0, 2.0, pick.size))
        starts.append(h)
    best, bh, total = -1.0, None, 0
    for h0 in starts:
        h, val, steps = _ascend(pr, h0 / h0.max(), max_steps)
        total += steps
        if val > best:
            best, bh = val, h
    sweeps = 0
    if polish and bh is not None:
        hp = bh.copy()
        for factors in ([2.0, 1.25], [1.05, 1.01]):
            for _ in range(2):
                pr.sweep(hp, factors)
                sweeps += 1
        if pr.ratio(hp) > best:
            bh = hp
    return _estimate(spec, bh, "multistart_ascent", iterations=total, starts=len(starts),
                     sweeps=sweeps)


def best_constant(spec: InequalitySpec, methods: Iterable[str] = ("atom", "power_iteration",
                                                                  "multistart_ascent"),
                  restarts: int = 32, k: int = 2, subgrid_size: int = 24,
                  budget: int = 100_000) -> BestConstantEstimate:
    """Run the selected methods (atoms always) and return the best estimate.

    Ties go to the earlier method in ``atom, k_atom, power_iteration,
    multistart_ascent``.  ``power_iteration`` is skipped when not
    applicable; its witness seeds the ascent.
    """
    methods = set(methods) | {"atom"}
    unknown = methods - set(METHODS)
    if unknown:
        raise ValueError(f"unknown methods {sorted(unknown)}")
    runs = [atom_search(spec)]
    if "k_atom" in methods:
        runs.append(k_atom_search(spec, k=k, subgrid_size=subgrid_size, budget=budget))
    if "power_iteration" in methods:
        try:
            runs.append(power_iteration(spec))
        except NotApplicable:
            pass
    if "multistart_ascent" in methods:
        seeds = [r.witness.values for r in runs if r.method == "power_iteration"]
        runs.append(multistart_ascent(spec, restarts=restarts, extra_starts=seeds))
    win = runs[0]
    for r in runs[1:]:
        if r.value > win.value:
            win = r
    details = dict(win.details)
    details["all"] = {r.method: r.value for r in runs}
    return BestConstantEstimate(win.value, win.witness, win.method, win.iterations,
                                win.converged, details)
