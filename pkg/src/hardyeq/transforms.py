"""Reduction pairs built from ``v**(1 - p')`` and the V-averaging transforms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special as _sps

from . import _quad
from .discrete import GridFunction, SampledWeight
from .errors import ConditionViolated
from .weights import PiecewisePowerWeight

__all__ = [
    "conjugate",
    "ReductionPair",
    "make_reduction_pair",
    "reduce_down",
    "reduce_up",
    "tail_power_integral",
]


def conjugate(p: float) -> float:
    """Conjugate exponent: ``p/(p-1)`` for ``p > 1``, ``p/(1-p)`` for ``p < 1``, ``inf`` at 1."""
    if not p > 0:
        raise ValueError("conjugate exponent needs p > 0")
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0) if p > 1 else p / (1.0 - p)


@dataclass(frozen=True)
class ReductionPair:
    """Density/primitive pair ``(phi, Phi)`` or ``(psi, Psi)`` for ``(v, p)``.

    ``primitive = V**(1/(p'+1))`` with ``V`` the lower (hardy) or upper
    (copson) cumulative of ``v**(1-p')``.  Its derivative is
    ``density / (p'+1)``, so ``int phi = (p'+1) Phi``.
    """

    v: PiecewisePowerWeight
    p: float
    kind: str
    base: PiecewisePowerWeight  # v**(1-p')

    @property
    def pc(self) -> float:
        return conjugate(self.p)

    def V(self, x):
        return self.base.lower(x) if self.kind == "hardy" else self.base.upper(x)

    def primitive(self, x):
        return self.V(x) ** (1.0 / (self.pc + 1.0))

    def density(self, x):
        pc = self.pc
        with np.errstate(divide="ignore"):
            return self.V(x) ** (-pc / (pc + 1.0)) * self.base(x)

    def power(self, gamma: float, label: Optional[str] = None) -> SampledWeight:
        """``primitive**gamma`` as a sampled weight.

        Evaluated as ``V**(gamma/(p'+1))`` so no root is taken twice.
        """
        e = gamma / (self.pc + 1.0)
        V = self.V
        inc = self.kind == "hardy"
        if e == 0:
            mono = None
        else:
            mono = "increasing" if (e > 0) == inc else "decreasing"
        # V vanishes linearly at x0 (hardy) or xn (copson)
        edges = (e, 0.0) if inc else (0.0, e)
        name = "Phi" if inc else "Psi"

        def f(x):
            with np.errstate(divide="ignore"):
                return np.asarray(V(x), dtype=float) ** e

        return SampledWeight(f, self.v.domain, monotone=mono, edge_exponents=edges,
                             breaks=self.v.interior_breakpoints(),
                             label=label or f"{name}^{gamma:g}")


def make_reduction_pair(v: PiecewisePowerWeight, p: float, kind: str) -> ReductionPair:
    """Build the reduction pair, checking the integrability condition on ``v**(1-p')``."""
    if not (1.0 < p < np.inf):
        raise ValueError("reduction pairs need 1 < p < inf")
    if kind not in ("hardy", "copson"):
        raise ValueError("kind must be 'hardy' or 'copson'")
    base = v.pow(1.0 - conjugate(p))
    if kind == "hardy" and base.diverges_at_zero:
        raise ConditionViolated("v^(1-p') is not integrable at 0")
    if kind == "copson" and base.diverges_at_infinity:
        raise ConditionViolated("v^(1-p') is not integrable at infinity")
    return ReductionPair(v, float(p), kind, base)


def _half_cell_integrals(grid, f, breaks):
    """``int f`` over each half-cell, split at ``breaks``."""
    z = grid.nodes
    pts = np.unique(np.concatenate((z, [b for b in breaks if z[0] < b < z[-1]])))
    seg = _quad.integrate(f, pts[:-1], pts[1:], 16)
    owner = np.searchsorted(z, pts[:-1], side="right") - 1
    return np.bincount(owner, weights=seg, minlength=z.size - 1)[: z.size - 1]


def _cell_weights(grid, v, alpha, density, lower):
    cum = v.lower if lower else v.upper
    if density is v:
        # exact: int v V**alpha = V**(alpha+1)/(alpha+1)
        Vz = cum(grid.nodes)
        e = Vz ** (alpha + 1.0) / (alpha + 1.0)
        return np.abs(np.diff(e))
    m = density if density is not None else (lambda x: np.ones_like(x))
    brk = list(v.interior_breakpoints())
    if density is not None and hasattr(density, "interior_breakpoints"):
        brk += list(density.interior_breakpoints())
    return _half_cell_integrals(grid, lambda x: m(x) * cum(x) ** alpha, brk)


def reduce_down(h: GridFunction, v: PiecewisePowerWeight, alpha: float,
                density=None) -> GridFunction:
    """``g(x) = V(x)**-(alpha+1) int_{x0}^x h m V**alpha`` at the grid points.

    ``h`` is constant per cell and ``m`` is ``density`` (default 1).  When
    ``density is v`` the cell integrals are exact.  ``g(x0) = 0``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    g = h.grid
    J = _cell_weights(g, v, alpha, density, True)
    contrib = np.repeat(h.values, 2) * J
    acc = np.concatenate(([0.0], np.cumsum(contrib)))[1::2]
    V = v.lower(g.points)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(V > 0, acc / V ** (alpha + 1.0), 0.0)
    return GridFunction(g, out)


def reduce_up(h: GridFunction, v: PiecewisePowerWeight, alpha: float,
              density=None) -> GridFunction:
    """Mirror of :func:`reduce_down` with ``V_*(x) = int_x^{xn} v``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    g = h.grid
    J = _cell_weights(g, v, alpha, density, False)
    contrib = np.repeat(h.values, 2) * J
    acc = np.concatenate((np.cumsum(contrib[::-1])[::-1], [0.0]))[1::2]
    V = v.upper(g.points)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(V > 0, acc / V ** (alpha + 1.0), 0.0)
    return GridFunction(g, out)


def tail_power_integral(v: PiecewisePowerWeight, alpha: float, x: float,
                        panel: float = 0.05, order: int = 20) -> float:
    """``(alpha+1) int_x^{xn} V_***alpha v`` by composite Gauss quadrature.

    Panels have width at most ``panel`` in ``log t`` and never straddle a
    breakpoint.  The panel ending at ``xn`` uses a Gauss-Jacobi rule that
    absorbs the ``(xn - t)**alpha`` decay of ``V_*``.  Used to check the
    identity against ``V_*(x)**(alpha+1)``.
    """
    xn = v.domain[1]
    if x >= xn:
        return 0.0
    edges = np.log(np.concatenate(([x], [b for b in v.interior_breakpoints() if x < b < xn], [xn])))
    cuts = [np.linspace(a, b, max(1, int(np.ceil((b - a) / panel))) + 1)
            for a, b in zip(edges[:-1], edges[1:])]
    s = np.unique(np.concatenate(cuts))
    lo, hi = np.exp(s[:-1]), np.exp(s[1:])
    y, wy = np.polynomial.legendre.leggauss(order)
    # regular panels, integrated in log t
    sl, sh = s[:-2, None], s[1:-1, None]
    st = 0.5 * (sl + sh) + 0.5 * (sh - sl) * y
    t = np.exp(st)
    body = np.sum(0.5 * (sh - sl) * wy * v.upper(t) ** alpha * v(t) * t)
    # last panel: weight (1 - y)**alpha on [-1, 1] maps to (xn - t)**alpha
    a, b = lo[-1], hi[-1]
    yj, wj = _sps.roots_jacobi(order, alpha, 0.0)
    t = 0.5 * (a + b) + 0.5 * (b - a) * yj
    half = 0.5 * (b - a)
    g = (v.upper(t) / (xn - t)) ** alpha * v(t)
    tail = half ** (alpha + 1.0) * np.sum(wj * g)
    return float((alpha + 1.0) * (body + tail))
