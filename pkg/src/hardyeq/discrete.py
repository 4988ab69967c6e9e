"""Log grids, grid functions, weighted norms and the discrete operators.

A grid function is constant on each cell ``[b_i, b_{i+1}]`` around the grid
point ``x_i``.  Integrals of ``h`` against a weight are therefore sums of
``h_i`` times exact cell masses of the weight.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import integrate as _spi

from . import _quad
from .errors import ZeroWitness
from .kernels import backend
from .weights import PiecewisePowerWeight

__all__ = [
    "LogGrid",
    "GridFunction",
    "OperatorKind",
    "SampledWeight",
    "InequalitySpec",
    "Problem",
    "KINDS",
    "cell_masses",
    "weighted_norm",
    "apply_operator",
    "ratio",
]

# tag -> (inner, outer) codes understood by the kernels
KINDS = {
    "hardy": (0, 0),
    "copson": (1, 0),
    "hardy_then_copson": (0, 2),
    "copson_then_copson": (1, 2),
    "copson_then_hardy": (1, 1),
    "hardy_then_hardy": (0, 1),
}


@dataclass(frozen=True)
class LogGrid:
    """Geometric grid of ``n`` points on ``[x0, xn]`` (both included)."""

    x0: float
    xn: float
    n: int = 512

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("grid needs at least 16 points")
        if not (0.0 < self.x0 < self.xn < np.inf):
            raise ValueError("need 0 < x0 < xn < inf")

    @cached_property
    def points(self) -> np.ndarray:
        x = np.geomspace(self.x0, self.xn, self.n)
        x[0], x[-1] = self.x0, self.xn
        return x

    @cached_property
    def bounds(self) -> np.ndarray:
        """Cell boundaries ``b_0 = x0 < b_1 < ... < b_n = xn``."""
        x = self.points
        return np.concatenate(([self.x0], np.sqrt(x[:-1] * x[1:]), [self.xn]))

    @cached_property
    def nodes(self) -> np.ndarray:
        """Interleaved ``b_0, x_0, b_1, ..., x_{n-1}, b_n``."""
        z = np.empty(2 * self.n + 1)
        z[0::2] = self.bounds
        z[1::2] = self.points
        return z

    @cached_property
    def lo(self) -> np.ndarray:
        return self.points - self.bounds[:-1]

    @cached_property
    def hi(self) -> np.ndarray:
        return self.bounds[1:] - self.points

    @property
    def domain(self) -> tuple:
        return (self.x0, self.xn)

    def refined(self, factor: int = 2) -> "LogGrid":
        return LogGrid(self.x0, self.xn, self.n * factor)

    def cell_of(self, x) -> np.ndarray:
        """Index of the cell containing ``x``."""
        k = np.searchsorted(self.bounds, x, side="right") - 1
        return np.clip(k, 0, self.n - 1)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Non-negative values per grid cell."""

    grid: LogGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {v.shape}")
        if np.any(~(v >= 0.0)):
            raise ValueError("grid function values must be non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: LogGrid, f: Callable) -> "GridFunction":
        return cls(grid, np.asarray(f(grid.points), dtype=float))

    @classmethod
    def indicator(cls, grid: LogGrid, a: float, b: float) -> "GridFunction":
        """Cells whose point lies in ``[a, b]``."""
        x = grid.points
        return cls(grid, ((x >= a) & (x <= b)).astype(float))

    def __mul__(self, lam):
        return GridFunction(self.grid, self.values * float(lam))

    __rmul__ = __mul__

    def __add__(self, other: "GridFunction"):
        return GridFunction(self.grid, self.values + other.values)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values > 0)


class SampledWeight:
    """Weight known only pointwise (e.g. a power of a reduction primitive).

    Parameters
    ----------
    func : callable
        Vectorised positive function on ``domain``; may be infinite at an
        end point.
    domain : tuple
        ``(x0, xn)``.
    monotone : {"increasing", "decreasing", None}
        Used for exact essential suprema of ``1/func``.
    edge_exponents : tuple of float, optional
        Local behaviour ``(x - x0)**e0`` and ``(xn - x)**e1`` at the ends;
        a cell touching an end with exponent ``<= -1`` has infinite mass.
    breaks : sequence of float
        Interior points where ``func`` is not smooth.
    label : str
        Text used in reports.
    """

    def __init__(self, func, domain, monotone=None, edge_exponents=(0.0, 0.0),
                 breaks=(), label="sampled"):
        self.func = func
        self.domain = (float(domain[0]), float(domain[1]))
        self.monotone = monotone
        self.edge_exponents = tuple(float(e) for e in edge_exponents)
        self.breaks = np.asarray(breaks, dtype=float)
        self.label = label

    def __repr__(self):
        return f"SampledWeight({self.label!r}, domain={self.domain})"

    def __call__(self, x):
        with np.errstate(divide="ignore", over="ignore"):
            out = self.func(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def interior_breakpoints(self) -> np.ndarray:
        return self.breaks

    def integrate(self, a, b) -> float:
        """Adaptive quadrature of ``func`` over ``[a, b]``.

        Pieces touching a singular end use an algebraic quadrature weight.
        """
        if b <= a:
            return 0.0
        x0, xn = self.domain
        e0, e1 = self.edge_exponents
        if (a <= x0 and e0 <= -1.0) or (b >= xn and e1 <= -1.0):
            return np.inf
        pts = [a] + [p for p in self.breaks if a < p < b] + [b]
        f = self.func
        total = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", _spi.IntegrationWarning)
            for k, (lo, hi) in enumerate(zip(pts[:-1], pts[1:])):
                left = k == 0 and lo <= x0 and e0 != 0.0
                right = k == len(pts) - 2 and hi >= xn and e1 != 0.0
                ea = e0 if left else 0.0
                eb = e1 if right else 0.0
                if ea or eb:
                    eps = 1e-9 * (hi - lo)

                    def g(t, ea=ea, eb=eb, eps=eps):
                        # smooth quotient; nudge off the singular end point
                        t = min(max(t, x0 + eps), xn - eps)
                        d0, d1 = t - x0, xn - t
                        return float(f(np.asarray(t))) / (d0 ** ea * d1 ** eb)

                    val = _spi.quad(g, lo, hi, weight="alg", wvar=(ea, eb), limit=200,
                                    epsabs=0.0, epsrel=1e-11)[0]
                else:
                    val = _spi.quad(lambda t: float(f(np.asarray(t))), lo, hi, limit=200,
                                    epsabs=0.0, epsrel=1e-11)[0]
                total += val
        return float(total)

    def cell_masses(self, bounds) -> np.ndarray:
        """Mass of each cell; Gauss rule with an adaptive fallback."""
        b = np.asarray(bounds, dtype=float)
        lo, hi = b[:-1], b[1:]
        g8 = _quad.integrate(self.func, lo, hi, 8)
        g16 = _quad.integrate(self.func, lo, hi, 16)
        out = g16.copy()
        crossing = np.zeros(lo.size, dtype=bool)
        for p in self.breaks:
            crossing |= (lo < p) & (p < hi)
        bad = ~np.isfinite(g16) | (np.abs(g8 - g16) > 1e-12 * np.abs(g16)) | crossing
        x0, xn = self.domain
        bad[0] |= self.edge_exponents[0] != 0.0
        bad[-1] |= self.edge_exponents[1] != 0.0
        for k in np.flatnonzero(bad):
            out[k] = self.integrate(lo[k], hi[k])
        return out

    def _dense(self):
        x0, xn = self.domain
        x = np.unique(np.concatenate((np.geomspace(x0, xn, 4097), self.breaks)))
        with np.errstate(divide="ignore"):
            r = 1.0 / self(x)
        # a singular end (weight infinite) contributes nothing to the sup
        return x, np.where(np.isnan(r), 0.0, r)

    def inv_sup_below(self, x):
        """``esssup_{(x0, x]} 1/func``."""
        xa = np.asarray(x, dtype=float)
        if self.monotone == "decreasing":
            out = 1.0 / self(xa)
        elif self.monotone == "increasing":
            out = np.full(np.shape(xa), 1.0 / self(self.domain[0]))
        else:
            t, r = self._dense()
            pre = np.maximum.accumulate(r)
            k = np.searchsorted(t, xa, side="right") - 1
            out = np.maximum(np.where(k >= 0, pre[np.clip(k, 0, None)], 0.0), 1.0 / self(xa))
        return float(out) if np.ndim(out) == 0 else out

    def inv_sup_above(self, x):
        """``esssup_{[x, xn)} 1/func``."""
        xa = np.asarray(x, dtype=float)
        if self.monotone == "increasing":
            out = 1.0 / self(xa)
        elif self.monotone == "decreasing":
            out = np.full(np.shape(xa), 1.0 / self(self.domain[1]))
        else:
            t, r = self._dense()
            suf = np.maximum.accumulate(r[::-1])[::-1]
            k = np.searchsorted(t, xa, side="left")
            out = np.maximum(np.where(k < t.size, suf[np.clip(k, None, t.size - 1)], 0.0),
                             1.0 / self(xa))
        return float(out) if np.ndim(out) == 0 else out


def cell_masses(w, grid: LogGrid) -> np.ndarray:
    """Exact (or adaptive, for sampled weights) mass of ``w`` on each cell."""
    b = grid.bounds
    if isinstance(w, SampledWeight):
        return w.cell_masses(b)
    return np.asarray(w.integrate(b[:-1], b[1:]), dtype=float)


@dataclass(frozen=True)
class OperatorKind:
    """Operator tag plus the inner exponent and weight of iterated kinds."""

    tag: str
    r: Optional[float] = None
    u: Optional[PiecewisePowerWeight] = None

    def __post_init__(self):
        if self.tag not in KINDS:
            raise ValueError(f"unknown operator kind {self.tag!r}")
        if self.iterated:
            if self.r is None or not (self.r > 0) or self.u is None:
                raise ValueError(f"{self.tag} needs r > 0 and an inner weight u")
        elif self.r is not None or self.u is not None:
            raise ValueError(f"{self.tag} takes no r or u")

    @property
    def iterated(self) -> bool:
        return KINDS[self.tag][1] != 0

    @property
    def inner(self) -> str:
        return "hardy" if KINDS[self.tag][0] == 0 else "copson"

    @property
    def outer(self) -> Optional[str]:
        return {0: None, 1: "hardy", 2: "copson"}[KINDS[self.tag][1]]

    def with_r(self, r: float) -> "OperatorKind":
        return OperatorKind(self.tag, r, self.u) if self.iterated else self


def half_cell_moments(u, grid: LogGrid):
    """Hat-function moments ``A_k, B_k`` of ``u`` on each half-cell.

    ``A_k + B_k = int u`` and ``B_k = int (t - z_k) u / (z_{k+1} - z_k)``,
    so that a linear interpolant of ``G`` integrates to ``A G_k + B G_{k+1}``.
    """
    z = grid.nodes
    a, b = z[:-1], z[1:]
    m0 = np.asarray(u.integrate(a, b), dtype=float)
    m1 = np.asarray(u.moment(a, b), dtype=float)
    L = b - a
    with np.errstate(divide="ignore", invalid="ignore"):
        B = np.where(L > 0, (m1 - a * m0) / L, 0.0)
    B = np.clip(B, 0.0, m0)
    return m0 - B, B


def _kernel_args(kind: OperatorKind, grid: LogGrid, mult=None, s=1.0):
    inner, outer = KINDS[kind.tag]
    if kind.iterated:
        A, B = half_cell_moments(kind.u, grid)
        r = float(kind.r)
    else:
        A = B = np.zeros(2 * grid.n)
        r = 1.0
    if mult is None:
        mult = np.ones(2 * grid.n + 1)
    return (grid.lo, grid.hi, inner, outer, r, A, B, np.ascontiguousarray(mult, float), float(s))


def weighted_norm(f: GridFunction, p: float, w) -> float:
    """``(sum f_i**p int_cell w)**(1/p)``, or ``max f_i w(x_i)`` when ``p = inf``."""
    g = f.grid
    v = f.values
    if np.isinf(p):
        return float(np.max(v * w(g.points)))
    m = v > 0
    if not m.any():
        return 0.0
    return float(np.sum(v[m] ** p * cell_masses(w, g)[m]) ** (1.0 / p))


def apply_operator(k: OperatorKind, h: GridFunction) -> GridFunction:
    """Operator values at the grid points."""
    h_arr = np.ascontiguousarray(h.values, dtype=float)
    T = backend.apply(h_arr, *_kernel_args(k, h.grid))
    return GridFunction(h.grid, np.asarray(T))


def ratio(k: OperatorKind, h: GridFunction, p: float, q: float, w, v) -> float:
    """``||T h||_{q,w} / ||h||_{p,v}``."""
    if not np.any(h.values > 0):
        raise ZeroWitness("ratio of the zero function is undefined")
    den = weighted_norm(h, p, v)
    if den == 0.0:
        raise ZeroWitness("right-hand side vanishes")
    return weighted_norm(apply_operator(k, h), q, w) / den


@dataclass(frozen=True, eq=False)
class InequalitySpec:
    """Discretised inequality ``||M (T h)**s||_{q,w}**(1/s) <= C ||h||_{p,v}``.

    ``multiplier`` (sampled at the grid nodes) and ``inner_power`` are only
    used by reduced instances; an original inequality has ``s = 1`` and no
    multiplier.

    Parameters
    ----------
    kind : OperatorKind
    p : float
        Right-hand exponent, ``p >= 1``.
    q : float
        Outer exponent in ``(0, inf]``.
    w, v : weight
        Outer and right-hand weights (piecewise power or sampled).
    grid : LogGrid
    seed : int
    multiplier : callable, optional
    inner_power : float
    label : str
    """

    kind: OperatorKind
    p: float
    q: float
    w: object
    v: object
    grid: LogGrid
    seed: int = 0
    multiplier: Optional[Callable] = None
    inner_power: float = 1.0
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (self.p >= 1.0 and np.isfinite(self.p)):
            raise ValueError("p must lie in [1, inf)")
        if not (self.q > 0):
            raise ValueError("q must be positive")
        if self.inner_power <= 0:
            raise ValueError("inner_power must be positive")

    @property
    def r(self):
        return self.kind.r

    @property
    def u(self):
        return self.kind.u

    def replace(self, **kw) -> "InequalitySpec":
        from dataclasses import replace as _replace

        return _replace(self, **kw)

    def with_grid(self, grid: LogGrid) -> "InequalitySpec":
        return self.replace(grid=grid)

    @cached_property
    def problem(self) -> "Problem":
        return Problem.build(self)

    def ratio_of(self, h) -> float:
        vals = h.values if isinstance(h, GridFunction) else np.asarray(h, float)
        return self.problem.ratio(vals)


@dataclass(frozen=True, eq=False)
class Problem:
    """Kernel-ready arrays for one spec."""

    args: tuple
    p: float
    Vm: np.ndarray
    active: np.ndarray

    @classmethod
    def build(cls, spec: InequalitySpec) -> "Problem":
        g = spec.grid
        mult = None
        if spec.multiplier is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                mult = np.nan_to_num(np.asarray(spec.multiplier(g.nodes), float),
                                     nan=0.0, posinf=0.0)
        base = _kernel_args(spec.kind, g, mult, spec.inner_power)
        q = float(spec.q)
        W = spec.w(g.points) if np.isinf(q) else cell_masses(spec.w, g)
        W = np.ascontiguousarray(W, dtype=float)
        Vm = np.ascontiguousarray(cell_masses(spec.v, g), dtype=float)
        active = np.isfinite(Vm) & (Vm > 0)
        Vm = np.where(active, Vm, np.inf)
        return cls(base + (q, W), float(spec.p), Vm, active)

    @property
    def n(self) -> int:
        return self.Vm.size

    @property
    def s(self) -> float:
        return self.args[8]

    def _h(self, h):
        h = np.ascontiguousarray(h, dtype=float)
        if np.any(h[~self.active] > 0):
            h = h.copy()
            h[~self.active] = 0.0
        return h

    def ratio(self, h) -> float:
        return float(backend.ratio(self._h(h), *self.args, self.p, self.Vm))

    def lhs(self, h) -> float:
        return float(backend.lhs(self._h(h), *self.args))

    def rhs(self, h) -> float:
        return float(backend.rhs(self._h(h), self.p, self.Vm))

    def lhs_grad(self, h):
        val, g = backend.lhs_grad(self._h(h), *self.args)
        return float(val), np.asarray(g)

    def sweep(self, h, factors) -> float:
        """In-place multiplicative coordinate pass on ``h``."""
        h[~self.active] = 0.0
        return float(backend.sweep(h, np.asarray(factors, float), *self.args, self.p, self.Vm))

    def atom_ratios(self) -> np.ndarray:
        """Ratio of every single-cell atom (0 for inactive cells)."""
        n = self.n
        out = np.zeros(n)
        e = np.zeros(n)
        for j in np.flatnonzero(self.active):
            e[j] = 1.0
            out[j] = backend.ratio(e, *self.args, self.p, self.Vm)
            e[j] = 0.0
        return out
