"""Piecewise-power weights on a truncated half-line.

A weight is ``c_k * x**a_k`` on each interval ``(x_k, x_{k+1})`` of a
partition of ``(x_0, x_n)``.  Every single-level integral of such a weight
has a closed form, which is what the rest of the package leans on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import OutOfDomain, WeightParseError

__all__ = [
    "OutOfDomain",
    "WeightParseError",
    "PiecewisePowerWeight",
    "CumulativeFn",
    "eval_weight",
    "integrate_weight",
    "pow_weight",
    "lower_cumulative",
    "upper_cumulative",
    "parse_weight",
    "weight_to_records",
    "DEFAULT_DOMAIN",
]

DEFAULT_DOMAIN = (1e-3, 1e3)
_LOG_SNAP = 1e-12



def _piece_integral(c, a, lo, hi):
    """Stable integral of ``c * x**a`` over ``[lo, hi]`` (arrays allowed).

    Written as ``c * lo**(a+1) * expm1((a+1) log(hi/lo)) / (a+1)`` so that
    exponents close to -1 and short intervals keep full relative accuracy.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    e = a + 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.log(hi / lo)
        if e == 0.0:
            out = c * lr
        else:
            out = c * np.exp(e * np.log(lo)) * np.expm1(e * lr) / e
    return np.where(hi > lo, out, 0.0)


@dataclass(frozen=True)
class PiecewisePowerWeight:
    """Weight ``w(x) = c_k x**a_k`` on ``(breakpoints[k], breakpoints[k+1])``.

    Parameters
    ----------
    breakpoints : sequence of float
        Strictly increasing, positive, finite.  ``breakpoints[0]`` and
        ``breakpoints[-1]`` bound the (truncated) domain.
    coeffs, exponents : sequence of float
        One entry per segment; coefficients must be positive.  Exponents
        within ``1e-12`` of ``-1`` are snapped to ``-1``.
    """

    breakpoints: tuple
    coeffs: tuple
    exponents: tuple
    _cum_lo: np.ndarray = field(init=False, repr=False, compare=False)
    _cum_hi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        cs = tuple(float(c) for c in self.coeffs)
        ex = tuple(-1.0 if abs(float(a) + 1.0) < _LOG_SNAP else float(a)
                   for a in self.exponents)
        if len(cs) < 1 or len(cs) != len(ex) or len(bp) != len(cs) + 1:
            raise ValueError("need n+1 breakpoints for n >= 1 segments")
        if not all(np.isfinite(bp)) or bp[0] <= 0.0:
            raise ValueError("breakpoints must be positive and finite")
        if any(b1 <= b0 for b0, b1 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if any(not (c > 0.0 and np.isfinite(c)) for c in cs):
            raise ValueError("coefficients must be positive and finite")
        if any(not np.isfinite(a) for a in ex):
            raise ValueError("exponents must be finite")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "coeffs", cs)
        object.__setattr__(self, "exponents", ex)
        masses = np.array([
            float(_piece_integral(c, a, lo, hi))
            for c, a, lo, hi in zip(cs, ex, bp[:-1], bp[1:])
        ])
        # cumulative masses from each end, summed from that end (no cancellation)
        object.__setattr__(self, "_cum_lo", np.concatenate([[0.0], np.cumsum(masses)]))
        object.__setattr__(self, "_cum_hi",
                           np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]]))

    # -- constructors -------------------------------------------------------
    @classmethod
    def power(cls, a: float = 0.0, c: float = 1.0, domain=DEFAULT_DOMAIN):
        """Single-segment weight ``c * x**a`` on ``domain``."""
        return cls((domain[0], domain[1]), (c,), (a,))

    @classmethod
    def from_segments(cls, segments: Sequence[tuple]):
        """Build from ``[(lo, hi, c, a), ...]`` records (must be contiguous)."""
        bps = [segments[0][0]]
        for k, (lo, hi, _c, _a) in enumerate(segments):
            if k > 0 and not np.isclose(lo, bps[-1], rtol=1e-14, atol=0.0):
                raise ValueError(f"segment {k} starts at {lo}, expected {bps[-1]}")
            bps.append(hi)
        return cls(tuple(bps), tuple(s[2] for s in segments), tuple(s[3] for s in segments))

    # -- basic geometry -----------------------------------------------------
    @property
    def domain(self) -> tuple:
        return self.breakpoints[0], self.breakpoints[-1]

    @property
    def nseg(self) -> int:
        return len(self.coeffs)

    @property
    def total(self) -> float:
        return float(self._cum_lo[-1])

    def restrict(self, lo: float, hi: float) -> "PiecewisePowerWeight":
        """Same weight on the sub-window ``(lo, hi)``."""
        x0, xn = self.domain
        if not (x0 <= lo < hi <= xn):
            raise OutOfDomain(f"({lo}, {hi}) not inside {self.domain}")
        bp = np.asarray(self.breakpoints)
        keep = np.nonzero((bp[1:] > lo) & (bp[:-1] < hi))[0]
        inner = [b for b in bp[keep[0] + 1: keep[-1] + 1]]
        return PiecewisePowerWeight(
            (lo, *inner, hi),
            tuple(self.coeffs[k] for k in keep),
            tuple(self.exponents[k] for k in keep),
        )

    def _segment_index(self, x):
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        return np.clip(idx, 0, self.nseg - 1)

    def _check(self, x):
        x0, xn = self.domain
        xa = np.asarray(x, dtype=float)
        if np.any(~(xa >= x0 * (1 - 1e-15))) or np.any(~(xa <= xn * (1 + 1e-15))):
            raise OutOfDomain(f"point outside [{x0}, {xn}]")
        return np.clip(xa, x0, xn)

    # -- evaluation ---------------------------------------------------------
    def __call__(self, x):
        xa = self._check(x)
        k = self._segment_index(xa)
        c = np.asarray(self.coeffs)[k]
        a = np.asarray(self.exponents)[k]
        out = c * xa ** a
        return float(out) if np.ndim(out) == 0 else out

    def integrate(self, a, b):
        """Exact ``int_a^b w`` (vectorised over ``a`` and ``b``)."""
        aa = self._check(a)
        bb = self._check(b)
        if np.any(aa > bb):
            raise OutOfDomain("integration bounds must satisfy a <= b")
        bp = self.breakpoints
        total = np.zeros(np.broadcast(aa, bb).shape)
        for k, (c, e) in enumerate(zip(self.coeffs, self.exponents)):
            lo = np.clip(aa, bp[k], bp[k + 1])
            hi = np.clip(bb, bp[k], bp[k + 1])
            total = total + _piece_integral(c, e, lo, hi)
        return float(total) if total.ndim == 0 else total

    def _cumulative(self, x, from_left: bool):
        xa = self._check(x)
        flat = np.atleast_1d(xa).ravel()
        k = self._segment_index(flat)
        bp = self.breakpoints
        out = (self._cum_lo[k] if from_left else self._cum_hi[k + 1]).astype(float)
        for j in np.unique(k):
            m = k == j
            if from_left:
                out[m] += _piece_integral(self.coeffs[j], self.exponents[j], bp[j], flat[m])
            else:
                out[m] += _piece_integral(self.coeffs[j], self.exponents[j], flat[m], bp[j + 1])
        return float(out[0]) if np.ndim(xa) == 0 else out.reshape(np.shape(xa))

    def lower(self, x):
        """``int_{x_0}^x w`` in closed form."""
        return self._cumulative(x, True)

    def upper(self, x):
        """``int_x^{x_n} w`` in closed form."""
        return self._cumulative(x, False)

    def moment(self, a, b):
        """Exact ``int_a^b t w(t) dt``."""
        return self.shifted(1.0).integrate(a, b)

    def shifted(self, da: float, scale: float = 1.0) -> "PiecewisePowerWeight":
        """Weight ``scale * x**da * w(x)``."""
        return PiecewisePowerWeight(
            self.breakpoints,
            tuple(scale * c for c in self.coeffs),
            tuple(a + da for a in self.exponents),
        )

    def pow(self, s: float) -> "PiecewisePowerWeight":
        return PiecewisePowerWeight(
            self.breakpoints,
            tuple(c ** s for c in self.coeffs),
            tuple(a * s for a in self.exponents),
        )

    def scaled(self, lam: float) -> "PiecewisePowerWeight":
        return self.shifted(0.0, lam)

    # -- divergence flags ---------------------------------------------------
    @property
    def diverges_at_zero(self) -> bool:
        """Would ``int_0^x w`` diverge if the first segment reached 0?"""
        return self.exponents[0] <= -1.0

    @property
    def diverges_at_infinity(self) -> bool:
        """Would ``int_x^inf w`` diverge if the last segment reached infinity?"""
        return self.exponents[-1] >= -1.0

    # -- essential suprema of 1/w -------------------------------------------
    def _edge_values(self):
        """Reciprocal values at both ends of each segment."""
        bp = np.asarray(self.breakpoints)
        c = np.asarray(self.coeffs)
        a = np.asarray(self.exponents)
        left = 1.0 / (c * bp[:-1] ** a)
        right = 1.0 / (c * bp[1:] ** a)
        return left, right

    def inv_sup_below(self, x):
        """``esssup_{t in (x_0, x]} 1/w(t)`` (exact: each piece is monotone)."""
        xa = self._check(x)
        left, right = self._edge_values()
        seg_max = np.maximum(left, right)
        prefix = np.concatenate([[0.0], np.maximum.accumulate(seg_max)])
        k = self._segment_index(xa)
        c = np.asarray(self.coeffs)[k]
        a = np.asarray(self.exponents)[k]
        out = np.maximum.reduce([prefix[k], left[k], 1.0 / (c * xa ** a)])
        return float(out) if np.ndim(out) == 0 else out

    def inv_sup_above(self, x):
        """``esssup_{t in [x, x_n)} 1/w(t)``."""
        xa = self._check(x)
        left, right = self._edge_values()
        seg_max = np.maximum(left, right)
        suffix = np.concatenate([np.maximum.accumulate(seg_max[::-1])[::-1], [0.0]])
        k = self._segment_index(xa)
        c = np.asarray(self.coeffs)[k]
        a = np.asarray(self.exponents)[k]
        out = np.maximum.reduce([suffix[k + 1], right[k], 1.0 / (c * xa ** a)])
        return float(out) if np.ndim(out) == 0 else out

    def interior_breakpoints(self) -> np.ndarray:
        return np.asarray(self.breakpoints[1:-1])


@dataclass(frozen=True)
class CumulativeFn:
    """Closed-form ``V(x) = int_{x_0}^x v`` (lower) or ``int_x^{x_n} v`` (upper)."""

    weight: PiecewisePowerWeight
    direction: str

    def __post_init__(self):
        if self.direction not in ("lower", "upper"):
            raise ValueError("direction must be 'lower' or 'upper'")

    def __call__(self, x):
        if self.direction == "lower":
            return self.weight.lower(x)
        return self.weight.upper(x)

    @property
    def diverges(self) -> bool:
        """Divergence flag of the untruncated integral in this direction."""
        if self.direction == "lower":
            return self.weight.diverges_at_zero
        return self.weight.diverges_at_infinity

    def pieces(self) -> list:
        """Per-segment ``(alpha, beta, gamma, is_log)`` with ``V = alpha x**beta + gamma``

        (or ``alpha log x + gamma`` when ``is_log``)."""
        w = self.weight
        out = []
        bp = w.breakpoints
        for k, (c, a) in enumerate(zip(w.coeffs, w.exponents)):
            if a == -1.0:
                alpha, beta, is_log = c, 0.0, True
                at_lo = c * np.log(bp[k])
            else:
                alpha, beta, is_log = c / (a + 1.0), a + 1.0, False
                at_lo = alpha * bp[k] ** beta
            if self.direction == "lower":
                out.append((alpha, beta, w._cum_lo[k] - at_lo, is_log))
            else:
                out.append((-alpha, beta, w._cum_hi[k] + at_lo, is_log))
        return out


def eval_weight(w: PiecewisePowerWeight, x):
    """Value of ``w`` at ``x``; breakpoints take the right segment's value."""
    return w(x)


def integrate_weight(w: PiecewisePowerWeight, a, b):
    return w.integrate(a, b)


def pow_weight(w: PiecewisePowerWeight, s: float) -> PiecewisePowerWeight:
    return w.pow(s)


def lower_cumulative(v: PiecewisePowerWeight) -> CumulativeFn:
    return CumulativeFn(v, "lower")


def upper_cumulative(v: PiecewisePowerWeight) -> CumulativeFn:
    return CumulativeFn(v, "upper")


def parse_weight(records: Iterable[dict]) -> PiecewisePowerWeight:
    """Parse ``[{"from": x, "to": y, "c": c, "a": a}, ...]``.

    Raises :class:`WeightParseError` on missing keys, gaps, overlaps or
    non-positive coefficients.
    """
    recs = list(records)
    if not recs:
        raise WeightParseError("weight needs at least one segment")
    segs = []
    for k, r in enumerate(recs):
        if not isinstance(r, dict):
            raise WeightParseError(f"segment {k}: expected an object")
        missing = {"from", "to", "c", "a"} - set(r)
        if missing:
            raise WeightParseError(f"segment {k}: missing {sorted(missing)}")
        try:
            lo, hi, c, a = (float(r[key]) for key in ("from", "to", "c", "a"))
        except (TypeError, ValueError) as exc:
            raise WeightParseError(f"segment {k}: {exc}") from None
        if c <= 0:
            raise WeightParseError(f"segment {k}: coefficient must be positive")
        if hi <= lo or lo <= 0:
            raise WeightParseError(f"segment {k}: need 0 < from < to")
        if segs and lo != segs[-1][1]:
            raise WeightParseError(f"segment {k}: not contiguous with previous ({segs[-1][1]} vs {lo})")
        segs.append((lo, hi, c, a))
    return PiecewisePowerWeight.from_segments(segs)


def weight_to_records(w: PiecewisePowerWeight) -> list:
    bp = w.breakpoints
    return [
        {"from": bp[k], "to": bp[k + 1], "c": c, "a": a}
        for k, (c, a) in enumerate(zip(w.coeffs, w.exponents))
    ]
