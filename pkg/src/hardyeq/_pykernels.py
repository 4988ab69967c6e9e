"""Pure-numpy reference kernels for the discretised Hardy-type operators.

Layout shared with the compiled backend: a grid of ``n`` cells gives
``2n + 1`` nodes ``b_0, x_0, b_1, x_1, ..., x_{n-1}, b_n`` and ``2n``
half-cells.  ``h`` is constant on each cell.

Argument conventions (identical in ``_ckernels``):

lo, hi : (n,)   lengths ``x_i - b_i`` and ``b_{i+1} - x_i``
inner  : int    0 = primitive from the left, 1 = from the right
outer  : int    0 = none, 1 = integral over ``(x_0, x)``, 2 = over ``(x, x_n)``
r      : float  inner exponent of the outer integral
A, B   : (2n,)  half-cell moments of ``u`` against the two linear hats
mult   : (2n+1,) multiplier sampled at nodes
s      : float  power applied to the primitive
q      : float  outer exponent, ``inf`` for the sup norm
W      : (n,)   cell masses of ``w`` (pointwise values when ``q = inf``)
"""

import numpy as np

NAME = "python"


def primitive(h, lo, hi, inner):
    seg = np.empty(2 * h.shape[0])
    seg[0::2] = h * lo
    seg[1::2] = h * hi
    if inner == 0:
        return np.concatenate(([0.0], np.cumsum(seg)))
    return np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))


def _forward(h, lo, hi, inner, outer, r, A, B, mult, s, q, W):
    H = primitive(h, lo, hi, inner)
    F = mult * H ** s if s != 1.0 else mult * H
    if outer == 0:
        return H, F, None, F[1::2]
    G = F ** r
    c = A * G[:-1] + B * G[1:]
    if outer == 2:
        S = np.concatenate((np.cumsum(c[::-1])[::-1], [0.0]))[1::2]
    else:
        S = np.concatenate(([0.0], np.cumsum(c)))[1::2]
    return H, F, S, S ** (1.0 / r)


def apply(h, lo, hi, inner, outer, r, A, B, mult, s):
    """Operator values at the grid points ``x_i``."""
    return _forward(h, lo, hi, inner, outer, r, A, B, mult, s, 1.0, None)[3]


def _norm(T, q, W):
    if np.isinf(q):
        return float(np.max(T * W))
    return float(np.sum(T ** q * W)) ** (1.0 / q)


def lhs(h, lo, hi, inner, outer, r, A, B, mult, s, q, W):
    T = _forward(h, lo, hi, inner, outer, r, A, B, mult, s, q, W)[3]
    return _norm(T, q, W)


def rhs(h, p, Vm):
    m = h > 0
    return float(np.sum(h[m] ** p * Vm[m])) ** (1.0 / p)


def ratio(h, lo, hi, inner, outer, r, A, B, mult, s, q, W, p, Vm):
    den = rhs(h, p, Vm)
    if den == 0.0:
        return 0.0
    return lhs(h, lo, hi, inner, outer, r, A, B, mult, s, q, W) ** (1.0 / s) / den


def _safe_pow(x, e):
    out = np.zeros_like(x)
    m = x > 0
    out[m] = x[m] ** e
    return out


def lhs_grad(h, lo, hi, inner, outer, r, A, B, mult, s, q, W):
    """Return ``(lhs, d log(lhs) / dh)``."""
    n = h.shape[0]
    H, F, S, T = _forward(h, lo, hi, inner, outer, r, A, B, mult, s, q, W)
    val = _norm(T, q, W)
    gT = np.zeros(n)
    if val == 0.0:
        return val, np.zeros(n)
    if np.isinf(q):
        i = int(np.argmax(T * W))
        gT[i] = 1.0 / T[i]
    else:
        gT = _safe_pow(T, q - 1.0) * W / val ** q
    gF = np.zeros(2 * n + 1)
    if outer == 0:
        gF[1::2] = gT
    else:
        gS = gT * _safe_pow(S, 1.0 / r - 1.0) / r
        z = np.zeros(2 * n)
        if outer == 2:
            z[1::2] = gS
            gc = np.cumsum(z)
        else:
            z[0::2] = gS
            gc = np.cumsum(z[::-1])[::-1]
        gG = np.zeros(2 * n + 1)
        gG[:-1] += A * gc
        gG[1:] += B * gc
        gF = gG * r * _safe_pow(F, r - 1.0)
    gH = gF * mult * s * _safe_pow(H, s - 1.0) if s != 1.0 else gF * mult
    delta = lo + hi
    if inner == 0:
        suf = np.concatenate((np.cumsum(gH[::-1])[::-1], [0.0]))
        grad = delta * suf[2::2] + lo * gH[1::2]
    else:
        pre = np.cumsum(gH)
        grad = delta * pre[0:-1:2] + hi * gH[1::2]
    return val, grad


def sweep(h, factors, lo, hi, inner, outer, r, A, B, mult, s, q, W, p, Vm):
    """One multiplicative coordinate pass over ``h`` (in place); returns the ratio."""
    best = ratio(h, lo, hi, inner, outer, r, A, B, mult, s, q, W, p, Vm)
    for j in range(h.shape[0]):
        if h[j] <= 0.0:
            continue
        for f in factors:
            for g in (f, 1.0 / f):
                old = h[j]
                h[j] = old * g
                val = ratio(h, lo, hi, inner, outer, r, A, B, mult, s, q, W, p, Vm)
                if val > best:
                    best = val
                else:
                    h[j] = old
    return best
