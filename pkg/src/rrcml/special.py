"""Beta-function helpers used by the randomized reference classifier.

All functions accept numpy arrays and broadcast their arguments. The
regularized incomplete beta function is evaluated with the modified Lentz
continued fraction, switching to the symmetry relation
``I_x(a, b) = 1 - I_{1-x}(b, a)`` where the fraction converges slowly.
"""
import math

import numpy as np

_TINY = 1e-300
_CF_EPS = 1e-15
_CF_MAXITER = 500

_lgamma = np.vectorize(math.lgamma, otypes=[float])


def lbeta(a, b):
    """Natural logarithm of the complete beta function B(a, b)."""
    return _lgamma(a) + _lgamma(b) - _lgamma(np.add(a, b))


def beta_pdf(x, a, b):
    """Beta density b(x; a, b) on the open interval (0, 1).

    Values outside (0, 1) are returned as 0.
    """
    x, a, b = np.broadcast_arrays(np.asarray(x, float), np.asarray(a, float),
                                  np.asarray(b, float))
    out = np.zeros(x.shape)
    inside = (x > 0.0) & (x < 1.0)
    xi, ai, bi = x[inside], a[inside], b[inside]
    out[inside] = np.exp((ai - 1.0) * np.log(xi) + (bi - 1.0) * np.log1p(-xi)
                         - lbeta(ai, bi))
    return out


def _betacf(a, b, x):
    """Continued fraction for the incomplete beta function (vectorized)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, _CF_MAXITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= _CF_EPS
        if not active.any():
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a, b, x):
    """Regularized incomplete beta function I_x(a, b).

    Parameters
    ----------
    a, b : array_like
        Positive shape parameters.
    x : array_like
        Evaluation points; values are clipped to [0, 1].

    Returns
    -------
    numpy.ndarray
        The beta cumulative distribution function B(x; a, b).
    """
    x, a, b = np.broadcast_arrays(np.clip(np.asarray(x, float), 0.0, 1.0),
                                  np.asarray(a, float), np.asarray(b, float))
    out = np.where(x >= 1.0, 1.0, 0.0)
    inside = (x > 0.0) & (x < 1.0)
    if not inside.any():
        return out
    xi, ai, bi = x[inside], a[inside], b[inside]
    log_front = (ai * np.log(xi) + bi * np.log1p(-xi) - lbeta(ai, bi))
    front = np.exp(log_front)
    direct = xi < (ai + 1.0) / (ai + bi + 2.0)
    res = np.empty(xi.shape)
    if direct.any():
        res[direct] = (front[direct]
                       * _betacf(ai[direct], bi[direct], xi[direct]) / ai[direct])
    flip = ~direct
    if flip.any():
        res[flip] = 1.0 - (front[flip]
                           * _betacf(bi[flip], ai[flip], 1.0 - xi[flip]) / bi[flip])
    out[inside] = res
    return out
