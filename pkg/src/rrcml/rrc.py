"""Randomized reference classifier (RRC) for binary problems.

A deterministic support pair ``(nu0, nu1)`` is modelled by two independent
beta-distributed random supports whose means equal the observed supports.
The probability that the randomized classifier picks class ``m`` is

    P(m) = int_0^1 b(u; lambda_m, mu_m) * B(u; lambda_j, mu_j) du,  j != m

with ``lambda_i = 2 nu_i`` and ``mu_i = 2 (1 - nu_i)``. The beta densities
are singular at the endpoints for supports near 0 or 1, so the integral over
``[1/2, 1]`` is reflected onto ``[0, 1/2]``:

    P(m) = B(1/2; lambda_j, mu_j)
           + int_0^{1/2} [b(u; a, c) B(u; c, a) - b(u; c, a) B(u; a, c)] du

where ``a = lambda_m`` and ``c = lambda_j``. Both terms of the remaining
integrand vanish linearly at ``u = 0`` and are bounded on ``[0, 1/2]``.
"""
from dataclasses import dataclass

import numpy as np

from .special import beta_pdf, betainc

CLIP_EPS = 1e-6
QUAD_TOL = 1e-8
_MAX_ROUNDS = 60
_MAX_ACTIVE = 1024
_CACHE_LIMIT = 200_000
# results are a pure function of the clipped pair, so memoizing is safe
_CACHE = {}

# 15-point Kronrod / 7-point Gauss rule on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod abscissae (and the centre)
_GWEIGHTS[[1, 3, 5]] = _WG[:3]
_GWEIGHTS[[9, 11, 13]] = _WG[2::-1]
_GWEIGHTS[7] = _WG[3]


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved, index=None):
        super().__init__(message)
        self.achieved = achieved
        self.index = index


@dataclass(frozen=True)
class BetaParams:
    lambda0: float
    mu0: float
    lambda1: float
    mu1: float


def clip_support(nu, eps=CLIP_EPS):
    """Clamp supports into ``[eps, 1 - eps]`` and renormalize.

    Accepts a single pair of shape (2,) or a stack of shape (n, 2).
    """
    nu = np.clip(np.asarray(nu, dtype=float), eps, 1.0 - eps)
    return nu / nu.sum(axis=-1, keepdims=True)


def beta_params(nu):
    """Beta parameters whose means reproduce the (clipped) supports."""
    nu0, nu1 = (float(v) for v in nu)
    return BetaParams(2.0 * nu0, 2.0 * (1.0 - nu0), 2.0 * nu1, 2.0 * (1.0 - nu1))


def _reflected_integrand(u, a, c):
    return (beta_pdf(u, a, c) * betainc(c, a, u)
            - beta_pdf(u, c, a) * betainc(a, c, u))


def _integrate_half(a, c, tol):
    """Vectorized adaptive Gauss-Kronrod over [0, 1/2] for each (a, c).

    Every interval is accepted once its error estimate falls below its share
    of ``tol`` (proportional to width), so the total error per integral is at
    most ``tol``.
    """
    n = a.shape[0]
    total = np.zeros(n)
    errsum = np.zeros(n)
    owner = np.arange(n)
    lo = np.zeros(n)
    hi = np.full(n, 0.5)
    for _ in range(_MAX_ROUNDS):
        if owner.size == 0:
            return total, errsum
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        u = mid[:, None] + half[:, None] * _NODES[None, :]
        f = _reflected_integrand(u, a[owner][:, None], c[owner][:, None])
        kron = half * (f @ _KWEIGHTS)
        gauss = half * (f @ _GWEIGHTS)
        err = np.abs(kron - gauss)
        done = err <= tol * (hi - lo) / 0.5
        np.add.at(total, owner[done], kron[done])
        np.add.at(errsum, owner[done], err[done])
        keep = ~done
        active = np.bincount(owner[keep], minlength=n)
        if active.max() > _MAX_ACTIVE:
            bad = int(np.argmax(active))
            pending = err[keep][owner[keep] == bad].sum()
            raise QuadratureError(f"quadrature did not converge for pair {bad}",
                                  achieved=float(errsum[bad] + pending), index=bad)
        owner = np.repeat(owner[keep], 2)
        lo_k, mid_k, hi_k = lo[keep], mid[keep], hi[keep]
        lo = np.column_stack([lo_k, mid_k]).ravel()
        hi = np.column_stack([mid_k, hi_k]).ravel()
    bad = int(owner[0])
    raise QuadratureError(f"quadrature did not converge for pair {bad}",
                          achieved=float(errsum[bad] + tol), index=bad)


def rrc_probability_batch(nus, tol=QUAD_TOL):
    """Class-assignment probabilities of the RRC for a stack of supports.

    Parameters
    ----------
    nus : array_like, shape (n, 2)
        Support pairs; they are clipped before use.
    tol : float
        Absolute quadrature tolerance per probability.

    Returns
    -------
    numpy.ndarray, shape (n, 2)
        ``[P(class 0), P(class 1)]`` for every input pair.
    """
    nus = np.asarray(nus, dtype=float)
    if nus.size == 0:
        return np.zeros((0, 2))
    nus = clip_support(nus.reshape(-1, 2))
    # base models often emit few distinct supports
    uniq, inverse = np.unique(nus, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    out = np.empty(uniq.shape)
    todo = []
    for r, key in enumerate(map(tuple, uniq)):
        hit = _CACHE.get((key, tol))
        if hit is None:
            todo.append(r)
        else:
            out[r] = hit
    if todo:
        todo = np.array(todo)
        a = 2.0 * uniq[todo, 0]
        c = 2.0 * uniq[todo, 1]
        # the reflected integrand is antisymmetric in (a, c): one quadrature
        # serves both classes
        try:
            j, _ = _integrate_half(a, c, tol)
        except QuadratureError as exc:
            exc.index = int(np.flatnonzero(inverse == todo[exc.index])[0])
            raise
        p0 = betainc(c, a, 0.5) + j
        p1 = betainc(a, c, 0.5) - j
        out[todo] = np.clip(np.column_stack([p0, p1]), 0.0, 1.0)
        if len(_CACHE) > _CACHE_LIMIT:
            _CACHE.clear()
        for r in todo:
            _CACHE[(tuple(uniq[r]), tol)] = out[r].copy()
    return out[inverse]


def rrc_probability(nu, tol=QUAD_TOL):
    """RRC class-assignment probabilities ``[p0, p1]`` for one support pair."""
    return rrc_probability_batch(np.asarray(nu, dtype=float).reshape(1, 2), tol)[0]
