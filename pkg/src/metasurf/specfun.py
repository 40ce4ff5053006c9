"""Cylinder functions of integer order and real positive argument.

J_n, Y_n and H_n^(1) are computed in-house so results do not depend on the
platform's special-function library:

* ``x < 5``: ascending power series (J_n for every order, Y_0 and Y_1).
* ``5 <= x < max(25, nmax + 20)``: Miller's backward recurrence for J_n,
  normalised with ``J_0 + 2 sum J_2k = 1``; Y_0 and Y_1 from their Neumann
  series in the computed J_n.
* otherwise: Hankel's asymptotic expansion for orders 0 and 1, upward
  recurrence for higher orders (stable because n < x there).

Y_n is always obtained from Y_0, Y_1 by upward recurrence.

Validated range: ``|n| <= 60`` and ``1e-6 <= x <= 1e3``. Larger arguments
are accurate as well (the asymptotic branch only improves), but phase
rounding of ``exp(ix)`` limits absolute accuracy to about ``x * 1e-16``.
"""

import math

import numpy as np

from .errors import DomainError, WoodAnomaly

MAX_ORDER = 60
EULER_GAMMA = 0.57721566490153286061

_SERIES_X = 5.0
_ASYMPTOTIC_X = 25.0
_SERIES_TERMS = 40
_ASYMPTOTIC_TERMS = 32
_RESCALE = 1e250


def _check_order(order):
    if int(order) != order:
        raise DomainError(f"order must be an integer, got {order!r}")
    if abs(order) > MAX_ORDER:
        raise DomainError(f"|order| = {abs(order)} exceeds the validated maximum {MAX_ORDER}")
    return int(order)


def _as_positive(x, allow_zero=False):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("argument must be finite")
    if allow_zero:
        if np.any(arr < 0):
            raise DomainError("argument must be non-negative")
    elif np.any(arr <= 0):
        raise DomainError("argument must be strictly positive (H_n and Y_n are singular at 0)")
    return arr


def _series_j(n, x):
    q = -0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (n + k))
        total = total + term
    with np.errstate(divide="ignore", under="ignore"):
        pref = np.exp(n * np.log(0.5 * x) - math.lgamma(n + 1))
    return pref * total


def _series_y01(x, j0, j1):
    q = 0.25 * x * x
    log_half = np.log(0.5 * x)
    # Y0: sum_{k>=1} (-1)^{k+1} H_k q^k / (k!)^2
    s0 = np.zeros_like(x)
    term = np.ones_like(x)
    harmonic = 0.0
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * k)
        harmonic += 1.0 / k
        s0 = s0 + (-1) ** (k + 1) * harmonic * term
    y0 = (2.0 / np.pi) * ((log_half + EULER_GAMMA) * j0 + s0)

    # Y1: psi(k+1) + psi(k+2) = -2 gamma + H_k + H_{k+1}
    s1 = np.zeros_like(x)
    term = np.ones_like(x)
    h_k = 0.0
    for k in range(_SERIES_TERMS):
        if k > 0:
            term = term * (-q) / (k * (k + 1))
            h_k += 1.0 / k
        psi_sum = -2.0 * EULER_GAMMA + 2.0 * h_k + 1.0 / (k + 1)
        s1 = s1 + psi_sum * term
    y1 = -2.0 / (np.pi * x) + (2.0 / np.pi) * log_half * j1 - (0.5 * x / np.pi) * s1
    return y0, y1


def _miller(nmax, x):
    """Backward recurrence; returns J_0..J_start as a list of arrays."""
    xmax = float(np.max(x))
    start = int(max(nmax, xmax) + 12.0 * xmax ** (1.0 / 3.0) + 30.0)
    start += start % 2
    vals = [None] * (start + 2)
    vals[start + 1] = np.zeros_like(x)
    vals[start] = np.full_like(x, 1e-30)
    for n in range(start, 0, -1):
        nxt = (2.0 * n / x) * vals[n] - vals[n + 1]
        big = np.abs(nxt) > _RESCALE
        if np.any(big):
            nxt = np.where(big, nxt / _RESCALE, nxt)
            for m in range(n, start + 2):
                vals[m] = np.where(big, vals[m] / _RESCALE, vals[m])
        vals[n - 1] = nxt
    norm = vals[0] + 2.0 * sum(vals[2:start + 1:2])
    return [v / norm for v in vals[: start + 1]]


def _neumann_y01(x, js):
    log_term = np.log(0.5 * x) + EULER_GAMMA
    top = len(js) - 2
    s0 = np.zeros_like(x)
    s1 = np.zeros_like(x)
    for k in range(1, top // 2 + 1):
        sign = (-1) ** k
        s0 = s0 + sign * js[2 * k] / k
        s1 = s1 + sign * (js[2 * k - 1] - js[2 * k + 1]) / k
    y0 = (2.0 / np.pi) * log_term * js[0] - (4.0 / np.pi) * s0
    y1 = (2.0 / np.pi) * (log_term * js[1] - js[0] / x) + (2.0 / np.pi) * s1
    return y0, y1


def _asymptotic_h(nu, x):
    mu = 4.0 * nu * nu
    total = np.ones_like(x, dtype=complex)
    term = np.ones_like(x, dtype=complex)
    for k in range(1, _ASYMPTOTIC_TERMS):
        term = term * 1j * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        total = total + term
    phase = x - (0.5 * nu + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * x)) * np.exp(1j * phase) * total


def _jy_orders(nmax, x):
    """J_n and Y_n for n = 0..nmax on a flat positive array ``x``."""
    nrow = max(nmax, 1) + 1
    J = np.empty((nrow, x.size))
    Y = np.empty((nrow, x.size))

    small = x < _SERIES_X
    large = x >= max(_ASYMPTOTIC_X, nmax + 20.0)
    mid = ~(small | large)

    if np.any(small):
        xs = x[small]
        for n in range(nrow):
            J[n, small] = _series_j(n, xs)
        Y[0, small], Y[1, small] = _series_y01(xs, J[0, small], J[1, small])

    if np.any(mid):
        xm = x[mid]
        js = _miller(nrow, xm)
        for n in range(nrow):
            J[n, mid] = js[n]
        Y[0, mid], Y[1, mid] = _neumann_y01(xm, js)

    if np.any(large):
        xl = x[large]
        h0 = _asymptotic_h(0, xl)
        h1 = _asymptotic_h(1, xl)
        J[0, large], Y[0, large] = h0.real, h0.imag
        J[1, large], Y[1, large] = h1.real, h1.imag
        for n in range(1, nrow - 1):
            J[n + 1, large] = (2.0 * n / xl) * J[n, large] - J[n - 1, large]

    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, nrow - 1):
            Y[n + 1] = (2.0 * n / x) * Y[n] - Y[n - 1]
    return J[: nmax + 1], Y[: nmax + 1]


def _parity(order):
    return -1.0 if order < 0 and order % 2 else 1.0


def _finish(values, scalar):
    return values.reshape(()).item() if scalar else values


def bessel_j(order, x):
    """Bessel function of the first kind J_order(x) for x >= 0."""
    n = _check_order(order)
    arr = _as_positive(x, allow_zero=True)
    flat = arr.ravel()
    out = np.zeros(flat.shape)
    pos = flat > 0
    if np.any(pos):
        J, _ = _jy_orders(abs(n), flat[pos])
        out[pos] = J[abs(n)]
    out[~pos] = 1.0 if n == 0 else 0.0
    return _finish(_parity(n) * out.reshape(arr.shape), arr.ndim == 0)


def bessel_y(order, x):
    """Bessel function of the second kind Y_order(x) for x > 0."""
    n = _check_order(order)
    arr = _as_positive(x)
    _, Y = _jy_orders(abs(n), arr.ravel())
    out = _parity(n) * Y[abs(n)].reshape(arr.shape)
    if not np.all(np.isfinite(out)):
        raise DomainError(f"Y_{n}(x) overflows for the requested argument")
    return _finish(out, arr.ndim == 0)


def hankel1(order, x):
    """Hankel function of the first kind H_order^(1)(x) = J + iY, x > 0.

    ``x <= 0`` raises :class:`DomainError`: the logarithmic singularity of
    H_0 at the origin is never evaluated silently.
    """
    n = _check_order(order)
    arr = _as_positive(x)
    J, Y = _jy_orders(abs(n), arr.ravel())
    out = _parity(n) * (J[abs(n)] + 1j * Y[abs(n)]).reshape(arr.shape)
    if not np.all(np.isfinite(out)):
        raise DomainError(f"H_{n}(x) overflows for the requested argument")
    return _finish(out, arr.ndim == 0)


def hankel1_orders(nmax, x):
    """H_n^(1)(x) for n = 0..nmax, shape ``(nmax + 1,) + x.shape``."""
    _check_order(nmax)
    arr = _as_positive(x)
    J, Y = _jy_orders(nmax, arr.ravel())
    return (J + 1j * Y).reshape((nmax + 1,) + arr.shape)


def beta_branch(k0, alpha, rel_tol=1e-12):
    """Vertical wavenumber sqrt(k0^2 - alpha^2) on the outgoing branch.

    Propagating orders (alpha^2 < k0^2) give a real positive value;
    evanescent orders give ``i * sqrt(alpha^2 - k0^2)`` so that
    ``exp(i beta |y|)`` decays. Works elementwise on arrays.

    Raises:
        WoodAnomaly: if ``|k0^2 - alpha^2| <= rel_tol * k0^2`` for any entry.
    """
    if not k0 > 0:
        raise DomainError(f"k0 must be positive, got {k0!r}")
    a = np.asarray(alpha, dtype=float)
    gap = (k0 - a) * (k0 + a)
    if np.any(np.abs(gap) <= rel_tol * k0 * k0):
        raise WoodAnomaly(f"grazing order: alpha_n = +/-k0 (k0={k0!r})")
    beta = np.where(gap > 0, np.sqrt(np.abs(gap)) + 0j, 1j * np.sqrt(np.abs(gap)))
    return complex(beta) if a.ndim == 0 else beta
