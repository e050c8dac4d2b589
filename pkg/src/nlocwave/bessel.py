"""Bessel functions of the first kind and their positive zeros.

Values come from the integral representation

    J_n(x) = (1/2pi) * integral_0^{2pi} cos(x sin(t) - n t) dt

evaluated with an M-point uniform trapezoid sum. For integer n the sum is
exactly J_n(x) + J_{n+M}(x) + J_{n-M}(x) + ..., so once M exceeds
x + n by a few Airy widths the aliasing terms drop below machine precision.
This gives uniform near-machine accuracy at every (n, x) we use, at the cost
of O(M) work per point; the matrix-sized evaluations that dominate Hankel
plan construction run through a numba kernel (numpy fallback: NLOC_NUMBA=0).

Zeros are found by interlacing-bracketed Newton: McMahon's expansion seeds
order 0, and each higher order is bracketed by the zeros of the order below
(j_{n-1,k} < j_{n,k} < j_{n-1,k+1}).
"""

import numpy as np

from .accel import NUMBA_ENABLED, njit, prange

_TWO_PI = 2.0 * np.pi


def _num_points(n, xmax):
    """Quadrature size with the aliasing tail below ~1e-16."""
    pad = max(40.0, 12.0 * xmax ** (1.0 / 3.0)) if xmax > 0 else 40.0
    m = int(np.ceil(xmax + abs(n) + pad))
    return m + (m % 2)


@njit(cache=True, parallel=True)
def _jn_sum_numba(n, x, theta, sin_theta, out):  # pragma: no cover - numba path
    m = theta.shape[0]
    for i in prange(x.shape[0]):
        xi = x[i]
        acc = 0.0
        for k in range(m):
            acc += np.cos(xi * sin_theta[k] - n * theta[k])
        out[i] = acc / m


@njit(cache=True, parallel=True)
def _jnp_sum_numba(n, x, theta, sin_theta, out):  # pragma: no cover - numba path
    m = theta.shape[0]
    for i in prange(x.shape[0]):
        xi = x[i]
        acc = 0.0
        for k in range(m):
            acc += sin_theta[k] * np.sin(xi * sin_theta[k] - n * theta[k])
        out[i] = -acc / m


def _jn_sum_numpy(n, x, theta, sin_theta, out):
    m = theta.size
    chunk = max(1, (1 << 23) // m)
    for s in range(0, x.size, chunk):
        xs = x[s : s + chunk, None]
        out[s : s + chunk] = np.cos(xs * sin_theta - n * theta).mean(axis=1)


def _jnp_sum_numpy(n, x, theta, sin_theta, out):
    m = theta.size
    chunk = max(1, (1 << 23) // m)
    for s in range(0, x.size, chunk):
        xs = x[s : s + chunk, None]
        out[s : s + chunk] = -(sin_theta * np.sin(xs * sin_theta - n * theta)).mean(
            axis=1
        )


def _evaluate(n, x, kernel_numba, kernel_numpy):
    n = int(n)
    sign = 1.0
    if n < 0:
        # J_{-n} = (-1)^n J_n; the derivative inherits the same sign flip.
        sign = -1.0 if n % 2 else 1.0
        n = -n
    xa = np.asarray(x, dtype=np.float64)
    scalar = xa.ndim == 0
    flat = np.ascontiguousarray(xa.reshape(-1))
    out = np.empty(flat.shape[0])
    if flat.size:
        m = _num_points(n, float(flat.max(initial=0.0)))
        theta = np.arange(m) * (_TWO_PI / m)
        sin_theta = np.sin(theta)
        if NUMBA_ENABLED:
            kernel_numba(n, flat, theta, sin_theta, out)
        else:
            kernel_numpy(n, flat, theta, sin_theta, out)
    out *= sign
    return float(out[0]) if scalar else out.reshape(xa.shape)


def bessel_j(n, x):
    """J_n(x) for integer n and x >= 0 (scalar or array)."""
    return _evaluate(n, x, _jn_sum_numba, _jn_sum_numpy)


def bessel_j_derivative(n, x):
    """d/dx J_n(x)."""
    return _evaluate(n, x, _jnp_sum_numba, _jnp_sum_numpy)


def _mcmahon(n, count):
    """McMahon's large-zero expansion for j_{n,k}, k = 1..count."""
    k = np.arange(1, count + 1, dtype=np.float64)
    mu = 4.0 * n * n
    b = (k + 0.5 * n - 0.25) * np.pi
    e = 8.0 * b
    x = (
        b
        - (mu - 1.0) / e
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e**3)
        - 32.0 * (mu - 1.0) * (83.0 * mu**2 - 982.0 * mu + 3779.0) / (15.0 * e**5)
    )
    return x


def _polish(n, x, iterations=8):
    for _ in range(iterations):
        step = bessel_j(n, x) / bessel_j_derivative(n, x)
        x = x - step
        if np.max(np.abs(step)) < 1e-14 * np.max(x):
            break
    return x


def _bracketed_newton(n, lo, hi):
    """Zeros of J_n inside the interlacing brackets (lo_k, hi_k)."""
    lo = lo.copy()
    hi = hi.copy()
    k = np.arange(1, lo.size + 1)
    sign_lo = np.where(k % 2 == 1, 1.0, -1.0)
    x = np.clip(_mcmahon(n, lo.size), lo + 1e-10, hi - 1e-10)
    active = np.ones(lo.size, dtype=bool)
    for _ in range(100):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa = x[idx]
        f = bessel_j(n, xa)
        on_lo_side = np.sign(f) == sign_lo[idx]
        lo[idx] = np.where(on_lo_side, xa, lo[idx])
        hi[idx] = np.where(on_lo_side, hi[idx], xa)
        xn = xa - f / bessel_j_derivative(n, xa)
        bad = ~np.isfinite(xn) | (xn <= lo[idx]) | (xn >= hi[idx])
        xn = np.where(bad, 0.5 * (lo[idx] + hi[idx]), xn)
        active[idx] = np.abs(xn - xa) > 1e-15 * xn
        x[idx] = xn
    return x


def bessel_j_zeros(n, count):
    """First ``count`` positive zeros of J_|n|, ascending."""
    n = abs(int(n))
    count = int(count)
    if count < 1:
        return np.empty(0)
    zeros = _polish(0, _mcmahon(0, count + n))
    for order in range(1, n + 1):
        zeros = _bracketed_newton(order, zeros[:-1], zeros[1:])
    return zeros[:count]
