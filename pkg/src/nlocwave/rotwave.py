r"""Reduced (nonlocal Ginzburg-Landau type) equation on one angular mode.

The unknown is a radial amplitude profile living in the split space
"algebraically decaying part + constant tail": w(R) = w_dec(R) + w0. The
residual of

    conv_eps(w) + beta w + a |w|^2 w + hot(w),   beta = lambda_c + s i (mu*+mu) n0

is evaluated on a Hankel plan of order n0. The convolution of the constant
tail cannot pass through the truncated transform, so it is computed once
from a semi-analytic profile (see :func:`constant_tail_profile`) and the
transform only ever sees the decaying part.

The solver is a damped Newton iteration on (samples, w0) jointly with the
far-field balance ``beta w0 + a |w0|^2 w0 + hot(w0) = 0`` as the extra
equation. Newton systems are preconditioned with the diagonal symbol
inverse ``1/(symbol(rho) + beta)`` applied through the transform, which
keeps them well scaled even when the raw symbol is stiff.
"""

import warnings
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import solve_banded

from .errors import (
    MaxIterationsError,
    RangeError,
    ShapeError,
    SingularPreconditionerError,
    TruncationWarning,
)
from .hankel import radial_convolve
from .kernel import KernelSymbol, eval_symbol, rescale
from .modes import Field2D, FieldState
from .bessel import bessel_j

_ARMIJO_FLOOR = 2.0**-10


# --------------------------------------------------------------------------
# convolution of the constant tail


def _tail_ode_rational(D, d, n, radii, accuracy_dx=0.02):
    """Mode-n convolution profile of the constant tail for the rational symbol.

    With K the multiplier -D rho^2/(1+d rho^2), the convolution c(r) of the
    unit constant on mode n solves (1 - d Lap_n) c = D Lap_n 1 = -D n^2/r^2.
    Substituting x = r/sqrt(d) and h = c + D/d turns this into the regular
    boundary-value problem

        h - h'' - h'/x + n^2 h / x^2 = D/d,   h(0) = 0,
        h(X) = (D/d)(1 - n^2/X^2 - n^2(4-n^2)/X^4)   (far-field series)

    solved here with second-order finite differences on a uniform grid.
    """
    x_need = radii.max() / np.sqrt(d)
    X = max(60.0, 1.5 * x_need)
    m = int(min(max(X / accuracy_dx, 5000), 200000))
    dx = X / m
    x = dx * np.arange(1, m)
    rhs = np.full(m - 1, D / d)
    lower = -1.0 / dx**2 + 1.0 / (2 * dx * x)
    diag = 2.0 / dx**2 + 1.0 + n * n / x**2
    upper = -1.0 / dx**2 - 1.0 / (2 * dx * x)
    h_right = (D / d) * (1.0 - n * n / X**2 - n * n * (4.0 - n * n) / X**4)
    rhs[-1] -= upper[-1] * h_right
    ab = np.zeros((3, m - 1))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    h = solve_banded((1, 1), ab, rhs)
    grid = np.concatenate([[0.0], x, [X]])
    vals = np.concatenate([[0.0], h, [h_right]])
    return np.interp(radii / np.sqrt(d), grid, vals) - D / d


def _tail_quadrature_tabulated(sym, n, radii):
    """Constant-tail profile for a tabulated symbol.

    Uses c(r) = K_inf + n * int_0^rho_end (K(rho) - K_inf)/rho * J_n(r rho) drho
    with K_inf the last sample (the symbol is extended flat beyond its range,
    which truncates the integral exactly).
    """
    rho_end = sym.rho_samples[-1]
    k_inf = eval_symbol(sym, rho_end)
    npts = int(max(2048, 16 * radii.max() * rho_end / np.pi))
    rho = np.linspace(0.0, rho_end, npts + 1)
    dk = np.asarray(eval_symbol(sym, rho)) - k_inf
    args = np.outer(radii, rho)
    jmat = bessel_j(n, args.ravel()).reshape(args.shape)
    integrand = np.empty_like(jmat)
    integrand[:, 1:] = dk[1:] / rho[1:] * jmat[:, 1:]
    # continuous limit at rho = 0: only n = 1 picks up -K_inf * r / 2
    integrand[:, 0] = (-k_inf * radii / 2.0) if n == 1 else 0.0
    return k_inf + n * simpson(integrand, x=rho, axis=1)


def constant_tail_profile(sym, plan):
    """Samples, at plan.nodes, of the mode-n convolution of the unit constant.

    Zero for n = 0 (the symbol vanishes at the origin). For |n| >= 1 the
    profile tends to symbol(inf) at the origin and decays like -alpha n^2/r^2
    far out.
    """
    n = plan.nu
    if n == 0:
        return np.zeros(plan.size)
    radii = plan.nodes
    if sym.family == "rational":
        if sym.d == 0.0:
            return -sym.D * n * n / radii**2
        return _tail_ode_rational(sym.D, sym.d, n, radii)
    return _tail_quadrature_tabulated(sym, n, radii)


# --------------------------------------------------------------------------
# problem and solution containers


@dataclass
class ReducedProblem:
    """Coefficients of the reduced equation on mode n0.

    ``hot`` is an optional pointwise map standing in for the higher-order
    terms; it must act elementwise on complex arrays (and scalars, for the
    far-field balance). ``rotation_sign`` picks the sign convention of the
    rotation term s*i*(mu*+mu)*n0*w.
    """

    sym_rescaled: KernelSymbol
    lambda_c: complex
    mu_star: float
    mu: float
    n0: int
    a: complex
    rotation_sign: int = 1
    hot: Optional[Callable] = None

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("cubic coefficient a must be nonzero")
        if self.rotation_sign not in (-1, 1):
            raise ValueError("rotation_sign must be +1 or -1")
        self._tail_cache = {}

    @classmethod
    def from_normal_form(
        cls, sym, eps, nf, hopf, lam_bar, mu_star, mu, rotation_sign=1, hot=None
    ):
        """Paper-mode constructor: rescaled kernel plus computed coefficients."""
        if mu_star == 0:
            raise ValueError("mu_star must be nonzero")
        return cls(
            sym_rescaled=rescale(sym, eps),
            lambda_c=lam_bar * nf.nu1,
            mu_star=mu_star,
            mu=mu,
            n0=hopf.n0,
            a=nf.a,
            rotation_sign=rotation_sign,
            hot=hot,
        )

    @property
    def beta(self):
        return self.lambda_c + self.rotation_sign * 1j * (
            self.mu_star + self.mu
        ) * self.n0

    def speed_shift(self):
        """eps^2-scaled correction to c*: c = c* + eps^2 * speed_shift()."""
        return -self.rotation_sign * (self.mu_star + self.mu)

    def tail_profile(self, plan):
        key = id(plan)
        hit = self._tail_cache.get(key)
        if hit is None or hit[0] is not plan:
            self._tail_cache[key] = (plan, constant_tail_profile(self.sym_rescaled, plan))
            hit = self._tail_cache[key]
        return hit[1]


@dataclass
class ProfileSolution:
    plan: object
    w_decaying: np.ndarray
    w_const: complex
    residual_norm: float
    iterations: int
    residual_history: list = dc_field(default_factory=list)

    @property
    def w_total(self):
        return self.w_decaying + self.w_const

    def w_at(self, r):
        """Total profile at arbitrary radii (linear interpolation).

        The value at r = 0 is the constant tail for mode 0 and 0 for
        |n| >= 1 (smooth rotating cores vanish at the origin).
        """
        r = np.asarray(r, dtype=float)
        if np.any(r > self.plan.rmax * (1 + 1e-12)):
            raise RangeError("radius beyond the profile's truncation radius")
        w = self.w_total
        origin = w[0] if self.plan.nu == 0 else 0.0
        grid = np.concatenate([[0.0], self.plan.nodes])
        vals = np.concatenate([[origin], w])
        return np.interp(r, grid, vals.real) + 1j * np.interp(r, grid, vals.imag)


# initial guesses for the profile solver


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class TanhFront:
    amplitude: float
    width: float = 1.0


@dataclass(frozen=True)
class Given:
    values: np.ndarray
    w_const: complex = 0.0


# --------------------------------------------------------------------------
# residual


def _check_plan(problem, plan):
    if plan.nu != abs(problem.n0):
        raise ShapeError(
            f"plan order {plan.order} does not match problem mode {problem.n0}"
        )


def _hot_terms(problem, w):
    if problem.hot is None:
        return 0.0
    return problem.hot(w)


def reduced_residual(problem, plan, w, w_const=0.0):
    """Residual samples of the reduced equation at the plan nodes.

    ``w`` holds the *total* profile samples (decaying part plus constant
    tail); the constant is passed separately so its convolution can bypass
    the transform.
    """
    _check_plan(problem, plan)
    w = np.asarray(w, dtype=complex)
    smooth = w - w_const
    with warnings.catch_warnings():
        # intermediate iterates are knowingly truncated; stay quiet here
        warnings.simplefilter("ignore", TruncationWarning)
        conv = radial_convolve(problem.sym_rescaled, plan, smooth)
    if w_const != 0:
        conv = conv + w_const * problem.tail_profile(plan)
    res = conv + problem.beta * w + problem.a * np.abs(w) ** 2 * w
    if problem.hot is not None:
        res = res + problem.hot(w)
    return res


def far_field_balance(problem, w_const):
    """Constant component of the residual (the algebraic far-field equation)."""
    out = problem.beta * w_const + problem.a * abs(w_const) ** 2 * w_const
    if problem.hot is not None:
        out = out + problem.hot(w_const)
    return out


# --------------------------------------------------------------------------
# Newton solver


def _transform_matrices(plan):
    c = plan._c_matrix
    s = plan._scale
    fwd = (s * (plan.rmax / plan.span))[:, None] * c * (plan.rmax / s)[None, :]
    inv = (s / plan.rmax)[:, None] * c * (plan.span / (plan.rmax * s))[None, :]
    return fwd, inv


def _hot_jacobian(problem, w):
    if problem.hot is None:
        z = np.zeros(w.size)
        return z, z
    h = 1e-7 * (1.0 + np.abs(w))
    d_re = (problem.hot(w + h) - problem.hot(w - h)) / (2 * h)
    d_im = (problem.hot(w + 1j * h) - problem.hot(w - 1j * h)) / (2j * h)
    return (d_re + d_im) / 2.0, (d_re - d_im) / 2.0


def _realified_solve(a_full, b_full, rhs):
    """Solve A x + B conj(x) = rhs for complex x via the real 2m x 2m system.

    Gauge covariance makes the phase direction i*w an exact null vector of
    the Jacobian at any nonzero solution, so the system is solved in the
    minimal-norm least-squares sense, which simply takes no step along the
    neutral direction.
    """
    m = rhs.size
    top = np.hstack([(a_full + b_full).real, -(a_full - b_full).imag])
    bot = np.hstack([(a_full + b_full).imag, (a_full - b_full).real])
    mat = np.vstack([top, bot])
    vec = np.concatenate([rhs.real, rhs.imag])
    sol, *_ = np.linalg.lstsq(mat, vec, rcond=1e-12)
    return sol[:m] + 1j * sol[m:]


def _residual_norm(problem, plan, w, w0):
    res = reduced_residual(problem, plan, w, w0)
    far = far_field_balance(problem, w0)
    return max(float(np.max(np.abs(res))), abs(far)), res, far


def solve_profile(problem, plan, init, tol=1e-10, max_iter=60):
    """Damped Newton solve of the reduced equation.

    Newton steps are taken on (profile samples, constant tail) jointly; the
    linear systems are preconditioned by the diagonal symbol inverse before
    being solved densely, and the step length backtracks by halves (floor
    2^-10) on the sup-norm of the residual.
    """
    _check_plan(problem, plan)
    n = plan.size
    beta = problem.beta

    symbol_vals = np.asarray(eval_symbol(problem.sym_rescaled, plan.freq_nodes))
    denom = symbol_vals + beta
    scale = np.abs(denom).max() + abs(beta)
    k_bad = int(np.abs(denom).argmin())
    if np.abs(denom[k_bad]) <= 1e-12 * max(scale, 1.0):
        raise SingularPreconditionerError(plan.freq_nodes[k_bad], beta)

    if isinstance(init, Zero):
        zero = np.zeros(n, dtype=complex)
        return ProfileSolution(plan, zero, 0.0, 0.0, 0, [0.0])
    if isinstance(init, TanhFront):
        w = init.amplitude * np.tanh(plan.nodes / init.width).astype(complex)
        w0 = complex(init.amplitude)
    elif isinstance(init, Given):
        w = np.asarray(init.values, dtype=complex).copy()
        if w.shape != (n,):
            raise ShapeError("Given profile does not match the plan size")
        w0 = complex(init.w_const)
    else:
        raise TypeError(f"unsupported init {init!r}")

    fwd, inv = _transform_matrices(plan)
    conv_mat = inv @ (symbol_vals[:, None] * fwd)  # real, prefactors cancel
    conv_mat = conv_mat.real
    precond = inv @ ((1.0 / denom)[:, None] * fwd)
    tail = problem.tail_profile(plan)
    tail_col = tail - conv_mat @ np.ones(n)
    beta_div = beta if beta != 0 else 1.0

    norm, res, far = _residual_norm(problem, plan, w, w0)
    history = [norm]
    for iteration in range(1, max_iter + 1):
        if norm <= tol:
            return ProfileSolution(plan, w - w0, w0, norm, iteration - 1, history)
        hot_a, hot_b = _hot_jacobian(problem, w)
        a_blk = conv_mat + np.diag(beta + 2.0 * problem.a * np.abs(w) ** 2 + hot_a)
        b_blk = np.diag(problem.a * w**2 + hot_b)

        a_full = np.zeros((n + 1, n + 1), dtype=complex)
        b_full = np.zeros((n + 1, n + 1), dtype=complex)
        a_full[:n, :n] = precond @ a_blk
        b_full[:n, :n] = precond @ b_blk
        a_full[:n, n] = precond @ tail_col
        hot_a0, hot_b0 = _hot_jacobian(problem, np.atleast_1d(complex(w0)))
        a_full[n, n] = (beta + 2.0 * problem.a * abs(w0) ** 2 + hot_a0[0]) / beta_div
        b_full[n, n] = (problem.a * w0**2 + hot_b0[0]) / beta_div
        rhs = -np.concatenate([precond @ res, [far / beta_div]])

        delta = _realified_solve(a_full, b_full, rhs)
        dw, dw0 = delta[:n], delta[n]

        step = 1.0
        while True:
            w_try = w + step * dw
            w0_try = w0 + step * dw0
            norm_try, res_try, far_try = _residual_norm(problem, plan, w_try, w0_try)
            if norm_try <= (1.0 - 1e-4 * step) * norm or step <= _ARMIJO_FLOOR:
                break
            step *= 0.5
        w, w0 = w_try, w0_try
        norm, res, far = norm_try, res_try, far_try
        history.append(norm)

    if norm <= tol:
        return ProfileSolution(plan, w - w0, w0, norm, max_iter, history)
    raise MaxIterationsError(history)


# --------------------------------------------------------------------------
# ansatz reconstruction and full steady-state residual


def reconstruct(model, hopf, nf, sol, eps, n, L):
    """Two-term ansatz eps*U1 + eps^2*U2 on an n x n periodic square.

    U1 carries the critical eigenvector against w(eps r) e^{i n0 theta}; U2
    the three second-order vectors against w^2, |w|^2 and conj(w)^2. The
    grid must satisfy eps * r <= rmax everywhere (corners included).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = -L + (2.0 * L / n) * np.arange(n)
    X, Y = np.meshgrid(x, x)
    r = np.hypot(X, Y)
    if eps * r.max() > sol.plan.rmax * (1 + 1e-12):
        raise RangeError(
            f"grid radius {r.max():.3f} exceeds rmax/eps = {sol.plan.rmax / eps:.3f}"
        )
    theta = np.arctan2(Y, X)
    w = sol.w_at(eps * r)
    phase = np.exp(1j * hopf.n0 * theta)

    u1 = 2.0 * np.real(hopf.w1[:, None, None] * (w * phase)[None, :, :])
    sq = w * w * phase * phase
    u2 = (
        nf.v1[:, None, None] * sq[None, :, :]
        + nf.v0[:, None, None] * (np.abs(w) ** 2)[None, :, :]
        + nf.vm1[:, None, None] * np.conj(sq)[None, :, :]
    )
    u = eps * u1 + eps * eps * u2
    if np.max(np.abs(u.imag)) > 1e-10 * max(np.max(np.abs(u.real)), 1e-300):
        raise ArithmeticError("reconstructed ansatz has a non-negligible imaginary part")
    u = u.real
    return FieldState(0.0, Field2D(n, L, u[0]), Field2D(n, L, u[1]))


@dataclass
class SteadyResidualReport:
    sup_norm: float
    l2_norm: float
    field: Field2D


def steady_residual(model, sym, c, state, lam):
    """Residual of the co-rotating steady equation on the masked inner disk.

    Assembles convolution (FFT multiplier), -c * (x d_y - y d_x), and the
    full reaction term; norms are reported over |x| <= 0.8 L to keep
    periodic-wrap contamination out.
    """
    grid = state.grid
    n, L = grid.n, grid.L
    h = 2.0 * L / n
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    KX, KY = np.meshgrid(k, k)
    kmag = np.hypot(KX, KY)
    mult = np.asarray(eval_symbol(sym, kmag))

    u = np.stack([state.u.data.real, state.v.data.real])
    uh = np.fft.fft2(u, axes=(-2, -1))
    conv = np.fft.ifft2(mult * uh, axes=(-2, -1)).real
    ux = np.fft.ifft2(1j * KX * uh, axes=(-2, -1)).real
    uy = np.fft.ifft2(1j * KY * uh, axes=(-2, -1)).real
    x1 = grid.axis()
    X, Y = np.meshgrid(x1, x1)
    dtheta = X * uy - Y * ux

    res = conv - c * dtheta + np.asarray(model.f(u, lam)).real
    mask = np.hypot(X, Y) <= 0.8 * L
    mag = np.sqrt(res[0] ** 2 + res[1] ** 2)
    sup = float(np.abs(res[:, mask]).max())
    l2 = float(np.sqrt(np.sum(mag[mask] ** 2) * grid.cell_area))
    return SteadyResidualReport(sup, l2, Field2D(n, L, mag))
