"""Hopf data, mode matrices, resonant vectors, and reduced-equation coefficients.

All pairings here are the *bilinear* form <a, b> = sum_i a_i b_i, with no
conjugation; the left eigenvectors are eigenvectors of the plain transpose.
This is the convention under which the two-component closed forms of the
FitzHugh-Nagumo instantiation (see :mod:`nlocwave.fhn`) come out right, and
it is applied consistently to the projection and every coefficient.

The quadratic and cubic tensors are stored fully symmetrized, which makes
the contraction order irrelevant and results deterministic.
"""

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .errors import NotHopfError, ResonanceError, ShapeError

_IDENT = np.eye(2)


def bilinear(a, b):
    """Unconjugated pairing sum_i a_i b_i."""
    return complex(np.sum(np.asarray(a) * np.asarray(b)))


def symmetrize_bilinear(t):
    t = np.asarray(t, dtype=complex)
    return 0.5 * (t + t.transpose(0, 2, 1))


def symmetrize_trilinear(t):
    t = np.asarray(t, dtype=complex)
    acc = np.zeros_like(t)
    for perm in [(1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2), (3, 2, 1)]:
        acc += t.transpose((0,) + perm)
    return acc / 6.0


def quad_apply(m, u, v):
    """M(u, v) with grid broadcasting over trailing axes of u, v."""
    return np.einsum("ijk,j...,k...->i...", m, u, v)


def cubic_apply(n, u, v, w):
    return np.einsum("ijkl,j...,k...,l...->i...", n, u, v, w)


@dataclass
class ReactionModel:
    """Two-component reaction term split into Taylor data around the origin.

    ``f(U, lam)`` evaluates the full reaction term; ``a0`` is its Jacobian at
    (0, 0), ``a1_slope`` the lambda-slope of the Jacobian, ``m0`` the
    symmetric bilinear (Hessian/2) tensor and ``n0_tensor`` the symmetric
    trilinear (third derivative/6) tensor, so the expansion reads
    ``f = a0 U + lam a1 U + m0 U U + n0 U U U + ...``.
    """

    f: Callable
    a0: np.ndarray
    a1_slope: np.ndarray
    m0: np.ndarray
    n0_tensor: np.ndarray
    m1_slope: Optional[np.ndarray] = None
    n1_slope: Optional[np.ndarray] = None

    def __post_init__(self):
        self.a0 = np.asarray(self.a0, dtype=complex)
        self.a1_slope = np.asarray(self.a1_slope, dtype=complex)
        self.m0 = np.asarray(self.m0, dtype=complex)
        self.n0_tensor = np.asarray(self.n0_tensor, dtype=complex)
        if self.m1_slope is None:
            self.m1_slope = np.zeros((2, 2, 2), dtype=complex)
        if self.n1_slope is None:
            self.n1_slope = np.zeros((2, 2, 2, 2), dtype=complex)
        for name, arr, shape in [
            ("a0", self.a0, (2, 2)),
            ("a1_slope", self.a1_slope, (2, 2)),
            ("m0", self.m0, (2, 2, 2)),
            ("n0_tensor", self.n0_tensor, (2, 2, 2, 2)),
        ]:
            if arr.shape != shape:
                raise ShapeError(f"{name} must have shape {shape}")
        if not np.allclose(self.m0, self.m0.transpose(0, 2, 1), atol=1e-13):
            raise ValueError("m0 must be symmetric under argument swap")
        if not np.allclose(
            self.n0_tensor, symmetrize_trilinear(self.n0_tensor), atol=1e-13
        ):
            raise ValueError("n0_tensor must be symmetric under all permutations")
        zero = np.zeros(2)
        for lam in (-0.3, -0.1, 0.0, 0.1, 0.3):
            if np.max(np.abs(self.f(zero, lam))) > 1e-12:
                raise ValueError("reaction term must vanish at U = 0 for all lambda")
        jac = np.empty((2, 2), dtype=complex)
        h = 1e-6
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            jac[:, j] = (self.f(e, 0.0) - self.f(-e, 0.0)) / (2 * h)
        if np.max(np.abs(jac - self.a0)) > 1e-6 * (1 + np.max(np.abs(self.a0))):
            raise ValueError("finite-difference Jacobian of f at 0 disagrees with a0")


def model_from_tensors(a0, a1_slope, m0, n0_tensor):
    """Polynomial reaction model assembled from its Taylor tensors."""
    a0 = np.asarray(a0, dtype=complex)
    a1_slope = np.asarray(a1_slope, dtype=complex)
    m0 = symmetrize_bilinear(m0)
    n0t = symmetrize_trilinear(n0_tensor)

    def f(U, lam):
        U = np.asarray(U)
        lin = np.einsum("ij,j...->i...", a0 + lam * a1_slope, U)
        return lin + quad_apply(m0, U, U) + cubic_apply(n0t, U, U, U)

    return ReactionModel(f, a0, a1_slope, m0, n0t)


@dataclass
class HopfData:
    omega: float
    w1: np.ndarray
    w1_star: np.ndarray
    c_star: float
    n0: int


def _fix_phase(vec):
    """Rotate so the first nonzero component is real and negative."""
    v = np.asarray(vec, dtype=complex)
    k = 0 if abs(v[0]) > 1e-12 * np.linalg.norm(v) else 1
    return v * (-np.conj(v[k]) / abs(v[k]))


def hopf_data(model, n0):
    """Frequency and eigenvector pair of the critical linearization.

    The right eigenvector keeps the raw companion scale, (a01, nu - a00) up
    to a phase rotation that makes its first nonzero component real and
    negative; the left eigenvector is then scaled so the bilinear pairing is
    exactly 1. The cubic coefficients are quadratic in the eigenvector
    scale, so pinning it this way is what makes them reproducible (and what
    matches the two-component closed forms in :mod:`nlocwave.fhn`).
    """
    if n0 == 0:
        raise ValueError("n0 must be a nonzero integer")
    a0 = model.a0
    scale = np.linalg.norm(a0) + 1e-300
    eigvals = np.linalg.eigvals(a0)
    if np.max(np.abs(eigvals.real)) > 1e-8 * scale:
        raise NotHopfError(np.trace(a0))
    k = int(np.argmax(eigvals.imag))
    omega = float(eigvals[k].imag)
    if omega <= 0:
        raise NotHopfError(np.trace(a0))
    nu = 1j * omega
    if abs(a0[0, 1]) > 1e-12 * scale:
        w1_raw = np.array([a0[0, 1], nu - a0[0, 0]])
    else:
        w1_raw = np.array([nu - a0[1, 1], a0[1, 0]])
    w1 = _fix_phase(w1_raw)

    at = a0.T
    if abs(at[0, 1]) > 1e-12 * scale:
        w1_star_raw = np.array([at[0, 1], nu - at[0, 0]])
    else:
        w1_star_raw = np.array([nu - at[1, 1], at[1, 0]])
    p = bilinear(w1_star_raw, w1)
    if abs(p) < 1e-12 * scale * np.linalg.norm(w1):
        raise NotHopfError(np.trace(a0), "left/right eigenvectors are degenerate")
    w1_star = w1_star_raw / p
    return HopfData(omega, w1, w1_star, omega / n0, int(n0))


@dataclass
class ModeMatrix:
    b_n: np.ndarray
    eigenvalues: np.ndarray


def mode_matrix(hopf, a0, n):
    """B_n = A0 - i c* n I with its eigenvalues for diagnostics."""
    b = np.asarray(a0, dtype=complex) - 1j * hopf.c_star * n * _IDENT
    return ModeMatrix(b, np.linalg.eigvals(b))


def _solve_checked(mat, rhs, label):
    if abs(np.linalg.det(mat)) <= 1e-12 * (np.linalg.norm(mat) ** 2 + 1e-300):
        raise ResonanceError(label)
    return np.linalg.solve(mat, rhs)


def resonant_vectors(model, hopf):
    """Second-order ansatz vectors from the three 2x2 resonance systems."""
    w1 = hopf.w1
    w1b = np.conj(w1)
    m0 = model.m0
    a0 = model.a0
    two_icn = 2j * hopf.n0 * hopf.c_star
    v1 = _solve_checked(
        two_icn * _IDENT - a0, quad_apply(m0, w1, w1), "(2 i n0 c* - A0)"
    )
    vm1 = _solve_checked(
        -two_icn * _IDENT - a0, quad_apply(m0, w1b, w1b), "(-2 i n0 c* - A0)"
    )
    v0 = _solve_checked(-a0, 2.0 * quad_apply(m0, w1, w1b), "(-A0)")
    return v1, v0, vm1


@dataclass
class NormalFormCoefficients:
    nu1: complex
    a1: complex
    a2: complex
    v1: np.ndarray
    v0: np.ndarray
    vm1: np.ndarray

    @property
    def a(self):
        return self.a1 + self.a2

    def as_dict(self):
        c = lambda z: [float(np.real(z)), float(np.imag(z))]
        return {
            "nu1": c(self.nu1),
            "a1": c(self.a1),
            "a2": c(self.a2),
            "a": c(self.a),
            "V1": [c(z) for z in self.v1],
            "V0": [c(z) for z in self.v0],
            "Vm1": [c(z) for z in self.vm1],
        }


def coefficients(model, hopf):
    """Cubic coefficients of the reduced equation.

    a1 collects the quadratic-quadratic interactions through the second-order
    vectors; a2 carries the combinatorial factor 3 that counts the resonant
    ways of drawing one conjugate factor from the cubic term. nu1 is the
    lambda-slope of the critical eigenvalue.
    """
    v1, v0, vm1 = resonant_vectors(model, hopf)
    w1 = hopf.w1
    w1b = np.conj(w1)
    ws = hopf.w1_star
    m0 = model.m0
    a1 = bilinear(ws, 2.0 * (quad_apply(m0, w1, v0) + quad_apply(m0, w1b, v1)))
    a2 = bilinear(ws, 3.0 * cubic_apply(model.n0_tensor, w1, w1, w1b))
    nu1 = bilinear(ws, model.a1_slope @ w1)
    return NormalFormCoefficients(nu1, a1, a2, v1, v0, vm1)


def project_parallel(decs, hopf):
    """Critical-mode amplitude w(r) = <W1*, U_{n0}(r)> from a two-component
    angular decomposition."""
    dec_u, dec_v = decs
    if not np.array_equal(dec_u.radial_grid, dec_v.radial_grid):
        raise ShapeError("component decompositions use different radial grids")
    un0 = dec_u.mode(hopf.n0)
    vn0 = dec_v.mode(hopf.n0)
    return hopf.w1_star[0] * un0 + hopf.w1_star[1] * vn0
