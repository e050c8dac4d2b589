"""Periodic-square fields, angular mode decomposition, and weighted norms.

Fields live on [-L, L)^2 with n points per axis, indexed ``data[iy, ix]``.
The angular decomposition samples circles by bilinear interpolation (a
diagnostic-grade choice: these norms gate tests, not the solver path) and
extracts modes with an FFT over equispaced angles.

Weighted norms follow the two bracket conventions used throughout:
Kondratiev weights gain one power of <x> = (1+|x|^2)^(1/2) per derivative
order, plain weighted Sobolev norms keep <x>^gamma for every term.
"""

import enum
import os
import re
from dataclasses import dataclass, field as dc_field

import numpy as np

from .accel import NUMBA_ENABLED, njit, prange
from .errors import RangeError, ShapeError


def grid_coords(n, L):
    """1-d coordinate array for one axis of the periodic square."""
    return -L + (2.0 * L / n) * np.arange(n)


@dataclass(frozen=True)
class Field2D:
    """Complex (or real-valued) samples on the periodic square."""

    n: int
    L: float
    data: np.ndarray

    def __post_init__(self):
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError("grid size must be a power of two, >= 8")
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.data.shape != (self.n, self.n):
            raise ShapeError(f"data shape {self.data.shape} != ({self.n}, {self.n})")

    @property
    def cell_area(self):
        return (2.0 * self.L / self.n) ** 2

    def axis(self):
        return grid_coords(self.n, self.L)

    def meshes(self):
        x = self.axis()
        return np.meshgrid(x, x)  # X[iy, ix] = x[ix], Y[iy, ix] = x[iy]


def field_from_function(n, L, fn, dtype=np.complex128):
    x = grid_coords(n, L)
    X, Y = np.meshgrid(x, x)
    return Field2D(n, L, np.asarray(fn(X, Y), dtype=dtype))


@dataclass
class FieldState:
    """A two-component state (u, v) at time t on a shared grid."""

    t: float
    u: Field2D
    v: Field2D

    def __post_init__(self):
        if (self.u.n, self.u.L) != (self.v.n, self.v.L):
            raise ShapeError("u and v live on different grids")

    @property
    def grid(self):
        return self.u

    def is_finite(self):
        return bool(np.all(np.isfinite(self.u.data)) and np.all(np.isfinite(self.v.data)))


# --------------------------------------------------------------------------
# bilinear circle sampling (hot path for large mode counts)


@njit(cache=True, parallel=True)
def _bilinear_numba(data, L, n, xq, yq, out):  # pragma: no cover - numba path
    h = 2.0 * L / n
    for i in prange(xq.size):
        fx = (xq[i] + L) / h
        fy = (yq[i] + L) / h
        ix = int(np.floor(fx))
        iy = int(np.floor(fy))
        tx = fx - ix
        ty = fy - iy
        ix0 = ix % n
        iy0 = iy % n
        ix1 = (ix + 1) % n
        iy1 = (iy + 1) % n
        out[i] = (
            data[iy0, ix0] * (1 - tx) * (1 - ty)
            + data[iy0, ix1] * tx * (1 - ty)
            + data[iy1, ix0] * (1 - tx) * ty
            + data[iy1, ix1] * tx * ty
        )


def _bilinear_numpy(data, L, n, xq, yq, out):
    h = 2.0 * L / n
    fx = (xq + L) / h
    fy = (yq + L) / h
    ix = np.floor(fx).astype(np.int64)
    iy = np.floor(fy).astype(np.int64)
    tx = fx - ix
    ty = fy - iy
    ix0 = np.mod(ix, n)
    iy0 = np.mod(iy, n)
    ix1 = np.mod(ix + 1, n)
    iy1 = np.mod(iy + 1, n)
    out[:] = (
        data[iy0, ix0] * (1 - tx) * (1 - ty)
        + data[iy0, ix1] * tx * (1 - ty)
        + data[iy1, ix0] * (1 - tx) * ty
        + data[iy1, ix1] * tx * ty
    )


def sample_bilinear(field, xq, yq):
    """Sample the field at arbitrary points with periodic wraparound."""
    xq = np.ascontiguousarray(np.asarray(xq, dtype=float).ravel())
    yq = np.ascontiguousarray(np.asarray(yq, dtype=float).ravel())
    data = np.ascontiguousarray(field.data.astype(np.complex128, copy=False))
    out = np.empty(xq.size, dtype=np.complex128)
    if NUMBA_ENABLED:
        _bilinear_numba(data, field.L, field.n, xq, yq, out)
    else:
        _bilinear_numpy(data, field.L, field.n, xq, yq, out)
    return out


# --------------------------------------------------------------------------
# angular decomposition


@dataclass
class AngularDecomposition:
    """Radial profiles f_n(r) with f(r e^{i theta}) = sum_n f_n(r) e^{i n theta}."""

    n_max: int
    radial_grid: np.ndarray
    profiles: dict

    def __post_init__(self):
        r = np.asarray(self.radial_grid, dtype=float)
        if r.ndim != 1 or np.any(np.diff(r) <= 0) or np.any(r < 0):
            raise ValueError("radial_grid must be strictly increasing and >= 0")
        for n in range(-self.n_max, self.n_max + 1):
            if n not in self.profiles:
                raise ShapeError(f"missing angular mode {n}")

    def mode(self, n):
        if abs(n) > self.n_max:
            raise ShapeError(f"mode {n} beyond n_max={self.n_max}")
        return self.profiles[n]


def circle_samples(field, radii, m_angles):
    """Values of the field on circles, shape (len(radii), m_angles)."""
    radii = np.asarray(radii, dtype=float)
    theta = 2.0 * np.pi * np.arange(m_angles) / m_angles
    xq = np.outer(radii, np.cos(theta))
    yq = np.outer(radii, np.sin(theta))
    vals = sample_bilinear(field, xq, yq)
    return vals.reshape(len(radii), m_angles), theta


def decompose_angular(field, n_max, radial_grid):
    """Angular Fourier coefficients by trapezoid quadrature over circles."""
    radial_grid = np.asarray(radial_grid, dtype=float)
    if np.any(radial_grid >= field.L):
        raise RangeError("radial samples must stay inside [0, L)")
    m = max(64, 8 * max(n_max, 1))
    vals, _ = circle_samples(field, radial_grid, m)
    coeffs = np.fft.fft(vals, axis=1) / m
    profiles = {}
    for n in range(-n_max, n_max + 1):
        profiles[n] = coeffs[:, n % m].copy()
    return AngularDecomposition(n_max, radial_grid, profiles)


def reconstruct(dec, r, theta):
    """Sum of modes at (r, theta); linear interpolation along the radius."""
    r_arr = np.asarray(r, dtype=float)
    grid = dec.radial_grid
    if np.any(r_arr < grid[0] - 1e-12) or np.any(r_arr > grid[-1] + 1e-12):
        raise RangeError("radius outside the decomposition's radial grid")
    theta_arr = np.asarray(theta, dtype=float)
    out = np.zeros(np.broadcast(r_arr, theta_arr).shape, dtype=np.complex128)
    for n in range(-dec.n_max, dec.n_max + 1):
        prof = dec.profiles[n]
        fn = np.interp(r_arr, grid, prof.real) + 1j * np.interp(
            r_arr, grid, prof.imag
        )
        out = out + fn * np.exp(1j * n * theta_arr)
    if np.isscalar(r) and np.isscalar(theta):
        return complex(out)
    return out


# --------------------------------------------------------------------------
# weighted norms


class NormKind(enum.Enum):
    KONDRATIEV = "kondratiev"
    WEIGHTED_SOBOLEV = "weighted_sobolev"


@dataclass(frozen=True)
class WeightedNormSpec:
    s: int
    gamma: float
    kind: NormKind = NormKind.KONDRATIEV

    def __post_init__(self):
        if not 0 <= self.s <= 2:
            raise ValueError("derivative order s must be 0, 1 or 2")


_MULTI_INDICES = {0: [(0, 0)], 1: [(1, 0), (0, 1)], 2: [(2, 0), (1, 1), (0, 2)]}


def spectral_derivative(field, ax, ay):
    """D^(ax, ay) by Fourier multipliers (i kx)^ax (i ky)^ay."""
    h = 2.0 * field.L / field.n
    k = 2.0 * np.pi * np.fft.fftfreq(field.n, d=h)
    mult = np.multiply.outer((1j * k) ** ay, (1j * k) ** ax)  # [ky, kx]
    return np.fft.ifft2(np.fft.fft2(field.data) * mult)


def weighted_norm(field, spec):
    """L2-type norm with <x>^w weights; w depends on spec.kind as documented."""
    X, Y = field.meshes()
    bracket_sq = 1.0 + X**2 + Y**2
    total = 0.0
    for order in range(spec.s + 1):
        for ax, ay in _MULTI_INDICES[order]:
            w = spec.gamma + order if spec.kind is NormKind.KONDRATIEV else spec.gamma
            deriv = (
                field.data
                if (ax, ay) == (0, 0)
                else spectral_derivative(field, ax, ay)
            )
            total += float(
                np.sum(bracket_sq**w * np.abs(deriv) ** 2) * field.cell_area
            )
    return float(np.sqrt(total))


@dataclass
class GrowthBoundReport:
    c_estimates: np.ndarray
    monotone_tail: bool
    degenerate: bool = False


def growth_bound_check(field, gamma, radii):
    """Estimate sup_{|x|=r} |f| r^(gamma+1) / ||f|| over the given radii.

    For fields with finite Kondratiev (s=2) norm the estimates should stay
    bounded; the boolean flags whether they stop growing past the first third
    of the radius list. The lemma's constant is non-constructive, so only
    estimates are reported, never pass/fail against an absolute bound.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii >= field.L) or np.any(radii <= 0):
        raise RangeError("radii must lie in (0, L)")
    norm = weighted_norm(field, WeightedNormSpec(2, gamma, NormKind.KONDRATIEV))
    if norm == 0.0 or not np.isfinite(norm):
        return GrowthBoundReport(np.zeros(len(radii)), False, degenerate=True)
    vals, _ = circle_samples(field, radii, 512)
    sup_circle = np.abs(vals).max(axis=1)
    c = sup_circle * radii ** (gamma + 1.0) / norm
    k = max(1, len(radii) // 3)
    tail = c[k - 1 :]
    cmax = float(c.max())
    monotone = bool(np.all(np.diff(tail) <= 1e-6 * cmax + 1e-15))
    return GrowthBoundReport(c, monotone, degenerate=False)


# --------------------------------------------------------------------------
# CSV serialization: one file per mode, columns r, Re(f_n), Im(f_n)

_MODE_FILE = re.compile(r"mode_([+-]\d+)\.csv$")


def mode_filename(n):
    return f"mode_{n:+d}.csv"


def save_decomposition_csv(dec, directory):
    os.makedirs(directory, exist_ok=True)
    paths = []
    for n in sorted(dec.profiles):
        prof = dec.profiles[n]
        path = os.path.join(directory, mode_filename(n))
        np.savetxt(
            path,
            np.column_stack([dec.radial_grid, prof.real, prof.imag]),
            delimiter=",",
            header="r,re,im",
            comments="",
        )
        paths.append(path)
    return paths


def load_decomposition_csv(directory):
    profiles = {}
    grid = None
    for name in sorted(os.listdir(directory)):
        match = _MODE_FILE.match(name)
        if not match:
            continue
        n = int(match.group(1))
        data = np.loadtxt(os.path.join(directory, name), delimiter=",", skiprows=1)
        grid = data[:, 0]
        profiles[n] = data[:, 1] + 1j * data[:, 2]
    if grid is None:
        raise FileNotFoundError(f"no mode_*.csv files in {directory}")
    n_max = max(abs(n) for n in profiles)
    return AngularDecomposition(n_max, grid, profiles)
