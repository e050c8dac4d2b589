"""Nonlocal FitzHugh-Nagumo instantiation and its closed-form reduction data.

System (in the original variables):

    u_t = K * u + (u - u^3 - v) / tau
    v_t = beta u + delta

with homogeneous steady state u* = -delta/beta, v* = u* - u*^3. In deviation
variables around that state the linearization at criticality is
A0 = [[0, -1/tau], [beta, 0]], the bifurcation-parameter slope enters
through A1 = [[1/tau, 0], [0, 0]], and the only nonlinear terms are
-(3 u* w^2 + w^3)/tau in the first component.

:func:`closed_form_coefficients` spells out the reduction quantities as
explicit formulas (hand-derived from the 2x2 systems, no linear algebra at
runtime) so they can serve as an independent oracle for the generic tensor
pipeline in :mod:`nlocwave.normalform`.
"""

import numpy as np

from .normalform import model_from_tensors


def steady_state(beta, delta):
    """Homogeneous rest state (u*, v*)."""
    u_star = -delta / beta
    return u_star, u_star - u_star**3


def fitzhugh_nagumo_model(tau, beta, delta):
    """Deviation-variable reaction model at criticality."""
    if tau <= 0 or beta <= 0:
        raise ValueError("tau and beta must be positive")
    u_star, _ = steady_state(beta, delta)
    a0 = np.array([[0.0, -1.0 / tau], [beta, 0.0]])
    a1 = np.array([[1.0 / tau, 0.0], [0.0, 0.0]])
    m0 = np.zeros((2, 2, 2))
    m0[0, 0, 0] = -3.0 * u_star / tau
    n0t = np.zeros((2, 2, 2, 2))
    n0t[0, 0, 0, 0] = -1.0 / tau
    return model_from_tensors(a0, a1, m0, n0t)


def closed_form_coefficients(tau, beta, delta):
    """Reduction data for the system above, as explicit formulas.

    Solving the three 2x2 resonance systems by hand (A0 maps (x, y) to
    (-y/tau, beta x), so a right-hand side along the first coordinate axis
    forces the solution onto the second):

        (2 i omega - A0) V1  = -(3 u*/tau^3) (1, 0)   =>  V1 as below
        -A0 V0               = -(6 u*/tau^3) (1, 0)   =>  V0 = (u*/tau^2) (0, -6)
        V(-1) = conj(V1)

    and contracting with W1* = (1/2)(-tau, -i sqrt(tau/beta)) gives

        a1 = -6 i u*^2 / (tau^3 sqrt(beta tau)),   a2 = -3 / (2 tau^3).

    Because V0's first component vanishes, a1 is purely imaginary: the
    quadratic self-interaction contributes no real part for this system.
    """
    u_star, v_star = steady_state(beta, delta)
    omega = np.sqrt(beta / tau)
    sqrt_bt = np.sqrt(beta * tau)
    w1 = np.array([-1.0 / tau, 1j * omega])
    w1_star = 0.5 * np.array([-tau, -1j * np.sqrt(tau / beta)])
    v1 = (u_star / tau**2) * np.array([2j / sqrt_bt, 1.0])
    v0 = (u_star / tau**2) * np.array([0.0, -6.0])
    vm1 = np.conj(v1)
    a1 = -6j * u_star**2 / (tau**3 * sqrt_bt)
    a2 = -1.5 / tau**3
    nu1 = 0.5 / tau
    return {
        "u_star": u_star,
        "v_star": v_star,
        "omega": omega,
        "W1": w1,
        "W1_star": w1_star,
        "V1": v1,
        "V0": v0,
        "Vm1": vm1,
        "a1": a1,
        "a2": a2,
        "a": a1 + a2,
        "nu1": nu1,
    }
