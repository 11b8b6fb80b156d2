"""Boundary-layer fields near the coupling window and the matching algebra.

In rescaled coordinates xi = (x - M)/eps the window occupies
gamma = {|xi_1| < 1, xi_2 = 0} and the remaining slit boundary is
Gamma = {|xi_1| > 1, xi_2 = 0}.  Two harmonic functions on the upper
half-plane carry the entire leading-order layer:

    X0(xi) = Re ln(z + sqrt(z-1) sqrt(z+1)),   z = xi_1 + i xi_2,
    X1(xi) = Re (sqrt(z-1) sqrt(z+1)),

both vanishing on gamma, with zero normal derivative on Gamma, and with far
fields ln|xi| + ln 2 + O(|xi|^-2) and xi_1 - cos(phi)/(2r) + O(r^-2).

The principal square roots of (z-1) and (z+1) composed this way are
continuous on the closed upper half-plane minus the branch points (+-1, 0).
An alternative evaluator replacing z by sin(z) is available behind a flag;
on the real axis |sin t| <= 1 makes its log argument unimodular, so it is
identically zero on all of Gamma and fails the Neumann/far-field contract
(kept only so the property suite can document that failure).

The matching step produces coefficients b of the inner expansions; their
phase relations across the two window faces and the two solvability
conditions reproduce the band coefficients lambda01 and lambda10
independently of the closed-form route in bands.py.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .eigendata import l_theta, l_theta_prime
from .errors import DegenerateL, DomainError
from .rotation import RotationResult

#: central-difference step for residual checks of the inner fields
FD_STEP = 1e-5


@dataclass(frozen=True)
class InnerPoint:
    """Point in the rescaled upper half-plane."""

    xi1: float
    xi2: float

    def __post_init__(self):
        if self.xi2 < 0.0:
            raise DomainError(f"xi2={self.xi2:g} below the half-plane")

    @property
    def z(self) -> complex:
        return complex(self.xi1, self.xi2)


def _window_map(z, use_sin: bool = False):
    """w + sqrt(w-1) sqrt(w+1) with principal branches, w = z or sin z."""
    w = np.sin(z) if use_sin else z
    return w + np.sqrt(w - 1.0) * np.sqrt(w + 1.0)


def X0_grid(z, use_sin: bool = False):
    """Vectorized X0 on complex arrays (upper half-plane assumed)."""
    return np.log(np.abs(_window_map(np.asarray(z, dtype=complex), use_sin)))


def X1_grid(z):
    """Vectorized X1 on complex arrays."""
    z = np.asarray(z, dtype=complex)
    return (np.sqrt(z - 1.0) * np.sqrt(z + 1.0)).real


def X0(p: InnerPoint, use_sin: bool = False) -> float:
    """Log-type layer function: 0 on the window, Neumann on the slit."""
    if p.xi2 == 0.0 and abs(abs(p.xi1) - 1.0) == 0.0:
        raise DomainError("branch point (+-1, 0)")
    return float(X0_grid(p.z, use_sin))


def X1(p: InnerPoint) -> float:
    """Dipole-type layer function with linear far field xi_1 - cos(phi)/(2r)."""
    if p.xi2 == 0.0 and abs(abs(p.xi1) - 1.0) == 0.0:
        raise DomainError("branch point (+-1, 0)")
    return float(X1_grid(p.z))


# ---------------------------------------------------------------------------
# matching coefficients


@dataclass(frozen=True)
class MatchingCoefficients:
    """Inner-expansion coefficients on both window faces at one theta."""

    theta: float
    b01_plus: complex
    b01_minus: complex
    b02_plus: complex
    b02_minus: complex
    b21_plus: complex = 0.0
    b21_minus: complex = 0.0
    b22_plus: complex = 0.0
    b22_minus: complex = 0.0
    b23_plus: complex = 0.0
    b23_minus: complex = 0.0


def inner_field_leading(
    p: InnerPoint, coeffs: MatchingCoefficients, sign: int, epsilon: float
) -> complex:
    """Leading inner field on one face: b01 X0(xi) + b02 ln(eps)."""
    b01 = coeffs.b01_plus if sign > 0 else coeffs.b01_minus
    b02 = coeffs.b02_plus if sign > 0 else coeffs.b02_minus
    return b01 * X0(p) + b02 * math.log(epsilon)


def matching_coefficients_order1(rotation: RotationResult) -> MatchingCoefficients:
    """Coefficients of the log-order inner expansion from the Psi^(1) traces.

        b01_pm = (Psi(M_mp) e^{pm i theta} - Psi(M_pm)) / 2
        b02_pm = (Psi(M_mp) e^{pm i theta} + Psi(M_pm)) / 2

    so that b02 - b01 = Psi(M_pm) on each face (the inner field matches the
    outer value) and b01 flips sign with the phase across the window.
    """
    th = rotation.theta
    t1 = rotation.rotated_traces[0]
    e_p, e_m = cmath.exp(1j * th), cmath.exp(-1j * th)
    b01_p = 0.5 * (t1.value_minus * e_p - t1.value_plus)
    b01_m = 0.5 * (t1.value_plus * e_m - t1.value_minus)
    b02_p = 0.5 * (t1.value_minus * e_p + t1.value_plus)
    b02_m = 0.5 * (t1.value_plus * e_m + t1.value_minus)
    coeffs = MatchingCoefficients(
        theta=th,
        b01_plus=b01_p,
        b01_minus=b01_m,
        b02_plus=b02_p,
        b02_minus=b02_m,
    )
    scale = max(abs(t1.value_plus), abs(t1.value_minus), 1.0)
    assert abs(b02_p - b01_p - t1.value_plus) < 1e-13 * scale
    assert abs(b02_m - b01_m - t1.value_minus) < 1e-13 * scale
    assert abs(b01_p + e_p * b01_m) < 1e-13 * scale
    assert abs(b02_p - e_p * b02_m) < 1e-13 * scale
    return coeffs


def matching_coefficients_order2(rotation: RotationResult) -> MatchingCoefficients:
    """Coefficients of the quadratic-order inner expansion (needs k >= 2).

    Built from the Psi^(2) derivative traces:

        b21_pm = pm (e^{pm i theta} d_Psi2(M_mp) + d_Psi2(M_pm)) / 2
        b22_pm = pm (d_Psi2(M_pm) - e^{pm i theta} d_Psi2(M_mp)) / 2

    and the dipole strength b23 fixed by the first (j = 1) solvability
    condition, whose right-hand side must vanish:

        b23_minus = (b21_minus / 4) conj(D1) / conj(S1),

    S1 = Psi1(M-) - e^{-i theta} Psi1(M+)  (nonzero since |l(Psi1)| = ||L||),
    D1 = d_Psi1(M-) + e^{-i theta} d_Psi1(M+).
    """
    th = rotation.theta
    if rotation.k < 2:
        raise ValueError("quadratic-order matching needs multiplicity >= 2")
    t1, t2 = rotation.rotated_traces[0], rotation.rotated_traces[1]
    e_p, e_m = cmath.exp(1j * th), cmath.exp(-1j * th)
    base = matching_coefficients_order1(rotation)

    b21_p = 0.5 * (e_p * t2.deriv_minus + t2.deriv_plus)
    b21_m = -0.5 * (e_m * t2.deriv_plus + t2.deriv_minus)
    b22_p = 0.5 * (t2.deriv_plus - e_p * t2.deriv_minus)
    b22_m = -0.5 * (t2.deriv_minus - e_m * t2.deriv_plus)

    S1 = t1.value_minus - e_m * t1.value_plus
    if abs(S1) < 1e-12:
        raise DegenerateL(f"window value jump of Psi^(1) vanished at theta={th:.12g}")
    D1 = t1.deriv_minus + e_m * t1.deriv_plus
    b23_m = 0.25 * b21_m * D1.conjugate() / S1.conjugate()
    b23_p = -e_p * b23_m

    scale = max(abs(t2.deriv_plus), abs(t2.deriv_minus), 1.0)
    assert abs(b21_m + b22_m + t2.deriv_minus) < 1e-13 * scale
    assert abs(b21_p + e_p * b21_m) < 1e-13 * scale
    assert abs(b22_p - e_p * b22_m) < 1e-13 * scale
    return MatchingCoefficients(
        theta=th,
        b01_plus=base.b01_plus,
        b01_minus=base.b01_minus,
        b02_plus=base.b02_plus,
        b02_minus=base.b02_minus,
        b21_plus=b21_p,
        b21_minus=b21_m,
        b22_plus=b22_p,
        b22_minus=b22_m,
        b23_plus=b23_p,
        b23_minus=b23_m,
    )


@dataclass(frozen=True)
class SolvabilityReport:
    """Right-hand sides of the two solvability conditions for each j."""

    theta: float
    first_order: tuple[complex, ...]  # j = 1..k; j=1 is lambda01, rest ~ 0
    second_order: tuple[complex, ...]  # j = 2..k; j=2 is lambda10, rest ~ 0


def solvability_check(rotation: RotationResult) -> SolvabilityReport:
    """Evaluate both solvability conditions in the rotated basis.

    First order, for j = 1..k:

        rhs_j = -(pi/2) conj(l_theta(Psi^(j))) l_theta(Psi^(1))

    which equals lambda01 for j = 1 and vanishes for j >= 2 because the
    rotation annihilates l_theta there.  Second order, for j = 2..k:

        rhs_j = pi b23_minus conj(S_j) - (pi b21_minus / 4) conj(D_j)

    with S_j, D_j the window value-jump and flux-sum of Psi^(j); equals
    lambda10 for j = 2 and vanishes for j >= 3.
    """
    th = rotation.theta
    e_m = cmath.exp(-1j * th)
    l1 = l_theta(rotation.rotated_traces[0], th)
    first = tuple(
        -0.5 * math.pi * l_theta(t, th).conjugate() * l1
        for t in rotation.rotated_traces
    )
    if rotation.k < 2:
        return SolvabilityReport(theta=th, first_order=first, second_order=())
    c = matching_coefficients_order2(rotation)
    second = []
    for t in rotation.rotated_traces[1:]:
        Sj = t.value_minus - e_m * t.value_plus
        Dj = t.deriv_minus + e_m * t.deriv_plus
        second.append(
            math.pi * c.b23_minus * Sj.conjugate()
            - 0.25 * math.pi * c.b21_minus * Dj.conjugate()
        )
    return SolvabilityReport(theta=th, first_order=first, second_order=tuple(second))


# ---------------------------------------------------------------------------
# property diagnostics (consumed by tests and the verify subcommand)


def harmonicity_residual(f, points, h: float) -> float:
    """Max |5-point discrete Laplacian| of a scalar field over sample points."""
    worst = 0.0
    for x, y in points:
        lap = (
            f(InnerPoint(x + h, y))
            + f(InnerPoint(x - h, y))
            + f(InnerPoint(x, y + h))
            + f(InnerPoint(x, y - h))
            - 4.0 * f(InnerPoint(x, y))
        ) / h**2
        worst = max(worst, abs(lap))
    return worst


def neumann_residual(f, xi1_samples, h: float) -> float:
    """Max one-sided d/dxi2 of f at Gamma points (|xi1| > 1, xi2 = 0)."""
    worst = 0.0
    for x in xi1_samples:
        d = (f(InnerPoint(x, h)) - f(InnerPoint(x, 0.0))) / h
        worst = max(worst, abs(d))
    return worst


def far_field_residual_X0(r: float, angles=None) -> float:
    """Max |X0 - ln r - ln 2| on a half-circle of radius r; decays as r^-2."""
    if angles is None:
        angles = np.linspace(0.05, math.pi - 0.05, 25)
    z = r * np.exp(1j * angles)
    return float(np.abs(X0_grid(z) - math.log(r) - math.log(2.0)).max())


def far_field_residual_X1(r: float, angles=None) -> float:
    """Max |X1 - xi_1 + cos(phi)/(2r)| on a half-circle; decays as r^-2."""
    if angles is None:
        angles = np.linspace(0.05, math.pi - 0.05, 25)
    z = r * np.exp(1j * angles)
    pred = z.real - np.cos(angles) / (2.0 * r)
    return float(np.abs(X1_grid(z) - pred).max())
