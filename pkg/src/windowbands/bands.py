"""Leading-order band coefficients over the Brillouin zone.

For a limiting eigenvalue lambda0 of multiplicity k the two lowest
perturbed eigenvalue branches behave as

    lambda^(1)(eps, theta) = lambda0 + lambda01(theta)/ln(eps) + ...
    lambda^(2)(eps, theta) = lambda0 + lambda10(theta) eps^2 + ...  (k >= 2)

with closed forms

    lambda01 = -(pi/2) ||L||^2
    lambda10 = (pi/8) (||L||^2 ||L'||^2 - |(L',L)|^2) / ||L||^2.

Since ln(eps) < 0 both bands sit to the right of lambda0.  This module
samples the coefficient functions over theta in [0, 2pi), extracts band
edges by golden-section refinement, and classifies where the extrema sit
(endpoints/center vs genuinely interior points — both cases occur).

``lambda_10_diff`` is a flux-consistent variant of lambda10 derived from
re-doing the second-order matching: the derivative functional enters with a
minus sign (deriv_plus e^{-i theta} - deriv_minus) and the prefactor is
pi/4.  Direct windowed eigensolves converge to this variant, not to the
printed pi/8 plus-convention form; see README for the discrepancy note.
At theta = pi/2 the two conventions give equal |.|^2 for real traces, so
only the factor 2 distinguishes them there.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .eigendata import (
    CellEigenData,
    FunctionalVectors,
    functional_vectors,
    l_theta_prime_diff,
)
from .errors import BandsOverlap, DegenerateL, NotApplicable

#: default relative tolerance for declaring two extremum candidates tied
EXTREMUM_TIE_TOL = 1e-10


def lambda_01(vectors: FunctionalVectors) -> float:
    """Log-band coefficient -(pi/2) ||L||^2; always <= 0."""
    return -0.5 * math.pi * vectors.norm_L_sq


def lambda_10(vectors: FunctionalVectors) -> float:
    """Quadratic-band coefficient, the Cauchy-Schwarz defect form; >= 0."""
    if vectors.k < 2:
        raise NotApplicable("quadratic band requires multiplicity >= 2")
    nL = vectors.norm_L_sq
    if nL <= 0.0:
        raise DegenerateL(f"||L||^2 = 0 at theta={vectors.theta:.12g}")
    defect = nL * vectors.norm_Lp_sq - abs(vectors.inner_Lp_L) ** 2
    return 0.125 * math.pi * max(defect, 0.0) / nL


def lambda_10_diff(data: CellEigenData, theta: float) -> float:
    """Flux-consistent quadratic-band coefficient (minus convention, pi/4).

    Same Cauchy-Schwarz defect structure as lambda_10 but built from the
    difference-type derivative functional and twice the prefactor.  This is
    the coefficient the direct windowed eigensolver reproduces.
    """
    if data.multiplicity < 2:
        raise NotApplicable("quadratic band requires multiplicity >= 2")
    vec = functional_vectors(data, theta)
    Lpd = np.array(
        [l_theta_prime_diff(t, theta) for t in data.traces], dtype=complex
    )
    nL = vec.norm_L_sq
    nLpd = float(np.vdot(Lpd, Lpd).real)
    cross = complex(np.dot(Lpd, np.conj(vec.L)))
    return 0.25 * math.pi * max(nL * nLpd - abs(cross) ** 2, 0.0) / nL


@dataclass(frozen=True)
class BandCoefficients:
    """Sampled theta |-> lambda01, lambda10 over one Brillouin zone."""

    thetas: np.ndarray = field(repr=False)
    lambda01: np.ndarray = field(repr=False)
    lambda10: Optional[np.ndarray] = field(repr=False)
    data: CellEigenData = field(repr=False)

    @property
    def k(self) -> int:
        return self.data.multiplicity


def sample_bands(
    data: CellEigenData, n_samples: int, cross_check_tol: float = 1e-9
) -> BandCoefficients:
    """Evaluate both coefficient functions on a uniform theta grid.

    Every 16th node the quadratic coefficient is recomputed through the
    explicit basis rotation, (pi/8)|l'(Psi^(2))|^2, and the two routes must
    agree to cross_check_tol.
    """
    from .eigendata import l_theta_prime
    from .rotation import rotate_basis

    if n_samples < 16:
        raise ValueError("n_samples must be >= 16")
    thetas = 2.0 * math.pi * np.arange(n_samples) / n_samples
    lam01 = np.empty(n_samples)
    lam10 = np.empty(n_samples) if data.multiplicity >= 2 else None
    for m, th in enumerate(thetas):
        try:
            vec = functional_vectors(data, th)
        except DegenerateL as exc:
            raise DegenerateL(f"{exc} (sample index {m})") from exc
        lam01[m] = lambda_01(vec)
        if lam10 is not None:
            lam10[m] = lambda_10(vec)
            if m % 16 == 0:
                rot = rotate_basis(data, th)
                via_rotation = (
                    0.125
                    * math.pi
                    * abs(l_theta_prime(rot.rotated_traces[1], th)) ** 2
                )
                if abs(via_rotation - lam10[m]) > cross_check_tol:
                    raise AssertionError(
                        f"coefficient routes disagree at theta={th:.6g}: "
                        f"{lam10[m]:.15g} vs {via_rotation:.15g}"
                    )
    thetas.setflags(write=False)
    lam01.setflags(write=False)
    if lam10 is not None:
        lam10.setflags(write=False)
    return BandCoefficients(thetas=thetas, lambda01=lam01, lambda10=lam10, data=data)


@dataclass(frozen=True)
class BandInterval:
    """One leading-order band: edge coefficients and extremizer locations."""

    order: str  # "log_band" | "quadratic_band"
    lower_coeff: float
    upper_coeff: float
    arg_lower: tuple[float, ...]
    arg_upper: tuple[float, ...]
    classification: str  # "endpoints_or_center" | "interior_points"


def _refine(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Golden/Brent bracket search plus a derivative-root polish.

    Value-based minimization alone localizes a smooth extremum only to
    ~sqrt(machine eps); solving f'(t) = 0 (central differences) recovers
    full tol accuracy for tol below that floor.
    """
    res = minimize_scalar(
        f, bounds=(lo, hi), method="bounded", options={"xatol": max(tol, 1e-9)}
    )
    t = float(res.x)
    h = 1e-6
    df = lambda s: (f(s + h) - f(s - h)) / (2 * h)
    a, b = t - 64 * h, t + 64 * h
    try:
        da, db = df(a), df(b)
        if da == 0.0:
            return a
        if da * db < 0:
            t = float(brentq(df, a, b, xtol=max(tol / 10, 4e-16)))
    except ValueError:
        pass
    return t


def _global_extremizers(f, thetas, values, refine_tol, sign):
    """All global extremizers of sign*f (sign=-1: maxima), golden-refined."""
    n = len(thetas)
    step = 2.0 * math.pi / n
    g = lambda t: sign * f(t)
    candidates = []
    vals = sign * values
    for i in range(n):
        # local minima of g on the periodic grid
        if vals[i] <= vals[(i - 1) % n] and vals[i] <= vals[(i + 1) % n]:
            t = _refine(g, thetas[i] - step, thetas[i] + step, refine_tol)
            t %= 2.0 * math.pi
            if abs(t - 2.0 * math.pi) <= 10.0 * refine_tol:
                t = 0.0
            candidates.append((t, g(t)))
    best = min(v for _, v in candidates)
    scale = max(abs(best), 1.0)
    winners = sorted(
        t for t, v in candidates if v - best <= EXTREMUM_TIE_TOL * scale
    )
    # merge duplicates produced by adjacent grid nodes refining to one point
    merged: list[float] = []
    for t in winners:
        if not merged or abs(t - merged[-1]) > 10 * refine_tol:
            merged.append(t)
    # theta=0 and theta=2pi refer to the same fiber; report one representative
    if len(merged) > 1 and abs(merged[-1] - merged[0] - 2.0 * math.pi) <= 10 * refine_tol:
        merged.pop()
    return tuple(merged), sign * best


def _classify(args: tuple[float, ...], refine_tol: float) -> bool:
    special = (0.0, math.pi, 2.0 * math.pi)
    return any(
        min(abs(t - s) for s in special) > 10.0 * refine_tol for t in args
    )


def band_intervals(
    coeffs: BandCoefficients, refine_tol: float = 1e-8
) -> list[BandInterval]:
    """Extract edge coefficients and extremizer sets for both bands."""
    data = coeffs.data
    out = []

    f01 = lambda t: lambda_01(functional_vectors(data, t))
    arg_max, vmax = _global_extremizers(f01, coeffs.thetas, coeffs.lambda01, refine_tol, -1.0)
    arg_min, vmin = _global_extremizers(f01, coeffs.thetas, coeffs.lambda01, refine_tol, 1.0)
    # edge coefficients are -max / -min of the (nonpositive) log coefficient,
    # so the log band is [-max, -min] with -max <= -min
    interior = _classify(arg_max + arg_min, refine_tol)
    out.append(
        BandInterval(
            order="log_band",
            lower_coeff=-vmax,
            upper_coeff=-vmin,
            arg_lower=arg_max,
            arg_upper=arg_min,
            classification="interior_points" if interior else "endpoints_or_center",
        )
    )

    if coeffs.lambda10 is not None:
        f10 = lambda t: lambda_10(functional_vectors(data, t))
        arg_min, vmin = _global_extremizers(f10, coeffs.thetas, coeffs.lambda10, refine_tol, 1.0)
        arg_max, vmax = _global_extremizers(f10, coeffs.thetas, coeffs.lambda10, refine_tol, -1.0)
        interior = _classify(arg_min + arg_max, refine_tol)
        out.append(
            BandInterval(
                order="quadratic_band",
                lower_coeff=vmin,
                upper_coeff=vmax,
                arg_lower=arg_min,
                arg_upper=arg_max,
                classification="interior_points" if interior else "endpoints_or_center",
            )
        )
    return out


@dataclass(frozen=True)
class BandEdges:
    """Concrete band intervals at one window half-width."""

    epsilon: float
    log_band: tuple[float, float]
    quadratic_band: Optional[tuple[float, float]]
    gap_width: Optional[float]
    overlap: bool
    epsilon_threshold: Optional[float]


def band_edges_at_epsilon(
    intervals: list[BandInterval], lambda0: float, epsilon: float
) -> BandEdges:
    """Evaluate leading-order band endpoints at a given epsilon.

    The log band is [lambda0 + L1m/|ln eps|, lambda0 + L1p/|ln eps|]; the
    quadratic band (k >= 2) is [lambda0 + L2m eps^2, lambda0 + L2p eps^2].
    The gap between them closes like eps^2 |ln eps| relative to the log
    scale; the returned threshold is the largest epsilon (bisected on
    (0, e^{-1/2}) where eps^2|ln eps| is monotone) at which the leading
    intervals remain disjoint.  Higher-order corrections O(|ln eps|^{-2})
    and O(eps^2 |ln eps|^{-1}) are not included.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    log_iv = next(iv for iv in intervals if iv.order == "log_band")
    quad_iv = next(
        (iv for iv in intervals if iv.order == "quadratic_band"), None
    )
    alog = abs(math.log(epsilon))
    log_band = (
        lambda0 + log_iv.lower_coeff / alog,
        lambda0 + log_iv.upper_coeff / alog,
    )
    if quad_iv is None:
        return BandEdges(epsilon, log_band, None, None, False, None)
    quad_band = (
        lambda0 + quad_iv.lower_coeff * epsilon**2,
        lambda0 + quad_iv.upper_coeff * epsilon**2,
    )
    gap = log_band[0] - quad_band[1]
    if gap <= 0.0:
        warnings.warn(
            f"leading-order bands overlap at epsilon={epsilon:g}", BandsOverlap
        )
    # disjoint iff eps^2 |ln eps| < L1m / L2p; solve on the monotone branch
    sep = lambda e: quad_iv.upper_coeff * e**2 - log_iv.lower_coeff / abs(math.log(e))
    hi = math.exp(-0.5)
    if sep(hi) <= 0.0:
        threshold = hi
    else:
        lo = 1e-12
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            if sep(mid) > 0.0:
                hi = mid
            else:
                lo = mid
        threshold = lo
    return BandEdges(
        epsilon=epsilon,
        log_band=log_band,
        quadratic_band=quad_band,
        gap_width=gap,
        overlap=gap <= 0.0,
        epsilon_threshold=threshold,
    )
