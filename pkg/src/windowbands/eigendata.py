"""Limiting-cell spectral data and the junction boundary functionals.

The decoupled periodicity cell carries an eigenvalue lambda0 of multiplicity k
with an orthonormal eigenfunction basis psi_1..psi_k.  Everything downstream
needs only the traces of those eigenfunctions at the junction points
M_minus = (0, 0) and M_plus = (1, 0): the values and the x2-derivatives.

Two boundary functionals drive all leading-order band coefficients:

    l_theta(psi)  = psi(M+) e^{-i theta} - psi(M-)
    l'_theta(psi) = d_psi/d_x2(M+) e^{-i theta} + d_psi/d_x2(M-)

Note the plus sign in l'_theta.  A difference-type variant of l'_theta is
also provided (``l_theta_prime_diff``); see bands.lambda_10_diff for where it
matters.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateL, NondegeneracyViolated

#: relative tolerance for the non-degeneracy test |psi_1(M+)| != |psi_1(M-)|
CONDITION_TOL = 1e-9

#: absolute floor below which ||L(theta)|| counts as degenerate
DEGENERATE_L_TOL = 1e-12


@dataclass(frozen=True)
class TraceData:
    """Traces of one cell eigenfunction at the junction points."""

    value_plus: complex
    value_minus: complex
    deriv_plus: complex
    deriv_minus: complex

    def __post_init__(self):
        for name in ("value_plus", "value_minus", "deriv_plus", "deriv_minus"):
            z = complex(getattr(self, name))
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise ValueError(f"trace entry {name} is not finite: {z!r}")
            object.__setattr__(self, name, z)

    @property
    def is_real(self) -> bool:
        return all(
            getattr(self, n).imag == 0.0
            for n in ("value_plus", "value_minus", "deriv_plus", "deriv_minus")
        )


@dataclass(frozen=True)
class CellEigenData:
    """A limiting eigenvalue, its multiplicity, and per-eigenfunction traces.

    The traces are stored as given; orthonormality of the underlying
    eigenfunctions is the producer's responsibility.  The non-degeneracy
    precondition on the first eigenfunction is exposed as a property and
    enforced explicitly by require_nondegenerate (constant-mode data with
    equal junction values is still representable — the method then simply
    degenerates at theta = 0).
    """

    lambda0: float
    traces: tuple[TraceData, ...]

    def __post_init__(self):
        object.__setattr__(self, "traces", tuple(self.traces))
        if len(self.traces) < 1:
            raise ValueError("at least one trace is required")

    @property
    def multiplicity(self) -> int:
        return len(self.traces)

    @property
    def all_real(self) -> bool:
        return all(t.is_real for t in self.traces)

    @property
    def nondegenerate(self) -> bool:
        """|psi_1(M+)| != |psi_1(M-)| up to relative tolerance."""
        t0 = self.traces[0]
        ap, am = abs(t0.value_plus), abs(t0.value_minus)
        return abs(ap - am) > CONDITION_TOL * max(ap, am, 1.0)


def require_nondegenerate(data: CellEigenData) -> CellEigenData:
    """Enforce the band-analysis precondition on the first eigenfunction.

    Symmetric cells (equal junction moduli) make the log band degenerate at
    theta = 0; pipelines that rely on the leading-order formulas for all
    quasi-momenta call this up front.
    """
    if not data.nondegenerate:
        t0 = data.traces[0]
        raise NondegeneracyViolated(
            f"|psi_1(M+)|={abs(t0.value_plus):.12g} and "
            f"|psi_1(M-)|={abs(t0.value_minus):.12g} coincide within "
            f"relative tolerance {CONDITION_TOL:g}"
        )
    return data


def l_theta(trace: TraceData, theta: float) -> complex:
    """Value functional: psi(M+) e^{-i theta} - psi(M-)."""
    return trace.value_plus * cmath.exp(-1j * theta) - trace.value_minus


def l_theta_prime(trace: TraceData, theta: float) -> complex:
    """Derivative functional: d_psi(M+) e^{-i theta} + d_psi(M-)."""
    return trace.deriv_plus * cmath.exp(-1j * theta) + trace.deriv_minus


def l_theta_prime_diff(trace: TraceData, theta: float) -> complex:
    """Difference-type derivative functional: d_psi(M+) e^{-i theta} - d_psi(M-).

    Not part of the primary coefficient formulas; used by the
    flux-consistent quadratic-band coefficient (bands.lambda_10_diff).
    """
    return trace.deriv_plus * cmath.exp(-1j * theta) - trace.deriv_minus


@dataclass(frozen=True)
class FunctionalVectors:
    """The vectors L, L' of boundary functionals at one quasi-momentum.

    Inner-product convention on C^k: (u, v) = sum_j u_j * conj(v_j).
    """

    theta: float
    L: np.ndarray = field(repr=False)
    Lp: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return self.L.shape[0]

    @property
    def norm_L_sq(self) -> float:
        return float(np.vdot(self.L, self.L).real)

    @property
    def norm_Lp_sq(self) -> float:
        return float(np.vdot(self.Lp, self.Lp).real)

    @property
    def inner_Lp_L(self) -> complex:
        """(L', L) = sum_j L'_j conj(L_j)."""
        return complex(np.dot(self.Lp, np.conj(self.L)))


def functional_vectors(data: CellEigenData, theta: float) -> FunctionalVectors:
    """Assemble L(theta) and L'(theta) from the cell traces.

    Raises DegenerateL when ||L(theta)|| is numerically zero relative to the
    trace magnitudes.
    """
    L = np.array([l_theta(t, theta) for t in data.traces], dtype=complex)
    Lp = np.array([l_theta_prime(t, theta) for t in data.traces], dtype=complex)
    scale = max(
        (max(abs(t.value_plus), abs(t.value_minus)) for t in data.traces),
        default=0.0,
    )
    if np.linalg.norm(L) <= DEGENERATE_L_TOL * max(scale, 1.0):
        raise DegenerateL(f"||L(theta)|| ~ 0 at theta={theta:.12g}")
    L.setflags(write=False)
    Lp.setflags(write=False)
    return FunctionalVectors(theta=float(theta), L=L, Lp=Lp)


# ---------------------------------------------------------------------------
# eigendata file format


def eigendata_to_dict(data: CellEigenData) -> dict:
    return {
        "lambda0": data.lambda0,
        "k": data.multiplicity,
        "traces": [
            {
                "value_plus": [t.value_plus.real, t.value_plus.imag],
                "value_minus": [t.value_minus.real, t.value_minus.imag],
                "deriv_plus": [t.deriv_plus.real, t.deriv_plus.imag],
                "deriv_minus": [t.deriv_minus.real, t.deriv_minus.imag],
            }
            for t in data.traces
        ],
    }


def eigendata_from_dict(obj: dict) -> CellEigenData:
    traces = obj["traces"]
    if obj["k"] != len(traces):
        raise ValueError(f"k={obj['k']} does not match {len(traces)} traces")
    return CellEigenData(
        lambda0=float(obj["lambda0"]),
        traces=tuple(
            TraceData(
                value_plus=complex(*t["value_plus"]),
                value_minus=complex(*t["value_minus"]),
                deriv_plus=complex(*t["deriv_plus"]),
                deriv_minus=complex(*t["deriv_minus"]),
            )
            for t in traces
        ),
    )


def dump_eigendata(data: CellEigenData, path) -> None:
    # default float repr is shortest-exact, so the round trip is bit-exact
    with open(path, "w") as fh:
        json.dump(eigendata_to_dict(data), fh, indent=2)
        fh.write("\n")


def load_eigendata(path) -> CellEigenData:
    with open(path) as fh:
        return eigendata_from_dict(json.load(fh))
