"""Unitary eigenbasis rotation adapted to the junction functionals.

Given k orthonormal cell eigenfunctions psi_1..psi_k, construct a unitary
k x k matrix a(theta) whose rows define the rotated basis
Psi^(j) = sum_i a[j,i] psi_i satisfying

    l_theta(Psi^(j))  = 0  for j = 2..k,
    l'_theta(Psi^(j)) = 0  for j = 3..k.

Row 1 is conj(L)/||L||, so |l_theta(Psi^(1))|^2 = ||L||^2.  Rows 2..k come
from an intermediate non-orthonormal family

    psi~_i = l_theta(psi_i) psi_1 - l_theta(psi_1) psi_i,   i = 2..k,

whose Gram matrix has the rank-one-plus-identity form
G = outer(L~, conj(L~)) + |l_theta(psi_1)|^2 I, orthonormalized through
G^{-1/2}, with the single derivative-functional constraint absorbed into the
choice of the first orthonormal direction z_2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigendata import (
    CellEigenData,
    FunctionalVectors,
    TraceData,
    functional_vectors,
    l_theta,
    l_theta_prime,
)
from .errors import (
    ConstraintResidual,
    DegenerateFirstFunctional,
    NotPositiveDefinite,
)

#: threshold for the degenerate z_2 direction, relative to the input scale
W_DEGENERATE_TOL = 1e-10

#: hard residual bound on the rotated-basis constraints
CONSTRAINT_TOL = 1e-8


@dataclass(frozen=True)
class GramData:
    """Gram matrix of the intermediate family and its inverse square root."""

    G: np.ndarray = field(repr=False)
    G_inv_sqrt: np.ndarray = field(repr=False)
    Ltilde: np.ndarray = field(repr=False)
    Lptilde: np.ndarray = field(repr=False)
    l1: complex

    def closed_form_inverse(self) -> np.ndarray:
        """Rank-one (Sherman-Morrison) inverse of G.

        G^{-1} = |l1|^{-2} (I - outer(L~, conj(L~)) / ||L||^2) where ||L||^2
        is the FULL norm |l1|^2 + ||L~||^2.
        """
        norm_L_sq = abs(self.l1) ** 2 + float(
            np.vdot(self.Ltilde, self.Ltilde).real
        )
        km1 = self.Ltilde.shape[0]
        return (
            np.eye(km1) - np.outer(self.Ltilde, np.conj(self.Ltilde)) / norm_L_sq
        ) / abs(self.l1) ** 2


@dataclass(frozen=True)
class RotationResult:
    """Unitary rotation matrix and the traces of the rotated eigenfunctions."""

    theta: float
    a: np.ndarray = field(repr=False)
    rotated_traces: tuple[TraceData, ...]

    @property
    def k(self) -> int:
        return self.a.shape[0]


def first_row(data: CellEigenData, theta: float) -> np.ndarray:
    """Unit row conj(L)/||L|| — the only rotated function l_theta sees."""
    vec = functional_vectors(data, theta)  # raises DegenerateL
    return np.conj(vec.L) / np.linalg.norm(vec.L)


def tilde_vectors(data: CellEigenData, theta: float) -> np.ndarray:
    """Coefficient vectors of psi~_i in the psi-basis, stacked as rows.

    Row i-2 (for i = 2..k) has l_theta(psi_i) in slot 0, -l_theta(psi_1) in
    slot i-1, zeros elsewhere.  Every row is annihilated by l_theta.
    """
    if data.multiplicity < 2:
        raise ValueError("tilde vectors need multiplicity >= 2")
    L = functional_vectors(data, theta).L
    if abs(L[0]) == 0.0:
        raise DegenerateFirstFunctional(
            f"l_theta(psi_1) = 0 at theta={theta:.12g}"
        )
    k = data.multiplicity
    V = np.zeros((k - 1, k), dtype=complex)
    V[:, 0] = L[1:]
    V[np.arange(k - 1), np.arange(1, k)] = -L[0]
    return V


def gram(data: CellEigenData, theta: float) -> GramData:
    """Assemble the Gram matrix of the tilde family and its inverse root."""
    vec = functional_vectors(data, theta)
    V = tilde_vectors(data, theta)
    # orthonormal psi-basis: Gram entries reduce to coefficient inner products
    G = V @ V.conj().T
    l1 = complex(vec.L[0])
    evals, Q = np.linalg.eigh(G)
    floor = abs(l1) ** 2
    if evals.min() < floor * (1.0 - 1e-8):
        raise NotPositiveDefinite(
            f"min eig(G)={evals.min():.6g} below guaranteed bound {floor:.6g}"
        )
    G_inv_sqrt = (Q * evals**-0.5) @ Q.conj().T
    return GramData(
        G=G, G_inv_sqrt=G_inv_sqrt, Ltilde=vec.L[1:], Lptilde=vec.Lp[1:], l1=l1
    )


def _rotate_trace(row: np.ndarray, traces) -> TraceData:
    vp = sum(c * t.value_plus for c, t in zip(row, traces))
    vm = sum(c * t.value_minus for c, t in zip(row, traces))
    dp = sum(c * t.deriv_plus for c, t in zip(row, traces))
    dm = sum(c * t.deriv_minus for c, t in zip(row, traces))
    return TraceData(vp, vm, dp, dm)


def rotate_basis(data: CellEigenData, theta: float) -> RotationResult:
    """Construct the full unitary a(theta) and the rotated traces.

    For k = 1 the matrix is the 1x1 phase from first_row.  For k >= 2 the
    direction z_2 = G^{-1/2}(l'(psi_1) L~ - l(psi_1) L~') / norm carries the
    whole derivative functional; the remaining z-vectors complete it to an
    orthonormal basis by Gram-Schmidt on the standard basis in index order.
    """
    a1 = first_row(data, theta)
    k = data.multiplicity
    if k == 1:
        a = a1[None, :].copy()
    else:
        gd = gram(data, theta)
        V = tilde_vectors(data, theta)
        w = gd.G_inv_sqrt @ (
            l_theta_prime(data.traces[0], theta) * gd.Ltilde
            - gd.l1 * gd.Lptilde
        )
        scale = max(np.abs(gd.Ltilde).max(initial=0.0),
                    np.abs(gd.Lptilde).max(initial=0.0), abs(gd.l1))
        Z = []
        nw = np.linalg.norm(w)
        if nw > W_DEGENERATE_TOL * max(scale, 1.0):
            Z.append(w / nw)
        # complete (or, degenerate case, build outright) an orthonormal basis
        for e in np.eye(k - 1, dtype=complex):
            r = e - sum(z * np.vdot(z, e) for z in Z)
            if np.linalg.norm(r) > 1e-10:
                Z.append(r / np.linalg.norm(r))
            if len(Z) == k - 1:
                break
        b = np.array(Z).conj() @ gd.G_inv_sqrt
        rows = b @ V
        rows /= np.linalg.norm(rows, axis=1)[:, None]
        a = np.vstack([a1, rows])

    unit_res = np.abs(a @ a.conj().T - np.eye(k)).max()
    if unit_res > 1e-12:
        raise ConstraintResidual(f"unitarity residual {unit_res:.3e}")
    rotated = tuple(_rotate_trace(a[j], data.traces) for j in range(k))
    lres = max(
        (abs(l_theta(rotated[j], theta)) for j in range(1, k)), default=0.0
    )
    lpres = max(
        (abs(l_theta_prime(rotated[j], theta)) for j in range(2, k)),
        default=0.0,
    )
    if max(lres, lpres) > CONSTRAINT_TOL:
        raise ConstraintResidual(
            f"rotated-basis residuals l:{lres:.3e} l':{lpres:.3e}"
        )
    a.setflags(write=False)
    return RotationResult(theta=float(theta), a=a, rotated_traces=rotated)


@dataclass(frozen=True)
class IdentityReport:
    """Residuals of the two closed-form identities satisfied by the rotation."""

    value_residual: float
    deriv_residual: float | None


def verify_identities(
    result: RotationResult, vectors: FunctionalVectors
) -> IdentityReport:
    """Check |l(Psi^(1))|^2 = ||L||^2 and the k>=2 derivative identity.

    The second identity: |l'(Psi^(2))|^2 = (||L||^2 ||L'||^2 - |(L',L)|^2)
    / ||L||^2, the Cauchy-Schwarz defect of (L, L').  Reports residuals,
    never throws.
    """
    th = result.theta
    r1 = abs(
        abs(l_theta(result.rotated_traces[0], th)) ** 2 - vectors.norm_L_sq
    )
    if result.k < 2:
        return IdentityReport(value_residual=r1, deriv_residual=None)
    rhs = (
        vectors.norm_L_sq * vectors.norm_Lp_sq - abs(vectors.inner_Lp_L) ** 2
    ) / vectors.norm_L_sq
    r2 = abs(abs(l_theta_prime(result.rotated_traces[1], th)) ** 2 - rhs)
    return IdentityReport(value_residual=r1, deriv_residual=r2)
