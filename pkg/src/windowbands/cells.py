"""Finite-difference Neumann eigensolver for the decoupled periodicity cell.

The cell is the rectangle (0,1) x (-H/2, H/2) carrying -Laplace + V with
Neumann conditions on the whole boundary.  Discretization is a vertex-
centered finite-volume scheme on a tensor grid: the energy sums
c_e |u_a - u_b|^2 over grid edges (c_e = transverse width / edge length)
and the mass matrix is the diagonal of trapezoid weights.  On uniform grids
this reproduces the 5-point stencil with mirrored boundaries; on graded
grids it stays symmetric and consistent.

Besides plain solves the module provides
  * trace extraction at the junction points M- = (0,0), M+ = (1,0)
    (node reads for values, one-sided high-order stencils for the
    x2-derivatives), with eigenvalue clustering into a multiplicity group;
  * a degeneracy tuner that adjusts a potential-family parameter t until an
    x2-even and an x2-odd eigenvalue branch cross, manufacturing an exactly
    double eigenvalue for the k = 2 validation scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .eigendata import CellEigenData, TraceData, require_nondegenerate
from .errors import (
    ClusterAmbiguity,
    GridError,
    NoConvergence,
    NoCrossing,
    ResolutionError,
)

#: relative clustering tolerance for multiplicity detection
CLUSTER_TOL = 1e-7

#: per-pair relative residual bound for converged eigenpairs
RESIDUAL_TOL = 1e-8


# ---------------------------------------------------------------------------
# potentials

POTENTIALS: dict[str, Callable] = {}


def _register(kind):
    def deco(fn):
        POTENTIALS[kind] = fn
        return fn
    return deco


@_register("zero")
def _pot_zero():
    return lambda x, y: np.zeros_like(x)


@_register("constant")
def _pot_constant(c: float = 0.0):
    return lambda x, y: np.full_like(x, c)


@_register("cosine")
def _pot_cosine(ax: float = 1.5, phase: float = 1.0, ay: float = 0.0, height: float = 1.0):
    """Separable cosine family: even in x2, asymmetric in x1 for phase != 0."""
    return lambda x, y: ax * np.cos(2 * np.pi * x + phase) + ay * np.cos(
        2 * np.pi * y / height
    )


@_register("tilted")
def _pot_tilted(ax: float = 2.0, phase: float = 0.7, b: float = 1.2):
    """Generic asymmetric potential with no x2 parity (k = 1 scenario)."""
    return lambda x, y: ax * np.cos(2 * np.pi * x + phase) + b * np.cos(
        2 * np.pi * x
    ) * y


def make_potential(kind: str, params: Optional[dict] = None) -> Callable:
    if kind not in POTENTIALS:
        raise GridError(f"unknown potential kind {kind!r}")
    return POTENTIALS[kind](**(params or {}))


# ---------------------------------------------------------------------------
# grids


def graded_half(span: float, h0: float, hmax: float, q: float = 1.3) -> np.ndarray:
    """Nodes on [0, span]: spacing h0 growing geometrically, capped at hmax."""
    pts = [0.0]
    h = h0
    while pts[-1] < span:
        pts.append(pts[-1] + h)
        h = min(h * q, hmax)
    pts = np.array(pts)
    return pts * (span / pts[-1])


def window_y_grid(
    height: float, eps: float, nwin: int = 6, hmax: Optional[float] = None, q: float = 1.3
) -> np.ndarray:
    """Symmetric x2 grid with nwin uniform intervals inside (0, eps).

    +-eps are grid nodes, so the strict |x2| < eps window test is exact.
    """
    hmax = hmax or height / 48
    if not 0.0 < eps < height / 2:
        raise ResolutionError(f"window half-width {eps:g} outside (0, H/2)")
    win = np.linspace(0.0, eps, nwin + 1)
    rest = graded_half(height / 2 - eps, eps / nwin, hmax, q) + eps
    up = np.concatenate([win, rest[1:]])
    return np.concatenate([-up[::-1], up[1:]])


def window_x_grid(
    eps: float, nwin: int = 6, hmax: Optional[float] = None, q: float = 1.3
) -> np.ndarray:
    """x1 grid refined toward both junction edges x1 = 0 and x1 = 1."""
    hmax = hmax or 1.0 / 48
    half = graded_half(0.5, eps / nwin, hmax, q)
    return np.concatenate([half, (1.0 - half[::-1])[1:]])


@dataclass(frozen=True)
class CellSpec:
    """Rectangular cell geometry, grid, and potential."""

    height: float = 1.0
    nx: int = 64
    ny: int = 64
    potential: Callable = field(default_factory=lambda: _pot_zero())
    # explicit tensor nodes override nx/ny (used for window-graded grids)
    xs: Optional[np.ndarray] = None
    ys: Optional[np.ndarray] = None
    width: float = 1.0

    def __post_init__(self):
        if self.xs is None and (self.nx < 16 or self.ny < 16):
            raise GridError("nx, ny must be >= 16")
        if self.width != 1.0:
            raise GridError("cell period is normalized to 1")

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        if self.xs is not None and self.ys is not None:
            return self.xs, self.ys
        xs = np.linspace(0.0, 1.0, self.nx + 1)
        # odd node count keeps x2 = 0 (the junction midline) on the grid
        ny = self.ny + (self.ny % 2)
        ys = np.linspace(-self.height / 2, self.height / 2, ny + 1)
        return xs, ys


def assemble(
    xs: np.ndarray,
    ys: np.ndarray,
    potential: Callable,
    theta: Optional[float] = None,
    eps: Optional[float] = None,
):
    """Finite-volume stiffness+potential matrix A and lumped mass M.

    theta is None: pure Neumann cell (real symmetric A).  Otherwise the
    left/right boundary nodes with |x2| < eps (strictly) are identified
    across the period with phase e^{i theta}, all other slit nodes keep the
    natural (Neumann) condition; A is then complex and exactly Hermitian.

    Returns (A, M, dof) with dof the (nx, ny) node-to-unknown map.
    """
    nx, ny = len(xs), len(ys)
    if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
        raise GridError("grid nodes must be strictly increasing")
    wx = np.zeros(nx)
    wx[:-1] += np.diff(xs) / 2
    wx[1:] += np.diff(xs) / 2
    wy = np.zeros(ny)
    wy[:-1] += np.diff(ys) / 2
    wy[1:] += np.diff(ys) / 2

    N = nx * ny
    dof = np.arange(N).reshape(nx, ny)
    phase = np.ones((nx, ny), dtype=complex)
    if theta is not None:
        merged = np.abs(ys) < eps - 1e-14
        dof[-1, merged] = dof[0, merged]
        phase[-1, merged] = np.exp(1j * theta)
        keep = np.unique(dof)
        remap = -np.ones(N, dtype=int)
        remap[keep] = np.arange(len(keep))
        dof = remap[dof]
    ndof = dof.max() + 1

    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Vn = potential(X, Y)
    m = wx[:, None] * wy[None, :]
    Md = np.zeros(ndof)
    Vd = np.zeros(ndof)
    np.add.at(Md, dof, m)
    np.add.at(Vd, dof, m * Vn)

    cdtype = complex if theta is not None else float
    rows, cols, vals = [], [], []

    def add_edges(da, db, pa, pb, c):
        da, db = da.ravel(), db.ravel()
        pa, pb = pa.ravel(), pb.ravel()
        c = c.ravel().astype(cdtype)
        rows.append(np.concatenate([da, db, da, db]))
        cols.append(np.concatenate([da, db, db, da]))
        vals.append(
            np.concatenate([c, c, -c * pa * np.conj(pb), -c * pb * np.conj(pa)])
        )

    hx = np.diff(xs)
    add_edges(
        dof[:-1, :], dof[1:, :], phase[:-1, :], phase[1:, :],
        wy[None, :] / hx[:, None],
    )
    hy = np.diff(ys)
    add_edges(
        dof[:, :-1], dof[:, 1:], phase[:, :-1], phase[:, 1:],
        wx[:, None] / hy[None, :],
    )
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(ndof, ndof),
    ).tocsr()
    if theta is None:
        A = A.real
    A = (A + sp.diags(Vd)).tocsc()
    M = sp.diags(Md).tocsc()
    return A, M, dof


def assemble_neumann(spec: CellSpec):
    """Neumann cell operator on the spec's tensor grid."""
    xs, ys = spec.nodes()
    return assemble(xs, ys, spec.potential)


@dataclass(frozen=True)
class EigenpairSet:
    """Lowest eigenpairs of a discrete cell operator."""

    eigenvalues: np.ndarray = field(repr=False)
    vectors: np.ndarray = field(repr=False)  # columns, M-orthonormal
    residuals: np.ndarray = field(repr=False)
    spec: CellSpec = field(repr=False)
    dof: np.ndarray = field(repr=False)


def solve_lowest(spec: CellSpec, m: int, seed: int = 0) -> EigenpairSet:
    """m lowest Neumann eigenpairs by shift-invert Lanczos.

    The shift sits below min(V) (hence below the whole spectrum); starting
    vector is drawn from a seeded generator for determinism.
    """
    xs, ys = spec.nodes()
    A, M, dof = assemble(xs, ys, spec.potential)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    sigma = float(spec.potential(X, Y).min()) - 1.0
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(A.shape[0])
    try:
        w, v = spla.eigsh(A, k=m, M=M, sigma=sigma, v0=v0)
    except spla.ArpackNoConvergence as exc:
        raise NoConvergence(str(exc)) from exc
    order = np.argsort(w)
    w, v = w[order], v[:, order]
    res = np.array(
        [
            np.linalg.norm(A @ v[:, i] - w[i] * (M @ v[:, i]))
            / np.linalg.norm(v[:, i])
            for i in range(m)
        ]
    )
    if res.max() > RESIDUAL_TOL * (1.0 + np.abs(w).max()):
        raise NoConvergence(f"max relative residual {res.max():.3e}")
    return EigenpairSet(eigenvalues=w, vectors=v, residuals=res, spec=spec, dof=dof)


def fornberg_weights(xi: np.ndarray, x0: float, m: int) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at x0 on nodes xi."""
    n = len(xi)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, xi[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, xi[i] - x0
        for j in range(i):
            c3 = xi[i] - xi[j]
            c2 *= c3
            if j == i - 1:
                for s in range(mn, 0, -1):
                    c[i, s] = c1 * (s * c[i - 1, s - 1] - c5 * c[i - 1, s]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for s in range(mn, 0, -1):
                c[j, s] = (c4 * c[j, s] - s * c[j, s - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def _orient(g: np.ndarray, j0: int) -> np.ndarray:
    """Deterministic sign: largest-magnitude junction sample made positive.

    Samples the midline and its neighbor so odd-in-x2 modes (zero on the
    midline) still get a well-defined orientation.
    """
    j1 = min(j0 + 1, g.shape[1] - 1)
    probe = np.array([g[0, j0], g[-1, j0], g[0, j1], g[-1, j1]])
    lead = probe[np.argmax(np.abs(probe))]
    return -g if lead < 0 else g


def _cluster(eigenvalues: np.ndarray, index: int, tol: float):
    lo = hi = index
    lam = eigenvalues[index]
    thr = tol * (1.0 + abs(lam))
    while lo > 0 and eigenvalues[lo] - eigenvalues[lo - 1] <= thr:
        lo -= 1
    while hi + 1 < len(eigenvalues) and eigenvalues[hi + 1] - eigenvalues[hi] <= thr:
        hi += 1
    # guard: the gap to the nearest eigenvalue outside the cluster must
    # clear the tolerance decisively
    if lo > 0 and eigenvalues[lo] - eigenvalues[lo - 1] <= 10.0 * thr:
        raise ClusterAmbiguity(
            f"lower cluster boundary gap "
            f"{eigenvalues[lo] - eigenvalues[lo - 1]:.3e} within 10x tolerance"
        )
    if hi + 1 < len(eigenvalues) and eigenvalues[hi + 1] - eigenvalues[hi] <= 10.0 * thr:
        raise ClusterAmbiguity(
            f"upper cluster boundary gap "
            f"{eigenvalues[hi + 1] - eigenvalues[hi]:.3e} within 10x tolerance"
        )
    return lo, hi


def extract_traces(
    pairs: EigenpairSet,
    spec: CellSpec,
    index: int = 0,
    cluster_tol: float = CLUSTER_TOL,
) -> CellEigenData:
    """Cluster eigenvalues around the given index and read junction traces.

    Values are direct node reads at M-+; x2-derivatives use 5-node
    high-order one-dimensional stencils centered at the midline.  Vectors
    are M-normalized (eigsh already returns them so) and sign-oriented.
    """
    xs, ys = spec.nodes()
    j0 = int(np.argmin(np.abs(ys)))
    if abs(ys[j0]) > 1e-12:
        raise GridError("junction midline x2=0 is not a grid line")
    lo, hi = _cluster(pairs.eigenvalues, index, cluster_tol)
    lam0 = float(pairs.eigenvalues[lo : hi + 1].mean())
    sl = slice(max(j0 - 2, 0), min(j0 + 3, len(ys)))
    wder = fornberg_weights(ys[sl], 0.0, 1)
    traces = []
    for i in range(lo, hi + 1):
        g = _orient(pairs.vectors[:, i][pairs.dof], j0)
        traces.append(
            TraceData(
                value_plus=g[-1, j0],
                value_minus=g[0, j0],
                deriv_plus=g[-1, sl] @ wder,
                deriv_minus=g[0, sl] @ wder,
            )
        )
    return CellEigenData(lambda0=lam0, traces=tuple(traces))


# ---------------------------------------------------------------------------
# degeneracy tuner


def _half_cell_eigenvalues(
    xs: np.ndarray, ys: np.ndarray, potential: Callable, odd: bool, m: int = 4
) -> np.ndarray:
    """Eigenvalues of the x2 >= 0 half cell: Neumann (even branch) or
    Dirichlet (odd branch) condition on the midline."""
    j0 = int(np.argmin(np.abs(ys)))
    A, M, dof = assemble(xs, ys[j0:], potential)
    if odd:
        keep = np.setdiff1d(np.arange(A.shape[0]), dof[:, 0])
        A = A[keep][:, keep]
        M = M[keep][:, keep]
    X = np.meshgrid(xs, ys[j0:], indexing="ij")
    sigma = float(potential(X[0], X[1]).min()) - 1.0
    w, _ = spla.eigsh(A, k=m, M=M.tocsc(), sigma=sigma)
    return np.sort(w)


def tune_degeneracy(
    spec_family: Callable[[float], CellSpec],
    target_indices: tuple[int, int],
    bracket: tuple[float, float],
    tol: float = 1e-9,
    max_iter: int = 80,
) -> tuple[float, CellEigenData]:
    """Bisect the family parameter until even and odd branches cross.

    The potential must be even in x2, so the spectrum splits into x2-parity
    classes solvable on the half cell.  At the crossing t* the full cell has
    a double eigenvalue; the returned trace data has the even mode in slot 1
    (values nonzero, derivatives ~0) and the odd mode in slot 2.
    """
    i_even, i_odd = target_indices

    def branch_gap(t: float):
        spec = spec_family(t)
        xs, ys = spec.nodes()
        we = _half_cell_eigenvalues(xs, ys, spec.potential, odd=False)
        wo = _half_cell_eigenvalues(xs, ys, spec.potential, odd=True)
        return we[i_even] - wo[i_odd], we[i_even]

    t_lo, t_hi = bracket
    f_lo, _ = branch_gap(t_lo)
    f_hi, _ = branch_gap(t_hi)
    if f_lo * f_hi > 0:
        raise NoCrossing(
            f"no parity-branch crossing in [{t_lo:g}, {t_hi:g}] "
            f"(gaps {f_lo:.3e}, {f_hi:.3e})"
        )
    t_mid, f_mid, lam = t_lo, f_lo, 0.0
    for _ in range(max_iter):
        t_mid = 0.5 * (t_lo + t_hi)
        f_mid, lam = branch_gap(t_mid)
        if abs(f_mid) < tol * (1.0 + abs(lam)):
            break
        if f_mid * f_lo < 0:
            t_hi = t_mid
        else:
            t_lo, f_lo = t_mid, f_mid
    else:
        raise NoCrossing(f"bisection stalled: |gap|={abs(f_mid):.3e}")

    spec = spec_family(t_mid)
    xs, ys = spec.nodes()
    pairs = solve_lowest(spec, m=max(i_even + i_odd + 4, 6))
    order = np.argsort(np.abs(pairs.eigenvalues - lam))
    pair_idx = np.sort(order[:2])
    lam0 = float(pairs.eigenvalues[pair_idx].mean())

    # parity-project the 2D eigenspace into one even and one odd mode
    wx = np.zeros(len(xs))
    wx[:-1] += np.diff(xs) / 2
    wx[1:] += np.diff(xs) / 2
    wy = np.zeros(len(ys))
    wy[:-1] += np.diff(ys) / 2
    wy[1:] += np.diff(ys) / 2
    wts = wx[:, None] * wy[None, :]
    g = pairs.vectors[:, pair_idx][pairs.dof]  # (nx, ny, 2)
    ge = 0.5 * (g + g[:, ::-1])
    go = 0.5 * (g - g[:, ::-1])
    even = ge[..., int(np.argmax(np.linalg.norm(ge, axis=(0, 1))))]
    odd = go[..., int(np.argmax(np.linalg.norm(go, axis=(0, 1))))]
    even = even / math.sqrt(float((even**2 * wts).sum()))
    odd = odd / math.sqrt(float((odd**2 * wts).sum()))

    j0 = int(np.argmin(np.abs(ys)))
    even = _orient(even, j0)
    odd = _orient(odd, j0)
    sl = slice(j0 - 2, j0 + 3)
    wder = fornberg_weights(ys[sl], 0.0, 1)
    data = CellEigenData(
        lambda0=lam0,
        traces=(
            TraceData(
                value_plus=even[-1, j0],
                value_minus=even[0, j0],
                deriv_plus=even[-1, sl] @ wder,
                deriv_minus=even[0, sl] @ wder,
            ),
            TraceData(
                value_plus=odd[-1, j0],
                value_minus=odd[0, j0],
                deriv_plus=odd[-1, sl] @ wder,
                deriv_minus=odd[0, sl] @ wder,
            ),
        ),
    )
    return t_mid, require_nondegenerate(data)
