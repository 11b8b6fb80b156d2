import math

import numpy as np
import pytest

from windowbands.bands import lambda_01
from windowbands.cells import CellSpec, make_potential
from windowbands.eigendata import functional_vectors
from windowbands.errors import ResolutionError, TrendViolation
from windowbands.floquet import (
    WindowedSpec,
    assemble_windowed,
    eigen_near,
    k1_cases,
    rate_sweep,
    windowed_cell,
)


def _free_spec(eps, theta, n=48):
    base = CellSpec(height=1.0, nx=n, ny=n)
    return WindowedSpec(base=base, epsilon=eps, theta=theta)


def test_windowed_spec_validation():
    with pytest.raises(ResolutionError):
        _free_spec(0.6, 1.0)
    with pytest.raises(ResolutionError):
        # only ~2 grid intervals across a 0.02 window on a coarse grid
        WindowedSpec(base=CellSpec(height=1.0, nx=24, ny=24), epsilon=0.02, theta=1.0)


def test_assemble_windowed_hermitian_and_periodic_limit():
    spec = _free_spec(0.1, 2.1)
    A, M, dof = assemble_windowed(spec)
    assert abs(A - A.conj().T).max() < 1e-12
    # theta = 0 keeps the operator real after the merge
    A0, _, _ = assemble_windowed(_free_spec(0.1, 0.0))
    assert np.abs(A0.toarray().imag).max() < 1e-14


def test_eigen_near_free_cell():
    # tiny window, V=0: lowest windowed eigenvalue stays near lambda0=0
    # and sits below it by ~ -lambda01/|ln eps|
    eps, th = 0.05, math.pi
    spec = windowed_cell(eps, make_potential("zero"), nwin=6, hmax=1.0 / 32)
    wspec = WindowedSpec(base=spec, epsilon=eps, theta=th)
    result = eigen_near(wspec, 0.0, count=1)
    lam = result.eigenvalues[0]
    assert 0.0 < lam < 3.0
    # prediction -lambda01 = 2 pi (1 - cos th)/H = 4 pi at theta=pi, H=1
    assert result.r1 == pytest.approx(math.pi * 2 * (1 - math.cos(th)), rel=0.5)


def test_eigen_near_deterministic():
    eps = 0.06
    spec = windowed_cell(eps, make_potential("tilted"), nwin=6, hmax=1.0 / 32)
    wspec = WindowedSpec(base=spec, epsilon=eps, theta=1.7)
    a = eigen_near(wspec, 2.0, count=1)
    b = eigen_near(wspec, 2.0, count=1)
    assert a.eigenvalues == b.eigenvalues


def test_rate_sweep_needs_three_points():
    cases = k1_cases(math.pi / 2, epsilons=(0.08, 0.04), nwin=6, hmax=1.0 / 32)
    with pytest.raises(ValueError):
        rate_sweep(cases)


def test_k1_sweep_trend():
    cases = k1_cases(math.pi / 2, nwin=6, hmax=1.0 / 48)
    report = rate_sweep(cases)
    assert report.k == 1
    assert report.monotone1
    assert all(p.ratio1 > 0 for p in report.points)
    assert abs(report.extrapolated_ratio1 - 1.0) <= 0.10
    # epsilons sorted decreasing, r1 defined against the same-grid cell data
    eps = [p.epsilon for p in report.points]
    assert eps == sorted(eps, reverse=True)
    for p, (wspec, data) in zip(report.points, sorted(cases, key=lambda c: -c[0].epsilon)):
        pred = -lambda_01(functional_vectors(data, math.pi / 2))
        assert p.ratio1 == pytest.approx(p.r1 / pred, rel=1e-12)


def test_rate_sweep_enforcement_raises_with_report():
    cases = k1_cases(math.pi / 2, nwin=6, hmax=1.0 / 48)
    with pytest.raises(TrendViolation) as exc:
        rate_sweep(cases, ratio_tol1=1e-6)
    assert exc.value.report is not None
    assert exc.value.report.k == 1
    report = rate_sweep(cases, ratio_tol1=1e-6, enforce=False)
    assert abs(report.extrapolated_ratio1 - 1.0) <= 0.10
