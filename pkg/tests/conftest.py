import numpy as np
import pytest

from windowbands.eigendata import CellEigenData, TraceData


def random_cell_data(rng: np.random.Generator, k: int, real: bool = False) -> CellEigenData:
    """Random trace dataset with O(1) entries (orthonormality is implied
    by construction in the continuous problem; only traces matter here)."""

    def draw():
        if real:
            return float(rng.standard_normal())
        return complex(rng.standard_normal(), rng.standard_normal())

    traces = tuple(
        TraceData(
            value_plus=draw(),
            value_minus=draw(),
            deriv_plus=draw(),
            deriv_minus=draw(),
        )
        for _ in range(k)
    )
    return CellEigenData(lambda0=float(rng.standard_normal()), traces=traces)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
