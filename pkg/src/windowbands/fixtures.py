"""Built-in k = 2 trace datasets used for figures, demos, and tests.

Both cases share the value traces psi_1(M+)=1, psi_1(M-)=2, psi_2(M+)=+-1,
psi_2(M-)=3 and derivative magnitudes (3/2, 5/2) and (1/2, 2).  Case 1 has
its quadratic-band extrema at theta in {0, pi, 2pi}; case 2 produces two
interior maxima placed symmetrically about theta = pi.

Case 2 note: the published parameter list labels one value trace
inconsistently (read here as psi_2(M-) = 3, since the psi_1 values are
already assigned) and, taken with plus-sign M- derivatives, yields no
interior maxima at all — the quadratic coefficient is then monotone in
cos(theta) on each half-zone.  With the M- derivatives negated the curve
reproduces the published interior-maxima phenomenon exactly, so that is the
dataset embedded here.
"""

from __future__ import annotations

from .eigendata import CellEigenData, TraceData


def figure_case(case: int, lambda0: float = 0.0) -> CellEigenData:
    """Trace data for the two reference parameter sets."""
    if case == 1:
        traces = (
            TraceData(value_plus=1.0, value_minus=2.0, deriv_plus=1.5, deriv_minus=2.5),
            TraceData(value_plus=1.0, value_minus=3.0, deriv_plus=0.5, deriv_minus=2.0),
        )
    elif case == 2:
        traces = (
            TraceData(value_plus=1.0, value_minus=2.0, deriv_plus=1.5, deriv_minus=-2.5),
            TraceData(value_plus=-1.0, value_minus=3.0, deriv_plus=-0.5, deriv_minus=-2.0),
        )
    else:
        raise ValueError("case must be 1 or 2")
    return CellEigenData(lambda0=lambda0, traces=traces)
