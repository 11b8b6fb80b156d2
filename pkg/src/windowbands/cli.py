"""Command-line pipeline: cell-solve -> bands -> validate, plus utilities.

Exit codes: 0 success, 2 input/validation error, 3 convergence-trend
failure.  Errors are emitted as one JSON object on stderr so callers can
parse them.  All floating-point output uses 17 significant digits, which
round-trips IEEE doubles exactly.  Figures are opt-in (--plot) and are
written as PNGs next to the delimited output.
"""

from __future__ import annotations

import functools
import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .bands import band_edges_at_epsilon, band_intervals, lambda_10, sample_bands
from .cells import CellSpec, extract_traces, make_potential, solve_lowest
from .eigendata import (
    dump_eigendata,
    eigendata_to_dict,
    functional_vectors,
    load_eigendata,
    require_nondegenerate,
)
from .errors import TrendViolation, WindowBandsError
from .fixtures import figure_case
from .floquet import k1_cases, k2_cases, rate_sweep
from .inner import (
    X0,
    InnerPoint,
    far_field_residual_X0,
    far_field_residual_X1,
    harmonicity_residual,
    neumann_residual,
)


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _fail(exc: BaseException, code: int):
    json.dump(
        {"error": type(exc).__name__, "message": str(exc)},
        sys.stderr,
    )
    sys.stderr.write("\n")
    sys.exit(code)


def guarded(fn):
    """Map exceptions to the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except TrendViolation as exc:
            _fail(exc, 3)
        except (WindowBandsError, ValueError, KeyError, OSError) as exc:
            _fail(exc, 2)
        except json.JSONDecodeError as exc:
            _fail(exc, 2)

    return wrapper


@click.group()
@click.version_option(__version__)
def main():
    """Leading-order band structure of window-coupled periodic cells."""


@main.command("cell-solve")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
@guarded
def cmd_cell_solve(config_path, out_path, seed):
    """Solve the Neumann cell and write junction trace data as JSON."""
    with open(config_path) as fh:
        cfg = json.load(fh)
    pot_cfg = cfg.get("potential", {"kind": "zero"})
    spec = CellSpec(
        height=float(cfg.get("height", 1.0)),
        nx=int(cfg.get("nx", 64)),
        ny=int(cfg.get("ny", 64)),
        potential=make_potential(pot_cfg["kind"], pot_cfg.get("params")),
    )
    m = int(cfg.get("num_modes", 4))
    pairs = solve_lowest(spec, m=m, seed=seed)
    data = extract_traces(pairs, spec, index=int(cfg.get("index", 0)))
    obj = eigendata_to_dict(data)
    obj["diagnostics"] = {
        "eigenvalues": [float(w) for w in pairs.eigenvalues],
        "residuals": [float(r) for r in pairs.residuals],
        "grid": [len(spec.nodes()[0]), len(spec.nodes()[1])],
    }
    with open(out_path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
    click.echo(f"wrote {out_path} (lambda0={_fmt(data.lambda0)}, k={data.multiplicity})")


def _interval_dict(iv):
    return {
        "order": iv.order,
        "lower_coeff": iv.lower_coeff,
        "upper_coeff": iv.upper_coeff,
        "arg_lower": list(iv.arg_lower),
        "arg_upper": list(iv.arg_upper),
        "classification": iv.classification,
    }


@main.command("bands")
@click.option("--eigendata", "eigendata_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--summary", "summary_path", default=None, type=click.Path())
@click.option("--samples", default=1024, show_default=True, type=int)
@click.option("--refine-tol", default=1e-8, show_default=True, type=float)
@click.option("--plot", is_flag=True, help="also render a PNG of the curves")
@guarded
def cmd_bands(eigendata_path, out_path, summary_path, samples, refine_tol, plot):
    """Sample the band coefficients, extract edges, classify extrema."""
    data = require_nondegenerate(load_eigendata(eigendata_path))
    coeffs = sample_bands(data, samples)
    intervals = band_intervals(coeffs, refine_tol)
    with open(out_path, "w") as fh:
        fh.write("theta,lambda01,lambda10\n")
        for i, th in enumerate(coeffs.thetas):
            lam10 = (
                _fmt(coeffs.lambda10[i]) if coeffs.lambda10 is not None else ""
            )
            fh.write(f"{_fmt(th)},{_fmt(coeffs.lambda01[i])},{lam10}\n")
    summary = {
        "lambda0": data.lambda0,
        "k": data.multiplicity,
        "intervals": [_interval_dict(iv) for iv in intervals],
    }
    if data.multiplicity >= 2:
        edges = band_edges_at_epsilon(intervals, data.lambda0, epsilon=1e-3)
        summary["gap_epsilon_threshold"] = edges.epsilon_threshold
    summary_path = summary_path or str(Path(out_path).with_suffix(".summary.json"))
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    if plot:
        from .plots import plot_band_coefficients

        png = str(Path(out_path).with_suffix(".png"))
        plot_band_coefficients(coeffs.thetas, coeffs.lambda01, coeffs.lambda10, png)
        click.echo(f"wrote {png}")
    click.echo(f"wrote {out_path} and {summary_path}")


@main.command("figures")
@click.option("--case", type=click.IntRange(1, 2), required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--samples", default=1024, show_default=True, type=int)
@click.option("--plot", is_flag=True, help="also render a PNG of the curve")
@guarded
def cmd_figures(case, out_path, samples, plot):
    """Emit the quadratic-coefficient curve of a built-in dataset."""
    data = figure_case(case)
    thetas = 2.0 * math.pi * np.arange(samples) / samples
    values = np.array(
        [lambda_10(functional_vectors(data, th)) for th in thetas]
    )
    with open(out_path, "w") as fh:
        fh.write("theta,lambda10\n")
        for th, v in zip(thetas, values):
            fh.write(f"{_fmt(th)},{_fmt(v)}\n")
    if plot:
        from .plots import plot_figure_curve

        png = str(Path(out_path).with_suffix(".png"))
        plot_figure_curve(thetas, values, case, png)
        click.echo(f"wrote {png}")
    click.echo(f"wrote {out_path}")


@main.command("verify-inner")
@guarded
def cmd_verify_inner():
    """Print residual tables for the boundary-layer functions."""
    click.echo("harmonicity (max 5-point Laplacian residual):")
    pts = [(x, y) for x in (-1.7, -0.3, 0.4, 1.6) for y in (0.3, 0.9, 2.1)]
    from .inner import X1

    for h in (0.02, 0.01, 0.005):
        r0 = harmonicity_residual(X0, pts, h)
        r1 = harmonicity_residual(X1, pts, h)
        click.echo(f"  h={h:<7g} X0: {r0:.3e}  X1: {r1:.3e}")

    gamma = np.linspace(-0.95, 0.95, 21)
    v0 = max(abs(X0(InnerPoint(x, 0.0))) for x in gamma)
    v1 = max(abs(X1(InnerPoint(x, 0.0))) for x in gamma)
    click.echo(f"window values      X0: {v0:.3e}  X1: {v1:.3e}")

    slit = list(np.linspace(1.5, 4.0, 11)) + list(np.linspace(-4.0, -1.5, 11))
    for h in (1e-3, 5e-4):
        n0 = neumann_residual(X0, slit, h)
        n0_sin = neumann_residual(lambda p: X0(p, use_sin=True), slit, h)
        n1 = neumann_residual(X1, slit, h)
        click.echo(
            f"slit normal deriv (h={h:g})  X0: {n0:.3e}  X1: {n1:.3e}  "
            f"X0[sin argument]: {n0_sin:.3e}"
        )
    click.echo(
        "note: the sin-argument variant is identically 0 on the whole real "
        "axis, so its slit normal derivative does NOT vanish — it fails the "
        "required boundary condition and is kept only for this comparison."
    )

    click.echo("far-field residuals (should shrink ~16x per quadrupling):")
    for r in (10.0, 20.0, 40.0):
        click.echo(
            f"  r={r:<5g} X0: {far_field_residual_X0(r):.3e}  "
            f"X1: {far_field_residual_X1(r):.3e}"
        )


@main.command("validate")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--plot", is_flag=True, help="also render the trend PNG")
@guarded
def cmd_validate(config_path, out_path, seed, plot):
    """Run the direct-solver convergence sweeps against the predictions."""
    with open(config_path) as fh:
        cfg = json.load(fh)
    k = int(cfg.get("k", 1))
    epsilons = [float(e) for e in cfg.get("epsilons", [0.08, 0.04, 0.02])]
    thetas = [float(t) for t in cfg.get("thetas", [math.pi / 2, math.pi])]
    nwin = int(cfg.get("nwin", 6 if k == 1 else 12))
    hmax = float(cfg.get("hmax", 1.0 / 64))
    ratio_tol1 = float(cfg.get("ratio_tol1", 0.10))
    ratio_tol2 = float(cfg.get("ratio_tol2", 0.25))

    reports = []
    rows = []
    failure = None
    for theta in thetas:
        if k == 1:
            cases = k1_cases(theta, epsilons, nwin=nwin, hmax=hmax)
        else:
            cases = k2_cases(theta, epsilons, nwin=nwin, hmax=hmax)
        try:
            rep = rate_sweep(
                cases, ratio_tol1=ratio_tol1, ratio_tol2=ratio_tol2, seed=seed
            )
        except TrendViolation as exc:
            rep = exc.report
            failure = exc
        reports.append(rep)
        for p in rep.points:
            devs = sorted(
                (lam - p.lambda0 for lam in p.eigenvalues), reverse=True
            )
            for j, lam in enumerate(sorted(p.eigenvalues, reverse=True), start=1):
                diag = p.r1 if j == 1 else (p.r2 if j == 2 else devs[j - 1])
                rows.append((p.epsilon, theta, j, lam, diag))

    with open(out_path, "w") as fh:
        fh.write("epsilon,theta,j,lambda,r_diagnostic\n")
        for eps, th, j, lam, diag in rows:
            fh.write(f"{_fmt(eps)},{_fmt(th)},{j},{_fmt(lam)},{_fmt(diag)}\n")

    lines = []
    for rep in reports:
        lines.append(f"theta={rep.theta:.6g}  k={rep.k}")
        for p in rep.points:
            parts = [f"  eps={p.epsilon:g}  r1={p.r1:.6g}"]
            if p.ratio1 is not None:
                parts.append(f"ratio1={p.ratio1:.4f}")
            if p.ratio2 is not None:
                parts.append(f"ratio2={p.ratio2:.4f}")
            if p.separation is not None:
                parts.append(f"band separation={p.separation:.5f}")
            lines.append("  ".join(parts))
        if rep.extrapolated_ratio1 is not None:
            ok = abs(rep.extrapolated_ratio1 - 1) <= ratio_tol1 and rep.monotone1
            lines.append(
                f"  log band: extrapolated ratio "
                f"{rep.extrapolated_ratio1:.4f} monotone={rep.monotone1} "
                f"[{'PASS' if ok else 'FAIL'}]"
            )
        if rep.extrapolated_ratio2 is not None:
            ok = abs(rep.extrapolated_ratio2 - 1) <= ratio_tol2 and rep.monotone2
            lines.append(
                f"  quadratic band: extrapolated ratio "
                f"{rep.extrapolated_ratio2:.4f} monotone={rep.monotone2} "
                f"[{'PASS' if ok else 'FAIL'}]"
            )
    summary = "\n".join(lines)
    click.echo(summary)
    Path(out_path).with_suffix(".summary.txt").write_text(summary + "\n")

    if plot:
        from .plots import plot_rate_report

        png = str(Path(out_path).with_suffix(".png"))
        plot_rate_report(reports, png)
        click.echo(f"wrote {png}")
    if failure is not None:
        raise failure
