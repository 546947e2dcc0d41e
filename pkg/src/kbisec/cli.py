"""Command-line harness: ``kbisec verify | spectrum | flow | mc | sample | constants``.

Exit codes: 0 success, 1 a checked property failed, 2 usage or input error.
Identical arguments give byte-identical output files.
"""

from __future__ import annotations

import logging
import sys

import click

from .basis import matrix_full, matrix_traceless, spectrum, standard_basis
from .cones import cone_report
from .curvature import InvariantError, space_form, validate
from .flow import FlowState, MCConfig, integrate, montecarlo_cone
from .lie import structure_constants, structure_constants_json
from .sampling import CONES, random_curvature
from .tensor_io import TensorFormatError, dumps_json, load_tensor, matrix_to_csv, tensor_to_dict
from .verify import flipped_sharp, run_suite, summarize

EXIT_FAIL = 1
EXIT_USAGE = 2

_N = click.IntRange(min=2, max=8)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _input_error(msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(EXIT_USAGE)


def _read_tensor(path: str, tol: float):
    try:
        t = load_tensor(path, tol)
    except OSError as exc:
        _input_error(f"{path}: {exc.strerror}")
    except TensorFormatError as exc:
        _input_error(f"{path}: {exc}")
    rep = validate(t, tol)
    if not rep.ok:
        _input_error(f"{path}: tensor breaks Kähler symmetry (max violation {rep.max_violation:.3e})")
    return t


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose: bool):
    """Traceless bisectional curvature operator toolkit."""
    logging.basicConfig(level=logging.INFO if verbose else logging.ERROR, format="%(levelname)s %(message)s")


@main.command()
@click.option("--n", "ns", type=_N, multiple=True, default=(2, 3), show_default=True, help="Dimensions to check.")
@click.option("--samples", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True, help="Tolerance of the quadratic identity.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the JSON report here instead of stdout.")
@click.option("--inject", type=click.Choice(["sharp-sign"]), hidden=True)
def verify(ns, samples, seed, tol, out, inject):
    """Run the identity and invariant suite; exit 1 if any check fails."""
    sharp_fn = flipped_sharp if inject == "sharp-sign" else None
    checks = [c for n in ns for c in run_suite(n, samples=samples, seed=seed, tol=tol, sharp_fn=sharp_fn)]
    report = summarize(checks)
    _emit(dumps_json(report), out)
    if not report["ok"]:
        click.echo("failed: " + ", ".join(report["failed"]), err=True)
        sys.exit(EXIT_FAIL)


@main.command("spectrum")
@click.option("--in", "path", required=True, type=click.Path(dir_okay=False), help="Tensor JSON file.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True,
              help="csv writes the full block matrix only.")
@click.option("--frames", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
def spectrum_cmd(path, fmt, frames, seed, tol, out):
    """Eigenvalues of M, the full block matrix and a cone report for a tensor file."""
    t = _read_tensor(path, tol)
    b = standard_basis(t.n)
    try:
        M = matrix_traceless(t, b, tol)
        F = matrix_full(t, b, tol)
    except InvariantError as exc:
        _input_error(f"{path}: {exc}")
    if fmt == "csv":
        _emit(matrix_to_csv(F.m), out)
        return
    report = {
        "n": t.n,
        "basis": b.labels,
        "eigenvalues": spectrum(M),
        "matrix": M.m,
        "full_matrix": F.m,
        "full_eigenvalues": spectrum(F),
        "cone_report": cone_report(t, b, frames=frames, seed=seed).to_dict(),
    }
    _emit(dumps_json(report), out)


@main.command()
@click.option("--in", "path", type=click.Path(dir_okay=False), help="Start tensor; random if omitted.")
@click.option("--n", type=_N, default=2, show_default=True, help="Dimension of a random start.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--cone", type=click.Choice(CONES), help="Shift a random start into this cone.")
@click.option("--margin", type=float, default=0.01, show_default=True)
@click.option("--scale", type=float, default=0.03, show_default=True, help="Size of a random start.")
@click.option("--dt", type=click.FloatRange(min=0, min_open=True), default=1e-3, show_default=True)
@click.option("--t-end", type=click.FloatRange(min=0, min_open=True), default=1.0, show_default=True)
@click.option("--method", type=click.Choice(["rk4", "euler"]), default="rk4", show_default=True)
@click.option("--frames", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Trajectory CSV.")
def flow(path, n, seed, cone, margin, scale, dt, t_end, method, frames, tol, out):
    """Integrate the reaction ODE and write the trajectory CSV.

    A failed integration still writes the states reached and exits 1.
    """
    if path is not None:
        t0 = _read_tensor(path, tol)
    else:
        t0 = random_curvature(n, seed, cone=cone, margin=margin, scale=scale)
    traj = integrate(FlowState(0.0, t0), dt, t_end, method=method, frames=frames, seed=seed)
    _emit(traj.to_csv(), out)
    if traj.error:
        click.echo(f"integration stopped: {traj.error}", err=True)
        sys.exit(EXIT_FAIL)


@main.command()
@click.option("--n", type=_N, default=2, show_default=True)
@click.option("--cone", type=click.Choice(CONES), default="2nonneg", show_default=True)
@click.option("--samples", type=click.IntRange(min=0), default=200, show_default=True)
@click.option("--dt", type=click.FloatRange(min=0, min_open=True), default=1e-3, show_default=True)
@click.option("--t-end", type=click.FloatRange(min=0, min_open=True), default=1.0, show_default=True)
@click.option("--margin", type=float, default=0.01, show_default=True)
@click.option("--scale", type=click.FloatRange(min=0), default=0.03, show_default=True)
@click.option("--ricci-min", type=float, help="Also shift starts until the smallest Ricci eigenvalue reaches this.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--frames", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Summary JSON.")
def mc(n, cone, samples, dt, t_end, margin, scale, ricci_min, seed, frames, workers, out):
    """Monte Carlo cone invariance; exit 1 if a trajectory fails or leaves the cone."""
    config = MCConfig(
        n=n, cone=cone, samples=samples, dt=dt, t_end=t_end, margin=margin,
        seed=seed, frames=frames, scale=scale, ricci_min=ricci_min,
    )
    summary = montecarlo_cone(config, workers=workers)
    _emit(dumps_json(summary.to_dict()), out)
    if not summary.passed:
        click.echo(f"cone invariance failed ({summary.failures} integration failures)", err=True)
        sys.exit(EXIT_FAIL)


@main.command()
@click.option("--n", type=_N, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--cone", type=click.Choice(CONES))
@click.option("--margin", type=float, default=0.01, show_default=True)
@click.option("--scale", type=float, default=0.03, show_default=True, help="Size of a random tensor.")
@click.option("--space-form", "c", type=float, help="Write c(δδ + δδ') instead of a random tensor.")
@click.option("--out", type=click.Path(dir_okay=False))
def sample(n, seed, cone, margin, scale, c, out):
    """Write a tensor JSON file (random or space form)."""
    t = space_form(n, c) if c is not None else random_curvature(n, seed, cone=cone, margin=margin, scale=scale)
    _emit(dumps_json(tensor_to_dict(t)), out)


@main.command()
@click.option("--n", type=_N, default=2, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
def constants(n, out):
    """Nonzero structure constants of the standard basis."""
    b = standard_basis(n)
    sc = structure_constants(b)
    doc = {"n": n, "basis": b.labels, "constants": structure_constants_json(sc)}
    _emit(dumps_json(doc), out)


if __name__ == "__main__":  # pragma: no cover
    main()
