"""Identity and invariant suite behind ``kbisec verify``."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import basis as ob
from .curvature import decompose, recompose, space_form, validate
from .flow import rhs_array, rhs_matrix, rhs_ric0, rhs_s4, rhs_scalar, t_matrix
from .lie import bracket_table_residual, jacobi_residual, quadratic_identity_residual, sharp, structure_constants
from .sampling import random_curvature, random_traceless_s4


@dataclass(frozen=True)
class Check:
    name: str
    n: int
    value: float
    threshold: float
    ok: bool
    detail: str = ""


def _check(name, n, value, threshold, detail="", lower=False) -> Check:
    value = float(value)
    ok = value >= threshold if lower else value <= threshold
    return Check(name, n, value, threshold, bool(ok), detail)


def flipped_sharp(M, sc, tol=1e-10):
    """Fault injection: ``sharp`` with its sign reversed."""
    out = sharp(M, sc, tol)
    return ob.OperatorMatrix(-out.m, out.basis_id)


def run_suite(n: int, samples: int = 100, seed: int = 0, tol: float = 1e-9, sharp_fn=None) -> list[Check]:
    """Run every identity check for dimension ``n``.

    ``sharp_fn`` replaces :func:`kbisec.lie.sharp` everywhere it is used, so a
    deliberately wrong implementation shows up in the report.
    """
    sharp_fn = sharp_fn or sharp
    rng = np.random.default_rng([seed, n])
    b = ob.standard_basis(n)
    sc = structure_constants(b)
    tensors = [random_curvature(n, rng) for _ in range(samples)]
    out = []

    out.append(_check("basis_gram", n, max(ob.basis_defects(b).values()), 1e-12))

    table_err = bracket_table_residual(n)
    out.append(_check("bracket_table", n, table_err, 1e-12, "unnormalized A/B/C relations"))
    out.append(_check("structure_constants_imaginary", n, np.max(np.abs(sc.c.real)), 1e-12))
    out.append(_check("jacobi", n, jacobi_residual(sc), 1e-10))

    worst_top = -np.inf
    for _ in range(samples):
        X = rng.normal(size=(b.dim, b.dim))
        worst_top = max(worst_top, float(np.linalg.eigvalsh(sharp_fn(ob.OperatorMatrix(X @ X.T), sc).m)[-1]))
    out.append(_check("sharp_sign", n, worst_top, 1e-10, "max eigenvalue of M# over PSD M"))
    if n == 2:
        m = 0.7
        dev = np.max(np.abs(sharp_fn(ob.OperatorMatrix(m * np.eye(3)), sc).m + 4 * m * m * np.eye(3)))
        out.append(_check("sharp_closed_form", n, dev, 1e-12, "M#(mI) = -4 m^2 I"))

    qi = max(quadratic_identity_residual(decompose(t), b, sc, sharp_fn=sharp_fn) for t in tensors)
    out.append(_check("quadratic_identity", n, qi, tol))

    tb = -np.inf
    for t in tensors:
        t2 = random_curvature(n, rng, cone="2nonneg", margin=0.01)
        r = ob.trace_bound_check(t2, b, tol)
        tb = max(tb, r.trace - r.bound)
    out.append(_check("trace_bound", n, tb, tol, "max tr(M) - (n-1)R on the 2-nonnegative cone"))

    rec = 0.0
    F = ob.forward_map(b)
    rank = np.linalg.matrix_rank(F)
    for _ in range(samples):
        s4 = random_traceless_s4(n, rng)
        got = ob.reconstruct_s4(ob.operator_matrix_array(s4, b.stack).real, b).s4
        rec = max(rec, float(np.linalg.norm(got - s4) / np.linalg.norm(s4)))
    out.append(_check("reconstruction_rank", n, F.shape[1] - rank, 0, f"rank {rank} of {F.shape[1]}"))
    out.append(_check("reconstruction", n, rec, 1e-10, "relative round-trip error"))

    rt = max(float(np.max(np.abs(recompose(decompose(t)).comp - t.comp))) for t in tensors)
    out.append(_check("decompose_round_trip", n, rt, 1e-12))
    out.append(_check("sampler_valid", n, max(validate(t).max_violation for t in tensors), 1e-12))

    fp = float(np.max(np.abs(rhs_array(space_form(n, 1 / (n + 1)).comp))))
    out.append(_check("fixed_point", n, fp, 1e-12))

    chain = 0.0
    mat = 0.0
    for t in tensors:
        p = decompose(t)
        d = rhs_array(t.comp)
        lhs = np.einsum("ijkk->ij", d)
        rhs = rhs_ric0(p).m + rhs_scalar(p) / n * np.eye(n)
        chain = max(chain, float(np.max(np.abs(lhs - rhs))))
        full = recompose(type(p)(rhs_scalar(p), rhs_ric0(p), rhs_s4(p)), tol=1e-9).comp
        chain = max(chain, float(np.max(np.abs(full - d))))
        M = ob.matrix_traceless(t, b)
        tensor_path = ob.operator_matrix_array(d, b.stack).real
        mpath = rhs_matrix(M, t_matrix(p, b), sc, sharp_fn=sharp_fn).m
        mat = max(mat, float(np.max(np.abs(mpath - tensor_path))))
    out.append(_check("ode_chain", n, chain, 1e-9, "trace and decomposition of rhs_full"))
    out.append(_check("matrix_ode", n, mat, 1e-9, "rhs_matrix vs matrix of rhs_full"))
    return out


def summarize(checks: list[Check]) -> dict:
    failed = sorted({c.name for c in checks if not c.ok})
    return {"ok": not failed, "failed": failed, "checks": [asdict(c) for c in checks]}
