"""Commutators of (1,1)-forms, structure constants, and the ``M#`` quadratic."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import FormBasis, OperatorMatrix, _mat, operator_matrix_array, raw_generators
from .curvature import DEFAULT_TOL, TracelessParts


def bracket(eta, tau) -> np.ndarray:
    """``[eta, tau]_{a bbar} = eta_{a mbar} tau_{m bbar} - tau_{a mbar} eta_{m bbar}``.

    The commutator of two Hermitian matrices is anti-Hermitian.
    """
    x, y = _mat(eta), _mat(tau)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    return x @ y - y @ x


@dataclass(frozen=True)
class StructureConstants:
    """``c[lam, mu, rho]`` with ``[phi^lam, phi^mu] = sum_rho c[lam, mu, rho] phi^rho``."""

    c: np.ndarray = field(repr=False)
    basis_id: str = "custom"

    @property
    def dim(self) -> int:
        return self.c.shape[0]


def structure_constants(b: FormBasis, tol: float = 1e-12) -> StructureConstants:
    """Expand every bracket of basis elements back in the basis.

    Coefficients come from the complex Frobenius pairing, so an anti-Hermitian
    bracket gets purely imaginary coefficients.
    """
    S = b.stack
    br = np.einsum("lam,umb->luab", S, S)
    br = br - np.swapaxes(br, 0, 1)
    c = np.einsum("luab,rab->lur", br, S.conj())
    rebuilt = np.einsum("lur,rab->luab", c, S)
    resid = float(np.max(np.abs(rebuilt - br), initial=0.0))
    if resid > tol * max(1.0, float(np.max(np.abs(br), initial=0.0))):
        raise ValueError(f"brackets leave the span of the basis (residual {resid:.3e})")
    c.setflags(write=False)
    return StructureConstants(c, b.basis_id)


def jacobi_residual(sc: StructureConstants) -> float:
    """Max entry of the cyclic sum ``[[x,y],z] + [[y,z],x] + [[z,x],y]`` in coordinates."""
    c = sc.c
    # [[l,m],r] = c[l,m,s] c[s,r,t]
    J = np.einsum("lms,srt->lmrt", c, c)
    cyc = J + np.transpose(J, (1, 2, 0, 3)) + np.transpose(J, (2, 0, 1, 3))
    return float(np.max(np.abs(cyc), initial=0.0))


def sharp_array(M: np.ndarray, c: np.ndarray) -> np.ndarray:
    """``M#_{qp} = sum C^{ag}_q C^{bd}_p M_ab M_gd``, complex, ``M`` may be batched."""
    # K[..., g, q, b] = sum_a c[a,g,q] M[a,b]
    K = np.einsum("agq,...ab->...gqb", c, M, optimize=True)
    L = np.einsum("...gqb,bdp->...gqdp", K, c, optimize=True)
    return np.einsum("...gqdp,...gd->...qp", L, M, optimize=True)


def sharp(M: OperatorMatrix, sc: StructureConstants, tol: float = DEFAULT_TOL) -> OperatorMatrix:
    """Lie-algebra square of a symmetric matrix.

    With purely imaginary constants ``M >= 0`` implies ``M# <= 0``; with real
    constants it implies ``M# >= 0``.
    """
    m = M.m if isinstance(M, OperatorMatrix) else np.asarray(M, dtype=float)
    if m.shape != (sc.dim, sc.dim):
        raise ValueError(f"matrix is {m.shape}, structure constants have dim {sc.dim}")
    out = sharp_array(m, sc.c)
    scale = max(1.0, float(np.max(np.abs(out), initial=0.0)))
    imag = float(np.max(np.abs(out.imag), initial=0.0))
    if imag > tol * scale:
        raise ValueError(f"M# has imaginary residue {imag:.3e}")
    return OperatorMatrix(out.real, sc.basis_id)


def bracket_quadratic(s4: np.ndarray) -> np.ndarray:
    """``L_abcd = sum_{m,n} S_{a m n d} S_{m b c n} - S_{a m c n} S_{m b n d}`` by direct contraction."""
    return np.einsum("amnd,mbcn->abcd", s4, s4) - np.einsum("amcn,mbnd->abcd", s4, s4)


def sharp_tensor(Msharp: np.ndarray, b: FormBasis) -> np.ndarray:
    """``-1/2 sum_{q,p} M#_{qp} phi^q_{a bbar} phi^p_{c dbar}``."""
    return -0.5 * np.einsum("qp,qab,pcd->abcd", Msharp, b.stack, b.stack)


def quadratic_identity_residual(
    p: TracelessParts,
    b: FormBasis,
    sc: StructureConstants | None = None,
    sharp_fn=None,
) -> float:
    """Largest componentwise gap between the bracket quadratic of ``s4`` and ``-1/2 M#``.

    ``sharp_fn`` replaces :func:`sharp` (used for fault injection).
    """
    if sc is None:
        sc = structure_constants(b)
    sharp_fn = sharp_fn or sharp
    M = OperatorMatrix(operator_matrix_array(p.s4, b.stack).real, b.basis_id)
    rhs = sharp_tensor(sharp_fn(M, sc).m, b)
    return float(np.max(np.abs(bracket_quadratic(p.s4) - rhs), initial=0.0))


def structure_constants_json(sc: StructureConstants, tol: float = 1e-14) -> list[dict]:
    """Nonzero constants as ``{"lambda", "mu", "rho", "im"}`` records (0-based, sorted)."""
    out = []
    for lam, mu, rho in zip(*np.nonzero(np.abs(sc.c) > tol)):
        out.append(
            {
                "lambda": int(lam),
                "mu": int(mu),
                "rho": int(rho),
                "im": round(float(sc.c[lam, mu, rho].imag), 15),
            }
        )
    return out


def bracket_relations(n: int):
    """Yield ``(label, lhs, rhs)`` for the commutator table of the unnormalized A/B/C generators.

    Labels use 1-based indices. Relations needing a third index are only
    produced for ``n >= 3``.
    """
    g = raw_generators(n)

    def A(a, c):
        return g[f"A{a}{c}"]

    def B(a, c):
        return g[f"B{a}{c}"]

    def C(a, c):
        return g[f"C{a}{c}"]

    def br(x, y):
        return x @ y - y @ x

    i_ = 1j
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            yield f"[A{i}{j},B{i}{j}]=2iC{i}{j}", br(A(i, j), B(i, j)), 2 * i_ * C(i, j)
            yield f"[B{i}{j},C{i}{j}]=2iA{i}{j}", br(B(i, j), C(i, j)), 2 * i_ * A(i, j)
            yield f"[C{i}{j},A{i}{j}]=2iB{i}{j}", br(C(i, j), A(i, j)), 2 * i_ * B(i, j)
            for k in range(1, n + 1):
                if k in (i, j):
                    continue
                yield f"[A{i}{j},B{i}{k}]=iC{i}{k}", br(A(i, j), B(i, k)), i_ * C(i, k)
                yield f"[A{i}{j},B{j}{k}]=iC{k}{j}", br(A(i, j), B(j, k)), i_ * C(k, j)
                yield f"[B{i}{j},C{i}{k}]=-iB{j}{k}", br(B(i, j), C(i, k)), -i_ * B(j, k)
                yield f"[B{i}{j},C{j}{k}]=-iB{i}{k}", br(B(i, j), C(j, k)), -i_ * B(i, k)
                yield f"[C{i}{j},A{i}{k}]=iB{j}{i}", br(C(i, j), A(i, k)), i_ * B(j, i)
                yield f"[C{i}{j},A{j}{k}]=-iB{i}{j}", br(C(i, j), A(j, k)), -i_ * B(i, j)
                yield f"[B{i}{j},B{i}{k}]=iC{j}{k}", br(B(i, j), B(i, k)), i_ * C(j, k)
                yield f"[C{i}{j},C{i}{k}]=iC{j}{k}", br(C(i, j), C(i, k)), i_ * C(j, k)


def bracket_table_residual(n: int) -> float:
    """Largest entry of ``lhs - rhs`` over every relation of :func:`bracket_relations`."""
    return max(float(np.max(np.abs(lhs - rhs))) for _, lhs, rhs in bracket_relations(n))
