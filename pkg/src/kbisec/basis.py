"""Orthonormal bases of traceless (1,1)-forms and the matrix of the curvature operator.

The curvature tensor acts on a Hermitian coefficient matrix ``eta`` by

    (R eta)_{k lbar} = sum_{i,j} R_{i jbar k lbar} eta_{j ibar}

and forms are paired with ``<eta, tau> = sum_{a,b} eta_{a bbar} conj(tau_{a bbar})``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from .curvature import (
    DEFAULT_TOL,
    HermitianForm,
    InvariantError,
    KahlerCurvature,
    scalar,
    tensor_from_pair_form,
)


@dataclass(frozen=True)
class FormBasis:
    """Ordered orthonormal basis of the traceless (1,1)-forms, plus ``I / sqrt(n)``."""

    n: int
    omega_hat: HermitianForm
    elems: tuple[HermitianForm, ...]
    labels: tuple[str, ...] = ()
    basis_id: str = "custom"
    stack: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        stack = np.array([e.m for e in self.elems], dtype=complex).reshape(-1, self.n, self.n)
        stack.setflags(write=False)
        object.__setattr__(self, "stack", stack)

    @property
    def dim(self) -> int:
        return len(self.elems)

    @classmethod
    def from_matrices(cls, mats, basis_id: str = "custom", tol: float = 1e-12) -> FormBasis:
        """Wrap an arbitrary orthonormal family of traceless Hermitian matrices."""
        mats = np.asarray(mats, dtype=complex)
        dim, n, _ = mats.shape
        if dim != n * n - 1:
            raise ValueError(f"need {n * n - 1} elements for n={n}, got {dim}")
        b = cls(
            n=n,
            omega_hat=HermitianForm(np.eye(n) / np.sqrt(n)),
            elems=tuple(HermitianForm(m) for m in mats),
            labels=tuple(f"e{p}" for p in range(dim)),
            basis_id=basis_id,
        )
        err = basis_defects(b)
        if max(err.values()) > tol:
            raise InvariantError(f"not an orthonormal traceless basis: {err}")
        return b


@dataclass(frozen=True)
class OperatorMatrix:
    m: np.ndarray
    basis_id: str = "custom"

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.m - self.m.T), initial=0.0) <= tol)


def inner(eta, tau) -> complex:
    return complex(np.sum(_mat(eta) * np.conj(_mat(tau))))


def _mat(x) -> np.ndarray:
    return x.m if isinstance(x, HermitianForm) else np.asarray(x)


def _unit(i: int, j: int, n: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def raw_generators(n: int) -> dict[str, np.ndarray]:
    """Unnormalized generators ``A^{ij}``, ``B^{ij}``, ``C^{ij}`` for all ordered ``i != j``.

    Labels use 1-based indices, e.g. ``"A13"``.
    """
    out = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            E = lambda a, b: _unit(a, b, n)  # noqa: E731
            tag = f"{i + 1}{j + 1}"
            out["A" + tag] = E(i, i) - E(j, j)
            out["B" + tag] = E(i, j) + E(j, i)
            out["C" + tag] = -1j * (E(i, j) - E(j, i))
    return out


@lru_cache(maxsize=None)
def standard_basis(n: int) -> FormBasis:
    """Orthonormal basis built from the A/B/C generators.

    Order: the chain ``A^{12}, A^{13}, ...`` after Gram-Schmidt, then
    ``B^{ij}/sqrt(2)`` for ``i < j`` lexicographically, then ``C^{ij}/sqrt(2)``.
    """
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    gens = raw_generators(n)
    mats, labels = [], []
    for j in range(2, n + 1):
        v = gens[f"A1{j}"].copy()
        for u in mats:
            v = v - np.sum(v * u.conj()).real * u
        mats.append(v / np.sqrt(np.sum(np.abs(v) ** 2)))
        labels.append(f"A1{j}")
    for fam in "BC":
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                mats.append(gens[f"{fam}{i}{j}"] / np.sqrt(2))
                labels.append(f"{fam}{i}{j}")
    return FormBasis(
        n=n,
        omega_hat=HermitianForm(np.eye(n) / np.sqrt(n)),
        elems=tuple(HermitianForm(m) for m in mats),
        labels=tuple(labels),
        basis_id=f"standard-n{n}",
    )


def gram(b: FormBasis) -> np.ndarray:
    S = b.stack.reshape(b.dim, -1)
    return S @ S.conj().T


def basis_defects(b: FormBasis) -> dict[str, float]:
    """Deviation from orthonormality, tracelessness and Hermiticity (all zero for a good basis)."""
    S = b.stack
    return {
        "gram": float(np.max(np.abs(gram(b) - np.eye(b.dim)))),
        "omega": float(np.max(np.abs(np.einsum("pab,ab->p", S, b.omega_hat.m.conj())))),
        "trace": float(np.max(np.abs(np.einsum("paa->p", S)))),
        "hermitian": float(np.max(np.abs(S - np.swapaxes(S, 1, 2).conj()))),
    }


def act(t: KahlerCurvature, eta) -> HermitianForm:
    """Apply the curvature operator to a (1,1)-form."""
    m = _mat(eta)
    if m.shape != (t.n, t.n):
        raise ValueError(f"form has shape {m.shape}, tensor has n={t.n}")
    return HermitianForm(np.einsum("ijkl,ji->kl", t.comp, m))


def operator_matrix_array(comp: np.ndarray, stack: np.ndarray) -> np.ndarray:
    """``M[p, q] = <act(R, e_q), e_p>`` as a complex array; ``comp`` may be batched."""
    n = stack.shape[-1]
    m = stack.shape[0]
    Rmat = comp.reshape(comp.shape[:-4] + (n * n, n * n))
    G = np.swapaxes(stack, 1, 2).reshape(m, n * n)
    H = stack.conj().reshape(m, n * n)
    return H @ np.swapaxes(Rmat, -1, -2) @ G.T


def _real_symmetric(Mc: np.ndarray, tol: float, what: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(Mc), initial=0.0)))
    imag = float(np.max(np.abs(Mc.imag), initial=0.0))
    if imag > tol * scale:
        raise InvariantError(f"{what}: imaginary residue {imag:.3e}")
    M = Mc.real
    asym = float(np.max(np.abs(M - np.swapaxes(M, -1, -2)), initial=0.0))
    if asym > tol * scale:
        raise InvariantError(f"{what}: asymmetry {asym:.3e}")
    return (M + np.swapaxes(M, -1, -2)) / 2


def matrix_traceless(t: KahlerCurvature, b: FormBasis, tol: float = DEFAULT_TOL) -> OperatorMatrix:
    """Matrix of the traceless bisectional curvature operator in basis ``b``."""
    if b.n != t.n:
        raise ValueError(f"basis is for n={b.n}, tensor has n={t.n}")
    M = _real_symmetric(operator_matrix_array(t.comp, b.stack), tol, "matrix_traceless")
    return OperatorMatrix(M, b.basis_id)


def matrix_full(t: KahlerCurvature, b: FormBasis, tol: float = DEFAULT_TOL) -> OperatorMatrix:
    """Matrix of the operator on all (1,1)-forms, in the basis ``(omega_hat, elems...)``.

    The corner is ``R/n`` (unit-normalized Kähler direction), the first row and
    column hold ``<Ric0, e_p>/sqrt(n)``, and the lower block is ``matrix_traceless``.
    """
    if b.n != t.n:
        raise ValueError(f"basis is for n={b.n}, tensor has n={t.n}")
    full = np.concatenate([b.omega_hat.m[None], b.stack])
    M = _real_symmetric(operator_matrix_array(t.comp, full), tol, "matrix_full")
    return OperatorMatrix(M, b.basis_id + "+omega")


def spectrum(M: OperatorMatrix | np.ndarray) -> np.ndarray:
    """Eigenvalues in ascending order."""
    m = M.m if isinstance(M, OperatorMatrix) else np.asarray(M, dtype=float)
    return np.linalg.eigvalsh(m)


def coefficients(eta, b: FormBasis) -> np.ndarray:
    """Real coordinates ``<eta, e_p>`` of a Hermitian form."""
    return np.einsum("ab,pab->p", _mat(eta), b.stack.conj()).real


# -- reconstruction of the traceless 4-tensor from M -------------------------


@lru_cache(maxsize=None)
def traceless_s4_basis(n: int) -> np.ndarray:
    """Real basis of trace-free Kähler 4-tensors, shape ``(d, n, n, n, n)``.

    Kähler tensors are Hermitian forms on symmetric pairs (``N**2`` real
    parameters, ``N = n(n+1)/2``); the partial trace removes ``n**2`` of them.
    """
    N = n * (n + 1) // 2
    herm = []
    for a in range(N):
        for c in range(a, N):
            H = np.zeros((N, N), dtype=complex)
            H[a, c] = H[c, a] = 1.0
            herm.append(H)
            if c != a:
                H = np.zeros((N, N), dtype=complex)
                H[a, c], H[c, a] = 1j, -1j
                herm.append(H)
    T = tensor_from_pair_form(np.array(herm))
    tr = np.einsum("kaacd->kcd", T).reshape(len(herm), -1)
    constraint = np.concatenate([tr.real, tr.imag], axis=1).T
    Z = scipy.linalg.null_space(constraint)
    out = np.einsum("kr,kijab->rijab", Z, T)
    out.setflags(write=False)
    return out


def _triu(M: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(M.shape[-1])
    return M[..., iu[0], iu[1]]


@lru_cache(maxsize=None)
def _forward(basis_id: str, n: int, stack_key: bytes) -> np.ndarray:
    stack = np.frombuffer(stack_key, dtype=complex).reshape(-1, n, n)
    Mc = operator_matrix_array(traceless_s4_basis(n), stack)
    return _triu(Mc.real).T


def forward_map(b: FormBasis) -> np.ndarray:
    """Real linear map from trace-free 4-tensor coordinates to the upper triangle of ``M``."""
    return _forward(b.basis_id, b.n, b.stack.tobytes())


@dataclass(frozen=True)
class Reconstruction:
    s4: np.ndarray = field(repr=False)
    residual: float
    rank: int


def reconstruct_s4(M: OperatorMatrix | np.ndarray, b: FormBasis, tol: float = 1e-9) -> Reconstruction:
    """Recover the trace-free 4-tensor whose operator matrix is ``M``.

    Solves the linear system by least squares. The residual is the largest
    entry of ``matrix(s4) - M``; a residual above ``tol * max(1, |M|)`` means
    ``M`` is not the matrix of any curvature tensor and raises
    :class:`InvariantError`.
    """
    m = M.m if isinstance(M, OperatorMatrix) else np.asarray(M, dtype=float)
    if m.shape != (b.dim, b.dim):
        raise ValueError(f"expected a {b.dim}x{b.dim} matrix, got {m.shape}")
    F = forward_map(b)
    x, _, rank, _ = np.linalg.lstsq(F, _triu(m), rcond=None)
    s4 = np.einsum("r,rijkl->ijkl", x, traceless_s4_basis(b.n))
    back = operator_matrix_array(s4, b.stack).real
    residual = float(np.max(np.abs(back - m), initial=0.0))
    if residual > tol * max(1.0, float(np.max(np.abs(m), initial=0.0))):
        raise InvariantError(f"not a curvature-operator matrix (residual {residual:.3e})")
    return Reconstruction(s4, residual, int(rank))


@dataclass(frozen=True)
class TraceBound:
    trace: float
    bound: float
    ok: bool
    applicable: bool


def trace_bound_check(t: KahlerCurvature, b: FormBasis, tol: float = 1e-9) -> TraceBound:
    """Compare ``tr(M)`` with ``(n-1) R``; only meaningful when ``M`` is 2-nonnegative."""
    M = matrix_traceless(t, b)
    lam = spectrum(M)
    tr = float(np.trace(M.m))
    bound = (t.n - 1) * scalar(t)
    applicable = bool(lam[0] + lam[1] >= -DEFAULT_TOL)
    return TraceBound(tr, bound, applicable and tr <= bound + tol, applicable)
