"""Pointwise Kähler curvature tensors in a unitary frame.

A tensor is stored as a complex array ``comp`` of shape ``(n, n, n, n)`` with
``comp[i, j, k, l] = R_{i jbar k lbar}``. The metric at the point is the
identity, so raising and lowering indices is a no-op.

Index conventions used throughout the package::

    Ric[i, j] = sum_k comp[i, j, k, k]
    R         = sum_{i, k} comp[i, i, k, k]
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-10


class InvariantError(ValueError):
    """An input or output violates a structural invariant beyond tolerance."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class KahlerCurvature:
    """Curvature tensor ``R_{i jbar k lbar}`` at a point with ``g = I``.

    The constructor only checks shape. Use :func:`validate` to check the
    Kähler symmetries; every builder in this package produces valid tensors.
    """

    n: int
    comp: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"dimension must be >= 2, got {self.n}")
        comp = _readonly(self.comp)
        if comp.shape != (self.n,) * 4:
            raise ValueError(f"expected shape {(self.n,) * 4}, got {comp.shape}")
        object.__setattr__(self, "comp", comp)

    def __add__(self, other: KahlerCurvature) -> KahlerCurvature:
        _same_n(self.n, other.n)
        return KahlerCurvature(self.n, self.comp + other.comp)

    def __sub__(self, other: KahlerCurvature) -> KahlerCurvature:
        _same_n(self.n, other.n)
        return KahlerCurvature(self.n, self.comp - other.comp)

    def __mul__(self, s: float) -> KahlerCurvature:
        return KahlerCurvature(self.n, s * self.comp)

    __rmul__ = __mul__


@dataclass(frozen=True)
class HermitianForm:
    """A real (1,1)-form ``eta_{a bbar}`` stored as its Hermitian coefficient matrix."""

    m: np.ndarray

    def __post_init__(self):
        m = _readonly(self.m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        object.__setattr__(self, "m", m)

    @property
    def n(self) -> int:
        return self.m.shape[0]

    def is_hermitian(self, tol: float = DEFAULT_TOL) -> bool:
        return bool(np.max(np.abs(self.m - self.m.conj().T), initial=0.0) <= tol)


@dataclass(frozen=True)
class TracelessParts:
    """Orthogonal pieces of a curvature tensor: scalar, traceless Ricci and traceless 4-tensor."""

    scalar: float
    ric0: HermitianForm
    s4: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "s4", _readonly(self.s4))
        if self.s4.shape != (self.ric0.n,) * 4:
            raise ValueError("ric0 and s4 dimensions disagree")

    @property
    def n(self) -> int:
        return self.ric0.n


@dataclass(frozen=True)
class ValidationReport:
    pair_ik: float
    pair_jl: float
    reality: float
    tol: float

    @property
    def max_violation(self) -> float:
        return max(self.pair_ik, self.pair_jl, self.reality)

    @property
    def ok(self) -> bool:
        # NaN compares False, so non-finite tensors fail
        return bool(self.max_violation <= self.tol)

    def to_dict(self) -> dict:
        return {
            "pair_ik": self.pair_ik,
            "pair_jl": self.pair_jl,
            "reality": self.reality,
            "max_violation": self.max_violation,
            "ok": self.ok,
        }


def _same_n(a: int, b: int) -> None:
    if a != b:
        raise ValueError(f"dimension mismatch: {a} vs {b}")


def symmetry_violations(comp: np.ndarray) -> tuple[float, float, float]:
    """Max violation of the three Kähler identities; ``comp`` may carry leading batch axes."""
    comp = np.asarray(comp)
    ik = np.max(np.abs(comp - np.swapaxes(comp, -4, -2)), initial=0.0)
    jl = np.max(np.abs(comp - np.swapaxes(comp, -3, -1)), initial=0.0)
    conj = np.swapaxes(np.swapaxes(comp, -4, -3), -2, -1).conj()
    re = np.max(np.abs(comp - conj), initial=0.0)
    return float(ik), float(jl), float(re)


def validate(t: KahlerCurvature, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Report the largest violation of each Kähler symmetry.

    Checks ``comp[i,j,k,l] == comp[k,j,i,l]``, ``comp[i,j,k,l] == comp[i,l,k,j]``
    and ``conj(comp[i,j,k,l]) == comp[j,i,l,k]``. Never raises.
    """
    return ValidationReport(*symmetry_violations(t.comp), tol=tol)


def ricci(t: KahlerCurvature) -> HermitianForm:
    return HermitianForm(np.einsum("ijkk->ij", t.comp))


def scalar(t: KahlerCurvature, tol: float = DEFAULT_TOL) -> float:
    """Scalar curvature; raises :class:`InvariantError` if the trace is not real."""
    r = np.einsum("iikk->", t.comp)
    if abs(r.imag) > tol * max(1.0, abs(r.real)):
        raise InvariantError(f"scalar curvature has imaginary part {r.imag:.3e}")
    return float(r.real)


def _delta_delta(n: int) -> np.ndarray:
    d = np.eye(n)
    return np.einsum("ab,cd->abcd", d, d)


def _ricci_part(S: np.ndarray) -> np.ndarray:
    n = S.shape[-1]
    d = np.eye(n)
    return (np.einsum("ab,cd->abcd", S, d) + np.einsum("ab,cd->abcd", d, S)) / n


def decompose(t: KahlerCurvature) -> TracelessParts:
    """Split ``t`` into ``(R, S_{a bbar}, S_{a bbar c dbar})``.

    ``S_ab = Ric_ab - (R/n) delta_ab`` and
    ``S_abcd = R_abcd - (S_ab delta_cd + S_cd delta_ab)/n - R delta_ab delta_cd / n**2``.
    Both pieces are trace free.
    """
    n = t.n
    R = scalar(t)
    S = ricci(t).m - (R / n) * np.eye(n)
    s4 = t.comp - _ricci_part(S) - (R / n**2) * _delta_delta(n)
    return TracelessParts(R, HermitianForm(S), s4)


def parts_violations(p: TracelessParts) -> dict[str, float]:
    """Invariant defects of a :class:`TracelessParts` triple.

    The traceless 4-tensor keeps pair exchange ``s[i,j,k,l] = s[k,l,i,j]``,
    reality and both partial traces, but not the index swaps ``i <-> k`` or
    ``j <-> l``: the removed Ricci and scalar pieces are not Kähler symmetric
    on their own.
    """
    s4 = p.s4
    S = p.ric0.m
    _, _, re = symmetry_violations(s4)
    return {
        "ric0_trace": float(abs(np.trace(S))),
        "ric0_hermitian": float(np.max(np.abs(S - S.conj().T))),
        "s4_trace": float(
            max(np.max(np.abs(np.einsum("aacd->cd", s4))), np.max(np.abs(np.einsum("abcc->ab", s4))))
        ),
        "s4_pair_exchange": float(np.max(np.abs(s4 - np.transpose(s4, (2, 3, 0, 1))))),
        "s4_reality": re,
    }


def recompose(p: TracelessParts, tol: float = DEFAULT_TOL) -> KahlerCurvature:
    """Inverse of :func:`decompose`.

    Rejects parts that are not trace free, and parts whose sum is not a
    Kähler-symmetric tensor.
    """
    bad = {k: v for k, v in parts_violations(p).items() if not v <= tol}
    if bad:
        raise InvariantError(f"traceless parts violate invariants: {bad}")
    n = p.n
    comp = p.s4 + _ricci_part(p.ric0.m) + (p.scalar / n**2) * _delta_delta(n)
    rep = validate(KahlerCurvature(n, comp), tol)
    if not rep.ok:
        raise InvariantError(f"recomposed tensor is not Kähler symmetric (violation {rep.max_violation:.3e})")
    return KahlerCurvature(n, comp)


def unitary_conjugate(t: KahlerCurvature, U: np.ndarray, tol: float = 1e-12) -> KahlerCurvature:
    """Express ``t`` in the frame given by the columns of ``U``.

    ``R'_{a b c d} = sum U[i,a] conj(U[j,b]) U[k,c] conj(U[l,d]) R_{i j k l}``.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (t.n, t.n):
        raise ValueError(f"expected a {t.n}x{t.n} matrix, got {U.shape}")
    err = np.max(np.abs(U.conj().T @ U - np.eye(t.n)))
    if err > tol:
        raise InvariantError(f"U is not unitary (|U*U - I| = {err:.3e})")
    return KahlerCurvature(t.n, conjugate_array(t.comp, U))


def conjugate_array(comp: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Frame change on raw arrays.

    ``comp`` may carry leading batch axes. A stack of frames ``U`` of shape
    ``(f, n, n)`` adds a frame axis just before the four tensor axes.
    """
    Uc = U.conj()
    if U.ndim == 2:
        return np.einsum("ia,jb,kc,ld,...ijkl->...abcd", U, Uc, U, Uc, comp, optimize=True)
    return np.einsum("fia,fjb,fkc,fld,...ijkl->...fabcd", U, Uc, U, Uc, comp, optimize=True)


def space_form(n: int, c: float) -> KahlerCurvature:
    """Constant holomorphic sectional curvature tensor ``c (d_ij d_kl + d_il d_kj)``.

    With ``c = 1/(n+1)`` this is Einstein with ``Ric = I``.
    """
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    d = np.eye(n)
    comp = c * (np.einsum("ij,kl->ijkl", d, d) + np.einsum("il,kj->ijkl", d, d))
    return KahlerCurvature(n, comp)


def zero(n: int) -> KahlerCurvature:
    return KahlerCurvature(n, np.zeros((n,) * 4))


def pair_index(n: int) -> np.ndarray:
    """``P[i, k]`` = position of the unordered pair ``{i, k}`` in lexicographic order."""
    P = np.empty((n, n), dtype=int)
    pos = 0
    for i in range(n):
        for k in range(i, n):
            P[i, k] = P[k, i] = pos
            pos += 1
    return P


def tensor_from_pair_form(H: np.ndarray) -> np.ndarray:
    """Build ``comp[i,j,k,l] = H[{i,k}, {j,l}]`` from a Hermitian form on symmetric pairs.

    Every Kähler curvature tensor arises this way, and Hermitian ``H`` gives
    all three symmetries for free. Leading batch axes on ``H`` are kept.
    """
    H = np.asarray(H)
    npairs = H.shape[-1]
    n = int(round((np.sqrt(8 * npairs + 1) - 1) / 2))
    if n * (n + 1) // 2 != npairs:
        raise ValueError(f"{npairs} is not a triangular number")
    P = pair_index(n)
    rows = P[:, None, :, None]
    cols = P[None, :, None, :]
    return H[..., rows, cols]
