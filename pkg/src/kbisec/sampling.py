"""Random curvature tensors, optionally shifted into a cone."""

from __future__ import annotations

import numpy as np

from .basis import operator_matrix_array, standard_basis, traceless_s4_basis
from .curvature import KahlerCurvature, space_form, tensor_from_pair_form

CONES = ("nonneg", "2nonneg")


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_pair_form(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    N = n * (n + 1) // 2
    X = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    return scale * (X + X.conj().T) / 2


def cone_shift(comp: np.ndarray, cone: str, margin: float, ricci_min: float | None = None) -> float:
    """Coefficient ``s`` such that ``comp + s * space_form(n, 1)`` sits exactly ``margin`` inside ``cone``.

    Adding ``s * space_form(n, 1)`` adds ``s I`` to the operator matrix and
    ``(n+1) s I`` to Ricci. When ``ricci_min`` is given, ``s`` is also raised
    until the smallest Ricci eigenvalue reaches it.
    """
    if cone not in CONES:
        raise ValueError(f"unknown cone {cone!r}; expected one of {CONES}")
    n = comp.shape[0]
    M = operator_matrix_array(comp, standard_basis(n).stack).real
    lam = np.linalg.eigvalsh(M)
    if cone == "nonneg":
        s = margin - lam[0]
    else:
        s = (margin - lam[0] - lam[1]) / 2
    if ricci_min is not None:
        ric = np.linalg.eigvalsh(np.einsum("ijkk->ij", comp))
        s = max(s, (ricci_min - ric[0]) / (n + 1))
    return float(s)


def random_curvature(
    n: int,
    seed=None,
    cone: str | None = None,
    margin: float = 0.0,
    scale: float = 1.0,
    ricci_min: float | None = None,
) -> KahlerCurvature:
    """Sample a Kähler curvature tensor.

    The tensor comes from a random Hermitian form on symmetric index pairs
    (GUE-like, entries of size ``scale``), so all Kähler symmetries hold by
    construction. With ``cone`` set, a multiple of ``space_form(n, 1)`` is
    added so the smallest eigenvalue (``"nonneg"``) or the sum of the two
    smallest (``"2nonneg"``) equals ``margin``.

    Parameters
    ----------
    n : int
        Complex dimension, at least 2.
    seed : int, SeedSequence or Generator, optional
        Same seed gives the same tensor.
    cone : {None, "nonneg", "2nonneg"}
    margin : float
        Distance inside the cone, measured on the eigenvalues.
    scale : float
        Size of the random part before shifting.
    ricci_min : float, optional
        Also shift until the smallest Ricci eigenvalue is at least this.
    """
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    rng = _rng(seed)
    comp = tensor_from_pair_form(random_pair_form(n, rng, scale))
    if cone is not None:
        comp = comp + cone_shift(comp, cone, margin, ricci_min) * space_form(n, 1.0).comp
    return KahlerCurvature(n, comp)


def random_traceless_s4(n: int, seed=None, scale: float = 1.0) -> np.ndarray:
    """Random Kähler-symmetric 4-tensor with zero partial trace.

    Gaussian coordinates on the orthonormal basis of that space, so the
    result is a valid input for :func:`kbisec.basis.reconstruct_s4`.
    """
    rng = _rng(seed)
    basis = traceless_s4_basis(n)
    x = scale * rng.normal(size=basis.shape[0])
    return np.einsum("r,rijkl->ijkl", x, basis)


def random_unitaries(n: int, count: int, seed=None) -> np.ndarray:
    """Haar-random unitary matrices, shape ``(count, n, n)``."""
    rng = _rng(seed)
    Z = (rng.normal(size=(count, n, n)) + 1j * rng.normal(size=(count, n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=1, axis2=2)
    return Q * (d / np.abs(d))[:, None, :]
