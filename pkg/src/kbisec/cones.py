"""Cone membership of the traceless operator and the curvature inequalities it implies."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .basis import FormBasis, OperatorMatrix, operator_matrix_array, spectrum, standard_basis
from .curvature import KahlerCurvature, conjugate_array, scalar
from .sampling import random_unitaries

CONE_TOL = 1e-10


def _eigs(M) -> np.ndarray:
    return spectrum(M) if isinstance(M, OperatorMatrix) else np.linalg.eigvalsh(np.asarray(M, float))


def is_nonneg(M, tol: float = CONE_TOL) -> bool:
    return bool(_eigs(M)[0] >= -tol)


def is_2_nonneg(M, tol: float = CONE_TOL) -> bool:
    lam = _eigs(M)
    return bool(lam[0] + lam[1] >= -tol)


def _frames(n: int, frames: int, seed) -> np.ndarray:
    """Identity followed by ``frames`` Haar-random unitaries."""
    U = random_unitaries(n, frames, seed)
    return np.concatenate([np.eye(n, dtype=complex)[None], U])


def diagnostics(comp: np.ndarray, stack: np.ndarray, U: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """Cone and curvature diagnostics on raw (possibly batched) tensor arrays.

    ``U`` is a stack of frames in which orthogonal bisectional curvature and
    component magnitudes are sampled; ``None`` means the given frame only.
    """
    n = comp.shape[-1]
    R = np.einsum("...iikk->...", comp).real
    lam = np.linalg.eigvalsh(operator_matrix_array(comp, stack).real)
    ric = np.linalg.eigvalsh(np.einsum("...ijkk->...ij", comp))
    Rf = comp[..., None, :, :, :, :] if U is None else conjugate_array(comp, U)
    biseq = np.einsum("...iijj->...ij", Rf).real
    off = ~np.eye(n, dtype=bool)
    orth = biseq[..., off].min(axis=(-1, -2))
    max_abs = np.abs(Rf).max(axis=(-5, -4, -3, -2, -1))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(R > 0, max_abs / np.where(R > 0, R, 1.0), np.nan)
    return {
        "R": R,
        "lam1": lam[..., 0],
        "lam2": lam[..., 1],
        "lam_pair": lam[..., 0] + lam[..., 1],
        "orth_bisec_min": orth,
        "ricci_min": ric[..., 0],
        "ricci_pair_min": ric[..., 0] + ric[..., 1],
        "sup_ratio": ratio,
        "max_abs_component": max_abs,
    }


def orth_bisec_min(t: KahlerCurvature, frames: int = 100, seed=0) -> float:
    """Smallest ``R_{i ibar j jbar}``, ``i != j``, over the given frame and ``frames`` random ones."""
    return float(diagnostics(t.comp, standard_basis(t.n).stack, _frames(t.n, frames, seed))["orth_bisec_min"])


def ricci_pair_min(t: KahlerCurvature) -> float:
    ric = np.linalg.eigvalsh(np.einsum("ijkk->ij", t.comp))
    return float(ric[0] + ric[1])


def sup_ratio(t: KahlerCurvature, frames: int = 100, seed=0) -> float:
    """Largest component magnitude over sampled frames, divided by the scalar curvature."""
    R = scalar(t)
    if R <= 0:
        raise ValueError(f"sup_ratio needs positive scalar curvature, got {R:.3e}")
    Rf = conjugate_array(t.comp, _frames(t.n, frames, seed))
    return float(np.abs(Rf).max() / R)


@dataclass(frozen=True)
class ConeReport:
    R: float
    lambda_min: float
    lambda2: float
    lambda_pair_min: float
    orth_bisec_min: float
    ricci_min: float
    ricci_pair_min: float
    sup_ratio: float
    max_abs_component: float
    nonneg: bool
    two_nonneg: bool

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_diagnostics(cls, d: dict, tol: float = CONE_TOL) -> ConeReport:
        lam1, pair = float(d["lam1"]), float(d["lam_pair"])
        return cls(
            R=float(d["R"]),
            lambda_min=lam1,
            lambda2=float(d["lam2"]),
            lambda_pair_min=pair,
            orth_bisec_min=float(d["orth_bisec_min"]),
            ricci_min=float(d["ricci_min"]),
            ricci_pair_min=float(d["ricci_pair_min"]),
            sup_ratio=float(d["sup_ratio"]),
            max_abs_component=float(d["max_abs_component"]),
            nonneg=lam1 >= -tol,
            two_nonneg=pair >= -tol,
        )


def cone_report(t: KahlerCurvature, b: FormBasis | None = None, frames: int = 0, seed=0) -> ConeReport:
    b = b or standard_basis(t.n)
    return ConeReport.from_diagnostics(diagnostics(t.comp, b.stack, _frames(t.n, frames, seed)))


@dataclass(frozen=True)
class ConeInequalityReport:
    cone: str | None
    holomorphic_pair_gap: float  # min R_iiii + R_jjjj - 2 R_iijj
    orth_bisec_min: float  # min R_iijj, i != j
    ricci_pair_gap: float  # min R_ii + R_jj, i != j
    ok: bool

    @property
    def applicable(self) -> bool:
        return self.cone is not None


def cone_inequalities(
    t: KahlerCurvature,
    b: FormBasis | None = None,
    tol: float = CONE_TOL,
    frames: int = 0,
    seed=0,
) -> ConeInequalityReport:
    """Check the inequalities a cone condition on ``M`` forces on tensor components.

    On the nonnegative cone: ``R_iiii + R_jjjj >= 2 R_iijj >= 0`` and
    ``R_ii + R_jj >= 0`` for ``i != j``. On the 2-nonnegative cone only
    ``R_iijj >= 0``. Checked in the given frame and ``frames`` random ones;
    outside both cones the report is marked not applicable.
    """
    b = b or standard_basis(t.n)
    lam = spectrum(OperatorMatrix(operator_matrix_array(t.comp, b.stack).real))
    if lam[0] >= -tol:
        cone = "nonneg"
    elif lam[0] + lam[1] >= -tol:
        cone = "2nonneg"
    else:
        return ConeInequalityReport(None, np.nan, np.nan, np.nan, ok=False)

    Rf = conjugate_array(t.comp, _frames(t.n, frames, seed))
    n = t.n
    off = ~np.eye(n, dtype=bool)
    biseq = np.einsum("fiijj->fij", Rf).real
    hol = np.einsum("fii->fi", biseq)
    orth = float(biseq[:, off].min())
    hol_gap = float((hol[:, :, None] + hol[:, None, :] - 2 * biseq)[:, off].min())
    ric = np.einsum("fijkk->fij", Rf)
    rd = np.einsum("fii->fi", ric).real
    ric_gap = float((rd[:, :, None] + rd[:, None, :])[:, off].min())

    ok = orth >= -tol
    if cone == "nonneg":
        ok = ok and hol_gap >= -tol and ric_gap >= -tol
    return ConeInequalityReport(cone, hol_gap, orth, ric_gap, bool(ok))
