"""Reaction ODE of the normalized Kähler-Ricci flow at a point, and cone-invariance runs.

Only the fiberwise ODE ``dR/dt = phi(R)`` is modeled (no Laplacian). In an
evolved unitary frame

    dR_{i jbar k lbar}/dt = -R_{ijkl} + R_{ijpq} R_{qpkl} - R_{ipkq} R_{pjql} + R_{ilpq} R_{qpkj}

and the scalar, traceless Ricci and traceless 4-tensor parts obey the
matching reaction equations below.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .basis import FormBasis, OperatorMatrix, coefficients, standard_basis
from .cones import ConeReport, diagnostics
from .curvature import (
    HermitianForm,
    InvariantError,
    KahlerCurvature,
    TracelessParts,
    parts_violations,
    symmetry_violations,
)
from .lie import StructureConstants, bracket_quadratic, sharp
from .sampling import CONES, random_curvature, random_unitaries

log = logging.getLogger(__name__)

METHODS = ("rk4", "euler")
TRAJECTORY_COLUMNS = (
    "t",
    "R",
    "lam1",
    "lam2",
    "lam_pair",
    "orth_bisec_min",
    "ricci_min",
    "ricci_pair_min",
    "sup_ratio",
    "max_abs_component",
)


# -- right-hand sides ---------------------------------------------------------


def rhs_array(comp: np.ndarray) -> np.ndarray:
    """Reaction term on raw arrays with optional leading batch axes."""
    n = comp.shape[-1]
    lead = comp.shape[:-4]
    sq = lead + (n * n, n * n)
    # Q1[ij,kl] = R[ij,pq] R[qp,kl]; Q3 is Q1 with i and k exchanged
    q1 = (comp.reshape(sq) @ np.swapaxes(comp, -4, -3).reshape(sq)).reshape(comp.shape)
    q3 = np.swapaxes(q1, -4, -2)
    # Q2[ik,jl] = R[i p k q] R[p j q l] = P[ik,pq] P[pq,jl] with P = R[i,k,j,l]
    P = np.swapaxes(comp, -3, -2).reshape(sq)
    q2 = np.swapaxes((P @ P).reshape(comp.shape), -3, -2)
    return -comp + q1 - q2 + q3


def rhs_full(t: KahlerCurvature, tol: float = 1e-10) -> KahlerCurvature:
    """Time derivative of the curvature tensor under the reaction ODE."""
    D = rhs_array(t.comp)
    scale = max(1.0, float(np.max(np.abs(D))))
    worst = max(symmetry_violations(D))
    if not worst <= tol * scale:
        raise InvariantError(f"rhs_full output breaks Kähler symmetry by {worst:.3e}")
    return KahlerCurvature(t.n, D)


def rhs_scalar(p: TracelessParts) -> float:
    """``-R + R**2/n + S_ab S_ba``."""
    S = p.ric0.m
    return float(-p.scalar + p.scalar**2 / p.n + np.einsum("ab,ba->", S, S).real)


def rhs_ric0(p: TracelessParts, tol: float = 1e-10) -> HermitianForm:
    """``(R - n)/n S_ab + S_{a b i j} S_{j i}``."""
    n, S = p.n, p.ric0.m
    dS = (p.scalar - n) / n * S + np.einsum("abij,ji->ab", p.s4, S)
    tr = abs(np.trace(dS))
    if tr > tol * max(1.0, float(np.max(np.abs(dS)))):
        raise InvariantError(f"rhs_ric0 is not traceless (trace {tr:.3e})")
    return HermitianForm(dS)


def rhs_s4(p: TracelessParts, tol: float = 1e-10) -> np.ndarray:
    """``-S + S_{abij} S_{jicd} + S_{aijd} S_{ibcj} - S_{aicj} S_{ibjd} + S_ab S_cd / n``."""
    S4, S = p.s4, p.ric0.m
    d = (
        -S4
        + np.einsum("abij,jicd->abcd", S4, S4)
        + bracket_quadratic(S4)
        + np.einsum("ab,cd->abcd", S, S) / p.n
    )
    scale = max(1.0, float(np.max(np.abs(d))))
    defects = parts_violations(TracelessParts(0.0, HermitianForm(np.zeros_like(S)), d))
    worst = max(v for k, v in defects.items() if k.startswith("s4_"))
    if worst > tol * scale:
        raise InvariantError(f"rhs_s4 breaks trace or symmetry invariants by {worst:.3e}")
    return d


def t_matrix(p: TracelessParts, b: FormBasis) -> OperatorMatrix:
    """Projection of ``S_ab S_cd`` onto the basis: ``T = s s^T`` with ``s_q = <Ric0, phi^q>``."""
    s = coefficients(p.ric0, b)
    return OperatorMatrix(np.outer(s, s), b.basis_id)


def rhs_matrix(M: OperatorMatrix, T: OperatorMatrix, sc: StructureConstants, sharp_fn=None) -> OperatorMatrix:
    """``-M + M^2 - M#/2 + T/n``; ``sharp_fn`` overrides :func:`sharp`."""
    sharp_fn = sharp_fn or sharp
    m = M.m
    n = int(round(np.sqrt(m.shape[0] + 1)))
    if T.m.shape != m.shape or sc.dim != m.shape[0]:
        raise ValueError("M, T and structure constants must share a dimension")
    return OperatorMatrix(-m + m @ m - 0.5 * sharp_fn(M, sc).m + T.m / n, M.basis_id)


# -- integration --------------------------------------------------------------


def _step(comp: np.ndarray, dt: float, method: str) -> np.ndarray:
    if method == "euler":
        return comp + dt * rhs_array(comp)
    k1 = rhs_array(comp)
    k2 = rhs_array(comp + 0.5 * dt * k1)
    k3 = rhs_array(comp + 0.5 * dt * k2)
    k4 = rhs_array(comp + dt * k3)
    return comp + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _state_defect(comp: np.ndarray) -> np.ndarray:
    """Per-element symmetry defect relative to size; NaN/inf map to inf."""
    ax = (-4, -3, -2, -1)
    scale = np.maximum(1.0, np.abs(comp).max(axis=ax))
    d1 = np.abs(comp - np.swapaxes(comp, -4, -2)).max(axis=ax)
    d2 = np.abs(comp - np.swapaxes(comp, -3, -1)).max(axis=ax)
    d3 = np.abs(comp - np.swapaxes(np.swapaxes(comp, -4, -3), -2, -1).conj()).max(axis=ax)
    d = np.maximum(np.maximum(d1, d2), d3) / scale
    return np.where(np.isfinite(d), d, np.inf)


@dataclass(frozen=True)
class FlowState:
    t: float
    curv: KahlerCurvature


@dataclass(frozen=True)
class Trajectory:
    states: tuple[FlowState, ...]
    diagnostics: tuple[ConeReport, ...]
    step: float
    method: str
    error: str | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def rows(self) -> list[dict]:
        out = []
        for s, d in zip(self.states, self.diagnostics):
            out.append(
                {
                    "t": s.t,
                    "R": d.R,
                    "lam1": d.lambda_min,
                    "lam2": d.lambda2,
                    "lam_pair": d.lambda_pair_min,
                    "orth_bisec_min": d.orth_bisec_min,
                    "ricci_min": d.ricci_min,
                    "ricci_pair_min": d.ricci_pair_min,
                    "sup_ratio": d.sup_ratio,
                    "max_abs_component": d.max_abs_component,
                }
            )
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=TRAJECTORY_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({k: repr(float(v)) for k, v in row.items()})
        return buf.getvalue()


def _n_steps(t0: float, dt: float, t_end: float) -> int:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not t_end > t0:
        raise ValueError(f"t_end ({t_end}) must exceed the start time ({t0})")
    return max(1, int(round((t_end - t0) / dt)))


def integrate(
    s0: FlowState,
    dt: float,
    t_end: float,
    method: str = "rk4",
    frames: int = 0,
    seed=0,
    tol: float = 1e-8,
) -> Trajectory:
    """Fixed-step integration of the reaction ODE from ``s0``.

    Every accepted state is checked for Kähler symmetry (relative ``tol``) and
    finiteness. On the first violation the trajectory stops there and carries
    an ``error`` message instead of raising.

    ``frames`` random unitary frames (plus the evolved frame itself) are used
    for the orthogonal-bisectional and sup-ratio diagnostics.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    n = s0.curv.n
    steps = _n_steps(s0.t, dt, t_end)
    stack = standard_basis(n).stack
    U = np.concatenate([np.eye(n, dtype=complex)[None], random_unitaries(n, frames, seed)])

    comp = np.array(s0.curv.comp)
    states = [s0]
    diags = [ConeReport.from_diagnostics(diagnostics(comp, stack, U))]
    error = None
    for k in range(1, steps + 1):
        with np.errstate(all="ignore"):
            nxt = _step(comp, dt, method)
        defect = float(_state_defect(nxt))
        if not defect <= tol:
            what = "blow-up" if not np.isfinite(defect) else f"invariant violation (defect {defect:.3e})"
            error = f"{what} at t={s0.t + k * dt:.6g}"
            log.warning(error)
            break
        comp = nxt
        states.append(FlowState(s0.t + k * dt, KahlerCurvature(n, comp)))
        diags.append(ConeReport.from_diagnostics(diagnostics(comp, stack, U)))
    return Trajectory(tuple(states), tuple(diags), dt, method, error)


# -- Monte Carlo cone invariance ----------------------------------------------


@dataclass(frozen=True)
class MCConfig:
    n: int = 2
    cone: str = "2nonneg"
    samples: int = 200
    dt: float = 1e-3
    t_end: float = 1.0
    margin: float = 0.01
    seed: int = 0
    frames: int = 0
    scale: float = 0.03
    ricci_min: float | None = None
    method: str = "rk4"
    chunk: int = 50

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.cone not in CONES:
            raise ValueError(f"cone must be one of {CONES}, got {self.cone!r}")
        if self.samples < 0:
            raise ValueError("samples must be >= 0")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        _n_steps(0.0, self.dt, self.t_end)


_EXTREMA = {
    "lam1": min,
    "lam_pair": min,
    "orth_bisec_min": min,
    "ricci_min": min,
    "ricci_pair_min": min,
    "R": min,
    "sup_ratio": max,
}


@dataclass(frozen=True)
class SampleResult:
    index: int
    initial: dict
    extrema: dict
    t_reached: float
    error: str | None = None


@dataclass(frozen=True)
class MCSummary:
    config: MCConfig
    samples: tuple[SampleResult, ...] = ()
    extrema: dict = field(default_factory=dict)
    failures: int = 0

    @classmethod
    def of(cls, config: MCConfig, results) -> MCSummary:
        out = cls(config)
        for r in results:
            out = out.merge(cls(config, (r,), dict(r.extrema), int(r.error is not None)))
        return out

    def merge(self, other: MCSummary) -> MCSummary:
        """Combine two partial summaries; associative and order independent."""
        ext = dict(self.extrema)
        for k, v in other.extrema.items():
            ext[k] = _EXTREMA[k](ext[k], v) if k in ext else v
        samples = tuple(sorted(self.samples + other.samples, key=lambda r: r.index))
        return MCSummary(self.config, samples, ext, self.failures + other.failures)

    @property
    def passed(self) -> bool:
        """All trajectories finished and stayed in the starting cone to ``-1e-6``."""
        if self.failures:
            return False
        if not self.samples:
            return True
        key = "lam1" if self.config.cone == "nonneg" else "lam_pair"
        return self.extrema[key] >= -1e-6

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "n_samples": len(self.samples),
            "failures": self.failures,
            "passed": self.passed,
            "extrema": self.extrema,
            "samples": [asdict(r) for r in self.samples],
        }


def _run_chunk(config: MCConfig, indices: list[int]) -> list[SampleResult]:
    n = config.n
    seqs = np.random.SeedSequence(config.seed).spawn(config.samples)
    comp = np.array(
        [
            random_curvature(
                n,
                np.random.default_rng(seqs[i]),
                cone=config.cone,
                margin=config.margin,
                scale=config.scale,
                ricci_min=config.ricci_min,
            ).comp
            for i in indices
        ]
    )
    frame_seed = np.random.SeedSequence([config.seed, 1])
    U = np.concatenate([np.eye(n, dtype=complex)[None], random_unitaries(n, config.frames, frame_seed)])
    stack = standard_basis(n).stack
    steps = _n_steps(0.0, config.dt, config.t_end)

    d0 = diagnostics(comp, stack, U)
    initial = [{k: float(d0[k][b]) for k in _EXTREMA} for b in range(len(indices))]
    ext = {k: d0[k].copy() for k in _EXTREMA}
    alive = np.ones(len(indices), dtype=bool)
    t_reached = np.zeros(len(indices))
    errors: list[str | None] = [None] * len(indices)
    for b in np.flatnonzero(d0["R"] <= 0):
        alive[b] = False
        errors[b] = "non-positive scalar curvature at t=0"

    for k in range(1, steps + 1):
        if not alive.any():
            break
        t = k * config.dt
        with np.errstate(all="ignore"):
            nxt = _step(comp[alive], config.dt, config.method)
        idx = np.flatnonzero(alive)
        defect = _state_defect(nxt)
        d = diagnostics(np.where(np.isfinite(nxt), nxt, 0.0), stack, U)
        for j, b in enumerate(idx):
            if not np.isfinite(defect[j]):
                errors[b] = f"blow-up at t={t:.6g}"
            elif not defect[j] <= 1e-8:
                errors[b] = f"invariant violation at t={t:.6g} (defect {defect[j]:.3e})"
            elif not d["R"][j] > 0:
                errors[b] = f"scalar curvature reached {d['R'][j]:.3e} at t={t:.6g}"
            if errors[b] is not None:
                alive[b] = False
                continue
            comp[b] = nxt[j]
            t_reached[b] = t
            for key, red in _EXTREMA.items():
                ext[key][b] = red(ext[key][b], d[key][j])

    return [
        SampleResult(
            index=i,
            initial=initial[b],
            extrema={k: float(ext[k][b]) for k in _EXTREMA},
            t_reached=float(t_reached[b]),
            error=errors[b],
        )
        for b, i in enumerate(indices)
    ]


def montecarlo_cone(config: MCConfig, workers: int = 1) -> MCSummary:
    """Sample tensors inside a cone, integrate each, and collect extrema over time.

    Each sample draws from its own child of ``SeedSequence(config.seed)``, and
    samples are processed in fixed chunks, so results do not depend on
    ``workers``.
    """
    chunks = [
        list(range(s, min(s + config.chunk, config.samples))) for s in range(0, config.samples, config.chunk)
    ]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_run_chunk, [config] * len(chunks), chunks))
    else:
        parts = [_run_chunk(config, c) for c in chunks]
    summary = MCSummary(config)
    for part in parts:
        summary = summary.merge(MCSummary.of(config, part))
    if summary.failures:
        first = next(r for r in summary.samples if r.error)
        log.warning("%d of %d samples failed; first: #%d %s", summary.failures, config.samples, first.index, first.error)
    return summary
