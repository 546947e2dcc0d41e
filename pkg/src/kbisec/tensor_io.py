"""JSON and CSV formats for tensors, matrices and reports.

Tensor files list a generating set of components with 1-based indices::

    {"n": 2, "components": [{"i": 1, "j": 1, "k": 1, "l": 1, "re": 0.667, "im": 0.0}, ...]}

The loader fills in every symmetric image and rejects inconsistent entries.
Components not reached by any listed entry are zero.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math

import numpy as np

from .curvature import DEFAULT_TOL, KahlerCurvature


class TensorFormatError(ValueError):
    """Malformed or self-contradictory tensor file."""


def symmetric_images(i: int, j: int, k: int, l: int) -> list[tuple[tuple[int, int, int, int], bool]]:  # noqa: E741
    """The eight index tuples tied to ``(i, j, k, l)``; the flag marks a conjugated value."""
    base = [(i, j, k, l), (k, j, i, l), (i, l, k, j), (k, l, i, j)]
    out = [(b, False) for b in base]
    out += [((b[1], b[0], b[3], b[2]), True) for b in base]
    return out


def from_components(n: int, components, tol: float = DEFAULT_TOL) -> KahlerCurvature:
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise TensorFormatError(f"'n' must be an integer >= 2, got {n!r}")
    comp = np.zeros((n,) * 4, dtype=complex)
    seen = np.zeros((n,) * 4, dtype=bool)
    for pos, c in enumerate(components):
        try:
            idx = tuple(int(c[key]) - 1 for key in "ijkl")
            z = complex(float(c.get("re", 0.0)), float(c.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise TensorFormatError(f"components[{pos}]: {exc!r}") from None
        if not all(0 <= a < n for a in idx):
            raise TensorFormatError(f"components[{pos}]: index {tuple(a + 1 for a in idx)} out of range 1..{n}")
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise TensorFormatError(f"components[{pos}]: non-finite value")
        for img, conj in symmetric_images(*idx):
            v = z.conjugate() if conj else z
            if seen[img] and abs(comp[img] - v) > tol * max(1.0, abs(v)):
                where = tuple(a + 1 for a in img)
                raise TensorFormatError(
                    f"components[{pos}] contradicts an earlier entry at {where}: {comp[img]} vs {v}"
                )
            comp[img] = v
            seen[img] = True
    return KahlerCurvature(n, comp)


def loads_tensor(text: str, tol: float = DEFAULT_TOL) -> KahlerCurvature:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TensorFormatError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or "n" not in doc or "components" not in doc:
        raise TensorFormatError("expected an object with keys 'n' and 'components'")
    if not isinstance(doc["components"], list):
        raise TensorFormatError("'components' must be a list")
    return from_components(doc["n"], doc["components"], tol)


def load_tensor(path, tol: float = DEFAULT_TOL) -> KahlerCurvature:
    with open(path) as fh:
        return loads_tensor(fh.read(), tol)


def tensor_to_dict(t: KahlerCurvature, tol: float = 0.0) -> dict:
    """One representative per symmetry orbit, skipping entries with ``|value| <= tol``."""
    done = set()
    comps = []
    for idx in itertools.product(range(t.n), repeat=4):
        if idx in done:
            continue
        done.update(img for img, _ in symmetric_images(*idx))
        z = t.comp[idx]
        if abs(z) <= tol:
            continue
        i, j, k, l = (a + 1 for a in idx)  # noqa: E741
        comps.append({"i": i, "j": j, "k": k, "l": l, "re": float(z.real), "im": float(z.imag)})
    return {"n": t.n, "components": comps}


def dumps_json(obj) -> str:
    """Deterministic JSON: sorted keys, NaN written as null."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def matrix_to_csv(m: np.ndarray) -> str:
    """Row-major CSV, one matrix row per line."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(m, dtype=float):
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()
