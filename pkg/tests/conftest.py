import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def loop_ricci(comp):
    """Ricci contraction with explicit loops, used as an oracle."""
    n = comp.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                out[i, j] += comp[i, j, k, k]
    return out


def loop_space_form(n, c):
    comp = np.zeros((n,) * 4, dtype=complex)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):  # noqa: E741
                    comp[i, j, k, l] = c * ((i == j) * (k == l) + (i == l) * (k == j))
    return comp
