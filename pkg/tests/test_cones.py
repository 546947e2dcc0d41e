import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from kbisec.basis import OperatorMatrix, matrix_traceless, operator_matrix_array, standard_basis
from kbisec.cones import (
    cone_inequalities,
    cone_report,
    is_2_nonneg,
    is_nonneg,
    orth_bisec_min,
    ricci_pair_min,
    sup_ratio,
)
from kbisec.curvature import KahlerCurvature, ricci, scalar, space_form, tensor_from_pair_form, unitary_conjugate
from kbisec.sampling import random_curvature, random_unitaries


def _kahler_kernel_of_m(n):
    """Kähler tensors whose traceless operator matrix vanishes."""
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
    F = operator_matrix_array(T, standard_basis(n).stack).real.reshape(len(herm), -1).T
    Z = scipy.linalg.null_space(F)
    return np.einsum("kr,kijab->rijab", Z, T)


class TestPredicates:
    def test_diagonal_examples(self):
        M = OperatorMatrix(np.diag([-1.0, 2.0, 3.0]))
        assert not is_nonneg(M)
        assert is_2_nonneg(M)
        assert not is_2_nonneg(np.diag([-2.0, 1.0, 5.0]))
        assert is_nonneg(np.diag([0.0, 1.0, 2.0]))

    def test_tolerance(self):
        assert is_nonneg(np.diag([-1e-12, 1.0]))
        assert not is_nonneg(np.diag([-1e-12, 1.0]), tol=1e-13)

    @pytest.mark.parametrize("n", [2, 3])
    def test_nonneg_implies_2_nonneg(self, n, rng):
        b = standard_basis(n)
        for _ in range(50):
            M = matrix_traceless(random_curvature(n, rng, cone="nonneg", margin=0.0), b)
            assert is_nonneg(M) and is_2_nonneg(M)


class TestCurvatureQuantities:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_space_form_values(self, n):
        c = 1 / (n + 1)
        t = space_form(n, c)
        assert orth_bisec_min(t, frames=20) == pytest.approx(c)
        assert ricci_pair_min(t) == pytest.approx(2.0)
        assert sup_ratio(t, frames=20) == pytest.approx(2 / (n * (n + 1)))

    def test_sup_ratio_needs_positive_scalar(self):
        with pytest.raises(ValueError):
            sup_ratio(space_form(2, -1.0))

    def test_orth_bisec_loop_oracle(self, rng):
        n = 3
        t = random_curvature(n, rng)
        U = random_unitaries(n, 5, seed=11)
        want = min(t.comp[i, i, j, j].real for i in range(n) for j in range(n) if i != j)
        for V in U:
            s = unitary_conjugate(t, V).comp
            want = min(want, min(s[i, i, j, j].real for i in range(n) for j in range(n) if i != j))
        assert orth_bisec_min(t, frames=5, seed=11) == pytest.approx(want, abs=1e-13)

    def test_more_frames_never_raise_the_minimum(self, rng):
        t = random_curvature(3, rng)
        base = orth_bisec_min(t, frames=0)
        for k in (1, 10, 50):
            assert orth_bisec_min(t, frames=k, seed=k) <= base + 1e-15

    def test_ricci_pair(self, rng):
        t = random_curvature(3, rng)
        ev = np.linalg.eigvalsh(ricci(t).m)
        assert ricci_pair_min(t) == pytest.approx(ev[0] + ev[1])

    def test_report_fields(self, rng):
        t = random_curvature(3, rng, cone="2nonneg", margin=0.05)
        r = cone_report(t, frames=5)
        assert r.lambda_pair_min == pytest.approx(0.05)
        assert r.two_nonneg
        assert r.R == pytest.approx(scalar(t))
        assert r.sup_ratio == pytest.approx(r.max_abs_component / r.R)
        assert set(r.to_dict()) >= {"R", "lambda_min", "orth_bisec_min", "sup_ratio"}


class TestConeConsequences:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_nonneg_inequalities_in_random_frames(self, n, rng):
        for _ in range(30):
            t = random_curvature(n, rng, cone="nonneg", margin=0.0)
            rep = cone_inequalities(t, frames=100, seed=int(rng.integers(1 << 30)))
            assert rep.cone == "nonneg"
            assert rep.ok, rep

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_2_nonneg_orthogonal_bisectional(self, n, rng):
        for _ in range(30):
            t = random_curvature(n, rng, cone="2nonneg", margin=0.0)
            rep = cone_inequalities(t, frames=100, seed=int(rng.integers(1 << 30)))
            assert rep.applicable
            assert rep.orth_bisec_min >= -1e-10

    def test_outside_both_cones(self):
        rep = cone_inequalities(space_form(2, -1.0))
        assert not rep.applicable
        assert not rep.ok


class TestScalarBound:
    def test_n2_has_tensors_invisible_to_m(self):
        K = _kahler_kernel_of_m(2)
        assert K.shape[0] == 3
        assert _kahler_kernel_of_m(3).shape[0] == 0

    def test_n2_ratio_is_unbounded_on_the_cone(self):
        K = _kahler_kernel_of_m(2)[0]
        ratios = []
        for eps in (1e-1, 1e-2, 1e-3):
            t = KahlerCurvature(2, K + eps * space_form(2, 1.0).comp)
            r = cone_report(t)
            assert r.nonneg and r.lambda_min == pytest.approx(eps)
            ratios.append(r.sup_ratio)
        assert ratios[1] == pytest.approx(10 * ratios[0], rel=1e-9)
        assert ratios[2] == pytest.approx(100 * ratios[0], rel=1e-9)

    def test_n3_ratio_bounded_on_samples(self, rng):
        worst = max(sup_ratio(random_curvature(3, rng, cone="2nonneg", margin=0.0), frames=5) for _ in range(300))
        assert np.isfinite(worst) and worst < 1.0


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 4), seed=st.integers(0, 2**32 - 1), margin=st.floats(0.0, 1.0))
def test_shift_lands_on_margin(n, seed, margin):
    t = random_curvature(n, seed, cone="2nonneg", margin=margin)
    lam = np.linalg.eigvalsh(matrix_traceless(t, standard_basis(n)).m)
    assert lam[0] + lam[1] == pytest.approx(margin, abs=1e-10)
    t = random_curvature(n, seed, cone="nonneg", margin=margin)
    lam = np.linalg.eigvalsh(matrix_traceless(t, standard_basis(n)).m)
    assert lam[0] == pytest.approx(margin, abs=1e-10)
