import itertools

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from kbisec.basis import (
    FormBasis,
    OperatorMatrix,
    act,
    basis_defects,
    coefficients,
    forward_map,
    gram,
    matrix_full,
    matrix_traceless,
    operator_matrix_array,
    raw_generators,
    reconstruct_s4,
    spectrum,
    standard_basis,
    trace_bound_check,
    traceless_s4_basis,
)
from kbisec.curvature import InvariantError, KahlerCurvature, decompose, ricci, scalar, space_form, validate
from kbisec.sampling import random_curvature, random_traceless_s4


def _rotated_basis(b, rng):
    Q, _ = np.linalg.qr(rng.normal(size=(b.dim, b.dim)))
    mats = np.einsum("pq,qab->pab", Q, b.stack)
    return FormBasis.from_matrices(mats, basis_id="rotated"), Q


class TestStandardBasis:
    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_orthonormal_traceless_hermitian(self, n):
        b = standard_basis(n)
        assert b.dim == n * n - 1
        np.testing.assert_allclose(gram(b), np.eye(b.dim), atol=1e-12)
        assert max(basis_defects(b).values()) < 1e-12
        np.testing.assert_allclose(b.omega_hat.m, np.eye(n) / np.sqrt(n))

    def test_n2_elements(self):
        b = standard_basis(2)
        s = 1 / np.sqrt(2)
        np.testing.assert_allclose(b.stack[0], s * np.diag([1, -1]))
        np.testing.assert_allclose(b.stack[1], s * np.array([[0, 1], [1, 0]]))
        np.testing.assert_allclose(b.stack[2], s * np.array([[0, -1j], [1j, 0]]))
        assert b.labels == ("A12", "B12", "C12")

    def test_raw_a_family_not_orthogonal(self):
        g = raw_generators(3)
        assert np.vdot(g["A13"], g["A12"]).real == pytest.approx(1.0)

    def test_from_matrices_rejects_non_orthonormal(self):
        g = raw_generators(2)
        with pytest.raises(ValueError):
            FormBasis.from_matrices([g["A12"], g["B12"], g["C12"]])

    def test_coefficients_expand(self, rng):
        b = standard_basis(3)
        X = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        H = X + X.conj().T
        H -= np.trace(H) / 3 * np.eye(3)
        c = coefficients(H, b)
        np.testing.assert_allclose(np.einsum("p,pab->ab", c, b.stack), H, atol=1e-13)


class TestAction:
    @pytest.mark.parametrize("n", [2, 3])
    def test_space_form_action(self, n, rng):
        c = 0.4
        X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        eta = X + X.conj().T
        want = c * (np.trace(eta) * np.eye(n) + eta)
        np.testing.assert_allclose(act(space_form(n, c), eta).m, want, atol=1e-13)

    def test_action_is_self_adjoint(self, rng):
        t = random_curvature(3, rng)
        b = standard_basis(3)
        for p, q in itertools.combinations(range(b.dim), 2):
            lhs = np.vdot(b.stack[p], act(t, b.stack[q]).m)
            rhs = np.vdot(act(t, b.stack[p]).m, b.stack[q])
            assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            act(space_form(2, 1.0), np.eye(3))


class TestMatrices:
    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_space_form_spectrum(self, n):
        M = matrix_traceless(space_form(n, 1 / (n + 1)), standard_basis(n))
        assert np.max(np.abs(M.m - np.eye(n * n - 1) / (n + 1))) <= 1e-12

    def test_full_block_space_form(self):
        F = matrix_full(space_form(2, 1 / 3), standard_basis(2))
        np.testing.assert_allclose(F.m, np.diag([1.0, 1 / 3, 1 / 3, 1 / 3]), atol=1e-14)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_full_block_structure(self, n, rng):
        t = random_curvature(n, rng)
        b = standard_basis(n)
        F = matrix_full(t, b)
        assert F.m[0, 0] == pytest.approx(scalar(t) / n, abs=1e-12)
        S = ricci(t).m - scalar(t) / n * np.eye(n)
        np.testing.assert_allclose(F.m[0, 1:], coefficients(S, b) / np.sqrt(n), atol=1e-12)
        np.testing.assert_allclose(F.m[1:, 1:], matrix_traceless(t, b).m, atol=1e-13)

    def test_zero(self):
        M = matrix_traceless(KahlerCurvature(3, np.zeros((3,) * 4)), standard_basis(3))
        assert not np.any(M.m)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_trace_identity(self, n, rng):
        b = standard_basis(n)
        for _ in range(20):
            t = random_curvature(n, rng)
            assert np.trace(matrix_traceless(t, b).m) == pytest.approx((n - 1) * scalar(t) / n, abs=1e-11)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_basis_covariance(self, n, rng):
        b = standard_basis(n)
        b2, Q = _rotated_basis(b, rng)
        t = random_curvature(n, rng)
        M, M2 = matrix_traceless(t, b), matrix_traceless(t, b2)
        np.testing.assert_allclose(M2.m, Q @ M.m @ Q.T, atol=1e-12)
        np.testing.assert_allclose(spectrum(M2), spectrum(M), atol=1e-10)

    def test_basis_dimension_mismatch(self):
        with pytest.raises(ValueError):
            matrix_traceless(space_form(3, 1.0), standard_basis(2))

    def test_diagonal_entries_match_components(self, rng):
        # diagonal entries of M on the B and C elements give the orthogonal bisectional curvature
        t = random_curvature(3, rng)
        b = standard_basis(3)
        M = matrix_traceless(t, b).m
        labels = list(b.labels)
        for i, j in [(1, 2), (1, 3), (2, 3)]:
            pB, pC = labels.index(f"B{i}{j}"), labels.index(f"C{i}{j}")
            want = 2 * t.comp[i - 1, i - 1, j - 1, j - 1].real
            assert M[pB, pB] + M[pC, pC] == pytest.approx(want, abs=1e-12)


class TestSpectrum:
    def test_diagonal(self):
        np.testing.assert_allclose(spectrum(OperatorMatrix(np.diag([3.0, -1.0, 2.0]))), [-1, 2, 3])

    @pytest.mark.parametrize("seed", range(5))
    def test_cubic_roots(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(3, 3))
        A = X + X.T
        c2 = -np.trace(A)
        c1 = A[0, 0] * A[1, 1] + A[0, 0] * A[2, 2] + A[1, 1] * A[2, 2] - A[0, 1] ** 2 - A[0, 2] ** 2 - A[1, 2] ** 2
        c0 = -np.linalg.det(A)
        roots = np.sort(np.roots([1.0, c2, c1, c0]).real)
        np.testing.assert_allclose(spectrum(OperatorMatrix(A)), roots, atol=1e-10)

    def test_symmetry_flag(self):
        assert not OperatorMatrix(np.array([[0.0, 1.0], [0.0, 0.0]])).is_symmetric()
        assert OperatorMatrix(np.eye(2)).is_symmetric()


def _zero_matrix_constraints(m):
    """Zero column sums plus zero adjacent 2x2 alternating sums, as rows over the upper triangle."""
    iu = list(zip(*np.triu_indices(m)))
    pos = {ij: k for k, ij in enumerate(iu)}

    def idx(i, j):
        return pos[(min(i, j), max(i, j))]

    rows = []
    for j in range(m):
        r = np.zeros(len(iu))
        for i in range(m):
            r[idx(i, j)] += 1
        rows.append(r)
    for i in range(m - 1):
        for j in range(m - 1):
            r = np.zeros(len(iu))
            r[idx(i, j)] += 1
            r[idx(i + 1, j + 1)] += 1
            r[idx(i, j + 1)] -= 1
            r[idx(i + 1, j)] -= 1
            rows.append(r)
    return np.array(rows)


class TestReconstruction:
    @pytest.mark.parametrize("m", [2, 3, 4, 5, 6, 7])
    def test_zero_matrix_conditions_are_complete(self, m):
        assert scipy.linalg.null_space(_zero_matrix_constraints(m)).shape[1] == 0

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_holomorphic_block_satisfies_zero_matrix_conditions(self, n, rng):
        # T_ij = S_iijj of an s4 with M = 0 would satisfy both conditions; here check (1) in general
        s4 = random_traceless_s4(n, rng)
        T = np.einsum("iijj->ij", s4).real
        np.testing.assert_allclose(T.sum(axis=0), 0, atol=1e-12)

    @pytest.mark.parametrize("n,dim", [(2, 5), (3, 27), (4, 84)])
    def test_full_column_rank(self, n, dim):
        F = forward_map(standard_basis(n))
        assert F.shape[1] == dim == traceless_s4_basis(n).shape[0]
        assert np.linalg.matrix_rank(F) == dim

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_parameter_space_is_valid(self, n):
        for s4 in traceless_s4_basis(n):
            assert validate(KahlerCurvature(n, s4), 1e-12).ok
            assert np.max(np.abs(np.einsum("aacd->cd", s4))) < 1e-12

    def test_zero_matrix(self):
        r = reconstruct_s4(np.zeros((8, 8)), standard_basis(3))
        assert r.residual == 0.0
        assert not np.any(np.abs(r.s4) > 1e-15)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_round_trip(self, n, rng):
        b = standard_basis(n)
        for _ in range(50):
            s4 = random_traceless_s4(n, rng)
            M = matrix_traceless(KahlerCurvature(n, s4), b)
            r = reconstruct_s4(M, b)
            assert np.linalg.norm(r.s4 - s4) / np.linalg.norm(s4) <= 1e-10
            assert r.rank == traceless_s4_basis(n).shape[0]

    def test_non_image_matrix(self):
        # every trace-free Kähler tensor gives tr M = 0
        with pytest.raises(InvariantError, match="not a curvature-operator matrix"):
            reconstruct_s4(np.eye(3), standard_basis(2))

    def test_literal_traceless_part_is_outside_parameter_space(self):
        # the space-form traceless part has M = I/3, which no Kähler trace-free tensor produces
        s4 = decompose(space_form(2, 1 / 3)).s4
        b = standard_basis(2)
        M = operator_matrix_array(s4, b.stack).real
        np.testing.assert_allclose(M, np.eye(3) / 3, atol=1e-14)
        with pytest.raises(InvariantError):
            reconstruct_s4(M, b)

    def test_shape_check(self):
        with pytest.raises(ValueError):
            reconstruct_s4(np.zeros((2, 2)), standard_basis(2))


class TestTraceBound:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_on_cone(self, n, rng):
        b = standard_basis(n)
        for _ in range(200):
            r = trace_bound_check(random_curvature(n, rng, cone="2nonneg", margin=0.01), b)
            assert r.applicable and r.ok
            assert r.trace <= r.bound + 1e-9

    def test_space_form(self):
        r = trace_bound_check(space_form(3, 0.25), standard_basis(3))
        assert r.trace == pytest.approx(2.0)
        assert r.bound == pytest.approx(6.0)

    def test_outside_cone_not_applicable(self):
        r = trace_bound_check(space_form(2, -1.0), standard_basis(2))
        assert not r.applicable
        assert not r.ok


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 4), seed=st.integers(0, 2**32 - 1))
def test_matrix_symmetric_and_real(n, seed):
    t = random_curvature(n, seed)
    M = matrix_traceless(t, standard_basis(n))
    np.testing.assert_array_equal(M.m, M.m.T)
