import numpy as np
import pytest
import scipy.linalg as la

import nfpf
from nfpf.errors import DefectiveMatrixError


def random_stable_matrix(rng, n):
    A = rng.normal(size=(n, n))
    eigs = np.linalg.eigvals(A)
    return A - (eigs.real.max() + 0.5) * np.eye(n)


class TestDecompose:
    def test_diagonal_matrix(self):
        basis = nfpf.decompose(np.diag([-1.0, -2.0]))
        np.testing.assert_array_equal(basis.lambdas, [-1.0, -2.0])
        np.testing.assert_array_equal(basis.Phi, np.eye(2))
        np.testing.assert_array_equal(basis.Psi, np.eye(2))
        np.testing.assert_array_equal(basis.pair_of, [0, 1])

    def test_rotation_generator(self):
        basis = nfpf.decompose(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        np.testing.assert_allclose(basis.lambdas, [1j, -1j], atol=1e-12)
        np.testing.assert_array_equal(basis.pair_of, [1, 0])
        np.testing.assert_allclose(basis.freq_hz, 1.0 / (2 * np.pi), rtol=1e-12)

    def test_jordan_block_rejected(self):
        with pytest.raises(DefectiveMatrixError):
            nfpf.decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_identity_with_repeated_eigenvalues_accepted(self):
        basis = nfpf.decompose(np.eye(3))
        np.testing.assert_array_equal(basis.lambdas, np.ones(3))

    def test_sorting_and_adjacent_pairs(self, two_area):
        _, _, basis, _ = two_area
        im = np.abs(basis.lambdas.imag)
        assert np.all(np.diff(im) >= -1e-15)
        for i in map(int, basis.representatives):
            j = int(basis.pair_of[i])
            if j != i:
                assert j == i + 1
                assert basis.lambdas[j] == np.conj(basis.lambdas[i])
                np.testing.assert_array_equal(basis.Phi[:, j], np.conj(basis.Phi[:, i]))

    def test_normalization_largest_entry_is_one(self, two_area):
        _, _, basis, _ = two_area
        for i in map(int, basis.representatives):
            col = basis.Phi[:, i]
            peak = col[np.argmax(np.abs(col))]
            assert peak == pytest.approx(1.0 + 0.0j, abs=1e-14)

    def test_biorthonormality_and_reconstruction(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            A = random_stable_matrix(rng, 6)
            basis = nfpf.decompose(A)
            n = A.shape[0]
            assert np.max(np.abs(basis.Psi @ basis.Phi - np.eye(n))) <= 1e-9
            recon = (basis.Phi * basis.lambdas) @ basis.Psi
            assert np.linalg.norm(recon - A) / np.linalg.norm(A) <= 1e-8


class TestLinearPF:
    def test_diagonal_gives_identity(self):
        basis = nfpf.decompose(np.diag([-1.0, -2.0]))
        np.testing.assert_array_equal(nfpf.linear_pf(basis), np.eye(2))

    def test_rotation_generator_equal_magnitudes(self):
        basis = nfpf.decompose(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        np.testing.assert_allclose(np.abs(nfpf.linear_pf(basis)), 0.5, atol=1e-12)

    def test_rows_and_columns_sum_to_one(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = int(rng.integers(2, 9))
            basis = nfpf.decompose(random_stable_matrix(rng, n))
            p = nfpf.linear_pf(basis)
            np.testing.assert_allclose(p.sum(axis=0), 1.0, atol=1e-9)
            np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)

    def test_conjugate_symmetry(self, two_area):
        _, _, basis, _ = two_area
        p = nfpf.linear_pf(basis)
        for i in range(basis.n):
            j = int(basis.pair_of[i])
            np.testing.assert_allclose(p[:, j], np.conj(p[:, i]), atol=1e-12)

    def test_invariant_under_eigenvector_rescaling(self, two_area):
        """p[k, i] is unchanged when phi_i is scaled by c and psi_i by 1/c."""
        _, _, basis, _ = two_area
        rng = np.random.default_rng(3)
        scales = rng.normal(size=basis.n) + 1j * rng.normal(size=basis.n)
        Phi2 = basis.Phi * scales[None, :]
        Psi2 = basis.Psi / scales[:, None]
        rescaled = nfpf.ModalBasis(
            lambdas=basis.lambdas.copy(),
            Phi=Phi2,
            Psi=Psi2,
            pair_of=basis.pair_of.copy(),
            freq_hz=basis.freq_hz.copy(),
        )
        np.testing.assert_allclose(
            nfpf.linear_pf(rescaled), nfpf.linear_pf(basis), rtol=1e-12, atol=1e-14
        )


class TestContributionFactors:
    def test_unit_vector_on_diagonal_system(self):
        basis = nfpf.decompose(np.diag([-1.0, -2.0]))
        B = nfpf.contribution_factors(basis, np.array([1.0, 0.0]))
        np.testing.assert_array_equal(B, [[1.0, 0.0], [0.0, 0.0]])

    def test_zero_initial_state(self, two_area):
        _, _, basis, _ = two_area
        np.testing.assert_array_equal(
            nfpf.contribution_factors(basis, np.zeros(basis.n)), np.zeros((basis.n, basis.n))
        )

    def test_scales_linearly(self, two_area):
        _, _, basis, _ = two_area
        e2 = np.zeros(basis.n)
        e2[1] = 1.0
        B1 = nfpf.contribution_factors(basis, e2)
        B3 = nfpf.contribution_factors(basis, 3.0 * e2)
        np.testing.assert_allclose(B3, 3.0 * B1, rtol=1e-13)

    def test_unit_vector_rows_match_linear_pf(self, two_area):
        _, _, basis, _ = two_area
        p = nfpf.linear_pf(basis)
        for k in range(basis.n):
            ek = np.zeros(basis.n)
            ek[k] = 1.0
            B = nfpf.contribution_factors(basis, ek)
            np.testing.assert_allclose(B[k, :], p[k, :], atol=1e-12)

    def test_modal_sum_matches_matrix_exponential(self):
        """sum_i B[k, i] e^{lam_i t} reproduces the linear flow e^{At} x0."""
        rng = np.random.default_rng(23)
        for _ in range(5):
            n = int(rng.integers(2, 9))
            A = random_stable_matrix(rng, n)
            basis = nfpf.decompose(A)
            x0 = rng.normal(size=n)
            B = nfpf.contribution_factors(basis, x0)
            for t in np.linspace(0.0, 5.0, 11):
                modal = (B * np.exp(basis.lambdas * t)[None, :]).sum(axis=1)
                exact = la.expm(A * t) @ x0
                assert np.max(np.abs(modal.imag)) <= 1e-9 * max(1.0, np.abs(exact).max())
                np.testing.assert_allclose(modal.real, exact, atol=1e-6)
