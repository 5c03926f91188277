"""Linearized-operator assembly, spectra, and the deflated pairing."""

import math

import numpy as np
import pytest

import mchwave as mw
from mchwave import DomainError, RankError

from conftest import assemble_for


def constant_case_eigenvalues(n: int) -> np.ndarray:
    """Exact spectrum of -2 d^2 - 2 on L = 2 pi with n even grid points.

    Fourier modes m = 0, +-1, ..., +-(n/2 - 1) and the Nyquist n/2.
    """
    ms = [0] + [m for mm in range(1, n // 2) for m in (mm, mm)] + [n // 2]
    return np.sort(np.array([2.0 * m * m - 2.0 for m in ms]))


class TestAssembly:
    def test_symmetry_after_gate(self, op05_256):
        m = op05_256.matrix
        assert np.max(np.abs(m - m.T)) < 1e-10
        assert op05_256.asymmetry < 1e-8

    def test_constant_case_matches_fourier_diagonalization(self, op_constant_128):
        rep = mw.spectrum(op_constant_128)
        assert np.max(np.abs(rep.eigenvalues - constant_case_eigenvalues(128))) < 1e-8

    def test_action_on_constants(self, wave05):
        grid = mw.PeriodicGrid(wave05.L, 256)
        phi, _, phi2 = mw.profile(wave05, grid.nodes)
        op = assemble_for(wave05, 256)
        q = wave05.c - 3.0 * phi**2 + phi2
        assert np.max(np.abs(op.matrix @ np.ones(256) - q)) < 1e-10

    def test_annihilates_wave_derivative(self, wave05, op05_256):
        grid = mw.PeriodicGrid(wave05.L, 256)
        phi1 = mw.profile(wave05, grid.nodes)[1]
        assert np.linalg.norm(op05_256.matrix @ phi1) / np.linalg.norm(phi1) < 1e-6

    def test_needs_grid_for_plain_arrays(self):
        with pytest.raises(DomainError):
            mw.assemble_l(np.ones(32), np.zeros(32), 1.0)

    def test_diff_matrix_on_modes(self):
        grid = mw.PeriodicGrid(2 * math.pi, 32)
        d1 = mw.fourier_diff_matrix(grid, 1)
        x = grid.nodes
        assert np.max(np.abs(d1 @ np.sin(3 * x) - 3 * np.cos(3 * x))) < 1e-11
        # antisymmetry makes the divergence form structurally symmetric
        assert np.max(np.abs(d1 + d1.T)) < 1e-12


class TestSpectrum:
    def test_constant_counts_with_double_kernel(self, op_constant_128):
        rep = mw.spectrum(op_constant_128)
        assert rep.n_neg == 1
        assert rep.z_dim == 2  # degenerate limit: cos x and sin x both in the kernel
        assert rep.eigenvalues[0] == pytest.approx(-2.0, abs=1e-9)

    def test_wave_counts(self, op05_256, op05_512):
        for op in (op05_256, op05_512):
            rep = mw.spectrum(op)
            assert rep.n_neg == 1
            assert rep.z_dim == 1

    def test_kernel_vector_is_wave_derivative(self, wave05, op05_256):
        rep = mw.spectrum(op05_256)
        kernel_vec = rep.eigenvectors[:, rep.n_neg]
        grid = mw.PeriodicGrid(wave05.L, 256)
        phi1 = mw.profile(wave05, grid.nodes)[1]
        cosang = abs(np.dot(kernel_vec, phi1 / np.linalg.norm(phi1)))
        assert cosang > 0.999999

    def test_lowest_eigenvalues_converge(self, op05_256, op05_512):
        lo256 = mw.spectrum(op05_256).eigenvalues[:5]
        lo512 = mw.spectrum(op05_512).eigenvalues[:5]
        assert np.max(np.abs(lo256 - lo512)) < 1e-8

    def test_count_partition(self, op05_256):
        rep = mw.spectrum(op05_256)
        above = int(np.sum(rep.eigenvalues > rep.tol))
        assert rep.n_neg + rep.z_dim + above == 256

    def test_counts_stable_across_tolerances(self, op05_256):
        # the second near-zero eigenvalue (the k -> 0 degeneracy remnant)
        # caps the usable window at ~1e-5 * radius here
        radius = float(np.max(np.abs(mw.spectrum(op05_256).eigenvalues)))
        for factor in (1e-8, 1e-7, 1e-6, 1e-5):
            rep = mw.spectrum(op05_256, tol=factor * radius)
            assert (rep.n_neg, rep.z_dim) == (1, 1)

    def test_near_zero_gap_reported(self, op05_256):
        rep = mw.spectrum(op05_256)
        # gap between the kernel eigenvalue and its nearest neighbour
        assert rep.near_zero_gap == pytest.approx(3.117e-3, rel=1e-2)

    def test_tol_validation(self, op05_256):
        with pytest.raises(DomainError):
            mw.spectrum(op05_256, tol=-1.0)

    def test_constant_derivative_mean_zero(self, wave05):
        grid = mw.PeriodicGrid(wave05.L, 256)
        phi1 = mw.profile(wave05, grid.nodes)[1]
        assert abs(grid.spacing * np.sum(phi1)) < 1e-12


class TestRestrictedSpectrum:
    def test_constant_case_drops_lowest(self, op_constant_128):
        rep = mw.restricted_spectrum(op_constant_128)
        expected = constant_case_eigenvalues(128)[1:]  # remove the -2 of mode 0
        assert np.max(np.abs(rep.eigenvalues - expected)) < 1e-8
        assert rep.n_neg == 0
        assert rep.z_dim == 2

    def test_wave_counts(self, op05_256):
        rep = mw.restricted_spectrum(op05_256)
        assert rep.n_neg == 1
        assert rep.z_dim == 1

    def test_zero_mean_basis_orthonormal(self):
        from mchwave.linop import zero_mean_basis
        b = zero_mean_basis(64)
        assert np.max(np.abs(b.T @ b - np.eye(63))) < 1e-12
        assert np.max(np.abs(b.T @ np.ones(64))) < 1e-12


class TestEvolutionOperator:
    def test_product_structure(self, wave05):
        grid = mw.PeriodicGrid(wave05.L, 256)
        phi, _, phi2 = mw.profile(wave05, grid.nodes)
        fld = mw.PeriodicField(grid, phi)
        fld2 = mw.PeriodicField(grid, phi2)
        lop = mw.assemble_l(fld, fld2, wave05.c)
        dxl = mw.assemble_dxl(fld, fld2, wave05.c)
        d1 = mw.fourier_diff_matrix(grid, 1)
        assert np.max(np.abs(dxl.matrix - d1 @ lop.matrix)) == 0.0
        assert dxl.kind == "evolution_dxL"

    def test_action_on_constant_vector(self, wave05):
        grid = mw.PeriodicGrid(wave05.L, 256)
        phi, _, phi2 = mw.profile(wave05, grid.nodes)
        dxl = mw.assemble_dxl(mw.PeriodicField(grid, phi), mw.PeriodicField(grid, phi2),
                              wave05.c)
        q = mw.PeriodicField(grid, wave05.c - 3.0 * phi**2 + phi2)
        expected = mw.derivative(q).values
        assert np.max(np.abs(dxl.matrix @ np.ones(256) - expected)) < 1e-8

    def test_constant_case_purely_imaginary(self):
        p = mw.constant_wave(2 * math.pi)
        grid = mw.PeriodicGrid(p.L, 128)
        phi, _, phi2 = mw.profile(p, grid.nodes)
        dxl = mw.assemble_dxl(mw.PeriodicField(grid, phi), mw.PeriodicField(grid, phi2), p.c)
        rep = mw.spectrum(dxl)
        assert np.max(np.abs(rep.eigenvalues.real)) < 1e-8
        # eigenvalues i m (2 m^2 - 2) for the represented modes
        expected = np.sort(np.concatenate(
            [[m * (2.0 * m * m - 2.0), -m * (2.0 * m * m - 2.0)] for m in range(64)]))
        assert np.max(np.abs(np.sort(rep.eigenvalues.imag) - expected)) < 1e-7

    def test_hamiltonian_symmetry(self):
        rng = np.random.default_rng(20)
        for _ in range(3):
            k = rng.uniform(0.2, 0.7)
            big_l = rng.uniform(5 * math.pi, 9 * math.pi)
            p = mw.wave_params(k, big_l)
            grid = mw.PeriodicGrid(p.L, 128)
            phi, _, phi2 = mw.profile(p, grid.nodes)
            dxl = mw.assemble_dxl(mw.PeriodicField(grid, phi),
                                  mw.PeriodicField(grid, phi2), p.c)
            ev = mw.spectrum(dxl).eigenvalues
            # spectrum symmetric under lambda -> -conj(lambda)
            worst = max(min(abs(l + np.conj(m)) for m in ev) for l in ev[::8])
            assert worst < 1e-6

    def test_wave_is_spectrally_stable(self, wave05):
        grid = mw.PeriodicGrid(wave05.L, 256)
        phi, _, phi2 = mw.profile(wave05, grid.nodes)
        dxl = mw.assemble_dxl(mw.PeriodicField(grid, phi),
                              mw.PeriodicField(grid, phi2), wave05.c)
        rep = mw.restricted_spectrum(dxl)
        assert np.max(np.abs(rep.eigenvalues.real)) < 1e-6


class TestInvOnePairing:
    def test_constant_case_deflated(self, op_constant_128):
        with pytest.raises(RankError):
            mw.inv_one_pairing(op_constant_128)  # double kernel without override
        pair = mw.inv_one_pairing(op_constant_128, allow_multi_kernel=True)
        assert pair.kernel_dim == 2
        assert pair.value == pytest.approx(-math.pi, abs=1e-8)
        assert pair.residual < 1e-8

    def test_wave_pairing_stable_under_refinement(self, op05_256, op05_512):
        p256 = mw.inv_one_pairing(op05_256)
        p512 = mw.inv_one_pairing(op05_512)
        assert p256.kernel_dim == 1
        assert abs(p256.value - p512.value) < 1e-6 * abs(p512.value)
        assert p256.residual < 1e-8

    def test_requires_selfadjoint_kind(self, wave05):
        grid = mw.PeriodicGrid(wave05.L, 128)
        phi, _, phi2 = mw.profile(wave05, grid.nodes)
        dxl = mw.assemble_dxl(mw.PeriodicField(grid, phi),
                              mw.PeriodicField(grid, phi2), wave05.c)
        with pytest.raises(DomainError):
            mw.inv_one_pairing(dxl)
