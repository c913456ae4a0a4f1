# stdlib
import math

# 3rd party
import numpy
import pytest

# this package
from sqglab import GridMismatchError, SymmetryError
from sqglab.spectral import (
		GridField,
		LittlewoodPaleyFamily,
		SpectralField,
		TorusGrid,
		advection_term,
		build_lp_family,
		dealias,
		divergence,
		fft_workers,
		fractional_laplacian,
		lp_project,
		oracle_ratios,
		riesz,
		riesz_perp_velocity,
		spectral_gradient,
		subtract_mean,
		to_grid,
		to_spectral
		)


@pytest.mark.parametrize(
		"N, d, match",
		[
				(12, 2, "power of two"),
				(4, 2, "power of two"),
				(16, 4, "Unsupported dimension"),
				]
		)
def test_grid_validation(N: int, d: int, match: str):
	with pytest.raises(ValueError, match=match):
		TorusGrid(N, d)


def test_grid_geometry(grid16: TorusGrid):
	assert grid16.shape == (16, 16)
	assert grid16.size == 256
	assert grid16.spacing == pytest.approx(2 * math.pi / 16)
	assert grid16.volume == pytest.approx(4 * math.pi**2)

	x1, x2 = grid16.coordinates()
	assert x1[0, 0] == pytest.approx(-math.pi)
	assert x1[8, 0] == pytest.approx(0, abs=1e-15)
	assert x2[0, 8] == pytest.approx(0, abs=1e-15)


def test_fft_workers(monkeypatch):
	monkeypatch.setenv("SQGLAB_THREADS", '4')
	assert fft_workers() == 4

	monkeypatch.setenv("SQGLAB_THREADS", "lots")
	assert fft_workers() == 1

	monkeypatch.delenv("SQGLAB_THREADS")
	assert fft_workers() == 1


def test_gridfield_validation(grid8: TorusGrid):
	with pytest.raises(ValueError, match="shape"):
		GridField(grid8, numpy.zeros((8, 4)))

	values = numpy.zeros((8, 8))
	values[2, 3] = numpy.nan
	with pytest.raises(ValueError, match="finite"):
		GridField(grid8, values)


def test_norms(grid16: TorusGrid):
	f = GridField.from_function(grid16, lambda x1, x2: numpy.cos(x1))
	assert f.norm(math.inf) == pytest.approx(1.0)
	assert f.norm(2) == pytest.approx(math.pi * math.sqrt(2))
	assert f.mean() == pytest.approx(0, abs=1e-15)
	assert f.integral() == pytest.approx(0, abs=1e-13)


def test_cosine_coefficients(grid16: TorusGrid):
	F = to_spectral(GridField.from_function(grid16, lambda x1, x2: numpy.cos(x1) + 2 * numpy.sin(3 * x2)))

	assert F.coeff((1, 0)) == pytest.approx(0.5)
	assert F.coeff((-1, 0)) == pytest.approx(0.5)
	assert F.coeff((0, 3)) == pytest.approx(-1j)
	assert F.coeff((0, -3)) == pytest.approx(1j)
	assert F.coeff((2, 2)) == pytest.approx(0, abs=1e-15)
	assert F.hermitian_defect() < 1e-14


def test_round_trip(grid32: TorusGrid, random_mean_zero):
	f = random_mean_zero(grid32, seed=3)
	numpy.testing.assert_allclose(to_grid(to_spectral(f)).values, f.values, atol=1e-13)


def test_to_grid_rejects_non_hermitian(grid8: TorusGrid):
	coeffs = numpy.zeros(grid8.shape, dtype=complex)
	coeffs[1, 0] = 1.0

	with pytest.raises(SymmetryError, match="Hermitian"):
		to_grid(SpectralField(grid8, coeffs))


def test_riesz_single_mode(grid16: TorusGrid):
	theta = GridField.from_function(grid16, lambda x1, x2: numpy.cos(x1))
	u1, u2 = (to_grid(c) for c in riesz_perp_velocity(to_spectral(theta)))

	numpy.testing.assert_allclose(u1.values, 0, atol=1e-14)
	numpy.testing.assert_allclose(u2.values, -numpy.sin(grid16.coordinates()[0]), atol=1e-14)


def test_riesz_component_range(grid8: TorusGrid):
	F = to_spectral(GridField.zeros(grid8))
	with pytest.raises(ValueError, match="between 1 and 2"):
		riesz(F, 3)


def test_riesz_square_sum(grid32: TorusGrid, random_mean_zero):
	F = to_spectral(random_mean_zero(grid32, seed=5))
	total = riesz(riesz(F, 1), 1).coeffs + riesz(riesz(F, 2), 2).coeffs
	numpy.testing.assert_allclose(total, -F.coeffs, atol=1e-12)


def test_riesz_perp_dimension():
	F = to_spectral(GridField.zeros(TorusGrid(8, 3)))
	with pytest.raises(ValueError, match="two dimensions"):
		riesz_perp_velocity(F)


def test_velocity_divergence_free(grid32: TorusGrid, random_mean_zero):
	theta = random_mean_zero(grid32, seed=1)
	u = tuple(to_grid(c) for c in riesz_perp_velocity(to_spectral(theta)))
	assert numpy.max(numpy.abs(divergence(u).coeffs)) < 1e-12


@pytest.mark.parametrize("alpha", [0.5, 0.8, 1.0, 2.0])
def test_fractional_laplacian_symbol(grid16: TorusGrid, alpha: float):
	f = GridField.from_function(grid16, lambda x1, x2: numpy.cos(2 * x1 + x2))
	out = to_grid(fractional_laplacian(to_spectral(f), alpha))
	numpy.testing.assert_allclose(out.values, 5**(alpha / 2) * f.values, atol=1e-12)


def test_fractional_laplacian_range(grid8: TorusGrid):
	F = to_spectral(GridField.zeros(grid8))
	with pytest.raises(ValueError, match="alpha"):
		fractional_laplacian(F, 2.5)
	with pytest.raises(ValueError, match="alpha"):
		fractional_laplacian(F, 0)


def test_spectral_gradient(grid16: TorusGrid):
	f = GridField.from_function(grid16, lambda x1, x2: numpy.sin(x1) * numpy.cos(2 * x2))
	g1, g2 = spectral_gradient(f)
	x1, x2 = grid16.coordinates()

	numpy.testing.assert_allclose(g1.values, numpy.cos(x1) * numpy.cos(2 * x2), atol=1e-13)
	numpy.testing.assert_allclose(g2.values, -2 * numpy.sin(x1) * numpy.sin(2 * x2), atol=1e-13)


def test_dealias(grid32: TorusGrid):
	F = dealias(SpectralField(grid32, numpy.ones(grid32.shape)))

	assert F.coeff((10, 0)) == 1
	assert F.coeff((-10, 10)) == 1
	assert F.coeff((11, 0)) == 0
	assert F.coeff((3, -11)) == 0


def test_advection_term(grid32: TorusGrid, random_mean_zero):
	theta = random_mean_zero(grid32, seed=2)
	u = tuple(to_grid(c) for c in riesz_perp_velocity(to_spectral(theta)))
	advected = advection_term(u, theta)

	assert abs(advected.mean()) < 1e-14
	# Skew-symmetry of a divergence-free transport.
	assert abs(numpy.sum(advected.values * theta.values) * grid32.cell_volume) < 1e-9


def test_advection_term_constant_velocity(grid16: TorusGrid):
	theta = GridField.from_function(grid16, lambda x1, x2: numpy.sin(x1 + 2 * x2))
	u = (GridField(grid16, numpy.full(grid16.shape, 2.0)), GridField.zeros(grid16))
	x1, x2 = grid16.coordinates()

	numpy.testing.assert_allclose(advection_term(u, theta).values, 2 * numpy.cos(x1 + 2 * x2), atol=1e-13)


def test_advection_term_grid_mismatch(grid8: TorusGrid, grid16: TorusGrid):
	u = (GridField.zeros(grid8), GridField.zeros(grid8))
	with pytest.raises(GridMismatchError, match="different grids"):
		advection_term(u, GridField.zeros(grid16))


def test_subtract_mean(grid8: TorusGrid):
	f = GridField.from_function(grid8, lambda x1, x2: numpy.cos(x1) + 3)
	centred, mean = subtract_mean(f)

	assert mean == pytest.approx(3)
	assert abs(centred.mean()) < 1e-15


def test_oracle_ratios():
	grid = TorusGrid(64)
	modes = [(1, 0), (0, 1), (1, 1), (2, 0), (2, 1), (0, 2)]
	ratios, spread = oracle_ratios(grid, 0.8, modes, 20)

	assert ratios[(1, 0)] == pytest.approx(ratios[(0, 1)], rel=1e-12)
	assert all(ratio > 0 for ratio in ratios.values())
	assert spread < 1e-3


def test_oracle_validation(grid8: TorusGrid):
	with pytest.raises(ValueError, match="alpha"):
		oracle_ratios(grid8, 2.0, [(1, 0)], 4)
	with pytest.raises(ValueError, match="lattice_radius"):
		oracle_ratios(grid8, 0.8, [(1, 0)], 0)


def test_lp_profile():
	assert LittlewoodPaleyFamily.omega(0.5) == 1
	assert LittlewoodPaleyFamily.omega(1.0) == 1
	assert LittlewoodPaleyFamily.omega(2.0) == 0
	assert 0 < LittlewoodPaleyFamily.omega(1.5) < 1
	assert LittlewoodPaleyFamily.phi_j(8.0, 3) == 1
	assert LittlewoodPaleyFamily.phi_j(4.0, 3) == 0


def test_lp_profile_vectors():
	numpy.testing.assert_array_equal(LittlewoodPaleyFamily.omega_vector([[0.5, 0], [3, 0]]), [1, 0])

	# Blocks 1 to 3 telescope to omega(5/8) = 1 at the frequency (5, 0).
	total = LittlewoodPaleyFamily.omega_vector((5, 0)) + sum(LittlewoodPaleyFamily.phi_j(5.0, j) for j in range(1, 4))
	assert total == pytest.approx(1, abs=1e-10)

	radii = numpy.array([[1.0, 2.0], [4.0, 8.0]])
	assert LittlewoodPaleyFamily.phi_j(radii, 2).shape == (2, 2)
	numpy.testing.assert_array_equal(LittlewoodPaleyFamily.phi_j(radii, 2), [[0, 0], [1, 0]])


@pytest.mark.parametrize(
		"grid",
		[
				pytest.param(TorusGrid(16), id="16x16"),
				pytest.param(TorusGrid(32), id="32x32"),
				pytest.param(TorusGrid(8, 3), id="8x8x8"),
				]
		)
def test_lp_blocks_cover_modes(grid: TorusGrid):
	fam = build_lp_family(grid)

	for j in range(fam.j_max + 1):
		assert fam.multiplier(j).shape == grid.shape

	total = sum(fam.multiplier(j) for j in range(fam.j_max + 1))
	inside = grid.wavenumber_norm() <= grid.N // 2
	numpy.testing.assert_allclose(total[inside], 1, atol=1e-14)

	# The top block recovers the highest dyadic mode along an axis.
	top = 2**fam.j_max // 2
	f = GridField.from_function(grid, lambda *x: numpy.cos(top * x[0]))
	projected = to_grid(lp_project(to_spectral(f), fam.j_max - 1, fam))
	numpy.testing.assert_allclose(projected.values, f.values, atol=1e-13)


def test_lp_partition_of_unity(lp_family: LittlewoodPaleyFamily):
	assert lp_family.j_max == 4
	total = sum(lp_family.multiplier(j) for j in range(lp_family.j_max + 1))

	# Every mode below the last block's outer edge is covered exactly once.
	inside = lp_family.grid.wavenumber_norm() <= 2**lp_family.j_max
	numpy.testing.assert_allclose(total[inside], 1, atol=1e-14)


def test_lp_project(lp_family: LittlewoodPaleyFamily):
	grid = lp_family.grid
	f = GridField.from_function(grid, lambda x1, x2: numpy.cos(x1) + numpy.cos(4 * x2))
	F = to_spectral(f)

	numpy.testing.assert_allclose(
			to_grid(lp_project(F, 2, lp_family)).values, numpy.cos(4 * grid.coordinates()[1]), atol=1e-14
			)
	numpy.testing.assert_allclose(
			to_grid(lp_project(F, 0, lp_family)).values, numpy.cos(grid.coordinates()[0]), atol=1e-14
			)

	with pytest.raises(ValueError, match="Block index"):
		lp_project(F, 5, lp_family)


def test_build_lp_family():
	assert build_lp_family(TorusGrid(128)).j_max == 6
	assert build_lp_family(TorusGrid(8)).j_max == 2
