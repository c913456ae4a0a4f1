# stdlib
import math

# 3rd party
import numpy
import pytest
from coincidence.params import count

# this package
from sqglab import UnresolvedScaleError
from sqglab.membership import (
		ClassParams,
		LOWER_MAX_CELLS,
		Verdict,
		ball_mask,
		calibrate_lp_constant,
		check_membership,
		check_size,
		class_constant,
		lip_dual_exact_small,
		lip_dual_lower,
		lip_dual_upper,
		lipschitz_envelope_constant,
		local_oscillation,
		make_bump,
		make_lp_kernel,
		mean_zero_witness,
		pair
		)
from sqglab.solver import build_mollifier
from sqglab.spectral import GridField, LittlewoodPaleyFamily, TorusGrid

PARAMS = ClassParams(A=17, p=2)


def _dipole(grid: TorusGrid, source, sink) -> GridField:
	values = numpy.zeros(grid.shape)
	values[source] = 1 / grid.cell_volume
	values[sink] = -1 / grid.cell_volume
	return GridField(grid, values)


def test_class_params():
	assert PARAMS.q == 2
	assert ClassParams(A=2, p=3).q == pytest.approx(1.5)
	assert PARAMS.size_bound(0.5) == pytest.approx(17 * 4)

	with pytest.raises(ValueError, match="A must be greater than 1"):
		ClassParams(A=1, p=2)
	with pytest.raises(ValueError, match="p must be greater than 1"):
		ClassParams(A=2, p=1)


def test_pair(grid16: TorusGrid):
	f = GridField.from_function(grid16, lambda x1, x2: numpy.cos(x1))
	assert pair(f, f) == pytest.approx(2 * math.pi**2)
	assert pair(f, GridField.from_function(grid16, lambda x1, x2: numpy.sin(x1))) == pytest.approx(0, abs=1e-13)


def test_check_size(grid16: TorusGrid):
	f = GridField.from_function(grid16, lambda x1, x2: 0.5 * numpy.cos(x1))

	ok, margin = check_size(f, 1.0, PARAMS)
	assert ok
	assert margin == pytest.approx(17 - math.pi**2 / 2)

	ok, margin = check_size(f * 2, 1.0, PARAMS)
	assert not ok
	assert margin < 0

	with pytest.raises(ValueError, match="scale r"):
		check_size(f, 0, PARAMS)


@pytest.mark.parametrize(
		"sink, cells",
		[
				pytest.param((2, 0), 2, id="axis"),
				pytest.param((6, 0), 2, id="periodic"),
				pytest.param((1, 1), math.sqrt(2), id="diagonal"),
				]
		)
def test_exact_point_masses(grid8: TorusGrid, sink, cells: float):
	psi = _dipole(grid8, (0, 0), sink)
	assert lip_dual_exact_small(psi) == pytest.approx(cells * grid8.spacing, rel=1e-8)


def test_exact_too_large(grid32: TorusGrid):
	with pytest.raises(ValueError, match="too large"):
		lip_dual_exact_small(GridField.zeros(grid32))


def test_requires_mean_zero(grid8: TorusGrid):
	shifted = GridField(grid8, numpy.ones(grid8.shape))
	with pytest.raises(ValueError, match="mean zero"):
		lip_dual_upper(shifted)
	with pytest.raises(ValueError, match="mean zero"):
		lip_dual_lower(shifted)
	with pytest.raises(ValueError, match="mean zero"):
		lip_dual_exact_small(shifted)


@count(5)
def test_transport_sandwich(grid8: TorusGrid, random_mean_zero, count: int):
	psi = random_mean_zero(grid8, seed=count)

	lower = lip_dual_lower(psi)
	exact = lip_dual_exact_small(psi)
	upper = lip_dual_upper(psi)

	assert 0 < lower <= exact + 1e-8
	assert exact <= upper + 1e-8


def test_transport_sandwich_point_masses(grid8: TorusGrid):
	psi = _dipole(grid8, (1, 2), (5, 3))
	exact = lip_dual_exact_small(psi)
	assert lip_dual_lower(psi) <= exact + 1e-8
	assert exact <= lip_dual_upper(psi) + 1e-8


def test_lower_bound_sign_symmetric(grid8: TorusGrid, random_mean_zero):
	psi = random_mean_zero(grid8, seed=11)
	assert lip_dual_lower(-psi) == pytest.approx(lip_dual_lower(psi))


def test_lower_bound_cosine():
	psi = GridField.from_function(TorusGrid(16), lambda x1, x2: numpy.cos(x1))
	coarse = GridField.from_function(TorusGrid(8), lambda x1, x2: numpy.cos(x1))
	assert lip_dual_lower(psi) >= 0.9 * lip_dual_exact_small(coarse)


def test_lipschitz_envelope_constant(grid8: TorusGrid):
	x1, _ = grid8.coordinates()
	# The periodic distance wraps, so a ramp is steepest across the seam.
	assert lipschitz_envelope_constant(x1, grid8) == pytest.approx((2 * math.pi - grid8.spacing) / grid8.spacing)
	assert lipschitz_envelope_constant(numpy.zeros(grid8.shape), grid8) == 0


def test_make_bump(grid32: TorusGrid):
	bump = make_bump(grid32, 1.0, PARAMS)

	assert abs(bump.mean()) < 1e-12
	assert bump.norm(2) == pytest.approx(0.9)
	assert ball_mask(grid32, 1.0, (0, 0))[bump.values != 0].all()

	with pytest.raises(UnresolvedScaleError, match="unresolved"):
		make_bump(grid32, 0.5, PARAMS)


def test_bump_membership(grid32: TorusGrid):
	bump = make_bump(grid32, 1.0, PARAMS)

	report = check_membership(bump, 1.0, PARAMS)
	assert report.verdict is Verdict.member
	assert report.size_margin > 0
	assert report.pairing_margin >= 0
	assert report.lip_lower == 0

	report = check_membership(bump * 10, 1.0, PARAMS)
	assert report.verdict is Verdict.nonmember
	assert report.size_margin < 0


def test_nonmember_without_mean_zero(grid16: TorusGrid):
	psi = GridField.from_function(grid16, lambda x1, x2: 0.1 + 0.1 * numpy.cos(x1))
	report = check_membership(psi, 1.0, PARAMS)

	assert report.size_margin > 0
	assert math.isinf(report.lip_upper)
	assert report.verdict is Verdict.nonmember


def test_class_constant(grid32: TorusGrid):
	psi = make_bump(grid32, 1.0, PARAMS) * 40
	C = class_constant(psi, 1.0, PARAMS)

	assert C > 1
	assert check_membership(psi * (1 / C), 1.0, PARAMS).verdict is Verdict.member


def test_make_lp_kernel(lp_family: LittlewoodPaleyFamily):
	with pytest.raises(ValueError, match="calibrated"):
		make_lp_kernel(lp_family, 2)

	kernel = make_lp_kernel(lp_family, 2, 1.0)
	assert abs(kernel.mean()) < 1e-14
	# Centred on the grid point at the origin.
	assert numpy.unravel_index(numpy.argmax(kernel.values), kernel.grid.shape) == (16, 16)


def test_calibrated_kernels_are_members(lp_family: LittlewoodPaleyFamily):
	calibrated = calibrate_lp_constant(lp_family, PARAMS)
	assert calibrated.c is not None
	assert math.log2(calibrated.c) == int(math.log2(calibrated.c))

	for j in range(calibrated.j_max + 1):
		report = check_membership(make_lp_kernel(calibrated, j), calibrated.scale(j), PARAMS)
		assert report.verdict is Verdict.member, j


def test_ball_mask(grid16: TorusGrid):
	mask = ball_mask(grid16, 1.0, (0, 0))
	assert mask[8, 8]
	assert not mask[0, 0]

	# Balls wrap around the torus.
	assert ball_mask(grid16, 0.5, (math.pi, 0))[0, 8]


@pytest.mark.parametrize("seed", range(50))
@pytest.mark.parametrize("q", [2.0, 3.0, 4.0])
def test_mean_zero_witness(grid32: TorusGrid, random_mean_zero, seed: int, q: float):
	theta = random_mean_zero(grid32, seed=seed)
	rho, center = 1.0, (0.3, -0.5)
	p = q / (q - 1)

	c, psi = mean_zero_witness(theta, rho, center, q)
	oscillation = local_oscillation(theta, rho, center, q)

	assert abs(psi.integral()) < 1e-9
	assert rho**(2 / q) * pair(theta, psi) == pytest.approx(oscillation, rel=1e-9)
	assert numpy.sum(numpy.abs(psi.values)**p) * grid32.cell_volume <= rho**(-(p - 1) * 2) * (1 + 1e-9)
	assert not psi.values[~ball_mask(grid32, rho, center)].any()


def test_witness_errors(grid32: TorusGrid):
	with pytest.raises(ValueError, match="constant on the ball"):
		mean_zero_witness(GridField.zeros(grid32), 1.0, (0, 0), 2.0)
	with pytest.raises(UnresolvedScaleError, match="unresolved"):
		mean_zero_witness(GridField.zeros(grid32), 0.1, (0, 0), 2.0)
	with pytest.raises(ValueError, match="q must be greater than 1"):
		mean_zero_witness(GridField.zeros(grid32), 1.0, (0, 0), 1.0)


def test_lower_bound_grid_limit():
	grid = TorusGrid(128)
	assert grid.size > LOWER_MAX_CELLS
	psi = GridField.from_function(grid, lambda x1, x2: 0.5 * numpy.cos(x1))

	with pytest.raises(ValueError, match="too large for the envelope lower bound"):
		lip_dual_lower(psi)

	with pytest.raises(ValueError, match="all-pairs Lipschitz constant"):
		lipschitz_envelope_constant(psi.values, grid)

	# The upper bound alone cannot decide, and the lower bound is skipped.
	report = check_membership(psi, 1.0, PARAMS)
	assert report.size_margin > 0
	assert report.lip_upper > 1.0
	assert report.lip_lower == 0
	assert report.verdict is Verdict.undecided


def test_lower_bound_decides_on_small_grids(grid16: TorusGrid):
	psi = GridField.from_function(grid16, lambda x1, x2: 0.5 * numpy.cos(x1))

	report = check_membership(psi, 1.0, PARAMS)
	assert report.lip_lower > 1.0
	assert report.verdict is Verdict.nonmember


@pytest.mark.parametrize(
		"field",
		[
				pytest.param(lambda grid: make_bump(grid, 1.0, PARAMS), id="member"),
				pytest.param(lambda grid: make_bump(grid, 1.0, PARAMS) * 10, id="too_large"),
				pytest.param(
						lambda grid: GridField.from_function(grid, lambda x1, x2: 0.5 * numpy.cos(x1 + x2)),
						id="spread_out",
						),
				]
		)
@pytest.mark.parametrize("shift", [(3, 0), (5, 11), (-7, 2)])
def test_membership_translation_invariant(grid32: TorusGrid, field, shift):
	psi = field(grid32)
	report = check_membership(psi, 1.0, PARAMS)
	moved = check_membership(psi.translate(shift), 1.0, PARAMS)

	assert moved.verdict is report.verdict
	assert moved.size_lhs == pytest.approx(report.size_lhs, rel=1e-12)
	assert moved.lip_upper == pytest.approx(report.lip_upper, rel=1e-9)


@pytest.mark.parametrize(
		"N, r",
		[
				pytest.param(64, 0.5, id="64_half"),
				pytest.param(128, 0.5, id="128_half"),
				pytest.param(128, 0.25, id="128_quarter"),
				]
		)
def test_mollifier_gradient_membership(N: int, r: float):
	grid = TorusGrid(N)
	mollifier = build_mollifier(grid, r)
	constants = []

	for component in mollifier.gradient():
		psi = component * r
		C = class_constant(psi, 2 * r, PARAMS)
		assert check_membership(psi * (1 / C), 2 * r, PARAMS).verdict is Verdict.member
		constants.append(C)

	# The two components are mirror images.
	assert constants[0] == pytest.approx(constants[1], rel=1e-6)
	assert 0 < constants[0] < 100
