# stdlib
import math

# 3rd party
import numpy
import pytest
from coincidence.params import count

# this package
from sqglab.holder import direct_seminorm, holder_report, lp_seminorm, pairing_profile
from sqglab.solver import lipschitz_constant
from sqglab.spectral import GridField, LittlewoodPaleyFamily, TorusGrid, build_lp_family


def _lacunary(grid: TorusGrid, beta: float, terms: int = 5) -> GridField:
	return GridField.from_function(
			grid,
			lambda x1, x2: sum(2**(-beta * k) * numpy.cos(2**k * x1) for k in range(terms)),
			)


def test_constant_field(lp_family: LittlewoodPaleyFamily):
	g = GridField(lp_family.grid, numpy.full(lp_family.grid.shape, 3.0))
	value, table = lp_seminorm(g, 0.5, lp_family)

	assert value < 1e-12
	assert sorted(table) == list(range(lp_family.j_max + 1))


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.7])
def test_lacunary_series(beta: float):
	grid = TorusGrid(64)
	fam = build_lp_family(grid)
	g = _lacunary(grid, beta)

	value, table = lp_seminorm(g, beta, fam)
	assert value == pytest.approx(1.0, rel=1e-10)
	for k in range(5):
		assert table[k] == pytest.approx(2**(-beta * k), rel=1e-10)
	assert table[5] < 1e-12

	direct = direct_seminorm(g, beta)
	assert 0.1 <= direct / value <= 10


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.7])
def test_refinement_stability(beta: float):
	# Four octaves in x1 plus a weaker copy in x2 fit on every grid from 32 points.
	def series(x1, x2):
		return sum(2**(-beta * k) * (numpy.cos(2**k * x1) + 0.5 * numpy.cos(2**k * x2)) for k in range(4))

	values = []
	for N in (32, 64, 128):
		grid = TorusGrid(N)
		g = GridField.from_function(grid, series)
		value, table = lp_seminorm(g, beta, build_lp_family(grid))

		assert sorted(table) == list(range(int(math.log2(N // 2)) + 1))
		assert 0.1 <= direct_seminorm(g, beta) / value <= 10
		values.append(value)

	assert values[0] == pytest.approx(1.5, rel=1e-10)
	for coarse, fine in zip(values, values[1:]):
		assert abs(fine - coarse) < 0.01 * coarse


@count(3)
def test_pairing_matches_blocks(lp_family: LittlewoodPaleyFamily, random_mean_zero, count: int):
	g = random_mean_zero(lp_family.grid, seed=count)

	lp_value, lp_table = lp_seminorm(g, 0.5, lp_family)
	pairing_value, pairing_table = pairing_profile(g, 0.5, lp_family)

	assert pairing_value == pytest.approx(lp_value, rel=1e-10)
	for j in lp_table:
		assert pairing_table[j] == pytest.approx(lp_table[j], rel=1e-10, abs=1e-12)


def test_pairing_coarse_lattice(lp_family: LittlewoodPaleyFamily, random_mean_zero):
	g = random_mean_zero(lp_family.grid, seed=4)

	full, _ = pairing_profile(g, 0.5, lp_family)
	coarse, _ = pairing_profile(g, 0.5, lp_family, translates_per_axis=4)
	assert coarse <= full + 1e-12

	with pytest.raises(ValueError, match="must divide 32"):
		pairing_profile(g, 0.5, lp_family, translates_per_axis=3)


def test_direct_lipschitz(grid16: TorusGrid, random_mean_zero):
	g = random_mean_zero(grid16, seed=2)
	assert direct_seminorm(g, 1.0) == lipschitz_constant(g)


def test_direct_sine(grid16: TorusGrid):
	g = GridField.from_function(grid16, lambda x1, x2: numpy.sin(x1))
	# Difference quotients of sin never exceed its Lipschitz constant.
	assert direct_seminorm(g, 1.0) <= 1.0 + 1e-12
	assert direct_seminorm(g, 1.0) > 0.9


@pytest.mark.parametrize("beta", [0, 1.0, 1.5, -0.5])
def test_beta_range(lp_family: LittlewoodPaleyFamily, beta: float):
	g = GridField.zeros(lp_family.grid)

	with pytest.raises(ValueError, match="Hölder exponent"):
		lp_seminorm(g, beta, lp_family)
	with pytest.raises(ValueError, match="Hölder exponent"):
		pairing_profile(g, beta, lp_family)


def test_direct_beta_range(grid8: TorusGrid):
	with pytest.raises(ValueError, match=r"in \(0, 1\]"):
		direct_seminorm(GridField.zeros(grid8), 1.5)


def test_holder_report(lp_family: LittlewoodPaleyFamily, random_mean_zero):
	g = random_mean_zero(lp_family.grid, seed=6)
	report = holder_report(g, 0.5, lp_family, translates_per_axis=8)

	assert report.beta == 0.5
	assert report.lp_value == pytest.approx(lp_seminorm(g, 0.5, lp_family)[0])
	assert report.direct_value == pytest.approx(direct_seminorm(g, 0.5))
	assert report.pairing_value <= report.lp_value + 1e-12
	assert sorted(report.lp_table) == sorted(report.pairing_table) == list(range(lp_family.j_max + 1))

	index, offset = report.argmax
	assert len(index) == len(offset) == 2
	assert any(offset)

	# The reported pair attains the direct estimate.
	grid = g.grid
	shifted = g.values[tuple((i + o) % grid.N for i, o in zip(index, offset))]
	length = grid.spacing * math.sqrt(sum(o**2 for o in offset))
	assert abs(shifted - g.values[index]) / length**0.5 == pytest.approx(report.direct_value)
