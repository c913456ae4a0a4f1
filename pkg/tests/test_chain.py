# stdlib
import dataclasses
import math

# 3rd party
import pytest

# this package
from sqglab.chain import (
		KernelConstants,
		build_chain,
		compute_T0,
		eventual_time,
		select_exponents,
		sensitivities,
		solve_A,
		solve_delta,
		solve_r0,
		verify_chain
		)


@pytest.mark.parametrize(
		"alpha, expected",
		[
				pytest.param(0.9, (0.5, 32 / 31, 32.0), id="0.9"),
				pytest.param(0.7, (0.5, 64 / 63, 64.0), id="0.7"),
				]
		)
def test_select_exponents(alpha: float, expected):
	beta, p, q = select_exponents(alpha)
	assert (beta, p, q) == pytest.approx(expected)
	assert beta > 1 - alpha
	assert beta + alpha - 2 / q > 1


@pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5, -0.1])
def test_select_exponents_range(alpha: float):
	with pytest.raises(ValueError, match=r"alpha must be in \(0, 1\)"):
		select_exponents(alpha)


def test_select_exponents_small_alpha():
	beta, p, q = select_exponents(0.3)
	assert beta > 0.7
	assert beta + 0.3 - 2 / q >= 1.05 - 1e-12


@pytest.mark.parametrize("alpha", [0.7, 0.8, 0.9, 0.95])
def test_build_chain(alpha: float):
	chain = build_chain(alpha)

	assert set(chain.residuals) == {"beta", "exponent_sum", "A", "delta", "r0"}
	assert all(value > 0 for value in chain.residuals.values()), chain.residuals
	assert 0 < chain.r0 < 1
	assert chain.delta > 0
	assert chain.T0 >= 0
	assert math.isfinite(chain.T)
	assert chain.T > chain.T0
	assert chain.smallest_step == pytest.approx(chain.beta * chain.r0**alpha)


def test_solve_A():
	A = solve_A(KernelConstants(), 2)
	assert A == 17
	assert 1 - 2 * A**-0.5 > 0.5


@pytest.mark.parametrize(
		"change, residual",
		[
				pytest.param({'A': 1.0}, 'A', id='A'),
				pytest.param({"r0": 1.0}, "r0", id="r0"),
				pytest.param({"beta": 0.05}, "beta", id="beta"),
				]
		)
def test_perturbed_chain(change, residual: str):
	consts = KernelConstants()
	chain = build_chain(0.8, consts=consts)

	broken = dataclasses.replace(chain, **change)
	assert verify_chain(broken, consts)[residual] < 0


def test_perturbed_delta():
	consts = KernelConstants()
	chain = build_chain(0.8, consts=consts)

	broken = dataclasses.replace(chain, delta=2 * chain.delta)
	assert verify_chain(broken, consts)["delta"] < 0


def test_solve_delta():
	consts = KernelConstants()
	delta = solve_delta(0.5, 32, 2, consts)
	assert delta == pytest.approx(0.99 * 0.5 * math.log(2))

	# A small decay constant takes over.
	assert solve_delta(0.5, 32, 2, KernelConstants(c=0.01)) == pytest.approx(0.99 * 0.01 / (1 + 2 / 16))


def test_solve_r0_inconsistent():
	with pytest.raises(ValueError, match="Inconsistent chain"):
		solve_r0(0.3, 0.5, 2, 2, 2, 17, 0.3, KernelConstants())


def test_compute_T0():
	assert compute_T0(0, 0.5, 2, 2, 2, 17, 0.01) == 0
	assert compute_T0(1e-12, 0.5, 2, 2, 2, 17, 1.0) == 0
	assert compute_T0(1, 0.5, 2, 2, 2, 17, 0.01) > compute_T0(1, 0.5, 2, 2, 2, 17, 0.1)


def test_eventual_time():
	T, partial = eventual_time(1.0, 0.8, 0.5, 0.3, 0.01)

	assert len(partial) == 20
	assert partial[0] == 1.0
	assert all(a < b for a, b in zip(partial, partial[1:]))
	assert partial[-1] < T
	assert partial[1] - partial[0] == pytest.approx(0.5 * 0.01**0.8)


def test_sensitivities():
	base = build_chain(0.8)
	results = sensitivities(0.8)

	assert set(results) == {"C", "C_prime_q", "c", "c_prime", "C_alpha"}
	for variants in results.values():
		assert set(variants) == {0.5, 2.0}

	assert results['C'][2.0].A > base.A
	assert results['C'][0.5].A < base.A
	assert results["C_prime_q"][2.0].r0 < base.r0
	# The kernel-domination constant does not enter the chain.
	assert results["c_prime"][2.0] == base


@pytest.mark.parametrize("name", ['C', "C_prime_q", 'c', "c_prime", "C_alpha"])
def test_kernel_constants_positive(name: str):
	with pytest.raises(ValueError, match=f"Kernel constant {name} must be positive"):
		KernelConstants(**{name: 0})


def test_embedding():
	assert KernelConstants.embedding(2, 2) == pytest.approx(2 * math.pi)
