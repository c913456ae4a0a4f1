#!/usr/bin/env python3
#
#  chain.py
"""
The chain of parameters leading to the eventual regularization time.

Starting from the dissipation exponent :math:`\\alpha`, the chain picks a Hölder target :math:`\\beta`
and conjugate exponents :math:`p, q`, then solves in turn for the class constant :math:`A`,
the scale decay rate :math:`\\delta`, the smallest scale :math:`r_0`, the decay time :math:`T_0`
and finally the eventual time :math:`T`.
"""
#
#  Copyright © 2021 Dominic Davis-Foster <dominic@davis-foster.co.uk>
#
#  Permission is hereby granted, free of charge, to any person obtaining a copy
#  of this software and associated documentation files (the "Software"), to deal
#  in the Software without restriction, including without limitation the rights
#  to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
#  copies of the Software, and to permit persons to whom the Software is
#  furnished to do so, subject to the following conditions:
#
#  The above copyright notice and this permission notice shall be included in all
#  copies or substantial portions of the Software.
#
#  THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND,
#  EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF
#  MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT.
#  IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM,
#  DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR
#  OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE
#  OR OTHER DEALINGS IN THE SOFTWARE.
#

# stdlib
import dataclasses
import logging
import math
from typing import Dict, List, Tuple

__all__ = [
		"KernelConstants",
		"ParameterChain",
		"select_exponents",
		"solve_A",
		"solve_delta",
		"solve_r0",
		"compute_T0",
		"eventual_time",
		"verify_chain",
		"build_chain",
		"sensitivities",
		]

logger = logging.getLogger(__name__)

#: Spacing of the lattice from which :math:`\beta` is chosen.
BETA_STEP = 0.05

#: Required slack in both exponent inequalities.
EXPONENT_MARGIN = 0.05

#: Factor applied to :math:`\delta` and :math:`r_0` so the chain inequalities hold strictly.
SAFETY = 0.99

#: The number of partial times :math:`T_k` reported.
PARTIAL_TIMES = 20


@dataclasses.dataclass(frozen=True)
class KernelConstants:
	"""
	The free constants of the estimates. Each defaults to 1.

	:param C: The generic estimator constant of the class condition on :math:`A`.
	:param C_prime_q: The rough-part constant of the Lipschitz evolution estimate.
	:param c: The decay rate constant of the norm evolution.
	:param c_prime: The kernel-domination constant.
	:param C_alpha: The normalization of the fractional Laplacian kernel.
	"""

	C: float = 1.0
	C_prime_q: float = 1.0
	c: float = 1.0
	c_prime: float = 1.0
	C_alpha: float = 1.0

	def __post_init__(self):
		for f in dataclasses.fields(self):
			value = getattr(self, f.name)
			if not value > 0:
				raise ValueError(f"Kernel constant {f.name} must be positive, not {value!r}.")

	@staticmethod
	def embedding(d: int, q: float) -> float:
		"""
		The :math:`L^\\infty \\to L^q` embedding constant on the torus, :math:`(2\\pi)^{d/q}`.
		"""

		return (2 * math.pi)**(d / q)


@dataclasses.dataclass(frozen=True)
class ParameterChain:
	"""
	A complete chain of parameters.

	``T0`` is derived from the exponential decay of :math:`\\|\\theta\\|_q^q` and Hölder's inequality:
	it is the first time at which :math:`C_{emb} \\|\\theta_0\\|_\\infty e^{-\\tau/q} A^{1/p} \\leq r^{\\beta + d/q}`
	for every :math:`r \\geq r_0`.
	"""

	alpha: float
	d: int
	beta: float
	p: float
	q: float
	A: float
	delta: float
	r0: float
	T0: float
	T: float
	residuals: Dict[str, float] = dataclasses.field(default_factory=dict)

	@property
	def smallest_step(self) -> float:
		"""
		The time step :math:`s = \\beta r_0^\\alpha` spent at the smallest scale.
		"""

		return self.beta * self.r0**self.alpha


def select_exponents(alpha: float, d: int = 2) -> Tuple[float, float, float]:
	"""
	Choose :math:`\\beta` and :math:`q = 2^n` with :math:`\\beta > 1 - \\alpha` and :math:`\\beta + \\alpha - d/q > 1`.

	:math:`\\beta` is the smallest multiple of 0.05, at least 0.5, clearing :math:`1 - \\alpha` by 0.05.
	:math:`q` is the smallest power of two with :math:`d/q` at most a quarter of :math:`\\beta + \\alpha - 1`.
	If that leaves less than 0.05 of slack :math:`\\beta` is raised.

	Keeping three quarters of the excess as slack leaves room for the :math:`A` and :math:`\\delta`
	constraints downstream; at :math:`\\alpha = 0.9` the rule gives :math:`\\beta = 0.5` and :math:`q = 32`.

	:param alpha: The dissipation exponent, in :math:`(0, 1)`.
	:param d: The dimension.

	:returns: :math:`(\\beta, p, q)`.

	:raises ValueError: If ``alpha`` is out of range or no exponents up to :math:`\\beta = 0.95` fit.
	"""

	if not 0 < alpha < 1:
		raise ValueError(f"alpha must be in (0, 1), not {alpha!r}.")

	k = math.ceil(round(max(0.5, 1 - alpha + EXPONENT_MARGIN) / BETA_STEP, 9))
	while True:
		beta = round(k * BETA_STEP, 10)
		if beta > 0.95:
			raise ValueError(f"No Hölder target below 0.95 fits alpha={alpha!r}.")

		excess = beta + alpha - 1
		if excess > 0:
			q = 2.0
			while d / q > excess / 4:
				q *= 2
			if excess - d / q >= EXPONENT_MARGIN:
				return beta, q / (q - 1), q

		k += 1


def solve_A(consts: KernelConstants, p: float) -> float:
	"""
	Returns the class constant :math:`A`, the next integer above :math:`1.05 (4C)^p`.

	This guarantees :math:`1 - 2 C A^{-1/p} > 1/2`.

	:param consts:
	:param p:
	"""

	A = float(math.ceil((4 * consts.C)**p * 1.05))
	assert 1 - 2 * consts.C * A**(-1 / p) > 0.5
	return A


def _delta_terms(beta: float, q: float, d: int, consts: KernelConstants) -> Tuple[float, float, float]:
	factor = 1 / (1 + d / (beta * q))
	return beta * math.log(2), factor * math.log(2), factor * consts.c


def solve_delta(beta: float, q: float, d: int, consts: KernelConstants) -> float:
	"""
	Returns the scale decay rate :math:`\\delta`, 0.99 times
	:math:`\\min\\{\\beta \\log 2, \\kappa \\log 2, \\kappa c\\}` with :math:`\\kappa = (1 + d / (\\beta q))^{-1}`.

	:param beta:
	:param q:
	:param d:
	:param consts:
	"""

	return SAFETY * min(_delta_terms(beta, q, d, consts))


def _r0_exponent(alpha: float, beta: float, d: int, q: float) -> float:
	return beta - d / q - 1 + alpha


def solve_r0(
		alpha: float,
		beta: float,
		p: float,
		q: float,
		d: int,
		A: float,
		delta: float,
		consts: KernelConstants,
		) -> float:
	"""
	Returns the largest :math:`r_0 \\leq 1` with :math:`C'_q A^{1/p} r_0^{\\beta - d/q - 1 + \\alpha} \\leq \\delta (\\beta^{-1} - 1)`.

	:raises ValueError: If the exponent :math:`\\beta - d/q - 1 + \\alpha` is not positive.
	"""

	exponent = _r0_exponent(alpha, beta, d, q)
	if exponent <= 0:
		raise ValueError(f"Inconsistent chain: the scale exponent {exponent:.6g} is not positive.")

	target = delta * (1 / beta - 1) / (consts.C_prime_q * A**(1 / p))
	if target <= 0:
		return 0.0
	return min(1.0, target**(1 / exponent))


def compute_T0(theta_inf: float, beta: float, p: float, q: float, d: int, A: float, r0: float) -> float:
	"""
	Returns the time after which every pairing with :math:`U(r)`, :math:`r_0 \\leq r \\leq 1`, is at most :math:`r^\\beta`.

	.. math::

		T_0 = \\max\\left(0, q \\log\\left(C_{emb} \\|\\theta_0\\|_\\infty A^{1/p} r_0^{-(\\beta + d/q)}\\right)\\right)

	:param theta_inf: :math:`\\|\\theta_0\\|_\\infty`.
	"""

	if theta_inf <= 0:
		return 0.0
	embedding = KernelConstants.embedding(d, q)
	return max(0.0, q * math.log(embedding * theta_inf * A**(1 / p) * r0**(-(beta + d / q))))


def eventual_time(T0: float, alpha: float, beta: float, delta: float, r0: float) -> Tuple[float, List[float]]:
	"""
	Returns the eventual time :math:`T = T_0 + \\beta r_0^\\alpha / (1 - e^{-\\delta \\alpha})`
	and the partial times :math:`T_k = T_0 + \\beta r_0^\\alpha \\sum_{j<k} e^{-\\delta \\alpha j}`, for :math:`k < 20`.
	"""

	step = beta * r0**alpha
	ratio = math.exp(-delta * alpha)
	T = T0 + step / (1 - ratio)

	partial = [T0]
	for j in range(PARTIAL_TIMES - 1):
		partial.append(partial[-1] + step * ratio**j)

	return T, partial


def verify_chain(chain: ParameterChain, consts: KernelConstants) -> Dict[str, float]:
	"""
	Re-evaluate every inequality of the chain, returning signed residuals. Positive means satisfied.

	* ``beta``: :math:`\\beta - (1 - \\alpha)`.
	* ``exponent_sum``: :math:`\\beta + \\alpha - d/q - 1`.
	* ``A``: :math:`1 - 2 C A^{-1/p} - 1/2`.
	* ``delta``: the bound on :math:`\\delta` minus :math:`\\delta`.
	* ``r0``: :math:`\\delta(\\beta^{-1} - 1) - C'_q A^{1/p} r_0^{\\beta - d/q - 1 + \\alpha}`.

	:param chain:
	:param consts:
	"""

	alpha, beta, p, q, d = chain.alpha, chain.beta, chain.p, chain.q, chain.d
	return {
			"beta": beta - (1 - alpha),
			"exponent_sum": beta + alpha - d / q - 1,
			"A": 0.5 - 2 * consts.C * chain.A**(-1 / p),
			"delta": min(_delta_terms(beta, q, d, consts)) - chain.delta,
			"r0": chain.delta * (1 / beta - 1)
					- consts.C_prime_q * chain.A**(1 / p) * chain.r0**_r0_exponent(alpha, beta, d, q),
			}


def build_chain(alpha: float, theta_inf: float = 1.0, consts: KernelConstants = KernelConstants(), d: int = 2) -> ParameterChain:
	"""
	Run the whole chain for a dissipation exponent and initial amplitude.

	:param alpha: The dissipation exponent, in :math:`(0, 1)`.
	:param theta_inf: :math:`\\|\\theta_0\\|_\\infty`.
	:param consts:
	:param d:
	"""

	beta, p, q = select_exponents(alpha, d)
	A = solve_A(consts, p)
	delta = solve_delta(beta, q, d, consts)
	r0 = SAFETY * solve_r0(alpha, beta, p, q, d, A, delta, consts)
	T0 = compute_T0(theta_inf, beta, p, q, d, A, r0)
	T, _ = eventual_time(T0, alpha, beta, delta, r0)

	chain = ParameterChain(alpha, d, beta, p, q, A, delta, r0, T0, T)
	chain = dataclasses.replace(chain, residuals=verify_chain(chain, consts))
	logger.info("Chain for alpha=%s: beta=%s q=%s A=%s delta=%.6g r0=%.6g T=%.6g", alpha, beta, q, A, delta, r0, T)
	return chain


def sensitivities(
		alpha: float,
		theta_inf: float = 1.0,
		consts: KernelConstants = KernelConstants(),
		d: int = 2,
		) -> Dict[str, Dict[float, ParameterChain]]:
	"""
	Rebuild the chain with each free constant halved and doubled.

	:returns: A mapping of constant name to a mapping of factor to chain.
	"""

	results: Dict[str, Dict[float, ParameterChain]] = {}
	for f in dataclasses.fields(consts):
		results[f.name] = {}
		for factor in (0.5, 2.0):
			changed = dataclasses.replace(consts, **{f.name: getattr(consts, f.name) * factor})
			results[f.name][factor] = build_chain(alpha, theta_inf, changed, d)
	return results
