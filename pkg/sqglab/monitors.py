#!/usr/bin/env python3
#
#  monitors.py
"""
Checks of the estimates behind eventual regularity, evaluated on simulated trajectories.
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
from typing import Any, Callable, Dict, Iterable, List, Sequence, Tuple

# 3rd party
import numpy
import scipy.integrate

# this package
from sqglab.holder import lp_seminorm
from sqglab.membership import lip_dual_upper, pair
from sqglab.solver import Trajectory, build_mollifier, dual_path, simulate_passive
from sqglab.spectral import (
		GridField,
		LittlewoodPaleyFamily,
		Velocity,
		fractional_laplacian,
		fractional_laplacian_kernel_oracle,
		oracle_ratios,
		spectral_gradient,
		subtract_mean,
		to_grid,
		to_spectral
		)

__all__ = [
		"SignedPowerField",
		"Check",
		"MonitorReport",
		"PairingDrift",
		"PairingBound",
		"SplitResult",
		"SplitSweep",
		"monitor_forward",
		"dual_max_principle",
		"pairing_conservation",
		"dual_lp_derivative",
		"mollified_pairing_bound",
		"smooth_rough_split",
		"smooth_rough_sweep",
		]

logger = logging.getLogger(__name__)

#: Allowed growth of :math:`\max \theta` (or decay of :math:`\min \theta`), relative to :math:`\|\theta_0\|_\infty`, per unit time.
MAX_PRINCIPLE_TOLERANCE = 1e-4

#: Allowed factor above the :math:`e^{-\tau}` envelope of :math:`\|\theta\|_q^q`.
DECAY_ENVELOPE_SLACK = 1.01


class SignedPowerField:
	"""
	The signed power :math:`\\Psi = |\\psi|^{p-2} \\psi` of a field.

	:math:`\\Psi` has the sign of :math:`\\psi` and :math:`\\|\\Psi\\|_q = \\|\\psi\\|_p^{p-1}`, with :math:`q` conjugate to :math:`p`.

	:param source: The field :math:`\\psi`.
	:param p: The exponent, greater than 1.
	"""

	def __init__(self, source: GridField, p: float):
		if not p > 1:
			raise ValueError(f"p must be greater than 1, not {p!r}.")
		self.source = source
		self.p = p
		self.field = source.with_values(numpy.abs(source.values)**(p - 1) * numpy.sign(source.values))

	@property
	def q(self) -> float:
		return self.p / (self.p - 1)

	@property
	def values(self) -> numpy.ndarray:
		return self.field.values

	def mollified(self, r: float) -> GridField:
		"""
		Returns :math:`\\eta = \\Psi * \\chi_r`.

		:param r: The mollifier scale.
		"""

		return build_mollifier(self.field.grid, r).convolve(self.field)


@dataclasses.dataclass(frozen=True)
class Check:
	"""
	The verdict of one monitor, with the numbers it came from.

	:param name:
	:param passed:
	:param margin: How far inside the tolerance the worst case was. Negative when failed.
	:param data: The raw measurements.
	"""

	name: str
	passed: bool
	margin: float
	data: Dict[str, Any] = dataclasses.field(default_factory=dict)


@dataclasses.dataclass(frozen=True)
class MonitorReport:
	"""
	The checks run on a forward trajectory.

	:param checks: Keyed by name.
	:param holder_series: Pairs of time and :func:`~sqglab.holder.lp_seminorm` value.
	"""

	checks: Dict[str, Check]
	holder_series: Tuple[Tuple[float, float], ...]

	@property
	def passed(self) -> bool:
		return all(check.passed for check in self.checks.values())


def _max_principle(times: Sequence[float], fields: Sequence[GridField], reference: float) -> Check:
	worst = math.inf
	for k in range(1, len(fields)):
		allowance = MAX_PRINCIPLE_TOLERANCE * reference * (times[k] - times[k - 1])
		rise = float(fields[k].values.max() - fields[k - 1].values.max())
		fall = float(fields[k - 1].values.min() - fields[k].values.min())
		worst = min(worst, allowance - rise, allowance - fall)

	if math.isinf(worst):
		worst = 0.0
	return Check(
			"max_principle",
			worst >= 0,
			worst,
			{"max": [float(f.values.max()) for f in fields], "min": [float(f.values.min()) for f in fields]},
			)


def _decay_envelope(times: Sequence[float], fields: Sequence[GridField], q: float) -> Check:
	initial = fields[0].norm(q)**q
	ratios = []
	for tau, f in zip(times, fields):
		envelope = initial * math.exp(-(tau - times[0]))
		ratios.append(f.norm(q)**q / envelope if envelope > 0 else 0.0)

	worst = max(ratios)
	return Check("lq_decay", worst <= DECAY_ENVELOPE_SLACK, DECAY_ENVELOPE_SLACK - worst, {"ratio": ratios, "q": q})


def monitor_forward(
		traj: Trajectory,
		q: float,
		beta: float,
		fam: LittlewoodPaleyFamily,
		*,
		reduce_mean: bool = False,
		) -> MonitorReport:
	"""
	Check the maximum principle and the exponential decay of :math:`\\|\\theta\\|_q^q` along a forward run,
	and compute the Hölder seminorm of each snapshot.

	:param traj:
	:param q: The exponent of the decay check.
	:param beta: The Hölder exponent.
	:param fam:
	:param reduce_mean: Subtract the (conserved) mean from every snapshot before the decay check.
	"""

	times = traj.times
	fields = [s.theta for s in traj.snapshots]
	reference = max(fields[0].norm(math.inf), 1e-300)

	decay_fields = [subtract_mean(f)[0] for f in fields] if reduce_mean else fields

	checks = {
			"max_principle": _max_principle(times, fields, reference),
			"lq_decay": _decay_envelope(times, decay_fields, q),
			}
	series = tuple((tau, lp_seminorm(f, beta, fam)[0]) for tau, f in zip(times, fields))

	for check in checks.values():
		logger.info("%s: %s (margin %.3g)", check.name, "pass" if check.passed else "FAIL", check.margin)
	return MonitorReport(checks, series)


def dual_max_principle(path: Sequence[Tuple[float, GridField]], p: float) -> Check:
	"""
	Check that :math:`\\|\\psi(\\cdot, \\tau)\\|_p` does not grow as :math:`\\tau` decreases along a dual solve.

	:param path: As returned by :func:`~sqglab.solver.dual_path`.
	:param p:
	"""

	norms = [psi.norm(p) for _, psi in path]
	worst = math.inf
	for k in range(1, len(path)):
		allowance = MAX_PRINCIPLE_TOLERANCE * norms[k - 1] * (path[k - 1][0] - path[k][0])
		worst = min(worst, norms[k - 1] + allowance - norms[k])

	if math.isinf(worst):
		worst = 0.0
	return Check("dual_max_principle", worst >= 0, worst, {"times": [tau for tau, _ in path], "norms": norms})


@dataclasses.dataclass(frozen=True)
class PairingDrift:
	"""
	The change of :math:`P(\\tau) = \\langle \\theta(\\cdot, \\tau), \\psi(\\cdot, \\tau) \\rangle` over a dual solve.
	"""

	start: float
	end: float
	drift: float


def pairing_conservation(traj: Trajectory, psi_t: GridField, t: float, s: float) -> PairingDrift:
	"""
	Solve the dual equation back from ``t`` over ``s`` and compare the pairings at both ends.

	The drift is :math:`|P(t) - P(t - s)| / \\max(|P(t)|, \\epsilon)` with :math:`\\epsilon = 10^{-12} \\|\\theta\\|_2 \\|\\psi\\|_2`.

	:param traj:
	:param psi_t:
	:param t:
	:param s:

	:raises CoverageError: If :math:`[t - s, t]` is not inside the run.
	"""

	theta_end = traj.state_at(t)
	theta_start = traj.state_at(t - s)
	psi_start = dual_path(traj, psi_t, t, s)[-1][1]

	end = pair(theta_end, psi_t)
	start = pair(theta_start, psi_start)
	floor = max(1e-12 * theta_end.norm(2) * psi_t.norm(2), 1e-300)
	drift = abs(end - start) / max(abs(end), floor)

	logger.debug("Pairing over [%s, %s]: %.12g -> %.12g (drift %.3g)", t - s, t, start, end, drift)
	return PairingDrift(start, end, drift)


def dual_lp_derivative(
		psi: GridField,
		p: float,
		alpha: float,
		lattice_radius: int = 4,
		) -> Tuple[float, float]:
	"""
	Evaluate :math:`\\frac{d}{d\\tau} \\int |\\psi|^p` for the dual equation two ways.

	The spectral value is :math:`p \\langle \\Psi, (-\\Delta)^{\\alpha/2} \\psi \\rangle`. The symmetrized value is

	.. math::

		\\frac{p}{2K} \\iint (\\Psi(x) - \\Psi(y)) (\\psi(x) - \\psi(y)) \\sum_n |x - y - 2\\pi n|^{-(\\alpha + d)} \\, dx \\, dy,

	summed on the grid over :func:`~sqglab.spectral.fractional_laplacian_kernel_oracle`'s lattice with its near and far field corrections,
	where :math:`K` is the oracle's ratio to :math:`|n|^\\alpha` on the mode :math:`(1, 0, \\ldots)`.
	The integrand is non-negative since :math:`\\Psi` is increasing in :math:`\\psi`.

	:param psi:
	:param p: The exponent, at least 2.
	:param alpha:
	:param lattice_radius:

	:returns: The spectral and symmetrized values.
	"""

	if p < 2:
		raise ValueError(f"p must be at least 2, not {p!r}.")

	grid = psi.grid
	power = SignedPowerField(psi, p).field

	spectral = p * pair(power, to_grid(fractional_laplacian(to_spectral(psi), alpha)))

	mode = (1, ) + (0, ) * (grid.d - 1)
	ratios, _ = oracle_ratios(grid, alpha, [mode], lattice_radius)
	calibration = ratios[mode]

	raw = fractional_laplacian_kernel_oracle(psi, alpha, lattice_radius, corrected=False)
	corrected = fractional_laplacian_kernel_oracle(psi, alpha, lattice_radius, corrected=True)
	double_sum = 2 * pair(power, raw)
	correction = pair(power, corrected - raw)

	symmetrized = p / (2 * calibration) * (double_sum + 2 * correction)
	return spectral, symmetrized


@dataclasses.dataclass(frozen=True)
class PairingBound:
	"""
	Both sides of the mollified pairing bound :math:`\\langle \\psi, \\Psi * \\chi_r \\rangle \\leq 2 C A^{-1/p} \\|\\psi\\|_p^p`.

	:param lhs:
	:param rhs:
	:param ok: Whether ``lhs <= rhs``.
	:param hypothesis_met: Whether ``psi`` pairs with 1-Lipschitz functions at most ``r``, as the bound assumes.
	:param C: The mollifier constant, :math:`2 r \\|\\nabla \\chi_r\\|_p r^{d/q}`.
	"""

	lhs: float
	rhs: float
	ok: bool
	hypothesis_met: bool
	C: float


def mollified_pairing_bound(psi: GridField, p: float, r: float, A: float) -> PairingBound:
	"""
	Evaluate both sides of the mollified pairing bound, with the constant measured from the actual mollifier.

	:param psi:
	:param p:
	:param r: The mollifier scale.
	:param A: The class constant.
	"""

	grid = psi.grid
	power = SignedPowerField(psi, p)
	mollifier = build_mollifier(grid, r)

	gradient = numpy.sqrt(sum(g.values**2 for g in mollifier.gradient()))
	C = 2 * r * GridField(grid, gradient).norm(p) * r**(grid.d / power.q)

	lhs = pair(psi, power.mollified(r))
	rhs = 2 * C * A**(-1 / p) * psi.norm(p)**p

	try:
		hypothesis_met = lip_dual_upper(psi) <= r
	except ValueError:
		hypothesis_met = False

	return PairingBound(lhs, rhs, lhs <= rhs, hypothesis_met, C)


@dataclasses.dataclass(frozen=True)
class SplitResult:
	"""
	The smooth and rough parts of a pairing over :math:`[t - s, t]`.

	:param smooth: :math:`I = |\\langle f(\\cdot, t), \\psi(\\cdot, t) \\rangle|`.
	:param rough: :math:`II = |\\int \\langle (u - u_r) \\cdot \\nabla f, \\psi \\rangle \\, d\\tau|`.
	:param rough_bound: :math:`s \\sup_\\tau \\|u - u_r\\|_q \\|\\psi\\|_p \\|\\nabla f\\|_\\infty`.
	:param pairing: :math:`|\\langle f_0, \\psi(\\cdot, t - s) \\rangle|`, at most ``smooth + rough``.
	"""

	s: float
	r: float
	smooth: float
	rough: float
	rough_bound: float
	pairing: float


def _velocity_magnitude(u: Velocity) -> numpy.ndarray:
	return numpy.sqrt(sum(c.values**2 for c in u))


def smooth_rough_split(
		traj: Trajectory,
		psi_t: GridField,
		t: float,
		s: float,
		r: float,
		f0: GridField,
		q: float = 2,
		) -> SplitResult:
	"""
	Split the pairing of a Lipschitz field with the dual solution into a smooth and a rough part.

	:math:`f` is transported from :math:`f_0` at :math:`t - s` by the mollified velocity :math:`u_r`, so that

	.. math::

		\\langle f(t), \\psi(t) \\rangle - \\langle f_0, \\psi(t - s) \\rangle = \\int_{t-s}^t \\langle (u_r - u) \\cdot \\nabla f, \\psi \\rangle \\, d\\tau.

	The time integral uses the trapezoid rule over the forward run's steps.

	:param traj:
	:param psi_t: The terminal dual data.
	:param t:
	:param s:
	:param r: The mollifier scale.
	:param f0: A 1-Lipschitz field.
	:param q: The exponent of ``rough_bound``.

	:raises CoverageError: If :math:`[t - s, t]` is not covered by the run.
	"""

	grid = psi_t.grid
	p = q / (q - 1)
	mollifier = build_mollifier(grid, r)
	history = traj.history

	path = list(reversed(dual_path(traj, psi_t, t, s)))
	nodes = [tau for tau, _ in path]

	def smooth_velocity(tau: float) -> Velocity:
		return tuple(mollifier.convolve(c) for c in history.velocity(tau))

	cfg = dataclasses.replace(traj.config, velocity_mode="prescribed", snapshot_stride=1)
	passive = simulate_passive(cfg, smooth_velocity, f0, (nodes[0], nodes[-1]), times=nodes)
	states = [snapshot.theta for snapshot in passive.snapshots]

	integrand = []
	bound = 0.0
	for tau, (_, psi), f in zip(nodes, path, states):
		u = history.velocity(tau)
		difference = tuple(a - b for a, b in zip(u, smooth_velocity(tau)))
		gradient = spectral_gradient(f)
		advected = sum(d.values * g.values for d, g in zip(difference, gradient))
		integrand.append(pair(GridField(grid, advected), psi))
		bound = max(
				bound,
				GridField(grid, _velocity_magnitude(difference)).norm(q) * psi.norm(p)
				* float(numpy.max(_velocity_magnitude(gradient))),
				)

	rough = abs(float(scipy.integrate.trapezoid(integrand, nodes))) if len(nodes) > 1 else 0.0
	smooth = abs(pair(states[-1], psi_t))
	pairing = abs(pair(f0, path[0][1]))

	logger.debug("Split at s=%s r=%s: I=%.6g II=%.6g", s, r, smooth, rough)
	return SplitResult(s, r, smooth, rough, s * bound, pairing)


@dataclasses.dataclass(frozen=True)
class SplitSweep:
	"""
	Smooth parts over an :math:`(s, r)` sweep and the fitted growth constant.

	:param results:
	:param C_fit: Least squares fit of :math:`C` in :math:`\\log(I / r) = C s r^{\\beta - 1 - d/q}`. 0 without usable points.
	"""

	results: Tuple[SplitResult, ...]
	C_fit: float


def smooth_rough_sweep(
		traj: Trajectory,
		psi_for_scale: Callable[[float], GridField],
		t: float,
		s_values: Iterable[float],
		r_values: Iterable[float],
		f0: GridField,
		beta: float,
		q: float = 2,
		) -> SplitSweep:
	"""
	Run :func:`~.smooth_rough_split` over every :math:`(s, r)` pair and fit the growth of the smooth part.

	:param traj:
	:param psi_for_scale: Returns the terminal dual data for a scale :math:`r`.
	:param t:
	:param s_values:
	:param r_values:
	:param f0:
	:param beta: The Hölder exponent of the fitted model.
	:param q:
	"""

	d = f0.grid.d
	results: List[SplitResult] = []
	xs, ys = [], []
	for r in r_values:
		psi_t = psi_for_scale(r)
		for s in s_values:
			result = smooth_rough_split(traj, psi_t, t, s, r, f0, q)
			results.append(result)
			if result.smooth > 0 and s > 0:
				xs.append(s * r**(beta - 1 - d / q))
				ys.append(math.log(result.smooth / r))

	x, y = numpy.asarray(xs), numpy.asarray(ys)
	C_fit = float(numpy.dot(x, y) / numpy.dot(x, x)) if len(xs) else 0.0
	logger.info("Fitted smooth-part growth constant C = %.6g over %d points", C_fit, len(xs))
	return SplitSweep(tuple(results), C_fit)
