#!/usr/bin/env python3
#
#  solver.py
"""
Time integration of the dissipative SQG equation, its backward dual and the passive-scalar equation.

The forward equation is

.. math::

	\\theta_t = (u \\cdot \\nabla) \\theta - (-\\Delta)^{\\alpha/2} \\theta + \\varepsilon \\Delta \\theta,
	\\qquad u = R^\\perp \\theta,

integrated pseudo-spectrally with an integrating-factor fourth order Runge-Kutta scheme:
the linear part is integrated exactly and the advection term explicitly, with two-thirds dealiasing.
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
import bisect
import dataclasses
import functools
import itertools
import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

# 3rd party
import numpy

# this package
from sqglab import CoverageError, GridMismatchError, IntegrationError, UnresolvedScaleError
from sqglab.spectral import (
		GridField,
		SpectralField,
		TorusGrid,
		Velocity,
		advection_term,
		divergence,
		riesz_perp_velocity,
		to_grid,
		to_spectral
		)

__all__ = [
		"SolverConfig",
		"Snapshot",
		"SeriesRow",
		"Trajectory",
		"VelocityHistory",
		"Mollifier",
		"IntegratingFactorRK4",
		"VELOCITY_MODES",
		"PRESETS",
		"build_mollifier",
		"mollified_velocity",
		"rough_velocity_error",
		"initial_condition",
		"lipschitz_constant",
		"dyadic_offsets",
		"simulate_forward",
		"simulate_dual_backward",
		"dual_path",
		"simulate_passive",
		"viscosity_sweep",
		]

logger = logging.getLogger(__name__)

#: The accepted values of :attr:`SolverConfig.velocity_mode`.
VELOCITY_MODES = ("riesz_perp", "prescribed", "mollified")

#: The names of the initial-condition presets.
PRESETS = ("random-mean-zero", "shear", "vortex-pair", "cosine")

#: The smallest time step the CFL adaptation may take before the run is abandoned.
DT_FLOOR = 1e-8

#: Relative tolerance of the spectral divergence check on prescribed velocities.
DIVERGENCE_TOLERANCE = 1e-8

#: The largest time step, whatever the configuration.
DT_MAX = 0.5

#: A callable returning the velocity of a field from its Fourier coefficients.
VelocityOperator = Callable[[SpectralField], Tuple[SpectralField, ...]]

#: A time-indexed prescribed velocity.
VelocitySupplier = Callable[[float], Velocity]


@dataclass(frozen=True)
class SolverConfig:
	"""
	Parameters of a simulation.

	:param alpha: The dissipation exponent, in :math:`(0, 2]`.
	:param epsilon: The viscosity coefficient.
	:param N: The number of grid points per dimension.
	:param d: The spatial dimension.
	:param dt: The requested time step. Steps are shortened to satisfy the CFL condition.
	:param t_end: The final time.
	:param velocity_mode: One of ``'riesz_perp'``, ``'prescribed'`` or ``'mollified'``.
	:param mollifier_r: The mollifier scale, required when ``velocity_mode`` is ``'mollified'``.
	:param snapshot_stride: Steps between stored snapshots and velocity checkpoints.
	:param seed: Seed for the random initial condition.
	:param init: The initial-condition preset.
	:param amplitude: The :math:`L^\\infty` norm of the initial condition.
	:param dissipation: Whether to include the :math:`(-\\Delta)^{\\alpha/2}` term. Disabling it is for testing.
	:param cfl: The CFL number.
	"""

	alpha: float = 0.8
	epsilon: float = 0.0
	N: int = 128
	d: int = 2
	dt: float = 1e-3
	t_end: float = 1.0
	velocity_mode: str = "riesz_perp"
	mollifier_r: Optional[float] = None
	snapshot_stride: int = 10
	seed: int = 0
	init: str = "random-mean-zero"
	amplitude: float = 1.0
	dissipation: bool = True
	cfl: float = 0.5

	def __post_init__(self):
		if not 0 < self.alpha <= 2:
			raise ValueError(f"alpha must be in (0, 2], not {self.alpha!r}.")
		if self.epsilon < 0:
			raise ValueError(f"epsilon must be non-negative, not {self.epsilon!r}.")
		if not self.dt > 0:
			raise ValueError(f"dt must be positive, not {self.dt!r}.")
		if self.t_end < 0:
			raise ValueError(f"t_end must be non-negative, not {self.t_end!r}.")
		if self.velocity_mode not in VELOCITY_MODES:
			raise ValueError(f"Unknown velocity mode {self.velocity_mode!r}; expected one of {', '.join(VELOCITY_MODES)}.")
		if self.velocity_mode == "mollified" and (self.mollifier_r is None or not 0 < self.mollifier_r <= 1):
			raise ValueError("The mollified velocity mode needs mollifier_r in (0, 1].")
		if self.snapshot_stride < 1:
			raise ValueError(f"snapshot_stride must be at least 1, not {self.snapshot_stride!r}.")
		if self.init not in PRESETS:
			raise ValueError(f"Unknown initial condition {self.init!r}; expected one of {', '.join(PRESETS)}.")
		if self.amplitude < 0:
			raise ValueError(f"amplitude must be non-negative, not {self.amplitude!r}.")
		if not 0 < self.cfl <= 1:
			raise ValueError(f"cfl must be in (0, 1], not {self.cfl!r}.")

		# Validates N and d.
		TorusGrid(self.N, self.d)

	@property
	def grid(self) -> TorusGrid:
		return TorusGrid(self.N, self.d)


@dataclass(frozen=True)
class Snapshot:
	"""
	The state at one stored time.

	:param time:
	:param theta:
	:param step: The number of steps taken.
	:param dt_used: The length of the step which ended here, or 0 for the initial state.
	"""

	time: float
	theta: GridField
	step: int
	dt_used: float = 0.0


class SeriesRow(NamedTuple):
	"""
	Scalar diagnostics of one snapshot.
	"""

	t: float
	linf: float
	l2: float
	lq: float
	mean: float
	dt_used: float


class IntegratingFactorRK4:
	"""
	Fourth order Runge-Kutta in the integrating factor :math:`e^{-L t}`, for :math:`\\hat v_t = L \\hat v + N(\\hat v, t)`.

	The linear symbol is :math:`L(n) = -(|n|^\\alpha + \\varepsilon |n|^2)`.

	:param grid:
	:param alpha:
	:param epsilon:
	:param dissipation: Whether to include the :math:`|n|^\\alpha` term.
	"""

	def __init__(self, grid: TorusGrid, alpha: float, epsilon: float = 0.0, dissipation: bool = True):
		self.grid = grid
		norm = grid.wavenumber_norm()
		self.symbol = -(epsilon * norm**2)
		if dissipation:
			self.symbol = self.symbol - norm**alpha
		self._factor_cache: Dict[float, Tuple[numpy.ndarray, numpy.ndarray]] = {}

	def _factors(self, dt: float) -> Tuple[numpy.ndarray, numpy.ndarray]:
		if dt not in self._factor_cache:
			if len(self._factor_cache) > 8:
				self._factor_cache.clear()
			half = numpy.exp(self.symbol * dt / 2)
			self._factor_cache[dt] = (half, half * half)
		return self._factor_cache[dt]

	def propagate(self, coeffs: numpy.ndarray, dt: float) -> numpy.ndarray:
		"""
		Apply the exact linear evolution over ``dt``.
		"""

		return coeffs * numpy.exp(self.symbol * dt)

	def step(
			self,
			coeffs: numpy.ndarray,
			t: float,
			dt: float,
			nonlinear: Callable[[numpy.ndarray, float], numpy.ndarray],
			) -> numpy.ndarray:
		"""
		Advance ``coeffs`` from ``t`` to ``t + dt``.

		:param coeffs:
		:param t:
		:param dt:
		:param nonlinear: Returns the Fourier coefficients of the explicit term.
		"""

		half, full = self._factors(dt)

		k1 = nonlinear(coeffs, t)
		k2 = nonlinear(half * (coeffs + dt / 2 * k1), t + dt / 2)
		k3 = nonlinear(half * coeffs + dt / 2 * k2, t + dt / 2)
		k4 = nonlinear(full * coeffs + dt * half * k3, t + dt)

		return full * coeffs + dt / 6 * (full * k1 + 2 * half * (k2 + k3) + k4)


class VelocityHistory:
	"""
	The velocity of a run at every accepted step, for replay by the dual solver.

	States are stored at checkpoints and re-integrated between them on request.
	Between steps the velocity is interpolated linearly in time.

	:param grid:
	:param times: The time at each step boundary, starting with the initial time.
	:param dts: The length of each step as taken.
	:param checkpoints: The Fourier coefficients of the state at some step indices, including 0.
	:param replay: Advances a state from a time by a step length, exactly as the run did.
	:param velocity_of: Returns the velocity of a state at a time.
	:param supplier: A prescribed velocity, evaluated directly instead of interpolated.
	"""

	def __init__(
			self,
			grid: TorusGrid,
			times: Sequence[float],
			dts: Sequence[float],
			checkpoints: Dict[int, numpy.ndarray],
			replay: Callable[[numpy.ndarray, float, float], numpy.ndarray],
			velocity_of: Callable[[numpy.ndarray, float], Velocity],
			supplier: Optional[VelocitySupplier] = None,
			):
		self.grid = grid
		self.times = tuple(times)
		self.dts = tuple(dts)
		self._checkpoints = dict(checkpoints)
		self._checkpoint_steps = sorted(self._checkpoints)
		self._replay = replay
		self._velocity_of = velocity_of
		self._supplier = supplier
		self._segments: "OrderedDict[int, List[numpy.ndarray]]" = OrderedDict()
		self._velocities: "OrderedDict[int, Velocity]" = OrderedDict()

	@property
	def start(self) -> float:
		return self.times[0]

	@property
	def end(self) -> float:
		return self.times[-1]

	@property
	def steps(self) -> int:
		"""
		The number of accepted steps.
		"""

		return len(self.times) - 1

	def covers(self, t0: float, t1: float) -> bool:
		"""
		Returns whether the interval :math:`[t_0, t_1]` lies within the history.
		"""

		tol = 1e-9 * max(1.0, abs(self.end))
		return self.start - tol <= t0 and t1 <= self.end + tol

	def state(self, k: int) -> numpy.ndarray:
		"""
		Returns the Fourier coefficients of the state after ``k`` steps.

		:param k:
		"""

		if not 0 <= k <= self.steps:
			raise CoverageError(f"Step {k} is outside the history (0 to {self.steps}).")

		if k in self._checkpoints:
			return self._checkpoints[k]

		base = self._checkpoint_steps[bisect.bisect_right(self._checkpoint_steps, k) - 1]
		if base not in self._segments:
			logger.debug("Replaying segment from step %d", base)
			segment = [self._checkpoints[base]]
			stop = self._checkpoint_steps[bisect.bisect_right(self._checkpoint_steps, base)]
			for step in range(base, stop - 1):
				segment.append(self._replay(segment[-1], self.times[step], self.dts[step]))
			self._segments[base] = segment
			while len(self._segments) > 2:
				self._segments.popitem(last=False)

		return self._segments[base][k - base]

	def state_at_time(self, t: float) -> numpy.ndarray:
		"""
		Returns the Fourier coefficients of the state at time ``t``, with a partial step from the preceding step boundary if needed.

		:param t:

		:raises CoverageError: If ``t`` is outside the history.
		"""

		if not self.covers(t, t):
			raise CoverageError(f"Time {t!r} is outside the run [{self.start}, {self.end}].")

		tol = 1e-9 * max(1.0, abs(t))
		k = max(bisect.bisect_right(self.times, t + tol) - 1, 0)
		if abs(self.times[k] - t) <= tol:
			return self.state(k)
		return self._replay(self.state(k), self.times[k], t - self.times[k])

	def velocity_at_step(self, k: int) -> Velocity:
		"""
		Returns the velocity after ``k`` steps.

		:param k:
		"""

		if k not in self._velocities:
			self._velocities[k] = self._velocity_of(self.state(k), self.times[k])
			while len(self._velocities) > 4:
				self._velocities.popitem(last=False)
		return self._velocities[k]

	def velocity(self, tau: float) -> Velocity:
		"""
		Returns the velocity at time ``tau``.

		:param tau:

		:raises CoverageError: If ``tau`` is outside the history.
		"""

		if not self.covers(tau, tau):
			raise CoverageError(f"Time {tau!r} is outside the velocity history [{self.start}, {self.end}].")
		tau = min(max(tau, self.start), self.end)

		if self._supplier is not None:
			return self._supplier(tau)

		if self.steps == 0:
			return self.velocity_at_step(0)

		k = min(max(bisect.bisect_right(self.times, tau) - 1, 0), self.steps - 1)
		weight = (tau - self.times[k]) / (self.times[k + 1] - self.times[k])
		if weight <= 1e-12:
			return self.velocity_at_step(k)
		if weight >= 1 - 1e-12:
			return self.velocity_at_step(k + 1)

		before, after = self.velocity_at_step(k), self.velocity_at_step(k + 1)
		return tuple(b * (1 - weight) + a * weight for b, a in zip(before, after))


@dataclass(frozen=True)
class Trajectory:
	"""
	The result of a simulation.

	:param config:
	:param snapshots: In order of strictly increasing time.
	:param history:
	"""

	config: SolverConfig
	snapshots: Tuple[Snapshot, ...]
	history: VelocityHistory = field(repr=False, compare=False)

	@property
	def initial(self) -> Snapshot:
		return self.snapshots[0]

	@property
	def final(self) -> Snapshot:
		return self.snapshots[-1]

	@property
	def times(self) -> Tuple[float, ...]:
		return tuple(snapshot.time for snapshot in self.snapshots)

	def snapshot_at(self, t: float) -> Snapshot:
		"""
		Returns the snapshot stored at time ``t``.

		:param t:

		:raises CoverageError: If there is no snapshot at that time.
		"""

		tol = 1e-9 * max(1.0, abs(t))
		for snapshot in self.snapshots:
			if abs(snapshot.time - t) <= tol:
				return snapshot
		raise CoverageError(f"No snapshot stored at time {t!r}.")

	def state_at(self, t: float) -> GridField:
		"""
		Returns the state at any time ``t`` within the run, replaying from checkpoints if needed.

		:param t:

		:raises CoverageError: If ``t`` is outside the run.
		"""

		return to_grid(SpectralField(self.history.grid, self.history.state_at_time(t)))

	def time_series(self, q: float = 2) -> List[SeriesRow]:
		"""
		Returns the scalar diagnostics of each snapshot.

		:param q: The exponent of the ``lq`` column.
		"""

		return [
				SeriesRow(s.time, s.theta.norm(math.inf), s.theta.norm(2), s.theta.norm(q), s.theta.mean(), s.dt_used)
				for s in self.snapshots
				]


@dataclass(frozen=True, eq=False)
class Mollifier:
	"""
	The periodized bump :math:`\\chi_r(x) = r^{-d} \\tilde\\chi(x / r)`, sampled on a grid.

	:param r: The scale.
	:param kernel: The samples, with quadrature integral 1.
	:param gradient_constant: :math:`C` with :math:`\\|\\nabla \\chi_r\\|_\\infty = C r^{-d-1}`.
	"""

	r: float
	kernel: GridField
	gradient_constant: float

	@property
	def grid(self) -> TorusGrid:
		return self.kernel.grid

	def symbol(self) -> numpy.ndarray:
		"""
		Returns the convolution multiplier, :math:`(2\\pi)^d \\hat\\chi_r(n)`.
		"""

		return _mollifier_symbol(self)

	def convolve(self, f: GridField) -> GridField:
		"""
		Returns :math:`f * \\chi_r`.

		:param f:
		"""

		if f.grid != self.grid:
			raise GridMismatchError(f"Field is on {f.grid}, mollifier on {self.grid}.")
		return to_grid(to_spectral(f).multiply(self.symbol()))

	def gradient(self) -> Velocity:
		"""
		Returns :math:`\\nabla \\chi_r`, evaluated from the closed form of the bump.
		"""

		return _mollifier_gradient(self)


@functools.lru_cache(maxsize=16)
def _mollifier_symbol(mollifier: Mollifier) -> numpy.ndarray:
	return to_spectral(mollifier.kernel).coeffs * mollifier.grid.volume


def _bump(rho_sq: numpy.ndarray) -> numpy.ndarray:
	inside = rho_sq < 1
	values = numpy.zeros_like(rho_sq)
	values[inside] = numpy.exp(-1 / (1 - rho_sq[inside]))
	return values


def _bump_derivative_factor(rho_sq: numpy.ndarray) -> numpy.ndarray:
	# d/dy exp(-1/(1-|y|^2)) = factor * y
	inside = rho_sq < 1
	values = numpy.zeros_like(rho_sq)
	values[inside] = -2 * numpy.exp(-1 / (1 - rho_sq[inside])) / (1 - rho_sq[inside])**2
	return values


@functools.lru_cache(maxsize=16)
def _mollifier_gradient(mollifier: Mollifier) -> Velocity:
	grid, r = mollifier.grid, mollifier.r
	x = grid.coordinates()
	rho_sq = sum(xi**2 for xi in x) / r**2
	normalization = mollifier.kernel.values.max() / math.exp(-1)
	factor = _bump_derivative_factor(rho_sq) * normalization / r**2
	return tuple(GridField(grid, factor * xi) for xi in x)


@functools.lru_cache(maxsize=32)
def build_mollifier(grid: TorusGrid, r: float) -> Mollifier:
	"""
	Build the mollifier at scale ``r``, from the bump :math:`\\tilde\\chi(y) = \\exp(-1 / (1 - |y|^2))`.

	:param grid:
	:param r: The scale, in :math:`(0, 1]`.

	:raises ValueError: If ``r`` is out of range.
	:raises UnresolvedScaleError: If the support is under four grid cells in radius.
	"""

	if not 0 < r <= 1:
		raise ValueError(f"The mollifier scale must be in (0, 1], not {r!r}.")
	if r < 4 * grid.spacing:
		raise UnresolvedScaleError(f"Mollifier scale {r:.4g} is under four cells of a grid with N={grid.N}.")

	rho_sq = sum(xi**2 for xi in grid.coordinates()) / r**2
	samples = _bump(rho_sq)
	samples /= samples.sum() * grid.cell_volume
	kernel = GridField(grid, samples)

	# Largest value of |d/dy exp(-1/(1-|y|^2))| over the unit ball, scaled by the normalization.
	radii = numpy.linspace(0, 1, 20001)[:-1]
	slope = float(numpy.max(numpy.abs(_bump_derivative_factor(radii**2) * radii))) if len(radii) else 0.0
	normalization = samples.max() / math.exp(-1)
	gradient_constant = slope * normalization * r**grid.d

	logger.debug("Mollifier r=%s on N=%d: gradient constant %.6g", r, grid.N, gradient_constant)
	return Mollifier(r, kernel, gradient_constant)


def _velocity_grid(operator: VelocityOperator, F: SpectralField) -> Velocity:
	return tuple(to_grid(component) for component in operator(F))


def mollified_velocity(theta: GridField, r: float, operator: VelocityOperator = riesz_perp_velocity) -> Velocity:
	"""
	Returns the mollified velocity :math:`u_r = R^\\perp (\\theta * \\chi_r)`.

	:param theta:
	:param r: The mollifier scale.
	:param operator: The velocity operator.
	"""

	mollifier = build_mollifier(theta.grid, r)
	return _velocity_grid(operator, to_spectral(theta).multiply(mollifier.symbol()))


def rough_velocity_error(theta: GridField, r: float, q: float = 2) -> float:
	"""
	Returns :math:`\\|u - u_r\\|_q`, the velocity discarded by mollifying at scale ``r``.

	:param theta:
	:param r:
	:param q:
	"""

	full = _velocity_grid(riesz_perp_velocity, to_spectral(theta))
	smooth = mollified_velocity(theta, r)
	magnitude = numpy.sqrt(sum((a.values - b.values)**2 for a, b in zip(full, smooth)))
	return GridField(theta.grid, magnitude).norm(q)


def _hermitian_part(coeffs: numpy.ndarray) -> numpy.ndarray:
	flipped = numpy.conj(numpy.roll(numpy.flip(coeffs), 1, axis=tuple(range(coeffs.ndim))))
	return (coeffs + flipped) / 2


def initial_condition(grid: TorusGrid, init: str, seed: int = 0, amplitude: float = 1.0) -> GridField:
	"""
	Returns an initial condition from one of the presets.

	* ``'random-mean-zero'``: modes with :math:`|n| \\leq 8` drawn from the seeded generator, mean removed.
	* ``'shear'``: :math:`\\sin x_2`.
	* ``'vortex-pair'``: Gaussians of opposite sign at :math:`x_1 = \\mp 1`, mean removed.
	* ``'cosine'``: :math:`\\cos x_1`.

	:param grid:
	:param init: The preset name.
	:param seed:
	:param amplitude: For ``'random-mean-zero'`` the :math:`L^\\infty` norm; otherwise a multiplier.

	:raises ValueError: If the preset is unknown.
	"""

	if init == "random-mean-zero":
		rng = numpy.random.default_rng(seed)
		n = grid.wavenumbers()
		band = (grid.wavenumber_norm() <= 8) & numpy.all([abs(ni) < grid.N // 2 for ni in n], axis=0)
		coeffs = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)) * band
		coeffs = _hermitian_part(coeffs)
		coeffs[(0, ) * grid.d] = 0
		theta = to_grid(SpectralField(grid, coeffs))
		peak = theta.norm(math.inf)
		return theta * (amplitude / peak) if peak > 0 else theta

	if init == "shear":
		if grid.d < 2:
			raise ValueError("The shear preset needs at least two dimensions.")
		return GridField.from_function(grid, lambda *x: amplitude * numpy.sin(x[1]))

	if init == "vortex-pair":

		def pair(*x):
			rest = sum(xi**2 for xi in x[1:])
			left = numpy.exp(-((x[0] + 1)**2 + rest) / (2 * 0.5**2))
			right = numpy.exp(-((x[0] - 1)**2 + rest) / (2 * 0.5**2))
			return left - right

		theta = GridField.from_function(grid, pair)
		return (theta - GridField(grid, numpy.full(grid.shape, theta.mean()))) * amplitude

	if init == "cosine":
		return GridField.from_function(grid, lambda *x: amplitude * numpy.cos(x[0]))

	raise ValueError(f"Unknown initial condition {init!r}; expected one of {', '.join(PRESETS)}.")


def dyadic_offsets(grid: TorusGrid) -> List[Tuple[int, ...]]:
	"""
	Returns offsets, in grid cells, along the axis and diagonal directions at dyadic lengths up to half the grid.

	Only one of each pair of opposite directions is included.

	:param grid:
	"""

	directions = [
			direction for direction in itertools.product((-1, 0, 1), repeat=grid.d)
			if any(direction) and next(c for c in direction if c) > 0
			]
	lengths = []
	k = 1
	while k <= grid.N // 2:
		lengths.append(k)
		k *= 2
	return [tuple(k * c for c in direction) for k in lengths for direction in directions]


def lipschitz_constant(f: GridField, offsets: Optional[Iterable[Sequence[int]]] = None) -> float:
	"""
	Estimate the Lipschitz constant of ``f`` as :math:`\\max |f(x + z) - f(x)| / |z|` over offsets :math:`z`.

	:param f:
	:param offsets: Offsets in grid cells. Defaults to the axis and diagonal directions
		at dyadic lengths up to half the grid.
	"""

	grid = f.grid
	if offsets is None:
		offsets = dyadic_offsets(grid)

	axes = tuple(range(grid.d))
	best = 0.0
	for offset in offsets:
		offset = tuple(int(c) for c in offset)
		if not any(offset):
			continue
		length = grid.spacing * math.sqrt(sum(c**2 for c in offset))
		shifted = numpy.roll(f.values, tuple(-c for c in offset), axis=axes)
		best = max(best, float(numpy.max(numpy.abs(shifted - f.values))) / length)
	return best


def _max_speed(u: Velocity) -> float:
	return max((float(numpy.max(numpy.abs(c.values))) for c in u), default=0.0)


def _check_divergence(u: Velocity, tau: float) -> None:
	scale = max(1.0, _max_speed(u))
	defect = float(numpy.max(numpy.abs(divergence(u).coeffs)))
	if defect > DIVERGENCE_TOLERANCE * scale:
		raise IntegrationError(f"Prescribed velocity is not divergence-free at t={tau:.6g} (defect {defect:.3g}).")


def _check_finite(coeffs: numpy.ndarray, tau: float, step: int) -> None:
	if not numpy.all(numpy.isfinite(coeffs)):
		raise IntegrationError(f"Non-finite values at step {step} (t={tau:.6g}); try a smaller dt.")


def _integrate(
		cfg: SolverConfig,
		start: GridField,
		t0: float,
		t1: float,
		velocity_of: Callable[[numpy.ndarray, float], Velocity],
		check_divergence: bool = False,
		supplier: Optional[VelocitySupplier] = None,
		schedule: Optional[Sequence[float]] = None,
		) -> Trajectory:
	grid = start.grid
	pending = sorted(tau for tau in (schedule or ()) if t0 < tau < t1)
	integrator = IntegratingFactorRK4(grid, cfg.alpha, cfg.epsilon, cfg.dissipation)
	h = grid.spacing

	def nonlinear(coeffs: numpy.ndarray, tau: float) -> numpy.ndarray:
		if not numpy.all(numpy.isfinite(coeffs)):
			raise IntegrationError(f"Non-finite values during a step at t={tau:.6g}; try a smaller dt.")
		theta = to_grid(SpectralField(grid, coeffs))
		return to_spectral(advection_term(velocity_of(coeffs, tau), theta)).coeffs

	times = [t0]
	dts: List[float] = []

	def replay(coeffs: numpy.ndarray, tau: float, dt: float) -> numpy.ndarray:
		return integrator.step(coeffs, tau, dt, nonlinear)

	coeffs = to_spectral(start).coeffs
	checkpoints = {0: coeffs}
	snapshots = [Snapshot(t0, start, 0)]
	tau, step = t0, 0
	end_tolerance = 1e-12 * max(1.0, abs(t1))

	while tau < t1 - end_tolerance:
		u = velocity_of(coeffs, tau)
		if check_divergence:
			_check_divergence(u, tau)

		dt = min(cfg.dt, DT_MAX)
		speed = _max_speed(u)
		if speed > 0:
			limit = cfg.cfl * h / speed
			if limit < DT_FLOOR:
				raise IntegrationError(
						f"CFL step {limit:.3g} fell below the floor {DT_FLOOR:g} at t={tau:.6g} (max |u| = {speed:.3g})."
						)
			if limit < dt:
				logger.debug("Step shortened to %.3g by the CFL condition at t=%.6g", limit, tau)
				dt = limit
		if schedule is not None:
			dt = (pending.pop(0) if pending else t1) - tau
		dt = min(dt, t1 - tau)

		coeffs = integrator.step(coeffs, tau, dt, nonlinear)
		step += 1
		tau = t1 if t1 - (tau + dt) <= end_tolerance else tau + dt
		_check_finite(coeffs, tau, step)

		times.append(tau)
		dts.append(dt)

		final = tau >= t1 - end_tolerance
		if step % cfg.snapshot_stride == 0 or final:
			checkpoints[step] = coeffs
			snapshots.append(Snapshot(tau, to_grid(SpectralField(grid, coeffs)), step, dt))
			logger.debug("Snapshot at t=%.6g (step %d)", tau, step)

	history = VelocityHistory(grid, times, dts, checkpoints, replay, velocity_of, supplier)
	logger.info("Integrated to t=%.6g in %d steps on N=%d", tau, step, grid.N)
	return Trajectory(cfg, tuple(snapshots), history)


def _check_start(cfg: SolverConfig, start: GridField) -> None:
	if start.grid != cfg.grid:
		raise GridMismatchError(f"Initial field is on {start.grid}, but the configuration asks for {cfg.grid}.")


def simulate_forward(
		cfg: SolverConfig,
		theta0: GridField,
		*,
		velocity: Optional[VelocitySupplier] = None,
		velocity_operator: VelocityOperator = riesz_perp_velocity,
		) -> Trajectory:
	"""
	Integrate the forward equation from ``theta0`` over :math:`[0, t_{end}]`.

	:param cfg:
	:param theta0:
	:param velocity: The prescribed velocity, required when ``cfg.velocity_mode`` is ``'prescribed'``.
	:param velocity_operator: Maps :math:`\\hat\\theta` to the velocity in the ``'riesz_perp'``
		and ``'mollified'`` modes. Must return a divergence-free field.

	:raises ValueError: If the velocity mode needs a dimension or a supplier that is missing.
	:raises IntegrationError: If the run breaks down.
	"""

	_check_start(cfg, theta0)
	grid = theta0.grid

	if cfg.velocity_mode == "prescribed":
		if velocity is None:
			raise ValueError("The prescribed velocity mode needs a velocity supplier.")
		return _integrate(cfg, theta0, 0.0, cfg.t_end, lambda c, tau: velocity(tau), True, velocity)

	if velocity_operator is riesz_perp_velocity and grid.d != 2:
		raise ValueError("The Riesz-perp velocity is only defined in two dimensions.")

	if cfg.velocity_mode == "mollified":
		symbol = build_mollifier(grid, cfg.mollifier_r).symbol()  # type: ignore[arg-type]
	else:
		symbol = None

	def velocity_of(coeffs: numpy.ndarray, tau: float) -> Velocity:
		F = SpectralField(grid, coeffs if symbol is None else coeffs * symbol)
		return _velocity_grid(velocity_operator, F)

	logger.info(
			"Forward run: alpha=%s epsilon=%s N=%d dt=%s t_end=%s velocity=%s",
			cfg.alpha,
			cfg.epsilon,
			cfg.N,
			cfg.dt,
			cfg.t_end,
			cfg.velocity_mode,
			)
	return _integrate(cfg, theta0, 0.0, cfg.t_end, velocity_of)


def simulate_passive(
		cfg: SolverConfig,
		velocity: VelocitySupplier,
		f0: GridField,
		interval: Tuple[float, float],
		times: Optional[Sequence[float]] = None,
		) -> Trajectory:
	"""
	Integrate the passive-scalar equation :math:`f_\\tau = (v \\cdot \\nabla) f - (-\\Delta)^{\\alpha/2} f` over ``interval``.

	:param cfg: Supplies the dissipation, time step and snapshot settings.
	:param velocity: The prescribed velocity :math:`v(\\tau)`.
	:param f0: The state at the start of the interval.
	:param interval: The start and end times.
	:param times: Step boundaries to follow exactly instead of choosing steps from ``cfg.dt`` and the CFL condition.

	:raises IntegrationError: If the velocity fails the divergence check or the run breaks down.
	"""

	_check_start(cfg, f0)
	t0, t1 = interval
	if t1 < t0:
		raise ValueError(f"Interval end {t1!r} precedes its start {t0!r}.")
	return _integrate(cfg, f0, t0, t1, lambda c, tau: velocity(tau), True, velocity, times)


def dual_path(traj: Trajectory, psi_t: GridField, t: float, s: float) -> List[Tuple[float, GridField]]:
	"""
	Solve the backward dual equation from terminal data at ``t`` down to ``t - s``, keeping every step.

	With :math:`\\sigma = t - \\tau` the equation becomes
	:math:`\\partial_\\sigma \\psi = -(u(t - \\sigma) \\cdot \\nabla) \\psi - (-\\Delta)^{\\alpha/2} \\psi + \\varepsilon \\Delta \\psi`.
	Steps follow the forward run's step boundaries.

	:param traj:
	:param psi_t:
	:param t:
	:param s:

	:returns: Pairs of time :math:`\\tau` and :math:`\\psi(\\cdot, \\tau)`, from ``t`` downwards.

	:raises CoverageError: If :math:`[t - s, t]` is not covered by the velocity history.
	"""

	if s < 0:
		raise ValueError(f"The duration s must be non-negative, not {s!r}.")

	history = traj.history
	if psi_t.grid != history.grid:
		raise GridMismatchError(f"Terminal data is on {psi_t.grid}, trajectory on {history.grid}.")
	if s == 0:
		return [(t, psi_t)]
	if not history.covers(t - s, t):
		raise CoverageError(f"Interval [{t - s}, {t}] is not covered by the velocity history [{history.start}, {history.end}].")

	cfg = traj.config
	grid = psi_t.grid
	integrator = IntegratingFactorRK4(grid, cfg.alpha, cfg.epsilon, cfg.dissipation)

	def nonlinear(coeffs: numpy.ndarray, sigma: float) -> numpy.ndarray:
		if not numpy.all(numpy.isfinite(coeffs)):
			raise IntegrationError(f"Non-finite values in the dual solve at t={t - sigma:.6g}.")
		psi = to_grid(SpectralField(grid, coeffs))
		return -to_spectral(advection_term(history.velocity(t - sigma), psi)).coeffs

	tol = 1e-12 * max(1.0, abs(t))
	nodes = [t] + [tau for tau in reversed(history.times) if t - s + tol < tau < t - tol] + [t - s]

	coeffs = to_spectral(psi_t).coeffs
	path = [(t, psi_t)]
	for k, (upper, lower) in enumerate(zip(nodes, nodes[1:]), start=1):
		coeffs = integrator.step(coeffs, t - upper, upper - lower, nonlinear)
		_check_finite(coeffs, lower, k)
		path.append((lower, to_grid(SpectralField(grid, coeffs))))

	logger.debug("Dual solve from t=%.6g over s=%.6g in %d steps", t, s, len(nodes) - 1)
	return path


def simulate_dual_backward(traj: Trajectory, psi_t: GridField, t: float, s: float) -> GridField:
	"""
	Returns :math:`\\psi(\\cdot, t - s)`, the solution of the backward dual equation with terminal data ``psi_t``.

	:param traj: The forward run supplying the velocity.
	:param psi_t: The terminal data.
	:param t: The terminal time.
	:param s: The duration, with :math:`[t - s, t]` inside the run.

	:raises CoverageError: If the interval is not covered.
	"""

	return dual_path(traj, psi_t, t, s)[-1][1]


def viscosity_sweep(cfg: SolverConfig, theta0: GridField, eps_values: Iterable[float]) -> Dict[float, float]:
	"""
	Run the forward equation for each viscosity and return the final :math:`L^2` norms.

	:param cfg: The configuration, whose ``epsilon`` is replaced.
	:param theta0:
	:param eps_values:
	"""

	results = {}
	for epsilon in eps_values:
		run_cfg = dataclasses.replace(cfg, epsilon=epsilon)
		results[epsilon] = simulate_forward(run_cfg, theta0).final.theta.norm(2)
		logger.info("epsilon=%s: final L2 norm %.12g", epsilon, results[epsilon])
	return results
