#!/usr/bin/env python3
#
#  membership.py
"""
The class :math:`U(r)` of mean-zero test functions, its membership checks and canonical members.

A function :math:`\\psi` belongs to :math:`U(r)` when

* :math:`\\int |\\psi|^p \\, dx \\leq A r^{-(p-1)d}` (the size condition), and
* :math:`|\\int f \\psi \\, dx| \\leq r` for every 1-Lipschitz :math:`f` (the pairing condition).

The supremum in the pairing condition is a Kantorovich-Rubinstein dual norm. It is bracketed
from above by a discrete transport flux and from below by explicit Lipschitz functions,
and computed exactly by a transport linear program on small grids.
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
import enum
import itertools
import logging
import math
from typing import Iterator, Optional, Sequence, Tuple

# 3rd party
import numpy
import scipy.optimize
import scipy.sparse

# this package
from sqglab import UnresolvedScaleError
from sqglab.spectral import GridField, LittlewoodPaleyFamily, SpectralField, TorusGrid, _check_grids, to_grid

__all__ = [
		"ClassParams",
		"Verdict",
		"MembershipReport",
		"pair",
		"check_size",
		"lip_dual_upper",
		"lip_dual_lower",
		"lip_dual_exact_small",
		"lipschitz_envelope_constant",
		"check_membership",
		"class_constant",
		"make_bump",
		"make_lp_kernel",
		"calibrate_lp_constant",
		"ball_mask",
		"mean_zero_witness",
		"local_oscillation",
		]

logger = logging.getLogger(__name__)

#: Tolerance on :math:`|\text{mean}(\psi)|`, relative to :math:`\max |\psi|`, for mean-zero preconditions.
MEAN_ZERO_TOLERANCE = 1e-10

#: The largest number of cells :func:`~.lip_dual_exact_small` accepts.
EXACT_MAX_CELLS = 256

#: The largest number of cells :func:`~.lip_dual_lower` accepts. Each sweep compares every pair of cells.
LOWER_MAX_CELLS = 4096


@dataclasses.dataclass(frozen=True)
class ClassParams:
	"""
	The parameters defining :math:`U(r)`.

	:param A: The size constant, greater than 1.
	:param p: The integrability exponent, greater than 1.
	:param d: The spatial dimension.
	"""

	A: float
	p: float
	d: int = 2

	def __post_init__(self):
		if not self.A > 1:
			raise ValueError(f"A must be greater than 1, not {self.A!r}.")
		if not self.p > 1:
			raise ValueError(f"p must be greater than 1, not {self.p!r}.")

	@property
	def q(self) -> float:
		"""
		The conjugate exponent :math:`p / (p - 1)`.
		"""

		return self.p / (self.p - 1)

	def size_bound(self, r: float) -> float:
		"""
		Returns :math:`A r^{-(p-1)d}`.
		"""

		return self.A * r**(-(self.p - 1) * self.d)


class Verdict(str, enum.Enum):
	"""
	Outcome of a membership check.
	"""

	member = "member"
	nonmember = "nonmember"
	undecided = "undecided"


@dataclasses.dataclass(frozen=True)
class MembershipReport:
	"""
	The evidence behind a :func:`~.check_membership` verdict.

	``lip_lower`` is 0 when the upper bound already decides the pairing condition.
	"""

	r: float
	size_lhs: float
	size_rhs: float
	lip_upper: float
	lip_lower: float
	verdict: Verdict

	@property
	def size_margin(self) -> float:
		return self.size_rhs - self.size_lhs

	@property
	def pairing_margin(self) -> float:
		return self.r - self.lip_upper


def pair(g: GridField, psi: GridField) -> float:
	"""
	Returns :math:`\\langle g, \\psi \\rangle = \\int g \\psi \\, dx`, by quadrature.

	:param g:
	:param psi:

	:raises GridMismatchError: If the fields are on different grids.
	"""

	grid = _check_grids(g, psi)
	return float(numpy.sum(g.values * psi.values) * grid.cell_volume)


def check_size(psi: GridField, r: float, params: ClassParams) -> Tuple[bool, float]:
	"""
	Check the size condition :math:`\\int |\\psi|^p \\leq A r^{-(p-1)d}`.

	:param psi:
	:param r: The scale, in :math:`(0, 1]`.
	:param params:

	:returns: Whether the condition holds, and the margin (bound minus integral).
	"""

	_check_scale(r)
	lhs = float(numpy.sum(numpy.abs(psi.values)**params.p) * psi.grid.cell_volume)
	margin = params.size_bound(r) - lhs
	return margin >= 0, margin


def _check_scale(r: float) -> None:
	if not 0 < r <= 1:
		raise ValueError(f"The scale r must be in (0, 1], not {r!r}.")


def _is_mean_zero(psi: GridField) -> bool:
	scale = max(1.0, float(numpy.max(numpy.abs(psi.values))))
	return abs(psi.mean()) < MEAN_ZERO_TOLERANCE * scale


def _require_mean_zero(psi: GridField) -> None:
	if not _is_mean_zero(psi):
		raise ValueError(f"The test function must have mean zero (mean is {psi.mean():.3g}).")


def _offset_indices(grid: TorusGrid) -> Iterator[Tuple[int, ...]]:
	return itertools.product(range(grid.N), repeat=grid.d)


def _offset_lengths(grid: TorusGrid) -> numpy.ndarray:
	return numpy.sqrt(sum(z**2 for z in grid.offsets()))


def lip_dual_upper(psi: GridField) -> float:
	"""
	Upper bound for :math:`\\sup \\{ |\\langle f, \\psi \\rangle| : f \\in \\mathrm{Lip}(1) \\}`.

	A flux :math:`V` on the grid edges with discrete divergence :math:`-\\psi` is found by a discrete Poisson solve.
	Summation by parts bounds every pairing with a 1-Lipschitz function by :math:`\\sum |V| h^d`,
	which approximates :math:`\\| \\nabla (-\\Delta)^{-1} \\psi \\|_{L^1}`.

	:param psi: A mean-zero field.

	:raises ValueError: If ``psi`` does not have mean zero.
	"""

	_require_mean_zero(psi)
	grid = psi.grid
	h = grid.spacing

	eigenvalues = sum((4 / h**2) * numpy.sin(n * h / 2)**2 for n in grid.wavenumbers())
	transformed = numpy.fft.fftn(psi.values - psi.mean())
	with numpy.errstate(divide="ignore", invalid="ignore"):
		potential = numpy.where(eigenvalues > 0, transformed / eigenvalues, 0)
	potential = numpy.fft.ifftn(potential).real

	total = 0.0
	for axis in range(grid.d):
		flux = (numpy.roll(potential, -1, axis=axis) - potential) / h
		total += float(numpy.sum(numpy.abs(flux)))

	return total * grid.cell_volume


def lipschitz_envelope_constant(values: numpy.ndarray, grid: TorusGrid) -> float:
	"""
	Returns the Lipschitz constant of grid values over all pairs of points, with periodic distance.

	:param values:
	:param grid:

	:raises ValueError: If the grid has more than :data:`~.LOWER_MAX_CELLS` cells.
	"""

	if grid.size > LOWER_MAX_CELLS:
		raise ValueError(f"Grid too large for an all-pairs Lipschitz constant ({grid.size} > {LOWER_MAX_CELLS} cells).")

	lengths = _offset_lengths(grid)
	axes = tuple(range(grid.d))
	best = 0.0
	for index in _offset_indices(grid):
		if not any(index):
			continue
		shifted = numpy.roll(values, tuple(-i for i in index), axis=axes)
		best = max(best, float(numpy.max(numpy.abs(shifted - values))) / lengths[index])
	return best


def _envelopes(values: numpy.ndarray, grid: TorusGrid) -> Tuple[numpy.ndarray, numpy.ndarray]:
	# Largest and smallest values each point could take with every other point held fixed.
	lengths = _offset_lengths(grid)
	axes = tuple(range(grid.d))
	upper = numpy.full(grid.shape, numpy.inf)
	lower = numpy.full(grid.shape, -numpy.inf)
	for index in _offset_indices(grid):
		if not any(index):
			continue
		shifted = numpy.roll(values, tuple(-i for i in index), axis=axes)
		numpy.minimum(upper, shifted + lengths[index], out=upper)
		numpy.maximum(lower, shifted - lengths[index], out=lower)
	return upper, lower


def _shrink_to_lipschitz(values: numpy.ndarray, grid: TorusGrid) -> numpy.ndarray:
	constant = lipschitz_envelope_constant(values, grid)
	if constant <= 1:
		return values
	mean = values.mean()
	return mean + (values - mean) / constant


def _ascend(psi: numpy.ndarray, grid: TorusGrid, iterations: int) -> float:
	h = grid.spacing
	eigenvalues = sum((4 / h**2) * numpy.sin(n * h / 2)**2 for n in grid.wavenumbers())
	with numpy.errstate(divide="ignore", invalid="ignore"):
		start = numpy.where(eigenvalues > 0, numpy.fft.fftn(psi) / eigenvalues, 0)
	f = numpy.fft.ifftn(start).real

	constant = lipschitz_envelope_constant(f, grid)
	f = f / constant if constant > 0 else numpy.zeros(grid.shape)

	best = float(numpy.sum(f * psi))
	for _ in range(iterations):
		upper, _ = _envelopes(f, grid)
		f = numpy.where(psi > 0, numpy.maximum(f, upper), f)
		_, lower = _envelopes(f, grid)
		f = numpy.where(psi < 0, numpy.minimum(f, lower), f)
		f = _shrink_to_lipschitz(f, grid)

		value = float(numpy.sum(f * psi))
		if value <= best * (1 + 1e-12):
			best = max(best, value)
			break
		best = value

	return best * grid.cell_volume


def lip_dual_lower(psi: GridField, iterations: int = 50) -> float:
	"""
	Lower bound for :math:`\\sup \\{ |\\langle f, \\psi \\rangle| : f \\in \\mathrm{Lip}(1) \\}`.

	Starting from the normalized transport potential, grid values of :math:`f` are raised where :math:`\\psi > 0`
	and lowered where :math:`\\psi < 0` as far as the Lipschitz constraint allows, then shrunk towards their mean
	if the constraint is violated. Every iterate is 1-Lipschitz over all pairs of grid points.

	:param psi: A mean-zero field.
	:param iterations: The maximum number of sweeps.

	:raises ValueError: If ``psi`` does not have mean zero or the grid has more than :data:`~.LOWER_MAX_CELLS` cells.
	"""

	if psi.grid.size > LOWER_MAX_CELLS:
		raise ValueError(f"Grid too large for the envelope lower bound ({psi.grid.size} > {LOWER_MAX_CELLS} cells).")
	_require_mean_zero(psi)
	values = psi.values - psi.mean()
	# Running both signs makes the bound symmetric under psi -> -psi.
	return max(0.0, _ascend(values, psi.grid, iterations), _ascend(-values, psi.grid, iterations))


def lip_dual_exact_small(psi: GridField) -> float:
	"""
	The exact pairing supremum, as the optimal transport cost between :math:`\\psi^+` and :math:`\\psi^-`.

	The transport plan is found by linear programming, with the periodic Euclidean distance between grid points as the cost.

	:param psi: A mean-zero field on a grid of at most 256 cells.

	:raises ValueError: If ``psi`` does not have mean zero or the grid is too large.
	"""

	grid = psi.grid
	if grid.size > EXACT_MAX_CELLS:
		raise ValueError(f"Grid too large for the exact transport solver ({grid.size} > {EXACT_MAX_CELLS} cells).")
	_require_mean_zero(psi)

	masses = ((psi.values - psi.mean()) * grid.cell_volume).ravel()
	sources = numpy.flatnonzero(masses > 0)
	sinks = numpy.flatnonzero(masses < 0)
	if not len(sources) or not len(sinks):
		return 0.0

	points = numpy.stack([x.ravel() for x in grid.coordinates()], axis=-1)
	delta = points[sources][:, None, :] - points[sinks][None, :, :]
	delta = (delta + math.pi) % (2 * math.pi) - math.pi
	cost = numpy.sqrt(numpy.sum(delta**2, axis=-1))

	n_src, n_snk = len(sources), len(sinks)
	rows = numpy.concatenate([
			numpy.repeat(numpy.arange(n_src), n_snk),
			n_src + numpy.tile(numpy.arange(n_snk), n_src),
			])
	columns = numpy.concatenate([numpy.arange(n_src * n_snk)] * 2)
	A_eq = scipy.sparse.csc_matrix((numpy.ones(len(rows)), (rows, columns)), shape=(n_src + n_snk, n_src * n_snk))
	b_eq = numpy.concatenate([masses[sources], -masses[sinks]])

	result = scipy.optimize.linprog(
			cost.ravel(),
			A_eq=A_eq,
			b_eq=b_eq,
			bounds=(0, None),
			method="highs",
			options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
			)
	if result.status != 0:
		raise RuntimeError(f"Transport linear program failed: {result.message}")

	return float(result.fun)


def check_membership(
		psi: GridField,
		r: float,
		params: ClassParams,
		*,
		iterations: int = 50,
		) -> MembershipReport:
	"""
	Decide whether ``psi`` belongs to :math:`U(r)`.

	The verdict is ``member`` when the size condition holds and the upper pairing bound is at most ``r``;
	``nonmember`` when the size condition fails or the lower pairing bound exceeds ``r``; otherwise ``undecided``.
	A field without mean zero pairs unboundedly with constants, so it is never a member.
	On grids over :data:`~.LOWER_MAX_CELLS` cells the lower bound is not computed, so an indecisive upper bound gives ``undecided``.

	:param psi:
	:param r: The scale, in :math:`(0, 1]`.
	:param params:
	:param iterations: Sweeps for :func:`~.lip_dual_lower`, when it is needed.
	"""

	size_ok, _ = check_size(psi, r, params)
	size_lhs = float(numpy.sum(numpy.abs(psi.values)**params.p) * psi.grid.cell_volume)
	size_rhs = params.size_bound(r)

	if not _is_mean_zero(psi):
		upper = lower = math.inf
	else:
		upper = lip_dual_upper(psi)
		lower = 0.0
		if size_ok and upper > r:
			if psi.grid.size <= LOWER_MAX_CELLS:
				lower = lip_dual_lower(psi, iterations)
			else:
				logger.debug("Skipping the envelope lower bound on %d cells", psi.grid.size)

	if size_ok and upper <= r:
		verdict = Verdict.member
	elif not size_ok or lower > r:
		verdict = Verdict.nonmember
	else:
		verdict = Verdict.undecided

	report = MembershipReport(r, size_lhs, size_rhs, upper, lower, verdict)
	logger.debug("Membership at r=%s: %s", r, report)
	return report


def class_constant(psi: GridField, r: float, params: ClassParams, margin: float = 1.01) -> float:
	"""
	Returns a constant :math:`C` for which :math:`\\psi / C` is decisively in :math:`U(r)`.

	:param psi: A mean-zero field.
	:param r:
	:param params:
	:param margin: Factor applied to the smallest admissible constant.
	"""

	size_lhs = float(numpy.sum(numpy.abs(psi.values)**params.p) * psi.grid.cell_volume)
	by_size = (size_lhs / params.size_bound(r))**(1 / params.p)
	by_pairing = lip_dual_upper(psi) / r
	return margin * max(by_size, by_pairing)


def _require_resolved(grid: TorusGrid, r: float, cells: int = 4) -> None:
	if r < cells * grid.spacing:
		raise UnresolvedScaleError(
				f"Scale {r:.4g} is unresolved on a grid of {grid.N} points (needs at least {cells} cells)."
				)


def make_bump(grid: TorusGrid, r: float, params: ClassParams) -> GridField:
	"""
	Returns a dipole bump supported in the ball :math:`B_r` about the origin.

	A positive bump and a negative bump of radius :math:`r/4` sit at :math:`\\mp r/4` along :math:`x_1`.
	The result has mean zero and :math:`\\|\\phi\\|_p = 0.9 r^{-d/q}`.

	:param grid:
	:param r: The scale, in :math:`(0, 1]`.
	:param params:

	:raises UnresolvedScaleError: If ``r`` is under four grid cells.
	"""

	_check_scale(r)
	_require_resolved(grid, r)

	radius = r / 4
	x = grid.coordinates()

	def bump(offset: float) -> numpy.ndarray:
		rho_sq = ((x[0] - offset)**2 + sum(xi**2 for xi in x[1:])) / radius**2
		with numpy.errstate(divide="ignore", over="ignore"):
			return numpy.where(rho_sq < 1, numpy.exp(-1 / (1 - numpy.minimum(rho_sq, 1 - 1e-300))), 0.0)

	values = bump(-radius) - bump(radius)
	field = GridField(grid, values)
	target = 0.9 * r**(-params.d / params.q)
	return field * (target / field.norm(params.p))


def make_lp_kernel(fam: LittlewoodPaleyFamily, j: int, c: Optional[float] = None) -> GridField:
	"""
	Returns the periodized Littlewood-Paley kernel :math:`\\Phi_j`, centred at the origin.

	Its Fourier coefficients are :math:`c (2\\pi)^{-d} \\varphi_j(n)`, with the mean mode removed,
	so that :math:`\\langle g, \\Phi_j(\\cdot - y) \\rangle = c \\Delta_j g(y)`.

	:param fam:
	:param j: The block index.
	:param c: The scaling constant. Defaults to the family's calibrated constant.

	:raises ValueError: If ``j`` is out of range or no constant is available.
	"""

	if c is None:
		c = fam.c
	if c is None:
		raise ValueError("No kernel constant given and the family has not been calibrated.")

	grid = fam.grid
	return to_grid(SpectralField(grid, c * fam.block_multiplier(j) / grid.volume))


def calibrate_lp_constant(fam: LittlewoodPaleyFamily, params: ClassParams, max_power: int = 60) -> LittlewoodPaleyFamily:
	"""
	Returns ``fam`` with its kernel constant set to the largest :math:`2^{-m}` making every :math:`\\Phi_j` a member of :math:`U(2^{-j})`.

	:param fam:
	:param params:
	:param max_power: The largest :math:`m` tried.
	"""

	admissible = math.inf
	for j in range(fam.j_max + 1):
		r = fam.scale(j)
		unit = make_lp_kernel(fam, j, 1.0)
		size_lhs = float(numpy.sum(numpy.abs(unit.values)**params.p) * unit.grid.cell_volume)
		admissible = min(admissible, (params.size_bound(r) / size_lhs)**(1 / params.p))
		admissible = min(admissible, r / lip_dual_upper(unit))

	for m in range(max_power + 1):
		c = 2.0**-m
		if c < admissible:
			logger.info("Calibrated Littlewood-Paley kernel constant c = 2^-%d for N=%d", m, fam.grid.N)
			return dataclasses.replace(fam, c=c)

	raise ValueError(f"No kernel constant above 2^-{max_power} satisfies the membership conditions.")


def ball_mask(grid: TorusGrid, rho: float, center: Sequence[float]) -> numpy.ndarray:
	"""
	Returns a boolean mask of the grid points within periodic distance ``rho`` of ``center``.

	:param grid:
	:param rho:
	:param center: One coordinate per axis.
	"""

	distance_sq = numpy.zeros(grid.shape)
	for x, c in zip(grid.coordinates(), center):
		delta = (x - c + math.pi) % (2 * math.pi) - math.pi
		distance_sq = distance_sq + delta**2
	return distance_sq <= rho**2


def _witness_offset(theta: GridField, rho: float, center: Sequence[float], q: float) -> Tuple[numpy.ndarray, float]:
	grid = theta.grid
	_require_resolved(grid, rho, cells=2)

	mask = ball_mask(grid, rho, center)
	values = theta.values[mask]
	low, high = float(values.min()), float(values.max())
	scale = max(1.0, abs(low), abs(high))
	if high - low <= 1e-14 * scale:
		raise ValueError("θ is constant on the ball, so the mean-zero witness is degenerate.")

	def signed_power_sum(c: float) -> float:
		shifted = values - c
		return float(numpy.sum(numpy.sign(shifted) * numpy.abs(shifted)**(q - 1)))

	c = scipy.optimize.bisect(signed_power_sum, low, high, xtol=1e-12 * scale, maxiter=200)
	return mask, c


def local_oscillation(theta: GridField, rho: float, center: Sequence[float], q: float) -> float:
	"""
	Returns :math:`\\|(\\theta - c) \\mathbb{1}_{B_\\rho}\\|_q`, with :math:`c` the centre of :func:`~.mean_zero_witness`.

	:param theta:
	:param rho:
	:param center:
	:param q:
	"""

	mask, c = _witness_offset(theta, rho, center, q)
	shifted = theta.values[mask] - c
	return float((numpy.sum(numpy.abs(shifted)**q) * theta.grid.cell_volume)**(1 / q))


def mean_zero_witness(theta: GridField, rho: float, center: Sequence[float], q: float) -> Tuple[float, GridField]:
	"""
	Construct the test function which realizes the local :math:`L^q` oscillation of ``theta`` on a ball.

	The level :math:`c` is found by bisection so that :math:`\\mathrm{sgn}(\\theta - c) |\\theta - c|^{q-1}` has mean zero on :math:`B_\\rho`.
	The witness is that function on the ball, scaled by :math:`\\lambda = \\rho^{-d/q} \\|(\\theta - c) \\mathbb{1}_{B_\\rho}\\|_q^{-q/p}`, so that

	.. math::

		\\rho^{d/q} \\langle \\theta, \\psi \\rangle = \\|(\\theta - c) \\mathbb{1}_{B_\\rho}\\|_q
		\\quad \\text{and} \\quad
		\\|\\psi\\|_p^p = \\rho^{-(p-1)d}.

	:param theta:
	:param rho: The ball radius.
	:param center: The ball centre, one coordinate per axis.
	:param q: The exponent, greater than 1.

	:raises ValueError: If ``theta`` is constant on the ball.
	:raises UnresolvedScaleError: If the ball is under two grid cells in radius.

	:returns: The level :math:`c` and the witness :math:`\\psi`.
	"""

	if not q > 1:
		raise ValueError(f"q must be greater than 1, not {q!r}.")

	grid = theta.grid
	p = q / (q - 1)
	mask, c = _witness_offset(theta, rho, center, q)

	shifted = theta.values[mask] - c
	oscillation = float((numpy.sum(numpy.abs(shifted)**q) * grid.cell_volume)**(1 / q))
	scale = rho**(-grid.d / q) * oscillation**(-q / p)

	values = numpy.zeros(grid.shape)
	values[mask] = scale * numpy.sign(shifted) * numpy.abs(shifted)**(q - 1)
	return c, GridField(grid, values)
