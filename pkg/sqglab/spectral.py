#!/usr/bin/env python3
#
#  spectral.py
"""
Fourier analysis on the periodic torus.

Fields live either on a uniform grid (:class:`~.GridField`) or as Fourier coefficients
(:class:`~.SpectralField`). Coefficients are normalized so that ``coeffs[n]`` approximates

.. math::

	(2\\pi)^{-d} \\int f(x) e^{-i n \\cdot x} \\, dx

with the grid identified with :math:`[-\\pi, \\pi)^d`.
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
import functools
import itertools
import logging
import math
import os
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

# 3rd party
import numpy
import scipy.fft
import scipy.integrate
import scipy.special

# this package
from sqglab import GridMismatchError, SymmetryError

__all__ = [
		"TorusGrid",
		"GridField",
		"SpectralField",
		"LittlewoodPaleyFamily",
		"Velocity",
		"to_spectral",
		"to_grid",
		"riesz",
		"riesz_perp_velocity",
		"fractional_laplacian",
		"spectral_gradient",
		"divergence",
		"dealias",
		"advection_term",
		"subtract_mean",
		"fractional_laplacian_kernel_oracle",
		"oracle_ratios",
		"build_lp_family",
		"lp_project",
		]

logger = logging.getLogger(__name__)

#: Relative tolerance on the imaginary residue discarded by :func:`~.to_grid`.
SYMMETRY_TOLERANCE = 1e-10


def fft_workers() -> int:
	"""
	Returns the number of workers used for FFTs, taken from the ``SQGLAB_THREADS`` environment variable.
	"""

	try:
		return max(1, int(os.environ.get("SQGLAB_THREADS", 1)))
	except ValueError:
		return 1


@dataclass(frozen=True)
class TorusGrid:
	"""
	A uniform grid on the torus :math:`[-\\pi, \\pi)^d`.

	:param N: The number of points per dimension. Must be a power of two, at least 8.
	:param d: The spatial dimension.
	"""

	N: int
	d: int = 2

	def __post_init__(self):
		if self.d not in {1, 2, 3}:
			raise ValueError(f"Unsupported dimension {self.d!r}; expected 1, 2 or 3.")
		if self.N < 8 or self.N & (self.N - 1):
			raise ValueError(f"Grid size must be a power of two no smaller than 8, not {self.N!r}.")

	@property
	def spacing(self) -> float:
		"""
		The distance between neighbouring grid points, :math:`2\\pi / N`.
		"""

		return 2 * math.pi / self.N

	@property
	def shape(self) -> Tuple[int, ...]:
		return (self.N, ) * self.d

	@property
	def size(self) -> int:
		"""
		The total number of grid points, :math:`N^d`.
		"""

		return self.N**self.d

	@property
	def cell_volume(self) -> float:
		return self.spacing**self.d

	@property
	def volume(self) -> float:
		"""
		The volume of the torus, :math:`(2\\pi)^d`.
		"""

		return (2 * math.pi)**self.d

	def coordinates(self) -> Tuple[numpy.ndarray, ...]:
		"""
		Returns the coordinates of the grid points, one array per axis.

		Axis ``i`` of each array corresponds to :math:`x_{i+1}`.
		"""

		return _coordinates(self)

	def wavenumbers(self) -> Tuple[numpy.ndarray, ...]:
		"""
		Returns the integer wavenumbers of each Fourier mode, in FFT ordering.
		"""

		return _wavenumbers(self)

	def wavenumber_norm(self) -> numpy.ndarray:
		"""
		Returns :math:`|n|` for each Fourier mode.
		"""

		return _wavenumber_norm(self)

	def offsets(self) -> Tuple[numpy.ndarray, ...]:
		"""
		Returns the displacement vectors between grid points, in FFT ordering.
		"""

		return tuple(n * self.spacing for n in self.wavenumbers())


def _frozen(array: numpy.ndarray) -> numpy.ndarray:
	array.flags.writeable = False
	return array


@functools.lru_cache(maxsize=None)
def _coordinates(grid: TorusGrid) -> Tuple[numpy.ndarray, ...]:
	axis = -math.pi + numpy.arange(grid.N) * grid.spacing
	return tuple(_frozen(x) for x in numpy.meshgrid(*([axis] * grid.d), indexing="ij"))


@functools.lru_cache(maxsize=None)
def _wavenumbers(grid: TorusGrid) -> Tuple[numpy.ndarray, ...]:
	axis = numpy.fft.fftfreq(grid.N, 1 / grid.N)
	return tuple(_frozen(n) for n in numpy.meshgrid(*([axis] * grid.d), indexing="ij"))


@functools.lru_cache(maxsize=None)
def _odd_wavenumbers(grid: TorusGrid) -> Tuple[numpy.ndarray, ...]:
	# The Nyquist mode is its own conjugate partner, so odd multipliers vanish there.
	out = []
	for n in _wavenumbers(grid):
		n = n.copy()
		n[n == -grid.N // 2] = 0
		out.append(_frozen(n))
	return tuple(out)


@functools.lru_cache(maxsize=None)
def _wavenumber_norm(grid: TorusGrid) -> numpy.ndarray:
	return _frozen(numpy.sqrt(sum(n**2 for n in _wavenumbers(grid))))


@functools.lru_cache(maxsize=None)
def _phase(grid: TorusGrid) -> numpy.ndarray:
	# Shifts the FFT origin from the first grid point (-pi) to x = 0.
	return _frozen((-1.0)**sum(_wavenumbers(grid)))


@functools.lru_cache(maxsize=None)
def _dealias_mask(grid: TorusGrid) -> numpy.ndarray:
	cutoff = grid.N / 3
	mask = numpy.ones(grid.shape, dtype=bool)
	for n in _wavenumbers(grid):
		mask &= numpy.abs(n) <= cutoff
	return _frozen(mask)


def _check_grids(*fields) -> TorusGrid:
	grid = fields[0].grid
	for field in fields[1:]:
		if field.grid != grid:
			raise GridMismatchError(f"Fields are on different grids ({grid} and {field.grid}).")
	return grid


@dataclass(frozen=True, eq=False)
class GridField:
	"""
	Real values of a periodic field at the points of a :class:`~.TorusGrid`.

	:param grid:
	:param values: Array of shape ``grid.shape``.

	:raises ValueError: If the values are not finite or have the wrong shape.
	"""

	grid: TorusGrid
	values: numpy.ndarray

	def __post_init__(self):
		values = numpy.asarray(self.values, dtype=numpy.float64)
		if values.shape != self.grid.shape:
			raise ValueError(f"Expected values of shape {self.grid.shape}, got {values.shape}.")
		if not numpy.all(numpy.isfinite(values)):
			raise ValueError("Field values must be finite.")
		object.__setattr__(self, "values", values)

	@classmethod
	def from_function(cls, grid: TorusGrid, function: Callable[..., numpy.ndarray]) -> "GridField":
		"""
		Sample ``function`` at the grid points.

		:param grid:
		:param function: Called with one coordinate array per axis.
		"""

		values = numpy.broadcast_to(function(*grid.coordinates()), grid.shape)
		return cls(grid, numpy.array(values, dtype=numpy.float64))

	@classmethod
	def zeros(cls, grid: TorusGrid) -> "GridField":
		return cls(grid, numpy.zeros(grid.shape))

	def with_values(self, values: numpy.ndarray) -> "GridField":
		"""
		Returns a new field on the same grid.
		"""

		return GridField(self.grid, values)

	def integral(self) -> float:
		"""
		Rectangle-rule quadrature of the field over the torus.
		"""

		return float(numpy.sum(self.values) * self.grid.cell_volume)

	def mean(self) -> float:
		"""
		The quadrature mean, :math:`(2\\pi)^{-d} \\int f \\, dx`.
		"""

		return float(numpy.mean(self.values))

	def norm(self, p: float = 2) -> float:
		"""
		The :math:`L^p(\\mathbb{T}^d)` norm, by quadrature.

		:param p: The exponent. May be :py:obj:`math.inf`.
		"""

		if math.isinf(p):
			return float(numpy.max(numpy.abs(self.values))) if self.values.size else 0.0
		return float((numpy.sum(numpy.abs(self.values)**p) * self.grid.cell_volume)**(1 / p))

	def translate(self, shift: Sequence[int]) -> "GridField":
		"""
		Returns the field translated by a whole number of grid cells, ``f(x - shift * spacing)``.

		:param shift: One integer per axis.
		"""

		return self.with_values(numpy.roll(self.values, tuple(shift), axis=tuple(range(self.grid.d))))

	def __add__(self, other: "GridField") -> "GridField":
		_check_grids(self, other)
		return self.with_values(self.values + other.values)

	def __sub__(self, other: "GridField") -> "GridField":
		_check_grids(self, other)
		return self.with_values(self.values - other.values)

	def __mul__(self, other: float) -> "GridField":
		return self.with_values(self.values * other)

	__rmul__ = __mul__

	def __neg__(self) -> "GridField":
		return self.with_values(-self.values)


#: A velocity field, one :class:`~.GridField` per component.
Velocity = Tuple[GridField, ...]


@dataclass(frozen=True, eq=False)
class SpectralField:
	"""
	Fourier coefficients of a real periodic field, in FFT ordering.

	:param grid:
	:param coeffs: Complex array of shape ``grid.shape``.
	"""

	grid: TorusGrid
	coeffs: numpy.ndarray

	def __post_init__(self):
		coeffs = numpy.asarray(self.coeffs, dtype=numpy.complex128)
		if coeffs.shape != self.grid.shape:
			raise ValueError(f"Expected coefficients of shape {self.grid.shape}, got {coeffs.shape}.")
		object.__setattr__(self, "coeffs", coeffs)

	def multiply(self, multiplier: numpy.ndarray) -> "SpectralField":
		"""
		Returns the field with each mode scaled by ``multiplier``.
		"""

		return SpectralField(self.grid, self.coeffs * multiplier)

	def coeff(self, mode: Sequence[int]) -> complex:
		"""
		Returns the coefficient of the mode with wavenumber ``mode``.
		"""

		return complex(self.coeffs[tuple(int(m) % self.grid.N for m in mode)])

	def hermitian_defect(self) -> float:
		"""
		Returns :math:`\\max_n |c(-n) - \\overline{c(n)}|` relative to the largest coefficient.
		"""

		flipped = numpy.conj(numpy.roll(numpy.flip(self.coeffs), 1, axis=tuple(range(self.grid.d))))
		scale = float(numpy.max(numpy.abs(self.coeffs))) or 1.0
		return float(numpy.max(numpy.abs(self.coeffs - flipped))) / scale


def to_spectral(f: GridField) -> SpectralField:
	"""
	Returns the discrete Fourier coefficients of ``f``.

	:param f:
	"""

	grid = f.grid
	coeffs = scipy.fft.fftn(f.values, workers=fft_workers()) / grid.size
	return SpectralField(grid, coeffs * _phase(grid))


def to_grid(F: SpectralField) -> GridField:
	"""
	Returns the grid values of the field with Fourier coefficients ``F``.

	:param F:

	:raises SymmetryError: If the coefficients do not describe a real field.
	"""

	grid = F.grid
	values = scipy.fft.ifftn(F.coeffs * _phase(grid), workers=fft_workers()) * grid.size
	scale = max(1.0, float(numpy.max(numpy.abs(values.real))))
	residue = float(numpy.max(numpy.abs(values.imag)))
	if residue > SYMMETRY_TOLERANCE * scale:
		raise SymmetryError(f"Coefficients are not Hermitian-symmetric (imaginary residue {residue:.3g}).")
	return GridField(grid, values.real)


def riesz(F: SpectralField, j: int) -> SpectralField:
	"""
	Apply the Riesz transform :math:`R_j`, with symbol :math:`i n_j / |n|`.

	:param F:
	:param j: The component, counting from 1.

	:raises ValueError: If ``j`` is not between 1 and the dimension.
	"""

	grid = F.grid
	if not 1 <= j <= grid.d:
		raise ValueError(f"Riesz component must be between 1 and {grid.d}, not {j!r}.")

	norm = grid.wavenumber_norm()
	with numpy.errstate(divide="ignore", invalid="ignore"):
		symbol = numpy.where(norm > 0, 1j * _odd_wavenumbers(grid)[j - 1] / norm, 0)

	return F.multiply(symbol)


def riesz_perp_velocity(F: SpectralField) -> Tuple[SpectralField, SpectralField]:
	"""
	Returns the velocity :math:`u = (-R_2 \\theta, R_1 \\theta)`.

	:param F: The Fourier coefficients of :math:`\\theta`.

	:raises ValueError: If the grid is not two-dimensional.
	"""

	if F.grid.d != 2:
		raise ValueError("The Riesz-perp velocity is only defined in two dimensions.")

	r2 = riesz(F, 2)
	return r2.multiply(-1), riesz(F, 1)


def fractional_laplacian(F: SpectralField, alpha: float) -> SpectralField:
	"""
	Apply :math:`(-\\Delta)^{\\alpha/2}`, the multiplier :math:`|n|^\\alpha`.

	:param F:
	:param alpha: The exponent, in :math:`(0, 2]`.

	:raises ValueError: If ``alpha`` is out of range.
	"""

	if not 0 < alpha <= 2:
		raise ValueError(f"alpha must be in (0, 2], not {alpha!r}.")

	return F.multiply(F.grid.wavenumber_norm()**alpha)


def spectral_gradient(f: GridField) -> Velocity:
	"""
	Returns the gradient of ``f``, computed spectrally.

	:param f:
	"""

	F = to_spectral(f)
	return tuple(to_grid(F.multiply(1j * n)) for n in _odd_wavenumbers(f.grid))


def divergence(u: Velocity) -> SpectralField:
	"""
	Returns the Fourier coefficients of :math:`\\nabla \\cdot u`.

	:param u:
	"""

	grid = _check_grids(*u)
	coeffs = numpy.zeros(grid.shape, dtype=numpy.complex128)
	for component, n in zip(u, _odd_wavenumbers(grid)):
		coeffs += 1j * n * to_spectral(component).coeffs
	return SpectralField(grid, coeffs)


def dealias(F: SpectralField) -> SpectralField:
	"""
	Apply the two-thirds rule, removing every mode with some :math:`|n_i| > N/3`.

	:param F:
	"""

	return F.multiply(_dealias_mask(F.grid))


def advection_term(u: Velocity, theta: GridField) -> GridField:
	"""
	Returns the dealiased pseudo-spectral product :math:`(u \\cdot \\nabla) \\theta`.

	The mean of the output is exactly zero.

	:param u: The velocity, one component per dimension.
	:param theta:
	"""

	grid = _check_grids(theta, *u)
	if len(u) != grid.d:
		raise ValueError(f"Expected {grid.d} velocity components, got {len(u)}.")

	gradient = spectral_gradient(theta)
	product = sum(component.values * g.values for component, g in zip(u, gradient))
	F = dealias(to_spectral(GridField(grid, product)))
	F.coeffs[(0, ) * grid.d] = 0
	return to_grid(F)


def subtract_mean(f: GridField) -> Tuple[GridField, float]:
	"""
	Returns the mean-zero part of ``f`` and its mean.

	:param f:
	"""

	mean = f.mean()
	return f.with_values(f.values - mean), mean


# Near-field cutoff used by the kernel oracle's singular-cell correction.
_CUTOFF_INNER = math.pi / 4
_CUTOFF_OUTER = math.pi / 2


def _radial_cutoff(rho):
	"""
	Smooth radial cutoff, 1 inside ``_CUTOFF_INNER`` and 0 beyond ``_CUTOFF_OUTER``.
	"""

	t = numpy.clip((numpy.asarray(rho, dtype=numpy.float64) - _CUTOFF_INNER) / (_CUTOFF_OUTER - _CUTOFF_INNER), 0, 1)
	with numpy.errstate(divide="ignore", over="ignore", invalid="ignore"):
		rising = numpy.where(t > 0, numpy.exp(-1 / t), 0.0)
		falling = numpy.where(t < 1, numpy.exp(-1 / (1 - t)), 0.0)
		return 1 - rising / (rising + falling)


def _sphere_area(d: int) -> float:
	return 2 * math.pi**(d / 2) / scipy.special.gamma(d / 2)


def _far_field_integral(d: int, s: float, half_width: float) -> float:
	"""
	Returns :math:`\\int_{|z|_\\infty > L} |z|^{-s} dz` for the cube of half-width ``L``.
	"""

	# Split the exterior into 2d pyramids about the coordinate axes.
	if d == 1:
		face = 1.0
	else:
		face = scipy.integrate.nquad(
				lambda *t: (1 + sum(ti**2 for ti in t))**(-s / 2),
				[(-1, 1)] * (d - 1),
				)[0]
	return 2 * d * face * half_width**(d - s) / (s - d)


@functools.lru_cache(maxsize=32)
def _oracle_symbol(grid: TorusGrid, alpha: float, lattice_radius: int, corrected: bool) -> numpy.ndarray:
	d = grid.d
	s = alpha + d
	h = grid.spacing
	offsets = grid.offsets()

	weights = numpy.zeros(grid.shape)
	for image in itertools.product(range(-lattice_radius, lattice_radius + 1), repeat=d):
		distance_sq = sum((z - 2 * math.pi * n)**2 for z, n in zip(offsets, image))
		with numpy.errstate(divide="ignore"):
			weights += numpy.where(distance_sq > 0, distance_sq**(-s / 2), 0.0)

	# The node y = x contributes nothing; its neighbours pair off as y and 2x - y.
	weights[(0, ) * d] = 0
	symbol = grid.cell_volume * (weights.sum() - scipy.fft.fftn(weights).real)

	if corrected:
		symbol = symbol + _singular_cell_correction(grid, alpha)
		# Remaining lattice images, by the midpoint rule over their cells.
		tail = _far_field_integral(d, s, (2 * lattice_radius + 1) * math.pi)
		symbol = symbol + numpy.where(grid.wavenumber_norm() > 0, tail, 0.0)

	return _frozen(symbol)


def _singular_cell_correction(grid: TorusGrid, alpha: float) -> numpy.ndarray:
	"""
	Symbol of the Taylor correction for the rectangle rule near the singular node.

	The even moments of the central kernel image, restricted by a smooth cutoff,
	are compared between the grid sum and the exact integral up to fourth order.
	"""

	d = grid.d
	s = alpha + d
	offsets = grid.offsets()
	rho = numpy.sqrt(sum(z**2 for z in offsets))

	with numpy.errstate(divide="ignore"):
		kernel = numpy.where(rho > 0, rho**(-s), 0.0) * _radial_cutoff(rho) * grid.cell_volume

	z1 = offsets[0]
	m2_grid = float(numpy.sum(kernel * z1**2))
	m4_grid = float(numpy.sum(kernel * z1**4))

	area = _sphere_area(d)
	radial2 = scipy.integrate.quad(lambda r: r**(1 - alpha) * _radial_cutoff(r), 0, _CUTOFF_OUTER, limit=200)[0]
	radial4 = scipy.integrate.quad(lambda r: r**(3 - alpha) * _radial_cutoff(r), 0, _CUTOFF_OUTER, limit=200)[0]
	m2_exact = area * radial2 / d
	m4_exact = 3 * area * radial4 / (d * (d + 2))

	n = grid.wavenumbers()
	norm_sq = sum(ni**2 for ni in n)
	correction = -0.5 * (m2_grid - m2_exact) * norm_sq
	correction = correction + (m4_grid - m4_exact) * sum(ni**4 for ni in n) / 24

	if d > 1:
		m22_grid = float(numpy.sum(kernel * offsets[0]**2 * offsets[1]**2))
		m22_exact = area * radial4 / (d * (d + 2))
		cross = sum(n[i]**2 * n[j]**2 for i, j in itertools.combinations(range(d), 2))
		correction = correction + 6 * (m22_grid - m22_exact) * cross / 24

	return correction


def fractional_laplacian_kernel_oracle(
		f: GridField,
		alpha: float,
		lattice_radius: int,
		*,
		corrected: bool = True,
		) -> GridField:
	"""
	Evaluate the singular-integral form of :math:`(-\\Delta)^{\\alpha/2} f`, without its normalizing constant.

	The periodized kernel is summed over lattice images with :math:`|n|_\\infty \\leq` ``lattice_radius``
	and integrated by grid quadrature, pairing the nodes :math:`y` and :math:`2x - y` about the singular point.

	:param f: A smooth (band-limited) field.
	:param alpha: The exponent, in :math:`(0, 2)`.
	:param lattice_radius:
	:param corrected: Whether to correct the quadrature near the singular node and to add the lattice images
		beyond ``lattice_radius`` by the midpoint rule. The uncorrected sum converges slowly in both.

	:raises ValueError: If ``alpha`` or ``lattice_radius`` is out of range.

	:returns: The kernel sum, which approximates :math:`C_\\alpha^{-1} (-\\Delta)^{\\alpha/2} f`.
	"""

	if not 0 < alpha < 2:
		raise ValueError(f"alpha must be in (0, 2), not {alpha!r}.")
	if lattice_radius < 1:
		raise ValueError(f"lattice_radius must be at least 1, not {lattice_radius!r}.")

	symbol = _oracle_symbol(f.grid, float(alpha), int(lattice_radius), bool(corrected))
	values = scipy.fft.ifftn(symbol * scipy.fft.fftn(f.values, workers=fft_workers()), workers=fft_workers())
	return f.with_values(values.real)


def oracle_ratios(
		grid: TorusGrid,
		alpha: float,
		modes: Sequence[Sequence[int]],
		lattice_radius: int,
		*,
		corrected: bool = True,
		) -> Tuple[Dict[Tuple[int, ...], float], float]:
	"""
	Compare the kernel oracle with the multiplier :math:`|n|^\\alpha` on single cosine modes.

	:param grid:
	:param alpha:
	:param modes: Wavenumber vectors.
	:param lattice_radius:
	:param corrected: See :func:`~.fractional_laplacian_kernel_oracle`.

	:returns: The ratio for each mode, and the relative spread :math:`(\\max - \\min) / \\text{mean}`.
	"""

	ratios: Dict[Tuple[int, ...], float] = {}
	for mode in modes:
		mode = tuple(int(m) for m in mode)
		wave = GridField.from_function(grid, lambda *x: numpy.cos(sum(m * xi for m, xi in zip(mode, x))))
		out = fractional_laplacian_kernel_oracle(wave, alpha, lattice_radius, corrected=corrected)
		projection = float(numpy.sum(out.values * wave.values) / numpy.sum(wave.values**2))
		ratios[mode] = projection / math.sqrt(sum(m**2 for m in mode))**alpha

	values = list(ratios.values())
	spread = (max(values) - min(values)) / (sum(values) / len(values))
	logger.debug("Kernel oracle ratios at alpha=%s: %s (spread %.3g)", alpha, ratios, spread)
	return ratios, spread


def _omega(radius):
	radius = numpy.asarray(radius, dtype=numpy.float64)
	t = numpy.clip(radius - 1, 0, 1)
	return numpy.where(radius <= 1, 1.0, numpy.where(radius >= 2, 0.0, 1 - (6 * t**5 - 15 * t**4 + 10 * t**3)))


@dataclass(frozen=True)
class LittlewoodPaleyFamily:
	"""
	A dyadic partition of unity on the frequency lattice of ``grid``.

	The profile :math:`\\omega` is 1 on :math:`|\\xi| \\leq 1`, 0 on :math:`|\\xi| \\geq 2`, joined by a quintic smoothstep.
	Block 0 is :math:`\\omega` itself and block :math:`j \\geq 1` is :math:`\\varphi_j(\\xi) = \\varphi(\\xi / 2^j)`,
	where :math:`\\varphi(\\xi) = \\omega(\\xi) - \\omega(2\\xi)`.

	:param grid:
	:param j_max: The index of the last block, :math:`\\log_2(N/2)`.
	:param c: The scaling constant of the kernels :math:`\\Phi_j`, once calibrated.
	"""

	grid: TorusGrid
	j_max: int
	c: Optional[float] = None

	@staticmethod
	def omega(radius) -> numpy.ndarray:
		"""
		The radial profile :math:`\\omega`, evaluated elementwise at radii :math:`|\\xi|`.
		"""

		return _omega(radius)

	@classmethod
	def omega_vector(cls, xi) -> numpy.ndarray:
		"""
		The profile :math:`\\omega` evaluated at frequency vectors, held on the last axis of ``xi``.
		"""

		return cls.omega(numpy.linalg.norm(numpy.asarray(xi, dtype=numpy.float64), axis=-1))

	@classmethod
	def phi(cls, radius) -> numpy.ndarray:
		"""
		The annular profile :math:`\\varphi(\\xi) = \\omega(\\xi) - \\omega(2\\xi)`, evaluated elementwise at radii.
		"""

		radius = numpy.asarray(radius, dtype=numpy.float64)
		return cls.omega(radius) - cls.omega(2 * radius)

	@classmethod
	def phi_j(cls, radius, j: int) -> numpy.ndarray:
		"""
		The dilated profile :math:`\\varphi_j(\\xi) = \\varphi(\\xi / 2^j)`, evaluated elementwise at radii.
		"""

		return cls.phi(numpy.asarray(radius, dtype=numpy.float64) / 2**j)

	def multiplier(self, j: int) -> numpy.ndarray:
		"""
		Returns the symbol of block ``j`` on the grid's modes.

		:raises ValueError: If ``j`` is out of range.
		"""

		if not 0 <= j <= self.j_max:
			raise ValueError(f"Block index must be between 0 and {self.j_max}, not {j!r}.")
		return _block_symbol(self.grid, j)

	def block_multiplier(self, j: int) -> numpy.ndarray:
		"""
		Returns the symbol of block ``j`` with the mean mode removed.
		"""

		symbol = self.multiplier(j).copy()
		symbol[(0, ) * self.grid.d] = 0
		return symbol

	def scale(self, j: int) -> float:
		"""
		The length scale :math:`2^{-j}` probed by block ``j``.
		"""

		return 2.0**-j


@functools.lru_cache(maxsize=None)
def _block_symbol(grid: TorusGrid, j: int) -> numpy.ndarray:
	norm = grid.wavenumber_norm()
	if j == 0:
		return _frozen(_omega(norm))
	return _frozen(LittlewoodPaleyFamily.phi_j(norm, j))


def build_lp_family(grid: TorusGrid) -> LittlewoodPaleyFamily:
	"""
	Construct the Littlewood-Paley family for ``grid``.

	:param grid:
	"""

	return LittlewoodPaleyFamily(grid, int(math.log2(grid.N // 2)))


def lp_project(F: SpectralField, j: int, fam: LittlewoodPaleyFamily) -> SpectralField:
	"""
	Apply the Littlewood-Paley projection :math:`\\Delta_j`.

	:param F:
	:param j: The block index, from 0 (the :math:`\\omega` block) to ``fam.j_max``.
	:param fam:

	:raises ValueError: If ``j`` is out of range.
	"""

	return F.multiply(fam.multiplier(j))
