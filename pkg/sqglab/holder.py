#!/usr/bin/env python3
#
#  holder.py
"""
Estimators of the Hölder seminorm of a grid field.

Three estimates are provided:

* :func:`~.lp_seminorm`, from the decay of Littlewood-Paley blocks, :math:`\\sup_j 2^{\\beta j} \\|\\Delta_j g\\|_\\infty`;
* :func:`~.direct_seminorm`, from finite differences over dyadic offsets;
* :func:`~.pairing_profile`, from pairings with translated kernels :math:`\\Phi_j(\\cdot - y)`.
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
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

# 3rd party
import numpy
import scipy.fft

# this package
from sqglab.membership import make_lp_kernel
from sqglab.solver import dyadic_offsets, lipschitz_constant
from sqglab.spectral import GridField, LittlewoodPaleyFamily, _check_grids, fft_workers, lp_project, to_grid, to_spectral

__all__ = ["HolderReport", "lp_seminorm", "direct_seminorm", "pairing_profile", "holder_report"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HolderReport:
	"""
	The three Hölder estimates of one field.

	:param beta: The exponent.
	:param lp_value: :math:`\\sup_j 2^{\\beta j} \\|\\Delta_j g\\|_\\infty`.
	:param direct_value: The largest sampled difference quotient.
	:param pairing_value: The largest scaled pairing with a translated kernel.
	:param lp_table: :math:`\\|\\Delta_j g\\|_\\infty` for each block.
	:param pairing_table: :math:`\\max_y |\\langle g, \\Phi_j(\\cdot - y) \\rangle|` for each block.
	:param argmax: The grid index and offset (in cells) attaining ``direct_value``.
	"""

	beta: float
	lp_value: float
	direct_value: float
	pairing_value: float
	lp_table: Dict[int, float]
	pairing_table: Dict[int, float]
	argmax: Tuple[Tuple[int, ...], Tuple[int, ...]]


def _check_beta(beta: float) -> None:
	if not 0 < beta < 1:
		raise ValueError(f"The Hölder exponent must be in (0, 1), not {beta!r}.")


def lp_seminorm(g: GridField, beta: float, fam: LittlewoodPaleyFamily) -> Tuple[float, Dict[int, float]]:
	"""
	Returns :math:`\\sup_j 2^{\\beta j} \\|\\Delta_j g\\|_\\infty`, and :math:`\\|\\Delta_j g\\|_\\infty` for each block.

	The mean of ``g`` is removed first, so constants have seminorm 0.

	:param g:
	:param beta: The exponent, in :math:`(0, 1)`.
	:param fam:
	"""

	_check_beta(beta)
	_check_grids(g, GridField.zeros(fam.grid))

	F = to_spectral(g)
	F.coeffs[(0, ) * g.grid.d] = 0

	table = {j: to_grid(lp_project(F, j, fam)).norm(math.inf) for j in range(fam.j_max + 1)}
	return max(2**(beta * j) * value for j, value in table.items()), table


def _difference_search(
		g: GridField,
		beta: float,
		offsets: Iterable[Sequence[int]],
		) -> Tuple[float, Tuple[Tuple[int, ...], Tuple[int, ...]]]:
	grid = g.grid
	axes = tuple(range(grid.d))
	best, argmax = 0.0, ((0, ) * grid.d, (0, ) * grid.d)

	for offset in offsets:
		offset = tuple(int(c) for c in offset)
		if not any(offset):
			continue
		length = grid.spacing * math.sqrt(sum(c**2 for c in offset))
		shifted = numpy.roll(g.values, tuple(-c for c in offset), axis=axes)
		ratios = numpy.abs(shifted - g.values) / length**beta
		index = numpy.unravel_index(numpy.argmax(ratios), grid.shape)
		if ratios[index] > best:
			best, argmax = float(ratios[index]), (tuple(int(i) for i in index), offset)

	return best, argmax


def direct_seminorm(g: GridField, beta: float, offsets: Optional[Iterable[Sequence[int]]] = None) -> float:
	"""
	Returns :math:`\\max |g(x + z) - g(x)| / |z|^\\beta` over grid points :math:`x` and offsets :math:`z`.

	:param g:
	:param beta: The exponent, in :math:`(0, 1]`. With :math:`\\beta = 1` this is the Lipschitz constant.
	:param offsets: Offsets in grid cells. Defaults to :func:`~sqglab.solver.dyadic_offsets`.
	"""

	if not 0 < beta <= 1:
		raise ValueError(f"The Hölder exponent must be in (0, 1], not {beta!r}.")
	if beta == 1:
		return lipschitz_constant(g, offsets)
	if offsets is None:
		offsets = dyadic_offsets(g.grid)
	return _difference_search(g, beta, offsets)[0]


def pairing_profile(
		g: GridField,
		beta: float,
		fam: LittlewoodPaleyFamily,
		translates_per_axis: Optional[int] = None,
		) -> Tuple[float, Dict[int, float]]:
	"""
	Probe ``g`` with the kernels :math:`\\Phi_j` translated over a lattice of points :math:`y`.

	Returns :math:`\\sup_j 2^{\\beta j} c^{-1} \\max_y |\\langle g, \\Phi_j(\\cdot - y) \\rangle|`
	and the unscaled maximum for each block.
	Since :math:`\\langle g, \\Phi_j(\\cdot - y) \\rangle = c \\Delta_j g(y)`,
	on the full lattice this equals :func:`~.lp_seminorm`.

	:param g:
	:param beta: The exponent, in :math:`(0, 1)`.
	:param fam: The family. Uncalibrated families use :math:`c = 1`.
	:param translates_per_axis: The number of translates along each axis. Must divide ``N``. Defaults to ``N``.
	"""

	_check_beta(beta)
	grid = _check_grids(g, GridField.zeros(fam.grid))
	N = grid.N

	if translates_per_axis is None:
		translates_per_axis = N
	if translates_per_axis < 1 or N % translates_per_axis:
		raise ValueError(f"translates_per_axis must divide {N}, not {translates_per_axis!r}.")
	stride = N // translates_per_axis

	c = 1.0 if fam.c is None else fam.c
	workers = fft_workers()
	transformed = scipy.fft.fftn(g.values, workers=workers)
	lattice = (slice(None, None, stride), ) * grid.d
	# The kernels are centred on the grid point at the origin, index N/2 on each axis.
	centre = (N // 2, ) * grid.d

	table = {}
	for j in range(fam.j_max + 1):
		kernel = make_lp_kernel(fam, j, c)
		correlation = scipy.fft.ifftn(transformed * numpy.conj(scipy.fft.fftn(kernel.values, workers=workers)), workers=workers)
		pairings = numpy.roll(correlation.real * grid.cell_volume, centre, axis=tuple(range(grid.d)))
		table[j] = float(numpy.max(numpy.abs(pairings[lattice])))

	value = max(2**(beta * j) * pairing / c for j, pairing in table.items())
	return value, table


def holder_report(
		g: GridField,
		beta: float,
		fam: LittlewoodPaleyFamily,
		translates_per_axis: Optional[int] = None,
		) -> HolderReport:
	"""
	Compute all three Hölder estimates of ``g``.

	:param g:
	:param beta:
	:param fam:
	:param translates_per_axis: Passed to :func:`~.pairing_profile`.
	"""

	lp_value, lp_table = lp_seminorm(g, beta, fam)
	direct_value, argmax = _difference_search(g, beta, dyadic_offsets(g.grid))
	pairing_value, pairing_table = pairing_profile(g, beta, fam, translates_per_axis)

	logger.debug("Hölder estimates at beta=%s: lp=%.6g direct=%.6g pairing=%.6g", beta, lp_value, direct_value, pairing_value)
	return HolderReport(beta, lp_value, direct_value, pairing_value, lp_table, pairing_table, argmax)
