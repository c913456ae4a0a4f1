#!/usr/bin/env python3
#
#  __init__.py
"""
Pseudo-spectral simulator and regularity diagnostics for the dissipative surface quasi-geostrophic equation.
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
from typing import Optional

__author__: str = "Dominic Davis-Foster"
__copyright__: str = "2021 Dominic Davis-Foster"
__license__: str = "MIT License"
__version__: str = "0.1.0"
__email__: str = "dominic@davis-foster.co.uk"

__all__ = [
		"SQGLabError",
		"GridMismatchError",
		"SymmetryError",
		"UnresolvedScaleError",
		"IntegrationError",
		"CoverageError",
		"SnapshotFormatError",
		"ConfigError",
		]


class SQGLabError(Exception):
	"""
	Base class for errors raised by ``sqglab``.
	"""


class GridMismatchError(SQGLabError, ValueError):
	"""
	Raised when two fields which must share a grid do not.
	"""


class SymmetryError(SQGLabError, ValueError):
	"""
	Raised when Fourier coefficients do not describe a real field.
	"""


class UnresolvedScaleError(SQGLabError, ValueError):
	"""
	Raised when a length scale is too small for the grid to resolve.
	"""


class IntegrationError(SQGLabError, RuntimeError):
	"""
	Raised when a time integration cannot continue.

	This covers non-finite values, a time step forced below the adaptation floor,
	and velocity fields which are not divergence-free.
	"""


class CoverageError(SQGLabError, ValueError):
	"""
	Raised when a requested time interval is not covered by a stored trajectory.
	"""


class SnapshotFormatError(SQGLabError, ValueError):
	"""
	Raised when a snapshot file cannot be decoded.
	"""


class ConfigError(SQGLabError, ValueError):
	"""
	Raised for invalid configuration files.

	:param message:
	:param key: The configuration key the error relates to, if any.
	:param lineno: The line number in the configuration file, if any.
	"""

	def __init__(self, message: str, key: Optional[str] = None, lineno: Optional[int] = None):
		if lineno is not None:
			message = f"line {lineno}: {message}"
		super().__init__(message)
		self.key = key
		self.lineno = lineno
