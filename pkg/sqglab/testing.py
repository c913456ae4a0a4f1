#!/usr/bin/env python3
#
#  testing.py
"""
Pytest helpers.

.. extras-require:: testing
	:pyproject:
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
from typing import Callable

# 3rd party
import pytest  # nodep
from coincidence import AdvancedFileRegressionFixture  # nodep
from domdf_python_tools.paths import PathPlus

# this package
from sqglab.config import RunConfig
from sqglab.formats import read_series_csv
from sqglab.solver import initial_condition
from sqglab.spectral import GridField, LittlewoodPaleyFamily, TorusGrid, build_lp_family

__all__ = [
		"ConfigFileRegressionFixture",
		"config_regression",
		"grid8",
		"grid16",
		"grid32",
		"lp_family",
		"random_mean_zero",
		]


class ConfigFileRegressionFixture(AdvancedFileRegressionFixture):
	"""
	Class for performing regression checks on the configuration embedded in ``sqglab`` artifacts.
	"""

	def check_config(self, config: RunConfig, **kwargs) -> None:
		r"""
		Checks the effective configuration against a previously recorded version, or generates a new file.

		:param config:
		:param \*\*kwargs: Additional keyword arguments passed to
			:meth:`pytest_regressions.file_regression.FileRegressionFixture.check`.
		"""

		__tracebackhide__ = True

		kwargs.setdefault("extension", ".cfg")
		self.check('\n'.join(config.to_lines()), **kwargs)

	def check_series_config(self, path: PathPlus, **kwargs) -> None:
		r"""
		Checks the configuration embedded in a time series file.

		:param path:
		:param \*\*kwargs: Additional keyword arguments passed to
			:meth:`pytest_regressions.file_regression.FileRegressionFixture.check`.
		"""

		__tracebackhide__ = True

		config, _ = read_series_csv(path)
		kwargs.setdefault("extension", ".cfg")
		self.check('\n'.join(f"{key} = {value}" for key, value in config.items()), **kwargs)


@pytest.fixture()
def config_regression(datadir, original_datadir, request) -> ConfigFileRegressionFixture:
	"""
	Pytest fixture for performing regression tests on effective configurations.
	"""

	return ConfigFileRegressionFixture(datadir, original_datadir, request)


@pytest.fixture()
def grid8() -> TorusGrid:
	return TorusGrid(8, 2)


@pytest.fixture()
def grid16() -> TorusGrid:
	return TorusGrid(16, 2)


@pytest.fixture()
def grid32() -> TorusGrid:
	return TorusGrid(32, 2)


@pytest.fixture()
def lp_family(grid32: TorusGrid) -> LittlewoodPaleyFamily:
	"""
	The uncalibrated Littlewood-Paley family on a 32 point grid.
	"""

	return build_lp_family(grid32)


@pytest.fixture()
def random_mean_zero() -> Callable[..., GridField]:
	"""
	Returns a factory for seeded, band-limited, mean-zero fields with unit :math:`L^\\infty` norm.
	"""

	def factory(grid: TorusGrid, seed: int = 0, amplitude: float = 1.0) -> GridField:
		return initial_condition(grid, "random-mean-zero", seed, amplitude)

	return factory
