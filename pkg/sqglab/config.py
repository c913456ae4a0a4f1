#!/usr/bin/env python3
#
#  config.py
"""
Run configuration files.

A configuration file holds one ``key = value`` pair per line. ``#`` starts a comment.
Unset keys take their defaults, and the effective configuration is logged and
embedded in every artifact written by the command line interface.
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
import difflib
import logging
from typing import Any, Callable, Dict, List, Optional, Union

# 3rd party
from domdf_python_tools.paths import PathPlus
from domdf_python_tools.typing import PathLike
from domdf_python_tools.utils import strtobool

# this package
from sqglab import ConfigError
from sqglab.chain import KernelConstants
from sqglab.membership import ClassParams
from sqglab.solver import PRESETS, VELOCITY_MODES, SolverConfig
from sqglab.spectral import TorusGrid

__all__ = ["RunConfig", "load_config", "parse_config"]

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class RunConfig:
	"""
	Every setting a subcommand may read.

	The physical parameters mirror :class:`~sqglab.solver.SolverConfig`, :class:`~sqglab.membership.ClassParams`
	and :class:`~sqglab.chain.KernelConstants`. ``dt = None`` picks a quarter of the grid spacing.

	:raises ConfigError: If any value is out of range. The error names the key.
	"""

	# solver
	alpha: float = 0.8
	epsilon: float = 0.0
	N: int = 128
	d: int = 2
	dt: Optional[float] = None
	t_end: float = 1.0
	velocity_mode: str = "riesz_perp"
	mollifier_r: Optional[float] = None
	snapshot_stride: int = 10
	seed: int = 0
	init: str = "random-mean-zero"
	amplitude: float = 1.0
	dissipation: bool = True
	cfl: float = 0.5

	# diagnostics
	q: float = 2.0
	beta: float = 0.5
	translates_per_axis: Optional[int] = None

	# test class
	A: float = 17.0
	p: float = 2.0

	# kernel constants
	C: float = 1.0
	C_prime_q: float = 1.0
	c: float = 1.0
	c_prime: float = 1.0
	C_alpha: float = 1.0
	theta_inf: Optional[float] = None

	# dual-pair
	dual_t: Optional[float] = None
	dual_s: float = 0.1
	dual_init: str = "cosine"

	# holder-scan
	snapshot: Optional[str] = None

	# verify-kernel
	lattice_radius: int = 20
	kernel_modes: int = 4

	def __post_init__(self):
		_require(self, "alpha", 0 < self.alpha <= 2, "must be in (0, 2]")
		_require(self, "epsilon", self.epsilon >= 0, "must be non-negative")
		_require(self, "dt", self.dt is None or self.dt > 0, "must be positive")
		_require(self, "t_end", self.t_end >= 0, "must be non-negative")
		_require(self, "velocity_mode", self.velocity_mode in VELOCITY_MODES, f"must be one of {', '.join(VELOCITY_MODES)}")
		_require(
				self,
				"mollifier_r",
				self.mollifier_r is None or 0 < self.mollifier_r <= 1,
				"must be in (0, 1]",
				)
		_require(
				self,
				"mollifier_r",
				self.velocity_mode != "mollified" or self.mollifier_r is not None,
				"is required by the mollified velocity mode",
				)
		_require(self, "snapshot_stride", self.snapshot_stride >= 1, "must be at least 1")
		_require(self, "init", self.init in PRESETS, f"must be one of {', '.join(PRESETS)}")
		_require(self, "dual_init", self.dual_init in PRESETS, f"must be one of {', '.join(PRESETS)}")
		_require(self, "amplitude", self.amplitude >= 0, "must be non-negative")
		_require(self, "cfl", 0 < self.cfl <= 1, "must be in (0, 1]")
		_require(self, "q", self.q > 1, "must be greater than 1")
		_require(self, "beta", 0 < self.beta < 1, "must be in (0, 1)")
		_require(self, "A", self.A > 1, "must be greater than 1")
		_require(self, "p", self.p > 1, "must be greater than 1")
		for key in ("C", "C_prime_q", "c", "c_prime", "C_alpha"):
			_require(self, key, getattr(self, key) > 0, "must be positive")
		_require(self, "theta_inf", self.theta_inf is None or self.theta_inf >= 0, "must be non-negative")
		_require(self, "dual_s", self.dual_s >= 0, "must be non-negative")
		_require(self, "lattice_radius", self.lattice_radius >= 1, "must be at least 1")
		_require(self, "kernel_modes", self.kernel_modes >= 1, "must be at least 1")

		try:
			grid = TorusGrid(self.N, self.d)
		except ValueError as e:
			raise ConfigError(f"N and d: {e}", key='N') from None

		_require(
				self,
				"translates_per_axis",
				self.translates_per_axis is None or (self.translates_per_axis >= 1 and grid.N % self.translates_per_axis == 0),
				f"must divide N={grid.N}",
				)

	@property
	def grid(self) -> TorusGrid:
		return TorusGrid(self.N, self.d)

	@property
	def effective_dt(self) -> float:
		"""
		The requested time step, or a quarter of the grid spacing when unset.
		"""

		return self.dt if self.dt is not None else 0.25 * self.grid.spacing

	def solver_config(self) -> SolverConfig:
		"""
		Returns the solver settings.
		"""

		return SolverConfig(
				alpha=self.alpha,
				epsilon=self.epsilon,
				N=self.N,
				d=self.d,
				dt=self.effective_dt,
				t_end=self.t_end,
				velocity_mode=self.velocity_mode,
				mollifier_r=self.mollifier_r,
				snapshot_stride=self.snapshot_stride,
				seed=self.seed,
				init=self.init,
				amplitude=self.amplitude,
				dissipation=self.dissipation,
				cfl=self.cfl,
				)

	def class_params(self) -> ClassParams:
		return ClassParams(self.A, self.p, self.d)

	def kernel_constants(self) -> KernelConstants:
		return KernelConstants(self.C, self.C_prime_q, self.c, self.c_prime, self.C_alpha)

	def to_lines(self) -> List[str]:
		"""
		Render the effective configuration as ``key = value`` lines, one per setting.
		"""

		return [f"{f.name} = {_render(getattr(self, f.name))}" for f in dataclasses.fields(self)]


def _require(config: RunConfig, key: str, condition: bool, message: str) -> None:
	if not condition:
		raise ConfigError(f"{key} {message} (got {getattr(config, key)!r})", key=key)


def _render(value: Any) -> str:
	if value is None:
		return "none"
	if isinstance(value, bool):
		return "true" if value else "false"
	return str(value)


def _optional(parser: Callable[[str], Any]) -> Callable[[str], Any]:

	def parse(value: str) -> Any:
		if value.lower() in {"none", "auto", ''}:
			return None
		return parser(value)

	return parse


def _parse_bool(value: str) -> bool:
	return bool(strtobool(value))


_PARSERS: Dict[type, Callable[[str], Any]] = {
		int: int,
		float: float,
		str: str,
		bool: _parse_bool,
		Optional[int]: _optional(int),  # type: ignore[dict-item]
		Optional[float]: _optional(float),  # type: ignore[dict-item]
		Optional[str]: _optional(str),  # type: ignore[dict-item]
		}


def _field_parsers() -> Dict[str, Callable[[str], Any]]:
	return {f.name: _PARSERS[f.type] for f in dataclasses.fields(RunConfig)}  # type: ignore[index]


def parse_config(text: str) -> RunConfig:
	"""
	Parse the text of a configuration file.

	:param text:

	:raises ConfigError: If a line cannot be parsed, a key is unknown or repeated, or a value is out of range.
	"""

	parsers = _field_parsers()
	values: Dict[str, Any] = {}
	seen: Dict[str, int] = {}

	for lineno, line in enumerate(text.splitlines(), start=1):
		line = line.split('#', 1)[0].strip()
		if not line:
			continue

		key, sep, raw = line.partition('=')
		key, raw = key.strip(), raw.strip()
		if not sep or not key:
			raise ConfigError(f"expected 'key = value', got {line!r}", lineno=lineno)

		if key not in parsers:
			suggestions = difflib.get_close_matches(key, parsers, n=1)
			hint = f"; did you mean {suggestions[0]!r}?" if suggestions else ''
			raise ConfigError(f"unknown key {key!r}{hint}", key=key, lineno=lineno)

		if key in seen:
			raise ConfigError(f"{key!r} is already set on line {seen[key]}", key=key, lineno=lineno)

		try:
			values[key] = parsers[key](raw)
		except ValueError:
			raise ConfigError(f"invalid value {raw!r} for {key!r}", key=key, lineno=lineno) from None
		seen[key] = lineno

	config = RunConfig(**values)
	for line in config.to_lines():
		logger.info("config: %s", line)
	return config


def load_config(path: Union[PathLike, None] = None) -> RunConfig:
	"""
	Load a configuration file, or return the defaults if ``path`` is :py:obj:`None`.

	:param path:

	:raises ConfigError: If the file is invalid.
	:raises FileNotFoundError: If the file does not exist.
	"""

	if path is None:
		return parse_config('')
	return parse_config(PathPlus(path).read_text())
