#!/usr/bin/env python3
#
#  __main__.py
"""
Command line interface.

.. code-block:: bash

	sqglab <subcommand> [--config PATH] [--out DIR] [--verbose]

Subcommands:

* ``simulate``: run the forward equation, writing a time series and snapshots.
* ``dual-pair``: measure the drift of the pairing with the backward dual solution.
* ``holder-scan``: compute the three Hölder estimates of a snapshot.
* ``chain``: print the parameter chain and its sensitivity to the free constants.
* ``verify-kernel``: compare the kernel-sum fractional Laplacian with the multiplier.
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
import argparse
import itertools
import logging
import math
import sys
from typing import Callable, Dict, List, Optional, Sequence

# 3rd party
from domdf_python_tools.paths import PathPlus

# this package
from sqglab import SQGLabError
from sqglab.chain import ParameterChain, build_chain, eventual_time, sensitivities
from sqglab.config import RunConfig, load_config
from sqglab.formats import atomic_write, read_snapshot, write_series_csv, write_snapshot
from sqglab.holder import holder_report, lp_seminorm
from sqglab.monitors import pairing_conservation
from sqglab.solver import initial_condition, simulate_forward
from sqglab.spectral import build_lp_family, oracle_ratios

__all__ = ["main", "SUBCOMMANDS", "KERNEL_SPREAD_TOLERANCE"]

logger = logging.getLogger(__name__)

#: The largest relative spread of kernel ratios ``verify-kernel`` accepts.
KERNEL_SPREAD_TOLERANCE = 1e-3


def _write_report(out: PathPlus, name: str, config: RunConfig, lines: Sequence[str]) -> None:
	header = [f"# {line}" for line in config.to_lines()]
	atomic_write(out / name, ''.join(f"{line}\n" for line in [*header, *lines]).encode("UTF-8"))


def run_simulate(config: RunConfig, out: PathPlus) -> int:
	cfg = config.solver_config()
	grid = cfg.grid
	theta0 = initial_condition(grid, cfg.init, cfg.seed, cfg.amplitude)
	traj = simulate_forward(cfg, theta0)

	fam = build_lp_family(grid)
	rows = []
	for row, snapshot in zip(traj.time_series(config.q), traj.snapshots):
		holder = lp_seminorm(snapshot.theta, config.beta, fam)[0]
		rows.append((row.t, row.linf, row.l2, row.lq, row.mean, holder, row.dt_used))
		write_snapshot(
				out / f"theta_{snapshot.step:06d}.sqg",
				snapshot.theta,
				cfg.alpha,
				snapshot.time,
				config.to_lines(),
				)

	write_series_csv(out / "series.csv", rows, config.to_lines())
	print(f"Wrote {len(rows)} snapshots and series.csv to {out}")
	return 0


def run_dual_pair(config: RunConfig, out: PathPlus) -> int:
	cfg = config.solver_config()
	grid = cfg.grid
	traj = simulate_forward(cfg, initial_condition(grid, cfg.init, cfg.seed, cfg.amplitude))

	t = cfg.t_end if config.dual_t is None else config.dual_t
	psi_t = initial_condition(grid, config.dual_init, cfg.seed + 1)
	result = pairing_conservation(traj, psi_t, t, config.dual_s)

	lines = [
			f"t = {t!r}",
			f"s = {config.dual_s!r}",
			f"P(t) = {result.end!r}",
			f"P(t-s) = {result.start!r}",
			f"drift = {result.drift!r}",
			]
	_write_report(out, "dual_pair.txt", config, lines)
	print('\n'.join(lines))
	return 0


def run_holder_scan(config: RunConfig, out: PathPlus) -> int:
	if config.snapshot is not None:
		field = read_snapshot(config.snapshot)
	else:
		field = initial_condition(config.grid, config.init, config.seed, config.amplitude)

	fam = build_lp_family(field.grid)
	report = holder_report(field, config.beta, fam, config.translates_per_axis)

	lines = [
			f"beta = {report.beta!r}",
			f"lp_value = {report.lp_value!r}",
			f"direct_value = {report.direct_value!r}",
			f"pairing_value = {report.pairing_value!r}",
			"j,lp_block,pairing_block",
			]
	for j in sorted(report.lp_table):
		lines.append(f"{j},{report.lp_table[j]!r},{report.pairing_table[j]!r}")

	_write_report(out, "holder.csv", config, lines)
	print('\n'.join(lines))
	return 0


def _chain_lines(chain: ParameterChain, prefix: str = '') -> List[str]:
	lines = [
			f"{prefix}beta = {chain.beta!r}",
			f"{prefix}p = {chain.p!r}",
			f"{prefix}q = {chain.q!r}",
			f"{prefix}A = {chain.A!r}",
			f"{prefix}delta = {chain.delta!r}",
			f"{prefix}r0 = {chain.r0!r}",
			f"{prefix}T0 = {chain.T0!r}",
			f"{prefix}T = {chain.T!r}",
			]
	lines.extend(f"{prefix}residual.{name} = {value!r}" for name, value in chain.residuals.items())
	return lines


def run_chain(config: RunConfig, out: PathPlus) -> int:
	consts = config.kernel_constants()
	theta_inf = config.amplitude if config.theta_inf is None else config.theta_inf
	chain = build_chain(config.alpha, theta_inf, consts, config.d)

	lines = [f"alpha = {config.alpha!r}", f"theta_inf = {theta_inf!r}", *_chain_lines(chain)]
	_, partial = eventual_time(chain.T0, chain.alpha, chain.beta, chain.delta, chain.r0)
	lines.extend(f"T_{k} = {value!r}" for k, value in enumerate(partial))

	for name, variants in sensitivities(config.alpha, theta_inf, consts, config.d).items():
		for factor, variant in variants.items():
			lines.extend(_chain_lines(variant, prefix=f"{name}x{factor:g}."))

	_write_report(out, "chain.txt", config, lines)
	print('\n'.join(lines))
	return 0 if all(value > 0 for value in chain.residuals.values()) else 1


def _kernel_modes(d: int, radius: int) -> List[tuple]:
	modes = []
	for mode in itertools.product(range(radius + 1), repeat=d):
		norm = math.sqrt(sum(m**2 for m in mode))
		if 0 < norm <= radius:
			modes.append(mode)
	return modes


def run_verify_kernel(config: RunConfig, out: PathPlus) -> int:
	alpha = config.alpha
	if alpha >= 2:
		raise SQGLabError("verify-kernel needs alpha < 2")

	ratios, spread = oracle_ratios(config.grid, alpha, _kernel_modes(config.d, config.kernel_modes), config.lattice_radius)

	lines = ["mode,ratio"]
	lines.extend(f"{' '.join(map(str, mode))},{ratio!r}" for mode, ratio in ratios.items())
	lines.append(f"spread = {spread!r}")
	_write_report(out, "kernel.csv", config, lines)
	print('\n'.join(lines))
	return 0 if spread < KERNEL_SPREAD_TOLERANCE else 1


#: The subcommands, by name.
SUBCOMMANDS: Dict[str, Callable[[RunConfig, PathPlus], int]] = {
		"simulate": run_simulate,
		"dual-pair": run_dual_pair,
		"holder-scan": run_holder_scan,
		"chain": run_chain,
		"verify-kernel": run_verify_kernel,
		}


def _parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(
			prog="sqglab",
			description="Pseudo-spectral SQG simulations and regularity diagnostics.",
			)
	parser.add_argument("subcommand", choices=list(SUBCOMMANDS))
	parser.add_argument("--config", "-c", metavar="PATH", default=None, help="Configuration file (key = value).")
	parser.add_argument("--out", "-o", metavar="DIR", default='.', help="Directory for output files.")
	parser.add_argument("--verbose", "-v", action="store_true", help="Show debug logging.")
	return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
	"""
	Run a subcommand.

	:param argv: Command line arguments, excluding the program name.

	:returns: The exit status.
	"""

	args = _parser().parse_args(argv)
	logging.basicConfig(
			level=logging.DEBUG if args.verbose else logging.INFO,
			format="%(levelname)s %(name)s: %(message)s",
			)

	try:
		config = load_config(args.config)
		out = PathPlus(args.out)
		out.maybe_make(parents=True)
		return SUBCOMMANDS[args.subcommand](config, out)
	except (SQGLabError, ValueError, OSError) as e:
		logger.error("%s: %s", args.subcommand, e)
		print(f"sqglab {args.subcommand}: {e}", file=sys.stderr)
		return 1


if __name__ == "__main__":
	sys.exit(main())
