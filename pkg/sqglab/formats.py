#!/usr/bin/env python3
#
#  formats.py
"""
File formats for snapshots and time series.

A snapshot file is a 32 byte little-endian header followed by the grid values:

=======  =======  =====================================
Offset   Type     Content
=======  =======  =====================================
0        4 bytes  Magic, ``SQG1``
4        u32      Format version, 1
8        u32      Dimension :math:`d`
12       u32      Points per dimension :math:`N`
16       f64      :math:`\\alpha`
24       f64      Time
32       f64      :math:`N^d` values, :math:`x_1` varying fastest
=======  =======  =====================================

The effective configuration is written alongside, to a sidecar file with the suffix ``.cfg`` appended.
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
import io
import logging
import os
import struct
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

# 3rd party
import numpy
from domdf_python_tools.paths import PathPlus
from domdf_python_tools.typing import PathLike

# this package
from sqglab import SnapshotFormatError
from sqglab.spectral import GridField, TorusGrid

__all__ = [
		"MAGIC",
		"VERSION",
		"SERIES_COLUMNS",
		"SnapshotHeader",
		"write_snapshot",
		"read_snapshot",
		"read_snapshot_header",
		"sidecar_path",
		"write_series_csv",
		"read_series_csv",
		"atomic_write",
		]

logger = logging.getLogger(__name__)

MAGIC = b"SQG1"
VERSION = 1

_HEADER = struct.Struct("<4sIIIdd")

#: The columns of a time series file.
SERIES_COLUMNS = ("t", "linf", "l2", "lq", "mean", "holder_lp", "dt_used")


class SnapshotHeader(NamedTuple):
	"""
	The fixed-size header of a snapshot file.
	"""

	version: int
	d: int
	N: int
	alpha: float
	time: float


def atomic_write(path: PathLike, data: bytes) -> None:
	"""
	Write ``data`` to ``path`` via a temporary sibling file, so readers never see a partial file.

	:param path:
	:param data:
	"""

	path = PathPlus(path)
	path.parent.maybe_make(parents=True)
	temporary = path.with_name(f".{path.name}.tmp")
	temporary.write_bytes(data)
	os.replace(temporary, path)


def sidecar_path(path: PathLike) -> PathPlus:
	"""
	Returns the path of the configuration sidecar of a snapshot file.

	:param path:
	"""

	path = PathPlus(path)
	return path.with_name(path.name + ".cfg")


def write_snapshot(
		path: PathLike,
		f: GridField,
		alpha: float,
		time: float,
		config_lines: Optional[Sequence[str]] = None,
		) -> None:
	"""
	Write a field to a snapshot file.

	:param path:
	:param f:
	:param alpha: The dissipation exponent of the run.
	:param time: The time of the snapshot.
	:param config_lines: The effective configuration, written to the sidecar file.
	"""

	grid = f.grid
	header = _HEADER.pack(MAGIC, VERSION, grid.d, grid.N, float(alpha), float(time))
	body = numpy.ascontiguousarray(f.values.ravel(order='F'), dtype="<f8").tobytes()
	atomic_write(path, header + body)

	if config_lines is not None:
		atomic_write(sidecar_path(path), ''.join(f"{line}\n" for line in config_lines).encode("UTF-8"))

	logger.debug("Wrote snapshot at t=%s to %s", time, path)


def _parse_header(data: bytes, path: PathLike) -> SnapshotHeader:
	if len(data) < _HEADER.size:
		raise SnapshotFormatError(f"{path}: truncated header ({len(data)} of {_HEADER.size} bytes)")

	magic, version, d, N, alpha, time = _HEADER.unpack_from(data)
	if magic != MAGIC:
		raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
	if version != VERSION:
		raise SnapshotFormatError(f"{path}: version mismatch (file has {version}, expected {VERSION})")
	return SnapshotHeader(version, d, N, alpha, time)


def read_snapshot_header(path: PathLike) -> SnapshotHeader:
	"""
	Read only the header of a snapshot file.

	:param path:

	:raises SnapshotFormatError: If the header is malformed.
	"""

	with open(path, "rb") as fp:
		return _parse_header(fp.read(_HEADER.size), path)


def read_snapshot(path: PathLike) -> GridField:
	"""
	Read a field from a snapshot file.

	:param path:

	:raises SnapshotFormatError: If the file is malformed, has the wrong version, or is truncated.
	"""

	data = PathPlus(path).read_bytes()
	header = _parse_header(data, path)

	try:
		grid = TorusGrid(header.N, header.d)
	except ValueError as e:
		raise SnapshotFormatError(f"{path}: {e}") from None

	expected = _HEADER.size + grid.size * 8
	if len(data) < expected:
		raise SnapshotFormatError(f"{path}: truncated data ({len(data)} of {expected} bytes)")
	if len(data) > expected:
		raise SnapshotFormatError(f"{path}: {len(data) - expected} unexpected trailing bytes")

	values = numpy.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(grid.shape, order='F')
	return GridField(grid, values.astype(numpy.float64))


def write_series_csv(
		path: PathLike,
		rows: Iterable[Sequence[float]],
		config_lines: Sequence[str] = (),
		) -> None:
	"""
	Write a time series, one row per snapshot, with the effective configuration as ``#`` comments.

	Values are written with 17 significant digits, so they read back exactly.

	:param path:
	:param rows: Values in the order of :data:`~.SERIES_COLUMNS`.
	:param config_lines:
	"""

	rows = [tuple(row) for row in rows]
	for row in rows:
		if len(row) != len(SERIES_COLUMNS):
			raise ValueError(f"Expected {len(SERIES_COLUMNS)} values per row, got {len(row)}.")

	header = [f"# {line}" for line in config_lines]
	header.append(','.join(SERIES_COLUMNS))

	buffer = io.StringIO()
	numpy.savetxt(
			buffer,
			numpy.array(rows, dtype=numpy.float64).reshape(-1, len(SERIES_COLUMNS)),
			fmt="%.17g",
			delimiter=',',
			header='\n'.join(header),
			comments='',
			)
	atomic_write(path, buffer.getvalue().encode("UTF-8"))


def read_series_csv(path: PathLike) -> Tuple[Dict[str, str], List[Dict[str, float]]]:
	"""
	Read a time series file.

	:param path:

	:returns: The embedded configuration, and one mapping of column to value per row.
	"""

	config: Dict[str, str] = {}
	lines = [line for line in PathPlus(path).read_lines() if line.strip()]

	while lines and lines[0].startswith('#'):
		key, _, value = lines.pop(0)[1:].partition('=')
		config[key.strip()] = value.strip()

	if not lines:
		return config, []

	columns = lines[0].split(',')
	if len(lines) == 1:
		return config, []

	data = numpy.loadtxt(lines[1:], delimiter=',', comments='#', ndmin=2)
	return config, [dict(zip(columns, map(float, row))) for row in data]
