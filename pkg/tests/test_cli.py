# 3rd party
import pytest
from domdf_python_tools.paths import PathPlus

# this package
from sqglab.__main__ import main
from sqglab.formats import read_series_csv, read_snapshot, write_snapshot
from sqglab.solver import initial_condition
from sqglab.spectral import TorusGrid
from sqglab.testing import ConfigFileRegressionFixture


def _config(tmp_pathplus: PathPlus, *lines: str) -> str:
	path = tmp_pathplus / "run.cfg"
	path.write_lines(lines)
	return str(path)


def test_chain(tmp_pathplus: PathPlus, capsys):
	out = tmp_pathplus / "out"
	assert main(["chain", "--out", str(out)]) == 0

	text = (out / "chain.txt").read_text()
	assert text.startswith("# alpha = 0.8\n")
	assert "\nbeta = 0.5\n" in text
	assert "\nT_19 = " in text
	assert "\nCx2." in text
	assert "beta = 0.5" in capsys.readouterr().out


def test_chain_out_of_range(tmp_pathplus: PathPlus, capsys):
	config = _config(tmp_pathplus, "alpha = 1.5")
	assert main(["chain", "-c", config, "-o", str(tmp_pathplus)]) == 1
	assert "alpha must be in (0, 1)" in capsys.readouterr().err


def test_simulate(tmp_pathplus: PathPlus, config_regression: ConfigFileRegressionFixture):
	config = _config(tmp_pathplus, "N = 16", "t_end = 0.05", "dt = 0.01", "snapshot_stride = 2")
	out = tmp_pathplus / "out"
	assert main(["simulate", "--config", config, "--out", str(out)]) == 0

	names = sorted(p.name for p in out.iterdir() if p.suffix == ".sqg")
	assert names == ["theta_000000.sqg", "theta_000002.sqg", "theta_000004.sqg", "theta_000005.sqg"]
	assert (out / "theta_000005.sqg.cfg").is_file()

	_, rows = read_series_csv(out / "series.csv")
	assert [row['t'] for row in rows] == pytest.approx([0.0, 0.02, 0.04, 0.05])
	assert all(row["holder_lp"] > 0 for row in rows)
	assert rows[0]["dt_used"] == 0

	first = read_snapshot(out / "theta_000000.sqg")
	assert first.grid == TorusGrid(16)
	assert first.norm(float("inf")) == pytest.approx(1.0)

	config_regression.check_series_config(out / "series.csv")


def test_dual_pair(tmp_pathplus: PathPlus):
	config = _config(tmp_pathplus, "N = 16", "t_end = 0.2", "dt = 0.01", "dual_s = 0.1")
	assert main(["dual-pair", "-c", config, "-o", str(tmp_pathplus)]) == 0

	report = {}
	for line in (tmp_pathplus / "dual_pair.txt").read_lines():
		if line and not line.startswith('#'):
			key, _, value = line.partition(" = ")
			report[key] = float(value)

	assert report['t'] == 0.2
	assert report['s'] == 0.1
	assert report["drift"] < 1e-2


def test_holder_scan(tmp_pathplus: PathPlus):
	grid = TorusGrid(16)
	write_snapshot(tmp_pathplus / "theta.sqg", initial_condition(grid, "random-mean-zero", 2), 0.8, 0.0)
	config = _config(tmp_pathplus, f"snapshot = {tmp_pathplus / 'theta.sqg'}", "translates_per_axis = 4")

	assert main(["holder-scan", "-c", config, "-o", str(tmp_pathplus)]) == 0

	lines = [line for line in (tmp_pathplus / "holder.csv").read_lines() if line and not line.startswith('#')]
	assert lines[0] == "beta = 0.5"
	assert lines[4] == "j,lp_block,pairing_block"
	# Blocks 0 to 3 on a 16 point grid.
	assert [line.split(',')[0] for line in lines[5:]] == ['0', '1', '2', '3']


def test_verify_kernel(tmp_pathplus: PathPlus):
	config = _config(tmp_pathplus, "N = 64", "kernel_modes = 2")
	assert main(["verify-kernel", "-c", config, "-o", str(tmp_pathplus)]) == 0

	lines = [line for line in (tmp_pathplus / "kernel.csv").read_lines() if line and not line.startswith('#')]
	assert lines[0] == "mode,ratio"
	assert [line.split(',')[0] for line in lines[1:-1]] == ["0 1", "0 2", "1 0", "1 1", "2 0"]
	assert lines[-1].startswith("spread = ")


def test_verify_kernel_alpha_two(tmp_pathplus: PathPlus, capsys):
	config = _config(tmp_pathplus, "alpha = 2", "N = 16")
	assert main(["verify-kernel", "-c", config, "-o", str(tmp_pathplus)]) == 1
	assert "alpha < 2" in capsys.readouterr().err


def test_missing_config(tmp_pathplus: PathPlus, capsys):
	assert main(["chain", "-c", str(tmp_pathplus / "missing.cfg"), "-o", str(tmp_pathplus)]) == 1
	assert "missing.cfg" in capsys.readouterr().err


def test_invalid_config(tmp_pathplus: PathPlus, capsys):
	config = _config(tmp_pathplus, "alpha = 5")
	assert main(["simulate", "-c", config, "-o", str(tmp_pathplus)]) == 1
	assert "alpha must be in (0, 2]" in capsys.readouterr().err


def test_unknown_subcommand():
	with pytest.raises(SystemExit):
		main(["integrate"])
