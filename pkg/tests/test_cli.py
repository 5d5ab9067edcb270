import csv
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from application.dto.run_requests import RunRequest
from core.exceptions.cli_handlers import EXIT_ASSUMPTION, EXIT_CONFIG
from core.exceptions.custom_exceptions import ConfigurationException
from main import cli


@pytest.fixture
def runner(clean_container):
    return CliRunner()


def _rows(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


def test_mesh_command_writes_listing_and_manifest(runner, write_config, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(cli, ["mesh", "--config", str(write_config()), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / "mesh.txt").exists()
    assert (out / "mesh_statistics.csv").exists()
    manifest = yaml.safe_load((out / "manifest.yaml").read_text(encoding="utf-8"))
    assert manifest["command"] == "mesh"
    assert manifest["deterministic"] is True
    assert str(out / "mesh.txt") in result.output


def test_bands_command_row_count(runner, write_config, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(
        cli, ["bands", "--config", str(write_config()), "--out", str(out), "--grid", "4", "--n-bands", "3"]
    )
    assert result.exit_code == 0, result.output
    rows = _rows(out / "bands.csv")
    assert rows[0] == ["p", "band_ascending", "band_analytic", "lambda"]
    assert len(rows) - 1 == 2 * 4 * 3


def test_gapped_base_exits_with_assumption_code(runner, write_config, tmp_path):
    result = runner.invoke(cli, ["dirac", "--config", str(write_config("gapped.yaml")), "--out", str(tmp_path)])
    assert result.exit_code == EXIT_ASSUMPTION


def test_missing_config_exits_with_config_code(runner, tmp_path):
    result = runner.invoke(cli, ["mesh", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)])
    assert result.exit_code == EXIT_CONFIG


def test_interface_requires_nonzero_eps(runner, write_config, tmp_path):
    result = runner.invoke(
        cli, ["interface", "--config", str(write_config()), "--eps", "0", "--out", str(tmp_path)]
    )
    assert result.exit_code == EXIT_CONFIG
    with pytest.raises(ConfigurationException):
        RunRequest.from_dict({"command": "pipeline", "eps": 0.0})
    assert RunRequest.from_dict({"command": "bands", "eps": 0.0}).eps == 0.0


def test_supercell_rejects_unknown_truncation(runner, write_config, tmp_path):
    result = runner.invoke(cli, ["supercell", "--config", str(write_config()), "--bc", "robin"])
    assert result.exit_code == 2


def _manifest_without_timings(path):
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    data.pop("timings")
    data["outputs"] = [Path(p).name for p in data["outputs"]]
    return data


@pytest.mark.slow
def test_pipeline_rerun_is_bit_identical(runner, write_config, tmp_path):
    config = str(write_config(
        contours__piece_nodes=32, contours__arc_nodes=32, search__moment_nodes=32,
        search__scan_grid=5, search__window_cells=6, supercell__n_cells_per_side=6,
    ))
    runs = []
    for run in ("a", "b"):
        out = tmp_path / run
        result = runner.invoke(cli, ["pipeline", "--config", config, "--out", str(out)])
        assert result.exit_code == 0, result.output
        runs.append(out)
    first, second = runs
    names = sorted(p.name for p in first.iterdir())
    assert names == sorted(p.name for p in second.iterdir())
    assert "cross_check.csv" in names and "interface_mode.csv" in names
    for name in names:
        if name == "manifest.yaml":
            continue
        assert (first / name).read_bytes() == (second / name).read_bytes(), name
    assert _manifest_without_timings(first / "manifest.yaml") == _manifest_without_timings(second / "manifest.yaml")


def test_coupling_is_reproducible(runner, write_config, tmp_path):
    config = str(write_config())
    values = []
    for run in ("a", "b"):
        out = tmp_path / run
        result = runner.invoke(cli, ["coupling", "--config", config, "--out", str(out)])
        assert result.exit_code == 0, result.output
        table = dict(_rows(out / "coupling.csv")[1:])
        values.append(table["abs_t_star"])
    assert values[0] == values[1]
