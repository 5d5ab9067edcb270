import numpy as np
import pytest
import yaml

from core.config.dependencies import get_service
from core.exceptions.cli_handlers import EXIT_ASSUMPTION, EXIT_CONFIG, EXIT_SOLVER, EXIT_UNHANDLED, exit_code_for
from core.exceptions.custom_exceptions import (
    ConfigurationException,
    InvalidGeometryException,
    MomentCountException,
    NoDegeneracyException,
)
from core.utils import start_vector
from domain.entities.reports import CheckReport, RunManifest
from infrastructure.persistence.csv_report_repository import CsvReportRepository
from infrastructure.persistence.memory_eigen_cache import MemoryEigenCache


def test_report_and_summary_are_written(tmp_path):
    repository = CsvReportRepository(str(tmp_path))
    report = CheckReport(name="gap_check", columns=("eps", "gap", "ok"))
    report.add_row(1e-3, 0.5 + 0.25j, True)
    report.summary["max_defect"] = np.float64(0.01)
    path = repository.write_report(report)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "eps,gap,ok"
    assert lines[1] == "0.001,0.5 0.25,1"
    summary = yaml.safe_load((tmp_path / "gap_check_summary.yaml").read_text(encoding="utf-8"))
    assert summary == {"max_defect": 0.01}
    assert len(repository.written) == 2


def test_report_rejects_wrong_row_width():
    report = CheckReport(name="r", columns=("a", "b"))
    with pytest.raises(ValueError):
        report.add_row(1.0)


def test_matrix_header(tmp_path):
    repository = CsvReportRepository(str(tmp_path))
    path = repository.write_matrix("G", np.array([[1.0, 2.0j], [0.0, -1.0]]))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# 2 2 row-major re im"
    assert lines[1].split() == ["1.0", "0.0", "0.0", "2.0"]


def test_manifest_lists_outputs_and_drops_timings_on_request(tmp_path):
    repository = CsvReportRepository(str(tmp_path))
    repository.write_rows("bands", ("p", "lambda"), [(0.0, 1.0)])
    manifest = RunManifest(command="bands", config_hash="abc", version="1.0.0", timings={"bands": 0.1234567891})
    path = repository.write_manifest(manifest)
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    assert data["outputs"] == [str(tmp_path / "bands.csv")]
    assert data["timings"] == {"bands": 0.123457}
    assert "timings" not in manifest.to_dict(include_timings=False)


def test_eigen_cache_clears_when_full():
    cache = MemoryEigenCache(max_entries=2)
    cache.put("a", object())
    first = cache.get("a")
    cache.put("a", object())
    assert cache.get("a") is first
    cache.put("b", object())
    cache.put("c", object())
    assert cache.size() == 1
    assert cache.get("a") is None
    cache.clear()
    assert cache.size() == 0


def test_container_shares_the_service_graph(clean_container):
    greens = get_service("GreensService")
    assert get_service("InterfaceService")._greens is greens
    assert clean_container.is_initialized()
    with pytest.raises(KeyError):
        clean_container.get("ChatService")


@pytest.mark.parametrize(
    "error, code",
    [
        (ConfigurationException("x"), EXIT_CONFIG),
        (InvalidGeometryException("x"), EXIT_CONFIG),
        (NoDegeneracyException(), EXIT_ASSUMPTION),
        (MomentCountException(2), EXIT_SOLVER),
        (RuntimeError("x"), EXIT_UNHANDLED),
    ],
)
def test_exit_codes(error, code):
    assert exit_code_for(error) == code


def test_arpack_start_vector_is_fixed_and_unit():
    first, second = start_vector(50), start_vector(50, complex)
    np.testing.assert_array_equal(first, second.real)
    assert np.linalg.norm(first) == pytest.approx(1.0)
    # sin simetría espejo
    assert not np.allclose(first, first[::-1])
