"""
Escritor de reportes en texto delimitado (csv) y manifiestos YAML.
"""
import csv
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np
import yaml

from core.config.settings import settings
from core.logging.logger import get_infrastructure_logger
from domain.entities.reports import CheckReport, RunManifest
from domain.repositories.report_repository import ReportRepository


def _format(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return f"{value.real!r} {value.imag!r}"
    if isinstance(value, np.integer):
        return int(value)
    return value


def _plain(value: Any) -> Any:
    """Convierte tipos numpy/complejos a tipos que YAML serializa sin etiquetas."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    return value


class CsvReportRepository(ReportRepository):
    """
    Implementación sobre un directorio de salida: una tabla csv por reporte, su resumen en
    <nombre>_summary.yaml, matrices como pares 're im' y manifest.yaml.
    """

    def __init__(self, out_dir: Optional[str] = None):
        self.out_dir = Path(out_dir or settings.output_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.logger = get_infrastructure_logger()
        self.written = []

    def path_for(self, name: str) -> Path:
        return self.out_dir / name

    def register(self, path: Path) -> Path:
        self.written.append(str(path))
        return path

    def write_report(self, report: CheckReport) -> Path:
        path = self.path_for(f"{report.name}.csv")
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(report.columns)
            for row in report.rows:
                writer.writerow([_format(v) for v in row])
        self.logger.info(f"Reporte escrito: {path} ({len(report)} filas)")
        if report.summary:
            summary_path = self.path_for(f"{report.name}_summary.yaml")
            with open(summary_path, "w", encoding="utf-8") as handle:
                yaml.safe_dump(_plain(report.summary), handle, sort_keys=True)
            self.register(summary_path)
        return self.register(path)

    def write_rows(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """Tabla sin resumen (bandas, campos)."""
        report = CheckReport(name=name, columns=tuple(columns))
        for row in rows:
            report.add_row(*row)
        return self.write_report(report)

    def write_matrix(self, name: str, matrix: np.ndarray) -> Path:
        path = self.path_for(f"{name}.txt")
        matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(f"# {matrix.shape[0]} {matrix.shape[1]} row-major re im\n")
            for row in matrix:
                handle.write(" ".join(f"{z.real!r} {z.imag!r}" for z in row) + "\n")
        self.logger.info(f"Matriz escrita: {path} {matrix.shape}")
        return self.register(path)

    def write_manifest(self, manifest: RunManifest) -> Path:
        path = self.path_for("manifest.yaml")
        manifest.record_outputs(self.written)
        with open(path, "w", encoding="utf-8") as handle:
            yaml.safe_dump(_plain(manifest.to_dict()), handle, sort_keys=True)
        self.logger.info(f"Manifiesto escrito: {path}")
        return path
