"""
Interface ReportRepository - contrato para emitir tablas, matrices, mallas y manifiestos.
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from domain.entities.reports import CheckReport, RunManifest


class ReportRepository(ABC):
    """
    Interface para persistir los artefactos de una corrida.
    """

    @abstractmethod
    def write_report(self, report: CheckReport) -> Path:
        """
        Escribe una tabla con encabezado y su resumen.

        Args:
            report: Reporte a escribir

        Returns:
            Ruta del archivo escrito
        """
        pass

    @abstractmethod
    def write_matrix(self, name: str, matrix: np.ndarray) -> Path:
        """Escribe una matriz compleja como pares 're im' por entrada."""
        pass

    @abstractmethod
    def write_manifest(self, manifest: RunManifest) -> Path:
        """Escribe el manifiesto de la corrida."""
        pass

    @abstractmethod
    def path_for(self, name: str) -> Path:
        """Ruta dentro del directorio de salida."""
        pass

    @abstractmethod
    def write_rows(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """Escribe una tabla sin resumen (bandas, campos, cortes)."""
        pass

    @abstractmethod
    def register(self, path: Path) -> Path:
        """Anota en el manifiesto un archivo escrito por otro servicio."""
        pass
