"""
Entidades de reporte: tablas con encabezado y resumen, y el manifiesto de corrida.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple


@dataclass
class CheckReport:
    """
    Tabla de resultados de una comprobación.

    Attributes:
        name: Nombre del reporte (nombre de archivo sin extensión)
        columns: Encabezados con unidades entre corchetes cuando aplica
        rows: Filas de valores
        summary: Valores agregados (órdenes ajustados, máximos, banderas)
    """
    name: str
    columns: Tuple[str, ...]
    rows: List[Tuple[Any, ...]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    def add_row(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"{self.name}: se esperaban {len(self.columns)} columnas, hay {len(values)}")
        self.rows.append(tuple(values))

    def column(self, name: str) -> List[Any]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class RunManifest:
    """
    Manifiesto de una corrida.

    Attributes:
        command: Subcomando ejecutado
        config_hash: sha256 del YAML canónico
        version: Versión de la herramienta
        mesh: Estadísticas de malla
        tolerances: Tolerancias usadas
        quadrature: Nodos de cuadratura usados
        outputs: Archivos emitidos
        timings: Segundos por etapa (fuera de la comparación de determinismo)
        deterministic: Sin algoritmos aleatorios
    """
    command: str
    config_hash: str
    version: str
    mesh: Dict[str, Any] = field(default_factory=dict)
    tolerances: Dict[str, float] = field(default_factory=dict)
    quadrature: Dict[str, int] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    deterministic: bool = True

    def to_dict(self, include_timings: bool = True) -> Dict[str, Any]:
        data = {
            "command": self.command,
            "config_hash": self.config_hash,
            "version": self.version,
            "deterministic": self.deterministic,
            "mesh": dict(self.mesh),
            "tolerances": dict(self.tolerances),
            "quadrature": dict(self.quadrature),
            "outputs": list(self.outputs),
        }
        if include_timings:
            data["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return data

    def record_outputs(self, paths: Sequence[str]) -> None:
        self.outputs.extend(str(p) for p in paths)
