"""
DTOs de las peticiones de los subcomandos.
"""
from dataclasses import dataclass
from typing import Any, Dict, Optional

from core.config.settings import settings
from core.exceptions.custom_exceptions import ConfigurationException


def _optional_float(data: Dict[str, Any], key: str) -> Optional[float]:
    value = data.get(key)
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigurationException(f"{key} debe ser numérico")


def _optional_int(data: Dict[str, Any], key: str, minimum: int = 1) -> Optional[int]:
    value = data.get(key)
    if value is None:
        return None
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise ConfigurationException(f"{key} debe ser entero")
    if value < minimum:
        raise ConfigurationException(f"{key} debe ser >= {minimum}")
    return value


@dataclass(frozen=True)
class RunRequest:
    """
    Opciones comunes: --config, --eps y --out.

    Attributes:
        command: Subcomando
        config_path: Archivo YAML de la corrida
        eps: Parámetro de perturbación (None = valor de la configuración)
        out_dir: Directorio de salida
    """
    command: str
    config_path: str
    eps: Optional[float]
    out_dir: str

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunRequest":
        if not isinstance(data, dict):
            raise ConfigurationException("Petición inválida")
        command = str(data.get("command", "")).strip()
        if not command:
            raise ConfigurationException("Campo requerido faltante: command")
        eps = _optional_float(data, "eps")
        if eps is not None and eps == 0.0 and command in ("interface", "greens-check", "pipeline"):
            raise ConfigurationException(f"{command} requiere eps != 0")
        return cls(
            command=command,
            config_path=str(data.get("config") or settings.default_config_path),
            eps=eps,
            out_dir=str(data.get("out") or settings.output_dir),
        )


@dataclass(frozen=True)
class BandsRequest:
    run: RunRequest
    grid: Optional[int]
    n_bands: Optional[int]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BandsRequest":
        return cls(
            run=RunRequest.from_dict(dict(data, command="bands")),
            grid=_optional_int(data, "grid", minimum=4),
            n_bands=_optional_int(data, "n_bands", minimum=2),
        )


@dataclass(frozen=True)
class GreensCheckRequest:
    run: RunRequest
    lambda_re: Optional[float]
    lambda_im: float

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GreensCheckRequest":
        return cls(
            run=RunRequest.from_dict(dict(data, command="greens-check")),
            lambda_re=_optional_float(data, "lambda_re"),
            lambda_im=_optional_float(data, "lambda_im") or 0.0,
        )


@dataclass(frozen=True)
class InterfaceRequest:
    run: RunRequest
    scan_grid: Optional[int]
    window: Optional[int]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "InterfaceRequest":
        return cls(
            run=RunRequest.from_dict(dict(data, command=data.get("command") or "interface")),
            scan_grid=_optional_int(data, "scan_grid", minimum=3),
            window=_optional_int(data, "window", minimum=2),
        )


@dataclass(frozen=True)
class SupercellRequest:
    run: RunRequest
    n_cells: Optional[int]
    bc: Optional[str]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SupercellRequest":
        bc = data.get("bc")
        if bc is not None and bc not in ("neumann", "dirichlet"):
            raise ConfigurationException("bc debe ser neumann o dirichlet")
        return cls(
            run=RunRequest.from_dict(dict(data, command="supercell")),
            n_cells=_optional_int(data, "n_cells", minimum=1),
            bc=bc,
        )
