"""
Configuración centralizada del entorno de ejecución.
Usa Pydantic para validación; los parámetros físicos viven en el YAML de la corrida (run_config).
"""
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import AliasChoices, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Cargar .env explícitamente antes de crear Settings
env_files = [
    Path(__file__).parent.parent.parent.parent / ".env",  # raíz del repositorio
    Path.cwd() / ".env",
]

for env_file in env_files:
    if env_file.exists():
        load_dotenv(env_file)
        break


class Settings(BaseSettings):
    """
    Configuración de la aplicación con validación.
    Las variables se cargan desde .env automáticamente.
    """

    # Configuración general
    app_name: str = "Dirac Modes Lab"
    version: str = "1.0.0"
    environment: str = Field(default="development", validation_alias=AliasChoices("ENVIRONMENT", "environment"))

    # Rutas
    default_config_path: str = Field(
        default="config/default.yaml",
        validation_alias=AliasChoices("DIRAC_MODES_CONFIG", "default_config_path"),
    )
    output_dir: str = Field(default="out", validation_alias=AliasChoices("DIRAC_MODES_OUT", "output_dir"))

    # Concurrencia: única variable de entorno que toca los cálculos
    max_workers: Optional[int] = Field(
        default=None,
        validation_alias=AliasChoices("DIRAC_MODES_THREADS", "max_workers"),
    )

    # Autosolver
    dense_eigen_limit: int = 3000

    # Tolerancias numéricas
    degeneracy_rel_tol: float = 1e-6
    root_tol: float = 1e-10
    sigma_rel_tol: float = 1e-8
    hermitian_rel_tol: float = 1e-12
    overlap_threshold: float = 0.8

    # Cuadraturas por defecto
    contour_nodes: int = 64
    arc_nodes: int = 64
    moment_nodes: int = 64

    # Logging
    log_level: str = Field(default="INFO", validation_alias=AliasChoices("LOG_LEVEL", "log_level"))
    log_file: Optional[str] = Field(default=None, validation_alias=AliasChoices("LOG_FILE", "log_file"))

    @field_validator("max_workers")
    @classmethod
    def check_workers(cls, v):
        """El número de hilos debe ser positivo."""
        if v is not None and v <= 0:
            raise ValueError("DIRAC_MODES_THREADS debe ser mayor que cero")
        return v

    @field_validator(
        "dense_eigen_limit", "contour_nodes", "arc_nodes", "moment_nodes",
        "degeneracy_rel_tol", "root_tol", "sigma_rel_tol", "hermitian_rel_tol",
    )
    @classmethod
    def check_positive(cls, v):
        """Tamaños y tolerancias estrictamente positivos."""
        if v <= 0:
            raise ValueError("debe ser mayor que cero")
        return v

    # Pydantic v2 Settings configuration
    model_config = SettingsConfigDict(
        env_file=(".env",),
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        populate_by_name=True,
    )


# Instancia global de configuración
settings = Settings()
