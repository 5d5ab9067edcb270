"""
Sistema de logging centralizado para todo el laboratorio numérico.
Un logger por capa y por etapa del cálculo (malla, bandas, Green, interfaz, supercelda).

Los mensajes van a stderr: stdout queda reservado para las rutas que emite cada subcomando.
"""
import logging
import os
import sys
from pathlib import Path
from typing import Dict, Optional

LOG_FORMAT = '%(asctime)s [%(name)s] [%(levelname)s] %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


class LoggerFactory:
    """Factory para crear loggers configurados."""

    _loggers: Dict[str, logging.Logger] = {}
    _default_level: Optional[str] = None

    @staticmethod
    def _resolve(level: str) -> int:
        return getattr(logging, level.upper(), logging.INFO)

    @classmethod
    def get_logger(
        cls,
        name: str,
        log_file: Optional[str] = None,
        level: Optional[str] = None
    ) -> logging.Logger:
        """
        Obtiene o crea un logger configurado.

        Args:
            name: Nombre del logger (se antepone "dirac_modes.")
            log_file: Archivo de log (opcional, LOG_FILE)
            level: Nivel de logging (opcional; si no, --log-level o LOG_LEVEL)

        Returns:
            Logger configurado
        """
        if name in cls._loggers:
            return cls._loggers[name]

        logger = logging.getLogger(f"dirac_modes.{name}")
        logger.setLevel(cls._resolve(level or cls._default_level or os.getenv('LOG_LEVEL', 'INFO')))
        logger.propagate = False

        # Evitar duplicación de handlers
        if logger.hasHandlers():
            logger.handlers.clear()

        formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        if log_file:
            file_path = Path(log_file)
            file_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(file_path, encoding="utf-8")
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        cls._loggers[name] = logger
        return logger

    @classmethod
    def set_level(cls, level: str) -> None:
        """Cambia el nivel de todos los loggers ya creados (opción --log-level del CLI)."""
        cls._default_level = level
        for logger in cls._loggers.values():
            logger.setLevel(cls._resolve(level))


def _stage_logger(name: str) -> logging.Logger:
    return LoggerFactory.get_logger(name, os.getenv('LOG_FILE') or None)


# Loggers predefinidos
def get_app_logger() -> logging.Logger:
    """Logger principal del CLI."""
    return _stage_logger("app")


def get_application_logger() -> logging.Logger:
    """Logger de los casos de uso."""
    return _stage_logger("application")


def get_infrastructure_logger() -> logging.Logger:
    """Logger de persistencia, caché y container."""
    return _stage_logger("infrastructure")


def get_mesh_logger() -> logging.Logger:
    return _stage_logger("mesh")


def get_band_logger() -> logging.Logger:
    return _stage_logger("bands")


def get_greens_logger() -> logging.Logger:
    """Logger de la función de Green y de los contornos."""
    return _stage_logger("greens")


def get_interface_logger() -> logging.Logger:
    return _stage_logger("interface")


def get_supercell_logger() -> logging.Logger:
    return _stage_logger("supercell")
