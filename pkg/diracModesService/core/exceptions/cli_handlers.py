"""
Manejo global de errores del CLI.
Estandariza el código de salida y el mensaje de error para todos los subcomandos.
"""
import functools
import sys

import click

from core.exceptions.custom_exceptions import (
    AssumptionException,
    ConfigurationException,
    DiracModesBaseException,
    DomainException,
    SolverException,
)
from core.logging.logger import get_app_logger

logger = get_app_logger()

EXIT_OK = 0
EXIT_UNHANDLED = 1
EXIT_CONFIG = 3
EXIT_ASSUMPTION = 4
EXIT_SOLVER = 5


def _error_line(message: str, code: str) -> str:
    return f"ERROR [{code}] {message}"


def exit_code_for(error: BaseException) -> int:
    """Código de salida asociado a una excepción."""
    if isinstance(error, (ConfigurationException, DomainException)):
        return EXIT_CONFIG
    if isinstance(error, AssumptionException):
        return EXIT_ASSUMPTION
    if isinstance(error, SolverException):
        return EXIT_SOLVER
    return EXIT_UNHANDLED


def handle_cli_errors(command):
    """Decorador que traduce las excepciones del laboratorio a códigos de salida."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (ConfigurationException, DomainException) as error:
            logger.warning(f"Configuración rechazada: {error.code} - {error.message}")
            click.echo(_error_line(error.message, error.code), err=True)
            sys.exit(EXIT_CONFIG)
        except AssumptionException as error:
            logger.warning(f"Hipótesis no satisfecha: {error.code} - {error.message}")
            click.echo(_error_line(error.message, error.code), err=True)
            sys.exit(EXIT_ASSUMPTION)
        except SolverException as error:
            logger.error(f"Fallo numérico: {error.code} - {error.message}")
            click.echo(_error_line(error.message, error.code), err=True)
            sys.exit(EXIT_SOLVER)
        except DiracModesBaseException as error:
            logger.error(f"DiracModesBaseException: {error.code} - {error.message}")
            click.echo(_error_line(error.message, error.code), err=True)
            sys.exit(EXIT_UNHANDLED)
        except click.exceptions.Exit:
            raise
        except Exception as error:
            logger.exception(f"Excepción no controlada: {error}")
            click.echo(_error_line("Error interno", "UNHANDLED_ERROR"), err=True)
            sys.exit(EXIT_UNHANDLED)

    return wrapper
