"""
Opciones compartidas por los subcomandos (--config, --eps, --out) y emisión del resultado.
"""
import click

from core.logging.logger import get_app_logger

logger = get_app_logger()


def run_options(command):
    """Agrega --config, --eps y --out."""
    command = click.option(
        "--out", "out", type=click.Path(file_okay=False), default=None,
        help="Directorio de salida (por defecto DIRAC_MODES_OUT o ./out)",
    )(command)
    command = click.option("--eps", "eps", type=float, default=None, help="Parámetro de perturbación")(command)
    command = click.option(
        "--config", "config", type=click.Path(dir_okay=False), default=None,
        help="Archivo YAML de la corrida",
    )(command)
    return command


def emit(outputs):
    """Imprime una línea por archivo escrito."""
    for path in outputs:
        click.echo(path)
    logger.debug(f"{len(outputs)} archivos emitidos")
