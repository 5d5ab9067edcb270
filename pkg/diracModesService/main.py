"""
Punto de entrada del laboratorio: grupo click que registra los comandos de cada módulo.
"""
import click

from commands import cell_commands, greens_commands, interface_commands, perturbation_commands, supercell_commands
from core.config.dependencies import initialize_dependencies
from core.config.settings import settings
from core.logging.logger import LoggerFactory, get_app_logger

COMMAND_MODULES = (cell_commands, perturbation_commands, greens_commands, interface_commands, supercell_commands)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--log-level", "log_level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
    help="Nivel de logging (por defecto LOG_LEVEL o INFO)",
)
@click.version_option(settings.version, prog_name=settings.app_name)
def cli(log_level):
    """Bifurcación de modos de interfaz desde un punto de Dirac plegado en una guía periódica."""
    LoggerFactory.set_level(log_level or settings.log_level)
    initialize_dependencies()
    get_app_logger().debug(f"{settings.app_name} {settings.version} ({settings.environment})")


for module in COMMAND_MODULES:
    for command in module.commands:
        cli.add_command(command)


if __name__ == "__main__":
    cli()
