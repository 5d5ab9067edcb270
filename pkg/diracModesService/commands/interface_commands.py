"""
Comandos del problema de interfaz: interface y pipeline.
"""
import click

from application.dto.run_requests import InterfaceRequest
from application.use_cases.pipeline_use_cases import InterfaceUseCase, PipelineUseCase
from commands.options import emit, run_options
from core.exceptions.cli_handlers import handle_cli_errors


def interface_options(command):
    command = click.option("--window", type=int, default=None, help="Celdas por lado del campo del modo")(command)
    command = click.option("--scan-grid", "scan_grid", type=int, default=None, help="Puntos del barrido real de h")(
        command
    )
    return command


@click.command("interface")
@run_options
@interface_options
@handle_cli_errors
def interface_command(config, eps, out, scan_grid, window):
    """Conteo por momentos, valor característico, clasificación y campo del modo."""
    request = InterfaceRequest.from_dict({
        "command": "interface", "config": config, "eps": eps, "out": out,
        "scan_grid": scan_grid, "window": window,
    })
    emit(InterfaceUseCase().execute(request))


@click.command("pipeline")
@run_options
@interface_options
@handle_cli_errors
def pipeline_command(config, eps, out, scan_grid, window):
    """dirac -> coupling -> interface -> supercell con el contraste de ambos solvers."""
    request = InterfaceRequest.from_dict({
        "command": "pipeline", "config": config, "eps": eps, "out": out,
        "scan_grid": scan_grid, "window": window,
    })
    emit(PipelineUseCase().execute(request))


commands = [interface_command, pipeline_command]
