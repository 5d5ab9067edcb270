"""
Comando de la supercelda.
"""
import click

from application.dto.run_requests import SupercellRequest
from application.use_cases.pipeline_use_cases import SupercellUseCase
from commands.options import emit, run_options
from core.exceptions.cli_handlers import handle_cli_errors


@click.command("supercell")
@run_options
@click.option("--n-cells", "n_cells", type=int, default=None, help="Celdas completas por lado (N)")
@click.option("--bc", type=click.Choice(["neumann", "dirichlet"]), default=None, help="Truncamiento")
@handle_cli_errors
def supercell_command(config, eps, out, n_cells, bc):
    """Autopares de la tira de 2N+1 celdas cerca de lambda*."""
    request = SupercellRequest.from_dict(
        {"config": config, "eps": eps, "out": out, "n_cells": n_cells, "bc": bc}
    )
    emit(SupercellUseCase().execute(request))


commands = [supercell_command]
