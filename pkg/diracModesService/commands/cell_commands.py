"""
Comandos de la celda y de la estructura de bandas: mesh, bands, dirac.
"""
import click

from application.dto.run_requests import BandsRequest, RunRequest
from application.use_cases.pipeline_use_cases import BandsUseCase, DiracUseCase, MeshUseCase
from commands.options import emit, run_options
from core.exceptions.cli_handlers import handle_cli_errors


@click.command("mesh")
@run_options
@handle_cli_errors
def mesh_command(config, eps, out):
    """Malla de la celda (listado NODE/ELEM/EDGE) y sus estadísticas."""
    request = RunRequest.from_dict({"command": "mesh", "config": config, "eps": eps, "out": out})
    emit(MeshUseCase().execute(request))


@click.command("bands")
@run_options
@click.option("--grid", type=int, default=None, help="N: la malla tiene 2N puntos en [-pi, pi)")
@click.option("--n-bands", "n_bands", type=int, default=None, help="Número de bandas")
@handle_cli_errors
def bands_command(config, eps, out, grid, n_bands):
    """Diagrama de bandas con etiquetado ascendente y analítico."""
    request = BandsRequest.from_dict(
        {"config": config, "eps": eps, "out": out, "grid": grid, "n_bands": n_bands}
    )
    emit(BandsUseCase().execute(request))


@click.command("dirac")
@run_options
@handle_cli_errors
def dirac_command(config, eps, out):
    """Punto de Dirac, base de flujo diagonal y cruce de pliegue q*."""
    request = RunRequest.from_dict({"command": "dirac", "config": config, "eps": eps, "out": out})
    emit(DiracUseCase().execute(request))


commands = [mesh_command, bands_command, dirac_command]
