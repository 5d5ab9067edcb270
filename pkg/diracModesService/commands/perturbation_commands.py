"""
Comandos de perturbación: coupling, check-gap, check-eigvec, check-fold.
"""
import click

from application.dto.run_requests import RunRequest
from application.use_cases.pipeline_use_cases import (
    CouplingUseCase,
    EigvecCheckUseCase,
    FoldCheckUseCase,
    GapCheckUseCase,
)
from commands.options import emit, run_options
from core.exceptions.cli_handlers import handle_cli_errors


def _request(name, config, eps, out) -> RunRequest:
    return RunRequest.from_dict({"command": name, "config": config, "eps": eps, "out": out})


@click.command("coupling")
@run_options
@handle_cli_errors
def coupling_command(config, eps, out):
    """Acoplamiento t* y las integrales diagonales."""
    emit(CouplingUseCase().execute(_request("coupling", config, eps, out)))


@click.command("check-gap")
@run_options
@handle_cli_errors
def check_gap_command(config, eps, out):
    """Bandas exactas frente a lambda* -/+ sqrt(alpha^2 p^2 + |t*|^2 eps^2)."""
    emit(GapCheckUseCase().execute(_request("check-gap", config, eps, out)))


@click.command("check-eigvec")
@run_options
@handle_cli_errors
def check_eigvec_command(config, eps, out):
    """Ángulo entre el autovector exacto y la combinación f v_n + v_m."""
    emit(EigvecCheckUseCase().execute(_request("check-eigvec", config, eps, out)))


@click.command("check-fold")
@run_options
@handle_cli_errors
def check_fold_command(config, eps, out):
    """Banda de pliegue cerca de +-q*."""
    emit(FoldCheckUseCase().execute(_request("check-fold", config, eps, out)))


commands = [coupling_command, check_gap_command, check_eigvec_command, check_fold_command]
