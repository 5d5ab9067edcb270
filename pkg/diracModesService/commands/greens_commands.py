"""
Comandos de la función de Green: greens-check y limit-study.
"""
import click

from application.dto.run_requests import GreensCheckRequest, RunRequest
from application.use_cases.pipeline_use_cases import GreensCheckUseCase, LimitStudyUseCase
from commands.options import emit, run_options
from core.exceptions.cli_handlers import handle_cli_errors


@click.command("greens-check")
@run_options
@click.option("--lambda-re", "lambda_re", type=float, default=None, help="Re(lambda); por defecto muestras en I_eps")
@click.option("--lambda-im", "lambda_im", type=float, default=0.0, help="Im(lambda)")
@handle_cli_errors
def greens_check_command(config, eps, out, lambda_re, lambda_im):
    """Identidad de residuos, independencia del contorno, raíces complejas, salto y radiación."""
    request = GreensCheckRequest.from_dict({
        "config": config, "eps": eps, "out": out, "lambda_re": lambda_re, "lambda_im": lambda_im,
    })
    emit(GreensCheckUseCase().execute(request))


@click.command("limit-study")
@run_options
@handle_cli_errors
def limit_study_command(config, eps, out):
    """Convergencia de G^Gamma_eps hacia 2T + w beta(h) P^Dirac."""
    request = RunRequest.from_dict({"command": "limit-study", "config": config, "eps": eps, "out": out})
    emit(LimitStudyUseCase().execute(request))


commands = [greens_check_command, limit_study_command]
