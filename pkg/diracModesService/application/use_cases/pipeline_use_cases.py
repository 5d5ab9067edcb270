"""
Casos de uso de los subcomandos: cada uno carga la configuración, ejecuta las etapas que necesita
y emite sus tablas y el manifiesto en el directorio de salida.
"""
import time
from contextlib import contextmanager
from typing import Dict, List, Optional

import numpy as np

from application.dto.run_requests import (
    BandsRequest,
    GreensCheckRequest,
    InterfaceRequest,
    RunRequest,
    SupercellRequest,
)
from application.services.band_service import BandService
from core.config.dependencies import get_service
from core.config.run_config import RunConfig
from core.config.settings import settings
from core.exceptions.custom_exceptions import VanishingCouplingException
from core.logging.logger import get_application_logger
from domain.entities.bands import BandDiagram, DiracData
from domain.entities.coupling import CouplingData
from domain.entities.forms import AssembledForms
from domain.entities.interface import ModeResult
from domain.entities.mesh import Mesh
from domain.entities.reports import CheckReport, RunManifest
from domain.entities.supercell import SupercellResult
from domain.repositories.report_repository import ReportRepository
from domain.value_objects.contour import ContourSpec
from infrastructure.persistence.csv_report_repository import CsvReportRepository


def key_value_report(name: str, data: Dict[str, object]) -> CheckReport:
    report = CheckReport(name=name, columns=("quantity", "value"))
    for key in sorted(data):
        report.add_row(key, data[key])
    return report


class LabSession:
    """
    Estado de una corrida: configuración, malla, formas, punto de Dirac y acoplamiento,
    construidos bajo demanda y cronometrados para el manifiesto.
    """

    def __init__(self, request: RunRequest, reports: Optional[ReportRepository] = None):
        self.request = request
        self.config = RunConfig.from_yaml(request.config_path)
        self.reports = reports or CsvReportRepository(request.out_dir)
        self.manifest = RunManifest(
            command=request.command,
            config_hash=self.config.config_hash(),
            version=settings.version,
        )
        self.logger = get_application_logger()
        self._mesh: Optional[Mesh] = None
        self._forms: Optional[AssembledForms] = None
        self._diagram: Optional[BandDiagram] = None
        self._dirac: Optional[DiracData] = None
        self._coupling: Optional[CouplingData] = None
        self.logger.info(
            f"Corrida '{request.command}': config={request.config_path} "
            f"(sha256 {self.manifest.config_hash[:12]}), salida={request.out_dir}"
        )

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.manifest.timings[name] = self.manifest.timings.get(name, 0.0) + time.perf_counter() - start

    def eps(self, default: float) -> float:
        return float(self.request.eps) if self.request.eps is not None else float(default)

    @property
    def mesh(self) -> Mesh:
        if self._mesh is None:
            with self.stage("mesh"):
                self._mesh = get_service("MeshService").build_mesh(self.config.cell_geometry())
            self.manifest.mesh = self._mesh.statistics().to_dict()
        return self._mesh

    @property
    def forms(self) -> AssembledForms:
        if self._forms is None:
            mesh = self.mesh
            with self.stage("assembly"):
                self._forms = get_service("AssemblyService").assemble_forms(mesh, self.config.index_field())
        return self._forms

    def dirac_diagram(self) -> BandDiagram:
        if self._diagram is None:
            forms = self.forms
            cfg = self.config.dirac
            with self.stage("bands_eps0"):
                grid = BandService.symmetric_grid(cfg.grid_points // 2)
                self._diagram = get_service("BandService").solve_bands(forms, grid, 0.0, cfg.n_bands)
        return self._diagram

    @property
    def dirac(self) -> DiracData:
        if self._dirac is None:
            diagram = self.dirac_diagram()
            cfg = self.config.dirac
            with self.stage("dirac"):
                self._dirac = get_service("BandService").find_dirac(
                    diagram, self.forms, cfg.lambda_guess, cfg.degeneracy_rel_tol
                )
        return self._dirac

    def coupling(self, strict: bool = True) -> CouplingData:
        if self._coupling is None:
            dirac = self.dirac
            with self.stage("coupling"):
                self._coupling = get_service("PerturbationService").compute_coupling(dirac, self.forms)
        if strict and not self._coupling.accepted:
            raise VanishingCouplingException(
                f"t*={self._coupling.t_star:.6g} (tolerancia {self._coupling.tolerance:.2e}), "
                f"margen de la condición relajada {self._coupling.relaxed_condition_margin:.6g}"
            )
        return self._coupling

    def contour(self, eps: float, radius_scale: float = 1.0, kind: str = "C_eps") -> ContourSpec:
        cfg = self.config.contours
        return get_service("GreensService").contour_for(
            self.dirac, self.coupling(), eps,
            piece_nodes=cfg.piece_nodes,
            arc_nodes=cfg.arc_nodes,
            radius_exponent=cfg.radius_exponent,
            radius_scale=radius_scale,
            kind=kind,
        )

    def finish(self) -> List[str]:
        cfg = self.config
        self.manifest.tolerances = {
            "degeneracy_rel_tol": cfg.dirac.degeneracy_rel_tol,
            "root_tol": settings.root_tol,
            "sigma_rel_tol": cfg.search.sigma_rel_tol,
            "hermitian_rel_tol": settings.hermitian_rel_tol,
            "overlap_threshold": settings.overlap_threshold,
            "self_convergence_tol": cfg.contours.self_convergence_tol,
            "gate_fraction": cfg.perturbation.gate_fraction,
        }
        self.manifest.quadrature = {
            "grid_points": cfg.dirac.grid_points,
            "piece_nodes": cfg.contours.piece_nodes,
            "arc_nodes": cfg.contours.arc_nodes,
            "moment_nodes": cfg.search.moment_nodes,
            "dense_eigen_limit": settings.dense_eigen_limit,
        }
        self.reports.write_manifest(self.manifest)
        self.logger.info(f"Corrida '{self.request.command}' terminada: {len(self.manifest.outputs)} archivos")
        return list(self.manifest.outputs)


# --- cell_model / band_structure ---

class MeshUseCase:
    def execute(self, request: RunRequest) -> List[str]:
        session = LabSession(request)
        mesh = session.mesh
        path = get_service("MeshService").export_mesh(mesh, session.reports.path_for("mesh.txt"))
        session.reports.register(path)
        session.reports.write_report(key_value_report("mesh_statistics", mesh.statistics().to_dict()))
        return session.finish()


class BandsUseCase:
    """Diagrama de bandas con ambos etiquetados (2*N_grid*n_bands filas)."""

    def execute(self, request: BandsRequest) -> List[str]:
        session = LabSession(request.run)
        cfg = session.config.dirac
        grid_half = request.grid or max(cfg.grid_points // 2, 2)
        n_bands = request.n_bands or cfg.n_bands
        eps = session.eps(0.0)
        forms = session.forms
        with session.stage("bands"):
            diagram = get_service("BandService").solve_bands(
                forms, BandService.symmetric_grid(grid_half), eps, n_bands
            )
        session.reports.write_rows(
            "bands", ("p", "band_ascending", "band_analytic", "lambda"), diagram.rows()
        )
        gaps = {f"gap_{b + 1}_{b + 2}": float(g) for b, g in enumerate(diagram.min_band_gaps())}
        gaps.update(eps=eps, max_residual=float(diagram.residuals.max()))
        session.reports.write_report(key_value_report("band_gaps", gaps))
        return session.finish()


class DiracUseCase:
    def execute(self, request: RunRequest) -> List[str]:
        session = LabSession(request)
        dirac = session.dirac
        session.reports.write_report(key_value_report("dirac", dirac.summary()))
        return session.finish()


# --- perturbation ---

class CouplingUseCase:
    def execute(self, request: RunRequest) -> List[str]:
        session = LabSession(request)
        coupling = session.coupling(strict=False)
        perturbation = get_service("PerturbationService")
        data = coupling.to_dict()
        data["gauge_defect"] = perturbation.gauge_check(session.dirac, session.forms, 0.7, -1.3)
        session.reports.write_report(key_value_report("coupling", data))
        outputs = session.finish()
        session.coupling(strict=True)
        return outputs


class GapCheckUseCase:
    def execute(self, request: RunRequest) -> List[str]:
        session = LabSession(request)
        cfg = session.config.perturbation
        dirac, coupling = session.dirac, session.coupling()
        perturbation = get_service("PerturbationService")
        eps_list = [request.eps] if request.eps is not None else cfg.eps_list
        points = perturbation.sweep_points(dirac, coupling, eps_list, cfg.p_factors)
        with session.stage("check_gap"):
            report = perturbation.gap_asymptotics_check(session.forms, dirac, coupling, points, cfg.gate_fraction)
        session.reports.write_report(report)
        return session.finish()


class EigvecCheckUseCase:
    def execute(self, request: RunRequest) -> List[str]:
        session = LabSession(request)
        cfg = session.config.perturbation
        dirac, coupling = session.dirac, session.coupling()
        eps = session.eps(min(cfg.eps_list, key=abs))
        p_values = [f * coupling.abs_t * abs(eps) / dirac.alpha for f in cfg.p_factors]
        with session.stage("check_eigvec"):
            report = get_service("PerturbationService").eigenfunction_asymptotics_check(
                session.forms, dirac, coupling, eps, p_values, cfg.gate_fraction
            )
        session.reports.write_report(report)
        return session.finish()


class FoldCheckUseCase:
    def execute(self, request: RunRequest) -> List[str]:
        session = LabSession(request)
        eps = session.eps(session.config.checks.eps)
        with session.stage("check_fold"):
            report = get_service("PerturbationService").fold_asymptotics_check(
                session.forms, session.dirac, eps, session.config.perturbation.fold_offsets
            )
        session.reports.write_report(report)
        return session.finish()


# --- greens ---

class GreensCheckUseCase:
    """
    Identidad de residuos, independencia del contorno, raíces complejas, salto de la derivada
    normal, condición de radiación, identidad del resolvente y exportación de la matriz del operador.
    """

    def execute(self, request: GreensCheckRequest) -> List[str]:
        session = LabSession(request.run)
        greens = get_service("GreensService")
        checks = session.config.checks
        eps = session.eps(checks.eps)
        forms, dirac, coupling = session.forms, session.dirac, session.coupling()
        contour = session.contour(eps)
        alternative = session.contour(eps, radius_scale=0.5, kind="C_tilde_tau")
        spread = coupling.abs_t * abs(eps)
        if request.lambda_re is not None:
            energies = [complex(request.lambda_re, request.lambda_im)]
        else:
            energies = [complex(dirac.lambda_star + f * spread) for f in checks.lambda_offsets]

        with session.stage("residue_identity"):
            residue = None
            for lam in energies:
                if lam.imag != 0.0:
                    continue
                part = greens.residue_identity_check(
                    forms, dirac, eps, lam.real, contour, session.config.contours.tau_list
                )
                if residue is None:
                    residue = part
                else:
                    residue.rows.extend(part.rows)
                    residue.summary["max_discrepancy"] = max(
                        residue.summary["max_discrepancy"], part.summary["max_discrepancy"]
                    )
            if residue is not None:
                session.reports.write_report(residue)

        trace = greens.trace_grid(forms)
        phi = np.ones(trace.size, dtype=complex)
        report = CheckReport(
            name="contour_independence",
            columns=("lambda_re", "lambda_im", "independence", "self_convergence", "schwarz_defect",
                     "jump_variational_defect", "jump_gradient_defect", "mirror_defect"),
        )
        with session.stage("contour_independence"):
            for lam in energies:
                jump = greens.jump_check(forms, dirac, eps, lam, phi, contour)
                report.add_row(
                    lam.real, lam.imag,
                    greens.contour_independence(forms, dirac, eps, lam, contour, alternative),
                    greens.self_convergence(forms, dirac, eps, lam, contour),
                    greens.schwarz_defect(forms, dirac, eps, lam, contour),
                    jump["variational_defect"], jump["gradient_defect"], jump["mirror_defect"],
                )
            report.summary["resolvent_identity_defect"] = greens.resolvent_identity_defect(
                forms, 0.3, eps, dirac.lambda_star + 0.5 * spread, phi
            )
            report.summary["cauchy_defect"] = greens.cauchy_defect(
                forms, dirac, eps, complex(dirac.lambda_star, 0.25 * spread), 0.1 * spread, contour
            )
        session.reports.write_report(report)

        with session.stage("radiation_condition"):
            radiation = greens.radiation_condition_check(
                forms, dirac, eps, energies[0], phi, contour, session.config.search.window_cells
            )
        session.reports.write_report(radiation)

        roots = CheckReport(
            name="complex_roots",
            columns=("lambda_re", "lambda_im", "q_plus_re", "q_plus_im", "q_minus_re", "q_minus_im",
                     "antisymmetry", "residual", "sign_consistent"),
        )
        with session.stage("complex_roots"):
            for a in (-0.5, 0.0, 0.5):
                for b in (-0.5, 0.0, 0.5):
                    lam = complex(dirac.lambda_star + a * spread, b * spread)
                    root = greens.find_complex_roots(forms, dirac, eps, lam)
                    roots.add_row(
                        lam.real, lam.imag, root.q_plus.real, root.q_plus.imag,
                        root.q_minus.real, root.q_minus.imag, abs(root.q_plus + root.q_minus),
                        root.residual, bool(root.branch_certificate["consistent"]),
                    )
        roots.summary["all_consistent"] = all(roots.column("sign_consistent"))
        roots.summary["max_residual"] = float(max(roots.column("residual")))
        session.reports.write_report(roots)

        sample = greens.assemble_continued_operator(forms, dirac, eps, energies[0], contour)
        session.reports.write_matrix("greens_operator", sample.matrix)
        return session.finish()


# --- interface_solver ---

def field_rows(forms: AssembledForms, field: Dict) -> List[tuple]:
    """Filas (x1, x2, re u, im u) por celda entera del campo, con x1 medido desde la traza."""
    mesh = forms.mesh
    rows = []
    for k in sorted(key for key in field if isinstance(key, int)):
        values = field[k]
        x1 = k + mesh.trace_x
        for node in np.lexsort((mesh.nodes[:, 1], x1)):
            rows.append((float(x1[node]), float(mesh.nodes[node, 1]),
                         float(values[node].real), float(values[node].imag)))
    return rows


class InterfaceUseCase:
    """Conteo, valor característico, clasificación, barrido de sigma_min y campo del modo."""

    def run(self, session: LabSession, request: InterfaceRequest) -> ModeResult:
        cfg = session.config.search
        interface = get_service("InterfaceService")
        greens = get_service("GreensService")
        eps = abs(session.eps(session.config.checks.eps))
        forms, dirac, coupling = session.forms, session.dirac, session.coupling()
        contour = session.contour(eps)
        window = request.window or cfg.window_cells

        with session.stage("interface"):
            result = interface.find_characteristic_value(
                forms, dirac, coupling, eps, contour,
                c0=cfg.c0,
                moment_nodes=cfg.moment_nodes,
                simplex_budget=cfg.simplex_budget,
                newton_max_iter=cfg.newton_max_iter,
                sigma_rel_tol=cfg.sigma_rel_tol,
                window_cells=window,
            )
            stability = interface.rouche_stability(forms, dirac, coupling, eps, contour, cfg.c0, cfg.moment_nodes)

        summary = result.summary()
        summary.update({f"moment_count_radius_{f:g}": n for f, n in stability.items()})
        if not result.is_interface:
            with session.stage("radiation"):
                split = greens.radiation_split(
                    forms, dirac, eps, result.lambda_found, result.phi, contour, n_cells=window
                )
            summary.update({
                "amp_minus_abs": abs(split.amp_minus),
                "q_plus_re": split.roots.q_plus.real,
                "q_plus_im": split.roots.q_plus.imag,
                "remainder_rate_right": split.rate_right,
                "remainder_rate_left": split.rate_left,
                "growth_rate_ratio": interface.growth_rate_ratio(result, split),
            })
        session.reports.write_report(key_value_report("interface_mode", summary))
        session.reports.write_matrix("interface_density", result.phi[None, :])
        session.reports.write_rows("mode_field", ("x1", "x2", "re_u", "im_u"), field_rows(forms, result.mode_field))

        n_scan = request.scan_grid or cfg.scan_grid
        h_values = np.linspace(-0.9, 0.9, n_scan) * coupling.abs_t
        with session.stage("sigma_scan"):
            limit = interface.assemble_limit_operator(
                forms, dirac, coupling, cfg.beta_variant, cfg.dirac_weight,
                session.config.contours.piece_nodes, session.config.contours.tau_list,
            )
            scan = interface.scan_sigma_min(forms, dirac, eps, contour, h_values, limit)
        session.reports.write_report(scan)
        return result

    def execute(self, request: InterfaceRequest) -> List[str]:
        session = LabSession(request.run)
        self.run(session, request)
        return session.finish()


class LimitStudyUseCase:
    """Convergencia de G^Gamma_eps hacia el operador límite y defecto del núcleo de T."""

    def execute(self, request: RunRequest) -> List[str]:
        session = LabSession(request)
        cfg, checks = session.config, session.config.checks
        interface = get_service("InterfaceService")
        forms, dirac, coupling = session.forms, session.dirac, session.coupling()
        with session.stage("limit_operator"):
            limit = interface.assemble_limit_operator(
                forms, dirac, coupling, cfg.search.beta_variant, cfg.search.dirac_weight,
                cfg.contours.piece_nodes, cfg.contours.tau_list,
            )
        h_samples = [f * coupling.abs_t for f in checks.h_samples_real] + [
            complex(a, b) * coupling.abs_t for a, b in checks.h_samples_complex
        ]
        eps_list = [request.eps] if request.eps is not None else checks.limit_eps_list
        with session.stage("limit_convergence"):
            report = interface.convergence_study(forms, dirac, limit, session.contour, eps_list, h_samples)
        report.summary["kernel_defect"] = interface.kernel_defect(forms, dirac, limit)
        report.summary.update(limit.diagnostics)
        session.reports.write_report(report)
        session.reports.write_matrix("limit_T", limit.T_matrix)
        return session.finish()


# --- supercell ---

class SupercellUseCase:
    """Autopares de la tira cerca de lambda*, puntuación de localización y estabilidad N -> N+2."""

    def run(self, session: LabSession, request: SupercellRequest) -> SupercellResult:
        cfg = session.config.supercell
        service = get_service("SupercellService")
        eps = session.eps(session.config.checks.eps)
        forms, dirac = session.forms, session.dirac
        coupling = session.coupling(strict=False)
        half = cfg.window_factor * coupling.abs_t * (abs(eps) if eps else session.config.checks.eps)
        with session.stage("supercell"):
            problem = service.build_problem(
                forms, eps,
                n_cells_per_side=request.n_cells or cfg.n_cells_per_side,
                truncation_bc=request.bc or cfg.bc,
                lambda_window=(dirac.lambda_star - half, dirac.lambda_star + half),
                n_eigs=cfg.n_eigs,
            )
            result = service.solve_supercell(forms, problem)
        session.reports.write_rows(
            "supercell_modes",
            ("lambda", "localization_score", "rate_right", "rate_left", "in_window"),
            [(m.value, m.localization_score, m.rate_right, m.rate_left, m.in_window) for m in result.modes],
        )
        best = max(result.modes, key=lambda m: m.localization_score)
        session.reports.write_rows(
            "supercell_field", ("x1", "re_u", "im_u"), service.field_slice(forms, problem, best.vector)
        )
        with session.stage("supercell_stability"):
            stability = service.stability_check(forms, result)
            stability.summary["boundary_shift"] = service.boundary_sensitivity(forms, problem, best.value)
            stability.summary["best_value"] = best.value
            stability.summary["best_score"] = best.localization_score
        session.reports.write_report(stability)
        return result

    def execute(self, request: SupercellRequest) -> List[str]:
        session = LabSession(request.run)
        self.run(session, request)
        return session.finish()


# --- pipeline ---

class PipelineUseCase:
    """dirac -> coupling -> interface -> supercell con el contraste entre ambos solvers."""

    def execute(self, request: InterfaceRequest) -> List[str]:
        session = LabSession(request.run)
        session.reports.write_report(key_value_report("dirac", session.dirac.summary()))
        coupling = session.coupling()
        session.reports.write_report(key_value_report("coupling", coupling.to_dict()))
        mode = InterfaceUseCase().run(session, request)
        cells = SupercellRequest(run=request.run, n_cells=None, bc=None)
        strip = SupercellUseCase().run(session, cells)

        nearest = strip.nearest(mode.lambda_found.real)
        tolerance = 1e-2 * coupling.abs_t * mode.eps
        data = {
            "classification": mode.classification,
            "lambda_interface_re": mode.lambda_found.real,
            "lambda_interface_im": mode.lambda_found.imag,
            "lambda_supercell": nearest.value,
            "difference": abs(nearest.value - mode.lambda_found.real),
            "tolerance": tolerance,
            "localization_score": nearest.localization_score,
            "rate_interface": mode.rate_right,
            "rate_supercell": nearest.rate_right,
        }
        if mode.is_interface:
            rate_ratio = nearest.rate_right / mode.rate_right if mode.rate_right else float("nan")
            data["rate_ratio"] = rate_ratio
            data["agreement"] = bool(
                data["difference"] <= tolerance and nearest.localization_score >= 0.8
                and abs(rate_ratio - 1.0) <= 0.1
            )
        else:
            data["localized_in_window"] = len(strip.localized())
            data["agreement"] = not strip.localized()
        session.reports.write_report(key_value_report("cross_check", data))
        session.logger.info(
            f"Contraste: lambda={mode.lambda_found:.10g} ({mode.classification}) frente a "
            f"supercelda {nearest.value:.10g}, acuerdo={data['agreement']}"
        )
        return session.finish()
