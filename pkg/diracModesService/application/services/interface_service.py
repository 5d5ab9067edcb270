"""
InterfaceService - Operador de interfaz G^Gamma_eps, búsqueda del valor característico,
modo bifurcado y operador límite eps -> 0.
"""
from dataclasses import replace
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from application.services.band_service import normal_derivative_trace
from application.services.greens_service import GreensService
from core.config.settings import settings
from core.exceptions.custom_exceptions import MomentCountException, RefinementStagnationException
from core.logging.logger import get_interface_logger
from core.utils import circle_trapezoid, exponential_rate, loglog_slope, parallel_map
from domain.entities.bands import DiracData
from domain.entities.coupling import CouplingData
from domain.entities.forms import AssembledForms
from domain.entities.greens import RadiationSplit
from domain.entities.interface import (
    INTERFACE,
    RESONANT,
    InterfaceOperatorSample,
    LimitOperator,
    ModeResult,
)
from domain.entities.reports import CheckReport
from domain.value_objects.contour import ContourSpec

ContourFactory = Callable[[float], ContourSpec]


class InterfaceService:
    """
    Servicio del problema de interfaz.

    Toda energía se parametriza como lambda = lambda* + eps*h con |h| < c0|t*|.
    """

    def __init__(self, greens: Optional[GreensService] = None):
        self._greens = greens or GreensService()
        self._logger = get_interface_logger()

    # --- operador ---

    def assemble_interface_operator(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        h: complex,
        contour: ContourSpec,
    ) -> InterfaceOperatorSample:
        """
        Suma de las muestras continuadas en +eps y -eps en lambda = lambda* + eps h.

        Args:
            forms: Formas ensambladas
            dirac: Datos del punto de Dirac
            eps: Parámetro de perturbación
            h: Energía reescalada
            contour: Contorno C_eps (depende solo de |eps|)

        Returns:
            InterfaceOperatorSample
        """
        eps = abs(float(eps))
        lam = dirac.lambda_star + eps * complex(h)
        plus = self._greens.assemble_continued_operator(forms, dirac, eps, lam, contour)
        minus = self._greens.assemble_continued_operator(forms, dirac, -eps, lam, contour)
        matrix = plus.matrix + minus.matrix
        singular = np.linalg.svd(matrix, compute_uv=False)
        return InterfaceOperatorSample(
            h=complex(h),
            lam=complex(lam),
            eps=eps,
            matrix=matrix,
            sigma_min=float(singular[-1]),
            sigma_max=float(singular[0]),
            plus=plus,
            minus=minus,
        )

    def operator_derivative(
        self, forms: AssembledForms, dirac: DiracData, eps: float, h: complex, contour: ContourSpec
    ) -> np.ndarray:
        """d/dh de G^Gamma_eps(lambda* + eps h)."""
        eps = abs(float(eps))
        lam = dirac.lambda_star + eps * complex(h)
        return eps * (
            self._greens.continued_operator_derivative(forms, dirac, eps, lam, contour)
            + self._greens.continued_operator_derivative(forms, dirac, -eps, lam, contour)
        )

    # --- conteo por momentos ---

    def moment_count(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        coupling: CouplingData,
        eps: float,
        contour: ContourSpec,
        c0: float,
        n_nodes: Optional[int] = None,
    ) -> complex:
        """(1/2pi i) contour integral de tr(G(h)^-1 G'(h)) dh sobre |h| = c0|t*|."""
        n_nodes = n_nodes or settings.moment_nodes
        h_nodes, dh = circle_trapezoid(0.0, c0 * coupling.abs_t, n_nodes)

        def integrand(h):
            sample = self.assemble_interface_operator(forms, dirac, eps, h, contour)
            derivative = self.operator_derivative(forms, dirac, eps, h, contour)
            return np.trace(np.linalg.solve(sample.matrix, derivative))

        values = parallel_map(integrand, list(h_nodes))
        total = complex(np.sum(np.asarray(values) * dh) / (2j * np.pi))
        self._logger.info(f"Momento en |h|={c0 * coupling.abs_t:.4g}: {total.real:.6f}{total.imag:+.2e}i")
        return total

    def rouche_stability(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        coupling: CouplingData,
        eps: float,
        contour: ContourSpec,
        c0: float,
        n_nodes: Optional[int] = None,
        factors: Sequence[float] = (0.8, 1.2),
    ) -> Dict[float, int]:
        """Conteos con el radio perturbado; solo radios dentro de |h| < |t*|."""
        counts = {}
        for factor in factors:
            if factor * c0 >= 1.0:
                continue
            moment = self.moment_count(forms, dirac, coupling, eps, contour, factor * c0, n_nodes)
            counts[float(factor)] = int(round(moment.real))
        return counts

    # --- refinamiento ---

    def _singular_pair(self, matrix: np.ndarray) -> Tuple[float, float, np.ndarray, np.ndarray]:
        U, S, Vh = np.linalg.svd(matrix)
        return float(S[-1]), float(S[0]), U[:, -1], Vh[-1].conj()

    def refine(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        coupling: CouplingData,
        eps: float,
        contour: ContourSpec,
        c0: float,
        simplex_budget: int = 200,
        newton_max_iter: int = 30,
        sigma_rel_tol: Optional[float] = None,
        h_start: complex = 0j,
    ) -> Tuple[complex, np.ndarray, float, float]:
        """
        Nelder-Mead sobre log sigma_min(h) con símplex inicial fijo y Newton sobre el funcional
        de Rayleigh y^H G(h) x del par singular más pequeño.

        Returns:
            (h, phi, sigma_min, sigma_min/sigma_max)

        Raises:
            RefinementStagnationException: sigma_min no baja de la tolerancia
        """
        tol = sigma_rel_tol or settings.sigma_rel_tol
        scale = coupling.abs_t
        radius = c0 * scale

        def objective(x):
            h = scale * complex(x[0], x[1])
            if abs(h) >= radius:
                return 1e3 + abs(h) / scale
            sample = self.assemble_interface_operator(forms, dirac, eps, h, contour)
            return float(np.log(max(sample.relative_sigma, 1e-300)))

        x0 = np.array([h_start.real, h_start.imag]) / scale
        step = 0.1 * c0
        simplex = np.array([x0, x0 + [step, 0.0], x0 + [0.0, step]])
        result = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"initial_simplex": simplex, "maxfev": simplex_budget, "xatol": 1e-7, "fatol": 1e-9},
        )
        h = scale * complex(result.x[0], result.x[1])
        self._logger.info(f"Símplex: h={h:.8g}, log sigma_rel={result.fun:.3f} ({result.nfev} evaluaciones)")

        sigma = smax = 0.0
        x = None
        for iteration in range(newton_max_iter + 1):
            sample = self.assemble_interface_operator(forms, dirac, eps, h, contour)
            sigma, smax, y, x = self._singular_pair(sample.matrix)
            if sigma <= tol * smax:
                self._logger.info(f"Newton: h={h:.12g}, sigma_rel={sigma / smax:.2e} ({iteration} pasos)")
                return h, x, sigma, sigma / smax
            if iteration == newton_max_iter:
                break
            derivative = self.operator_derivative(forms, dirac, eps, h, contour)
            slope = y.conj() @ derivative @ x
            if slope == 0:
                break
            h = h - (y.conj() @ sample.matrix @ x) / slope
            if abs(h) >= radius:
                break
        raise RefinementStagnationException(
            f"Refinamiento estancado en h={h:.8g}: sigma_rel={sigma / max(smax, 1e-300):.2e} > {tol:.1e}"
        )

    # --- búsqueda completa ---

    def find_characteristic_value(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        coupling: CouplingData,
        eps: float,
        contour: ContourSpec,
        c0: float = 0.5,
        moment_nodes: Optional[int] = None,
        simplex_budget: int = 200,
        newton_max_iter: int = 30,
        sigma_rel_tol: Optional[float] = None,
        window_cells: int = 8,
    ) -> ModeResult:
        """
        Conteo por momentos, refinamiento, acoplamientos, clasificación y campo del modo.

        Raises:
            MomentCountException: el conteo no es exactamente 1
            RefinementStagnationException: el refinamiento no alcanza la tolerancia
        """
        eps = abs(float(eps))
        moment = self.moment_count(forms, dirac, coupling, eps, contour, c0, moment_nodes)
        count = int(round(moment.real))
        if abs(moment - count) > 0.25:
            self._logger.warning(f"Momento lejos de un entero: {moment:.6g}")
        if count != 1:
            raise MomentCountException(count)

        h, phi, sigma, sigma_rel = self.refine(
            forms, dirac, coupling, eps, contour, c0, simplex_budget, newton_max_iter, sigma_rel_tol
        )
        lam = dirac.lambda_star + eps * h
        trace = self._greens.trace_grid(forms)

        self_convergence = max(
            self._greens.self_convergence(forms, dirac, eps, lam, contour),
            self._greens.self_convergence(forms, dirac, -eps, lam, contour),
        )
        roots_plus = self._greens.find_complex_roots(forms, dirac, eps, lam)
        roots_minus = self._greens.find_complex_roots(forms, dirac, -eps, lam)
        coupling_plus = self._greens.coupling_amplitude(forms, dirac, eps, roots_plus.q_plus, phi)
        coupling_minus = self._greens.coupling_amplitude(forms, dirac, -eps, roots_minus.q_minus, phi)
        scale = trace.norm(phi) * trace.norm(trace.restrict(dirac.fold_vector))
        tolerance = 10.0 * max(self_convergence, 1e-12)
        relative = max(abs(coupling_plus), abs(coupling_minus)) / max(scale, 1e-300)
        classification = INTERFACE if relative <= tolerance else RESONANT
        amp_plus = -1j * coupling_plus / roots_plus.slope_plus

        field = self.mode_field(forms, dirac, eps, lam, phi, contour, window_cells)
        rate_right, rate_left = self.decay_rates(field, window_cells)
        energy = self.energy_residual(forms, eps, lam, field)
        acausal = self.violates_causality(lam, coupling.abs_t, eps)
        if acausal:
            self._logger.warning(f"Im(lambda) = {lam.imag:.3e} > 0 en el valor característico")
        self._logger.info(
            f"Valor característico: lambda={lam:.12g} (h={h:.8g}), acoplamiento relativo {relative:.2e} "
            f"-> {classification}"
        )
        return ModeResult(
            lambda_found=complex(lam),
            h_found=complex(h),
            eps=eps,
            phi=phi,
            coupling_plus=complex(coupling_plus),
            coupling_minus=complex(coupling_minus),
            coupling_tolerance=tolerance,
            classification=classification,
            moment_count=count,
            moment_value=moment,
            sigma_min=sigma,
            sigma_rel=sigma_rel,
            self_convergence=self_convergence,
            amp_plus=complex(amp_plus),
            rate_right=rate_right,
            rate_left=rate_left,
            energy_residual=energy,
            causality_violation=acausal,
            mode_field=field,
        )

    @staticmethod
    def violates_causality(lam: complex, abs_t: float, eps: float) -> bool:
        """Im(lambda) > 0 más allá de 1e-8 |t*| eps (la tolerancia del refinamiento)."""
        return bool(complex(lam).imag > 1e-8 * abs_t * abs(eps))

    @staticmethod
    def growth_rate_ratio(result: ModeResult, split: RadiationSplit) -> float:
        """Tasa de crecimiento del campo a la derecha frente a |Im q_+|."""
        growth = abs(split.roots.q_plus.imag)
        return result.rate_right / growth if growth > 0 else float("nan")

    # --- campo del modo ---

    def mode_field(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        lam: complex,
        phi: np.ndarray,
        contour: ContourSpec,
        window_cells: int,
    ) -> Dict[int, np.ndarray]:
        """
        u = +G~_eps phi a la derecha de la traza y -G~_{-eps} phi a la izquierda, por celda k.
        En la celda 0 cada mitad toma su lado; la clave 0 guarda la mezcla.
        """
        eps = abs(float(eps))
        cells = list(range(-window_cells, window_cells + 1))
        right = self._greens.volume_field(forms, dirac, eps, lam, phi, contour, [k for k in cells if k >= 0])
        left = self._greens.volume_field(forms, dirac, -eps, lam, phi, contour, [k for k in cells if k <= 0])
        x_hat = forms.mesh.trace_x
        field = {k: right[k] for k in cells if k > 0}
        field.update({k: -left[k] for k in cells if k < 0})
        field[0] = np.where(x_hat >= 0.0, right[0], -left[0])
        field["0-"] = -left[0]
        field["0+"] = right[0]
        return field

    @staticmethod
    def decay_rates(field: Dict, window_cells: int) -> Tuple[float, float]:
        """Tasas log-lineales de max|u| por celda a cada lado (k = 1..K)."""
        cells = np.arange(1, window_cells + 1)
        right = [float(np.abs(field[int(k)]).max()) for k in cells]
        left = [float(np.abs(field[int(-k)]).max()) for k in cells]
        return exponential_rate(cells, right)[0], exponential_rate(cells, left)[0]

    def energy_residual(self, forms: AssembledForms, eps: float, lam: complex, field: Dict) -> float:
        """
        |sum_k (u^H K u - lam u^H M_k u)| / sum_k u^H K u sobre la ventana, con M_k en +eps a la
        derecha y -eps a la izquierda de la traza.
        """
        mesh = forms.mesh
        right_mask = mesh.element_centroids[:, 0] > 0.5
        assembly = self._greens.assembly
        full = forms.node_forms
        half_right = assembly.assemble_node_forms(mesh, forms.index, right_mask)
        half_left = assembly.assemble_node_forms(mesh, forms.index, ~right_mask)
        total = 0j
        stiffness = 0.0
        for key, u in field.items():
            if key == 0:
                continue
            if key == "0+":
                K, M = half_right.K, half_right.mass(eps)
            elif key == "0-":
                K, M = half_left.K, half_left.mass(-eps)
            else:
                K, M = full.K, full.mass(eps if key > 0 else -eps)
            ku = np.real(u.conj() @ (K @ u))
            total += ku - lam * (u.conj() @ (M @ u))
            stiffness += ku
        return float(abs(total) / max(stiffness, 1e-300))

    # --- operador límite ---

    def assemble_limit_operator(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        coupling: CouplingData,
        beta_variant: str = "squared",
        dirac_weight: float = 2.0,
        n_nodes: Optional[int] = None,
        tau_list: Sequence[float] = (1e-2, 5e-3, 2.5e-3),
    ) -> LimitOperator:
        """2T + dirac_weight * beta(h) * P^Dirac con T del servicio de Green en eps = 0."""
        T, diagnostics = self._greens.limit_T(forms, dirac, n_nodes, tau_list)
        trace = self._greens.trace_grid(forms)
        tr = trace.restrict(dirac.v_n_star)
        p_dirac = np.outer(tr, np.conj(tr)) * trace.weights[None, :]
        return LimitOperator(
            T_matrix=T,
            p_dirac=p_dirac,
            abs_t=coupling.abs_t,
            alpha=dirac.alpha,
            beta_variant=beta_variant,
            dirac_weight=dirac_weight,
            diagnostics=diagnostics,
        )

    def kernel_defect(self, forms: AssembledForms, dirac: DiracData, limit: LimitOperator) -> float:
        """||T d_x1 v_n|_Gamma|| / (||T|| ||d_x1 v_n|_Gamma||)."""
        trace = self._greens.trace_grid(forms)
        derivative = normal_derivative_trace(dirac.v_n_star, forms.mesh, trace)
        image = limit.T_matrix @ derivative
        return float(
            np.linalg.norm(image) / max(np.linalg.norm(limit.T_matrix, 2) * np.linalg.norm(derivative), 1e-300)
        )

    def convergence_study(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        limit: LimitOperator,
        contour_factory: ContourFactory,
        eps_list: Sequence[float],
        h_samples: Sequence[complex],
        alternative_weights: Sequence[float] = (1.0,),
    ) -> CheckReport:
        """
        ||G^Gamma_eps(lambda* + eps h) - (2T + w beta(h) P)|| por (eps, h) para ambas variantes de beta.

        La monotonía se exige por cada h fijo. En el eps más pequeño se mide también la distancia
        con los pesos alternativos de la dyada de Dirac.
        """
        report = CheckReport(
            name="limit_convergence",
            columns=("eps", "h_re", "h_im", "difference_squared", "difference_linear", "relative_squared"),
        )
        eps_list = sorted((abs(e) for e in eps_list), reverse=True)
        per_h = {variant: np.zeros((len(eps_list), len(h_samples))) for variant in ("squared", "linear")}
        alternatives = {w: replace(limit, dirac_weight=float(w)) for w in alternative_weights}
        alternative_distance = {w: 0.0 for w in alternatives}
        for i, eps in enumerate(eps_list):
            contour = contour_factory(eps)
            last = i == len(eps_list) - 1
            for j, h in enumerate(h_samples):
                sample = self.assemble_interface_operator(forms, dirac, eps, h, contour)
                reference = limit.matrix(h, "squared")
                d_sq = float(np.linalg.norm(sample.matrix - reference, 2))
                d_lin = float(np.linalg.norm(sample.matrix - limit.matrix(h, "linear"), 2))
                per_h["squared"][i, j] = d_sq
                per_h["linear"][i, j] = d_lin
                report.add_row(eps, complex(h).real, complex(h).imag, d_sq, d_lin,
                               d_sq / max(np.linalg.norm(reference, 2), 1e-300))
                if last:
                    for w, other in alternatives.items():
                        distance = float(np.linalg.norm(sample.matrix - other.matrix(h), 2))
                        alternative_distance[w] = max(alternative_distance[w], distance)
        for variant, table in per_h.items():
            report.summary[f"fitted_order_{variant}"] = loglog_slope(eps_list, table.max(axis=1))
            report.summary[f"monotone_{variant}"] = bool(np.all(np.diff(table, axis=0) <= 0))
        report.summary["smallest_eps_difference"] = float(per_h[limit.beta_variant][-1].max())
        for w, distance in alternative_distance.items():
            report.summary[f"smallest_eps_difference_weight_{w:g}"] = distance
        report.summary["beta_variant_default"] = limit.beta_variant
        report.summary["dirac_weight"] = limit.dirac_weight
        return report

    def scan_sigma_min(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        contour: ContourSpec,
        h_values: Sequence[float],
        limit: Optional[LimitOperator] = None,
    ) -> CheckReport:
        """sigma_min de G^Gamma_eps (y del operador límite si se da) sobre una malla real de h."""
        report = CheckReport(name="sigma_scan", columns=("h", "sigma_min", "sigma_rel", "sigma_min_limit"))
        samples = parallel_map(
            lambda h: self.assemble_interface_operator(forms, dirac, eps, h, contour), list(h_values)
        )
        for h, sample in zip(h_values, samples):
            limit_sigma = limit.sigma_min(h) if limit is not None else float("nan")
            report.add_row(float(h), sample.sigma_min, sample.relative_sigma, limit_sigma)
        sigmas = report.column("sigma_rel")
        report.summary["argmin_h"] = float(h_values[int(np.argmin(sigmas))])
        return report
