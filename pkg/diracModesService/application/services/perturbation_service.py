"""
PerturbationService - Acoplamiento t*, matriz reducida y verificación de las asintóticas
del gap, de las autofunciones y del pliegue frente a autosoluciones discretas exactas.
"""
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse.linalg as spla

from application.services.band_service import BandService
from core.config.settings import settings
from core.logging.logger import get_band_logger
from core.utils import loglog_slope, parallel_map
from domain.entities.bands import DiracData
from domain.entities.coupling import CouplingData
from domain.entities.forms import AssembledForms
from domain.entities.reports import CheckReport
from domain.value_objects.reduced_matrix import ReducedMatrix


def _m_angle(a: np.ndarray, b: np.ndarray, M) -> float:
    """Ángulo entre los subespacios generados por a y b en el producto de M."""
    ab = abs(a.conj() @ (M @ b))
    na = np.sqrt(abs(np.real(a.conj() @ (M @ a))))
    nb = np.sqrt(abs(np.real(b.conj() @ (M @ b))))
    return float(np.arccos(np.clip(ab / (na * nb), 0.0, 1.0)))


class PerturbationService:
    """
    Servicio de perturbación del punto de Dirac.
    """

    def __init__(self, bands: Optional[BandService] = None):
        self._bands = bands or BandService()
        self._logger = get_band_logger()

    def compute_coupling(self, dirac: DiracData, forms: AssembledForms) -> CouplingData:
        """
        t* = -lambda* v_n^H M_dir v_m y las integrales diagonales análogas.

        Args:
            dirac: Datos del punto de Dirac
            forms: Formas ensambladas

        Returns:
            CouplingData
        """
        v_n, v_m = dirac.v_n_star, dirac.v_m_star
        M_dir = forms.M_dir
        t_star = complex(-dirac.lambda_star * (v_n.conj() @ (M_dir @ v_m)))
        diag_n = complex(-dirac.lambda_star * (v_n.conj() @ (M_dir @ v_n)))
        diag_m = complex(-dirac.lambda_star * (v_m.conj() @ (M_dir @ v_m)))
        scale = max(1.0, spla.norm(M_dir, 1) / max(spla.norm(forms.M_base, 1), 1e-300))
        coupling = CouplingData(
            t_star=t_star,
            diag_n=diag_n,
            diag_m=diag_m,
            relaxed_condition_margin=float(2.0 * abs(t_star) - abs(diag_n + diag_m)),
            tolerance=1e-10 * dirac.lambda_star * scale,
        )
        self._logger.info(
            f"Acoplamiento: t*={t_star:.8g}, diag_n={abs(diag_n):.2e}, diag_m={abs(diag_m):.2e}, "
            f"margen={coupling.relaxed_condition_margin:.6g}"
        )
        if not coupling.accepted:
            self._logger.warning("El acoplamiento no abre el gap local (t* nulo o condición relajada violada)")
        return coupling

    def gauge_check(self, dirac: DiracData, forms: AssembledForms, phase_n: float, phase_m: float) -> float:
        """Diferencia relativa de |t*| tras multiplicar v_n, v_m por exp(i*phase)."""
        v_n = dirac.v_n_star * np.exp(1j * phase_n)
        v_m = dirac.v_m_star * np.exp(1j * phase_m)
        rotated = abs(dirac.lambda_star * (v_n.conj() @ (forms.M_dir @ v_m)))
        reference = abs(dirac.lambda_star * (dirac.v_n_star.conj() @ (forms.M_dir @ dirac.v_m_star)))
        return float(abs(rotated - reference) / max(reference, 1e-300))

    @staticmethod
    def reduced_dispersion(coupling: CouplingData, dirac: DiracData, eps: float, p: float) -> Tuple[float, float]:
        """lambda* -/+ sqrt(alpha^2 p^2 + |t*|^2 eps^2)."""
        radius = ReducedMatrix.branch_radius(dirac.alpha, coupling.t_star, eps, p)
        return dirac.lambda_star - radius, dirac.lambda_star + radius

    @staticmethod
    def reduced_matrix(
        coupling: CouplingData, dirac: DiracData, eps: float, p: float, lambda1: complex
    ) -> ReducedMatrix:
        return ReducedMatrix(
            alpha=dirac.alpha,
            t_star=coupling.t_star,
            eps=eps,
            p=p,
            lambda1=lambda1,
            diag_n=coupling.diag_n,
            diag_m=coupling.diag_m,
        )

    def _in_regime(self, dirac: DiracData, coupling: CouplingData, eps: float, p: float, gate: float) -> bool:
        limit = gate * dirac.lambda_star
        return abs(dirac.alpha * p) <= limit and coupling.abs_t * abs(eps) <= limit

    def sweep_points(
        self, dirac: DiracData, coupling: CouplingData, eps_list: Iterable[float], p_factors: Iterable[float]
    ) -> list:
        """Pares (eps, p) con alpha*p = factor*|t*|*eps."""
        p_factors = list(p_factors)
        return [
            (float(eps), float(f * coupling.abs_t * abs(eps) / dirac.alpha))
            for eps in eps_list for f in p_factors
        ]

    def gap_asymptotics_check(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        coupling: CouplingData,
        points: Sequence[Tuple[float, float]],
        gate_fraction: float = 1e-2,
    ) -> CheckReport:
        """
        Compara las dos bandas discretas exactas con lambda* -/+ sqrt(alpha^2 p^2 + |t*|^2 eps^2).

        Args:
            points: Pares (eps, p)
            gate_fraction: Régimen asintótico |alpha p|, |t* eps| <= gate_fraction * lambda*

        Returns:
            CheckReport con defectos relativos y orden ajustado
        """
        j = dirac.band_indices[0]
        report = CheckReport(
            name="gap_asymptotics",
            columns=("eps", "p", "exact_lower", "exact_upper", "model_lower", "model_upper",
                     "defect", "gap_ratio"),
        )
        gated = [(e, p) for e, p in points if self._in_regime(dirac, coupling, e, p, gate_fraction)]
        skipped = len(points) - len(gated)
        if skipped:
            self._logger.info(f"gap_asymptotics: {skipped} puntos fuera del régimen asintótico")

        def solve(point):
            eps, p = point
            values, _, _ = self._bands.solve_at(forms, p, eps, j + 2)
            return values[j], values[j + 1]

        exact = parallel_map(solve, gated)
        scales, defects = [], []
        for (eps, p), (lo, hi) in zip(gated, exact):
            model_lo, model_hi = self.reduced_dispersion(coupling, dirac, eps, p)
            radius = model_hi - dirac.lambda_star
            defect = max(abs(lo - model_lo), abs(hi - model_hi)) / radius if radius > 0 else abs(hi - lo)
            gap_ratio = (hi - lo) / (2.0 * radius) if radius > 0 else 1.0
            report.add_row(eps, p, lo, hi, model_lo, model_hi, defect, gap_ratio)
            if radius > 0:
                scales.append(abs(p) + abs(eps))
                defects.append(defect)
        report.summary["fitted_order"] = loglog_slope(scales, defects)
        report.summary["max_defect"] = float(max(defects)) if defects else 0.0
        report.summary["gate_fraction"] = gate_fraction
        report.summary["skipped_points"] = skipped
        return report

    def eigenfunction_asymptotics_check(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        coupling: CouplingData,
        eps: float,
        p_values: Sequence[float],
        gate_fraction: float = 1e-2,
    ) -> CheckReport:
        """
        Ángulo entre el autovector discreto exacto de la banda inferior y f v_n + v_m
        (gauge periódico, producto de M(eps)). Se mide también en -p.
        """
        j = dirac.band_indices[0]
        M = forms.mass(eps)
        report = CheckReport(
            name="eigenfunction_asymptotics",
            columns=("eps", "p", "coefficient_re", "coefficient_im", "coefficient_abs",
                     "angle", "angle_mirror", "angle_net"),
        )
        floor = self._discretization_floor(forms, dirac)
        for p in p_values:
            if not self._in_regime(dirac, coupling, eps, p, gate_fraction):
                continue
            angles = []
            coefficient = 0j
            for sign in (1.0, -1.0):
                q = sign * p
                radius = ReducedMatrix.branch_radius(dirac.alpha, coupling.t_star, eps, q)
                reduced = self.reduced_matrix(coupling, dirac, eps, q, -radius)
                c_n, c_m = reduced.kernel_vector()
                if sign > 0:
                    coefficient = complex(c_n)
                predicted = c_n * dirac.v_n_star + c_m * dirac.v_m_star
                values, vectors, _ = self._bands.solve_at(forms, q, eps, j + 2)
                if values[j + 1] - values[j] <= settings.degeneracy_rel_tol * dirac.lambda_star:
                    self._logger.warning(f"Autovector degenerado en (eps={eps:g}, p={q:g}); se omite")
                    angles.append(float("nan"))
                    continue
                angles.append(_m_angle(vectors[:, j], predicted, M))
            report.add_row(eps, p, coefficient.real, coefficient.imag, abs(coefficient),
                           angles[0], angles[1], max(angles[0] - floor, 0.0))
        report.summary["discretization_floor"] = floor
        angles = [a for a in report.column("angle_net") if np.isfinite(a)]
        report.summary["max_angle_net"] = float(max(angles)) if angles else 0.0
        return report

    def _discretization_floor(self, forms: AssembledForms, dirac: DiracData, p: float = 1e-6) -> float:
        """Ángulo entre v_m y el autovector exacto de la banda inferior en eps = 0, p -> 0+."""
        j = dirac.band_indices[0]
        _, vectors, _ = self._bands.solve_at(forms, p, 0.0, j + 2)
        return _m_angle(vectors[:, j], dirac.v_m_star, forms.M_base)

    def fold_asymptotics_check(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        offsets: Sequence[float],
    ) -> CheckReport:
        """
        Muestrea la banda de pliegue cerca de +q* y -q*: |lambda - lambda*|, la derivada de
        Hellmann-Feynman y la distancia al autovector en q* (su imagen espejo en -q*).
        """
        band = dirac.fold_band
        report = CheckReport(
            name="fold_asymptotics",
            columns=("eps", "p", "value_defect", "bound_ratio", "slope_defect", "vector_angle"),
        )
        reference = dirac.fold_vector
        mirrored = forms.P_mirror @ reference
        M = forms.mass(eps)
        offsets = [0.0] + [s * abs(d) for d in offsets for s in (-1.0, 1.0)]
        for center, sign, vector in ((dirac.q_star, 1.0, reference), (-dirac.q_star, -1.0, mirrored)):
            for offset in offsets:
                p = center + offset
                pair = self._bands.eigenpair_at(forms, p, eps, band)
                slope = self._bands.group_velocity(forms, pair, eps)
                value_defect = abs(pair.value - dirac.lambda_star)
                distance = abs(offset) + abs(eps)
                report.add_row(
                    eps, p, value_defect,
                    value_defect / distance if distance > 0 else 0.0,
                    abs(slope - sign * dirac.fold_slope),
                    _m_angle(pair.vector, vector, M),
                )
        ratios = report.column("bound_ratio")
        report.summary["fitted_constant"] = float(max(ratios)) if ratios else 0.0
        report.summary["max_slope_defect"] = float(max(report.column("slope_defect")))
        return report
