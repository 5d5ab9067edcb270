"""
Entidades de estructura de bandas: pares de Bloch, diagramas y datos del punto de Dirac.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class BlochEigenpair:
    """
    Par propio de Bloch (gauge periódico).

    Attributes:
        p: Cuasimomento
        value: Autovalor
        vector: Coeficientes sobre gdl, normalizados en M
        band_ascending: Índice ascendente (base 0)
        band_analytic: Índice analítico, si se conoce
        spectral_gap: Distancia al autovalor vecino más cercano
        residual: ||A v - value M v|| / ||A||
        left_vector: Autovector izquierdo (solo pencils no hermitianos)
    """
    p: complex
    value: complex
    vector: np.ndarray
    band_ascending: int
    band_analytic: Optional[int] = None
    spectral_gap: float = float("inf")
    residual: float = 0.0
    left_vector: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class BandDiagram:
    """
    Diagrama de bandas sobre una malla real de cuasimomentos.

    Attributes:
        p_grid: Malla ordenada en [-pi, pi)
        eps: Parámetro de perturbación
        values: Autovalores (G, B), orden ascendente por fila
        vectors: Autovectores (G, D, B), normalizados en M
        analytic_map: (G, B); analytic_map[k, a] = índice ascendente de la banda analítica a en p_k
        residuals: Residuos relativos (G, B)
    """
    p_grid: np.ndarray
    eps: float
    values: np.ndarray
    vectors: np.ndarray
    analytic_map: np.ndarray
    residuals: np.ndarray

    @property
    def n_bands(self) -> int:
        return int(self.values.shape[1])

    @property
    def n_points(self) -> int:
        return int(self.p_grid.size)

    def index_of(self, p: float, tol: float = 1e-12) -> int:
        matches = np.flatnonzero(np.abs(self.p_grid - p) <= tol)
        if matches.size == 0:
            raise KeyError(f"p={p} no pertenece a la malla")
        return int(matches[0])

    def pair(self, k: int, band: int) -> BlochEigenpair:
        row = self.values[k]
        gaps = np.abs(np.delete(row, band) - row[band])
        analytic = int(np.flatnonzero(self.analytic_map[k] == band)[0])
        return BlochEigenpair(
            p=float(self.p_grid[k]),
            value=float(row[band]),
            vector=self.vectors[k, :, band],
            band_ascending=band,
            band_analytic=analytic,
            spectral_gap=float(gaps.min()) if gaps.size else float("inf"),
            residual=float(self.residuals[k, band]),
        )

    def bands(self) -> Iterator[List[BlochEigenpair]]:
        for band in range(self.n_bands):
            yield [self.pair(k, band) for k in range(self.n_points)]

    def analytic_values(self) -> np.ndarray:
        """Autovalores reordenados por etiqueta analítica (G, B)."""
        return np.take_along_axis(self.values, self.analytic_map, axis=1)

    def min_band_gaps(self) -> np.ndarray:
        """Mínimo sobre la malla de lambda_{b+1} - lambda_b para cada par ascendente consecutivo."""
        return np.diff(self.values, axis=1).min(axis=0)

    def rows(self) -> List[Tuple[float, int, int, float]]:
        """Filas (p, banda ascendente, banda analítica, lambda) para exportar."""
        out = []
        for k, p in enumerate(self.p_grid):
            inverse = np.argsort(self.analytic_map[k])
            for band in range(self.n_bands):
                out.append((float(p), band, int(inverse[band]), float(self.values[k, band])))
        return out


@dataclass(frozen=True, eq=False)
class DiracData:
    """
    Punto de Dirac y base de flujo diagonal en p = 0.

    Attributes:
        lambda_star: Energía del punto de Dirac
        alpha: Pendiente del cono (> 0)
        v_n_star: Modo que se propaga a la derecha (flujo +i alpha/2), normalizado en M_base
        v_m_star: P_mirror v_n_star (flujo -i alpha/2)
        q_star: Cruce de pliegue en (0, pi)
        band_indices: Par ascendente (base 0) degenerado en p = 0
        fold_band: Banda ascendente que vuelve a lambda* en q*
        fold_slope: lambda_f'(q*)
        fold_vector: Autovector de la banda de pliegue en q*
        tolerance_report: Márgenes y defectos medidos
    """
    lambda_star: float
    alpha: float
    v_n_star: np.ndarray
    v_m_star: np.ndarray
    q_star: float
    band_indices: Tuple[int, int]
    fold_band: int
    fold_slope: float
    fold_vector: np.ndarray
    tolerance_report: Dict[str, float] = field(default_factory=dict)

    def summary(self) -> Dict[str, float]:
        data = {
            "lambda_star": self.lambda_star,
            "alpha": self.alpha,
            "q_star": self.q_star,
            "band_n_star": self.band_indices[0] + 1,
            "fold_band": self.fold_band + 1,
            "fold_slope": self.fold_slope,
        }
        data.update(self.tolerance_report)
        return data
