"""
Entidades de la supercelda: tira finita de 2N+1 celdas con el índice n -/+ eps dn a cada lado.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True, eq=False)
class SupercellProblem:
    """
    Attributes:
        n_cells_per_side: N (celdas completas a cada lado de la celda central)
        truncation_bc: "neumann" o "dirichlet" en los extremos
        eps: Parámetro de perturbación
        lambda_window: Intervalo de energías alrededor de lambda*
        n_eigs: Autopares pedidos al solver
        K, M: Rigidez y masa de la tira (gdl libres)
        cell_maps: Índice global (o -1 si está fijado) de cada nodo local, por celda
        n_free: Grados de libertad libres
    """
    n_cells_per_side: int
    truncation_bc: str
    eps: float
    lambda_window: Tuple[float, float]
    n_eigs: int
    K: sp.csr_matrix
    M: sp.csr_matrix
    cell_maps: Dict[int, np.ndarray]
    n_free: int

    @property
    def cells(self) -> List[int]:
        return sorted(self.cell_maps)

    def cell_values(self, vector: np.ndarray, cell: int) -> np.ndarray:
        """Valores por nodo local de la celda (cero en gdl fijados)."""
        index = self.cell_maps[cell]
        out = np.zeros(index.size, dtype=vector.dtype)
        free = index >= 0
        out[free] = vector[index[free]]
        return out


@dataclass(frozen=True, eq=False)
class SupercellMode:
    """
    Attributes:
        value: Autovalor
        localization_score: Fracción de masa n^2 en |x| <= 2 (cuatro celdas centrales)
        rate_right, rate_left: Tasas log-lineales de max|u| por celda
        in_window: Autovalor dentro de lambda_window
        vector: Autovector (gdl libres), normalizado en M
    """
    value: float
    localization_score: float
    rate_right: float
    rate_left: float
    in_window: bool
    vector: np.ndarray


@dataclass(frozen=True, eq=False)
class SupercellResult:
    problem: SupercellProblem
    modes: List[SupercellMode] = field(default_factory=list)

    def localized(self, threshold: float = 0.8) -> List[SupercellMode]:
        return [m for m in self.modes if m.in_window and m.localization_score >= threshold]

    def nearest(self, value: float) -> SupercellMode:
        return min(self.modes, key=lambda m: abs(m.value - value))
