"""
Entidades de formas ensambladas (matrices P1) de la celda.
"""
import itertools
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
import scipy.sparse as sp

from domain.entities.mesh import Mesh
from domain.value_objects.index_field import IndexField

_TOKENS = itertools.count()


@dataclass(frozen=True, eq=False)
class NodeForms:
    """
    Matrices a nivel de nodo (sin identificación periódica).

    Attributes:
        K: Rigidez  int grad u . grad v
        C_raw: int (d u/d x1) v  (fila = test, columna = trial)
        M0: Masa  int u v
        M_base: int n^2 u v
        M_dir: int 2 n dn u v
        M_dir2: int dn^2 u v
    """
    K: sp.csr_matrix
    C_raw: sp.csr_matrix
    M0: sp.csr_matrix
    M_base: sp.csr_matrix
    M_dir: sp.csr_matrix
    M_dir2: sp.csr_matrix

    def mass(self, eps: float) -> sp.csr_matrix:
        return (self.M_base + eps * self.M_dir + eps * eps * self.M_dir2).tocsr()


@dataclass(frozen=True, eq=False)
class AssembledForms:
    """
    Formas del pencil de Bloch A(p) = K - 2ip C + p^2 M0, M(eps) = M_base + eps M_dir + eps^2 M_dir2
    sobre los grados de libertad periódicos.

    Attributes:
        mesh: Malla de origen
        index: Índice de refracción
        K, C, M0, M_base, M_dir, M_dir2: Matrices dispersas (gdl periódicos); C antisimétrica
        P_mirror: Permutación espejo sobre gdl
        positivity_bound: Mayor |eps| con n + eps dn > 0 en todos los puntos de cuadratura
        node_forms: Las mismas formas a nivel de nodo
    """
    mesh: Mesh
    index: IndexField
    K: sp.csr_matrix
    C: sp.csr_matrix
    M0: sp.csr_matrix
    M_base: sp.csr_matrix
    M_dir: sp.csr_matrix
    M_dir2: sp.csr_matrix
    P_mirror: sp.csr_matrix
    positivity_bound: float
    node_forms: NodeForms
    _checked_masses: Dict[float, bool] = field(default_factory=dict, repr=False)
    # clave de caché única por ensamblado
    token: int = field(default_factory=lambda: next(_TOKENS), repr=False)

    @property
    def dimension(self) -> int:
        return int(self.K.shape[0])

    def mass(self, eps: float) -> sp.csr_matrix:
        return (self.M_base + eps * self.M_dir + eps * eps * self.M_dir2).tocsr()

    def pencil_derivative(self, p: complex) -> sp.csr_matrix:
        """A'(p) = -2i C + 2p M0."""
        return (-2j * self.C + 2.0 * p * self.M0).tocsr()

    def has_direction(self) -> bool:
        return self.M_dir.count_nonzero() > 0 and np.abs(self.M_dir.data).max() > 0.0
