"""
Value Object TraceGrid - discretización de la línea de traza x1 = 1/2.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from domain.entities.mesh import Mesh


@dataclass(frozen=True, eq=False)
class TraceGrid:
    """
    Nodos de traza con pesos del trapecio.

    Attributes:
        node_ids: Índices de nodo sobre la línea, ordenados por x2
        coordinates: Ordenadas x2 de esos nodos
        weights: Pesos del trapecio (suma = longitud de la traza fuera de obstáculos)
        dof_ids: Grado de libertad periódico de cada nodo
        n_dofs: Dimensión del espacio de gdl
    """
    node_ids: np.ndarray
    coordinates: np.ndarray
    weights: np.ndarray
    dof_ids: np.ndarray
    n_dofs: int

    @classmethod
    def from_mesh(cls, mesh: Mesh) -> "TraceGrid":
        node_ids = np.asarray(mesh.trace_nodes, dtype=np.int64)
        position = {int(n): i for i, n in enumerate(node_ids)}
        weights = np.zeros(node_ids.size)
        for a, b in mesh.trace_edges:
            length = abs(mesh.nodes[b, 1] - mesh.nodes[a, 1])
            weights[position[int(a)]] += 0.5 * length
            weights[position[int(b)]] += 0.5 * length
        keep = weights > 0.0
        node_ids = node_ids[keep]
        return cls(
            node_ids=node_ids,
            coordinates=mesh.nodes[node_ids, 1].copy(),
            weights=weights[keep],
            dof_ids=mesh.dof_of_node[node_ids].copy(),
            n_dofs=mesh.n_dofs,
        )

    @property
    def size(self) -> int:
        return int(self.node_ids.size)

    @property
    def length(self) -> float:
        return float(self.weights.sum())

    @cached_property
    def restriction(self) -> sp.csr_matrix:
        """Tr (T x D): valores nodales sobre la traza."""
        return sp.csr_matrix(
            (np.ones(self.size), (np.arange(self.size), self.dof_ids)),
            shape=(self.size, self.n_dofs),
        )

    @cached_property
    def extension(self) -> sp.csr_matrix:
        """Ext = Tr^T diag(w) (D x T): densidad en la traza -> vector de carga."""
        return (self.restriction.T @ sp.diags(self.weights)).tocsr()

    def restrict(self, vector: np.ndarray) -> np.ndarray:
        return self.restriction @ vector

    def pairing(self, phi: np.ndarray, psi: np.ndarray) -> complex:
        """Producto dual bilineal <phi, psi> = sum w phi psi."""
        return complex(np.sum(self.weights * phi * psi))

    def integral(self, values: np.ndarray) -> complex:
        return complex(np.sum(self.weights * values))

    def norm(self, values: np.ndarray) -> float:
        """Norma L2 ponderada sobre la traza."""
        return float(np.sqrt(np.sum(self.weights * np.abs(values) ** 2)))
