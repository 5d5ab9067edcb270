"""
Entidad Mesh - Triangulación conforme de la celda periódica.
Inmutable tras su construcción; los mapas derivados (grados de libertad, espejo, traza) se calculan bajo demanda.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Tuple

import numpy as np
import scipy.sparse as sp

from domain.value_objects.cell_geometry import MIRROR_LINE

NEUMANN = "neumann"
PERIODIC_LEFT = "periodic_left"
PERIODIC_RIGHT = "periodic_right"
TRACE_LINE = "trace_line"

EDGE_TAGS = (NEUMANN, PERIODIC_LEFT, PERIODIC_RIGHT, TRACE_LINE)

_COORD_DECIMALS = 10


def _coordinate_keys(points: np.ndarray) -> List[Tuple[float, float]]:
    rounded = np.round(points, _COORD_DECIMALS) + 0.0
    return [tuple(row) for row in rounded]


@dataclass(frozen=True)
class MeshStatistics:
    n_nodes: int
    n_elements: int
    n_dofs: int
    n_trace_nodes: int
    min_angle_deg: float
    max_element_diameter: float
    structured: bool

    def to_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "n_elements": self.n_elements,
            "n_dofs": self.n_dofs,
            "n_trace_nodes": self.n_trace_nodes,
            "min_angle_deg": round(self.min_angle_deg, 6),
            "max_element_diameter": round(self.max_element_diameter, 9),
            "structured": self.structured,
        }


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Malla P1 de la celda (0,1)x(0,H).

    Attributes:
        nodes: Coordenadas (N, 2)
        elements: Triángulos CCW (E, 3)
        boundary_edges: Aristas etiquetadas (B, 2)
        edge_tags: Etiqueta de cada arista en EDGE_TAGS
        periodic_pairing: Pares (nodo izquierdo, nodo derecho) con x2 idéntico
        trace_nodes: Nodos de la línea x1 = 1/2 ordenados por x2
        height: Altura de la franja
        structured: True si proviene del mallado estructurado de respaldo
    """
    nodes: np.ndarray
    elements: np.ndarray
    boundary_edges: np.ndarray
    edge_tags: Tuple[str, ...]
    periodic_pairing: np.ndarray
    trace_nodes: np.ndarray
    height: float
    structured: bool = False

    def __post_init__(self):
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2:
            raise ValueError("nodes debe tener forma (N, 2)")
        if self.elements.ndim != 2 or self.elements.shape[1] != 3:
            raise ValueError("elements debe tener forma (E, 3)")
        if len(self.edge_tags) != len(self.boundary_edges):
            raise ValueError("cada arista de borde necesita una etiqueta")
        if any(tag not in EDGE_TAGS for tag in self.edge_tags):
            raise ValueError("etiqueta de arista desconocida")

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def n_elements(self) -> int:
        return int(self.elements.shape[0])

    @property
    def trace_x(self) -> np.ndarray:
        """Abscisa relativa a la línea de traza (la interfaz queda en 0)."""
        return self.nodes[:, 0] - MIRROR_LINE

    # --- grados de libertad periódicos ---

    @cached_property
    def dof_of_node(self) -> np.ndarray:
        right_to_left = {int(r): int(l) for l, r in self.periodic_pairing}
        dof = -np.ones(self.n_nodes, dtype=np.int64)
        counter = 0
        for node in range(self.n_nodes):
            if node in right_to_left:
                continue
            dof[node] = counter
            counter += 1
        for right, left in right_to_left.items():
            dof[right] = dof[left]
        return dof

    @property
    def n_dofs(self) -> int:
        return int(self.dof_of_node.max()) + 1

    @cached_property
    def representative_node(self) -> np.ndarray:
        rep = np.empty(self.n_dofs, dtype=np.int64)
        right_nodes = set(int(r) for r in self.periodic_pairing[:, 1])
        for node in range(self.n_nodes):
            if node not in right_nodes:
                rep[self.dof_of_node[node]] = node
        return rep

    @cached_property
    def node_incidence(self) -> sp.csr_matrix:
        """Z (N x D): extiende un vector de grados de libertad a todos los nodos."""
        rows = np.arange(self.n_nodes)
        return sp.csr_matrix(
            (np.ones(self.n_nodes), (rows, self.dof_of_node)),
            shape=(self.n_nodes, self.n_dofs),
        )

    # --- simetría espejo ---

    @cached_property
    def mirror_node_permutation(self) -> np.ndarray:
        lookup: Dict[Tuple[float, float], int] = {
            key: i for i, key in enumerate(_coordinate_keys(self.nodes))
        }
        images = self.nodes.copy()
        images[:, 0] = 2 * MIRROR_LINE - images[:, 0]
        perm = np.empty(self.n_nodes, dtype=np.int64)
        for i, key in enumerate(_coordinate_keys(images)):
            if key not in lookup:
                raise ValueError("la malla no es simétrica respecto de x1 = 1/2")
            perm[i] = lookup[key]
        return perm

    @cached_property
    def mirror_dof_permutation(self) -> np.ndarray:
        return self.dof_of_node[self.mirror_node_permutation[self.representative_node]]

    def is_mirror_symmetric(self) -> bool:
        """Conjunto de nodos y de elementos invariante bajo x1 -> 1 - x1."""
        try:
            perm = self.mirror_node_permutation
        except ValueError:
            return False
        original = {tuple(sorted(e)) for e in self.elements.tolist()}
        mapped = {tuple(sorted(perm[e].tolist())) for e in self.elements}
        return original == mapped

    # --- geometría de elementos ---

    @cached_property
    def element_areas(self) -> np.ndarray:
        a = self.nodes[self.elements[:, 0]]
        b = self.nodes[self.elements[:, 1]]
        c = self.nodes[self.elements[:, 2]]
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    @cached_property
    def element_centroids(self) -> np.ndarray:
        return self.nodes[self.elements].mean(axis=1)

    def element_diameters(self) -> np.ndarray:
        """Diámetro de cada triángulo: su arista más larga."""
        p = self.nodes[self.elements]
        edges = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1)
        return np.linalg.norm(edges, axis=2).max(axis=1)

    def min_angle_deg(self) -> float:
        p = self.nodes[self.elements]
        angles = []
        for k in range(3):
            u = p[:, (k + 1) % 3] - p[:, k]
            v = p[:, (k + 2) % 3] - p[:, k]
            cos = np.einsum("ij,ij->i", u, v) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
            angles.append(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
        return float(np.min(angles))

    def statistics(self) -> MeshStatistics:
        return MeshStatistics(
            n_nodes=self.n_nodes,
            n_elements=self.n_elements,
            n_dofs=self.n_dofs,
            n_trace_nodes=int(self.trace_nodes.size),
            min_angle_deg=self.min_angle_deg(),
            max_element_diameter=float(self.element_diameters().max()),
            structured=self.structured,
        )

    # --- línea de traza ---

    @cached_property
    def _edge_elements(self) -> Dict[Tuple[int, int], List[int]]:
        table: Dict[Tuple[int, int], List[int]] = {}
        for e, tri in enumerate(self.elements.tolist()):
            for k in range(3):
                a, b = tri[k], tri[(k + 1) % 3]
                table.setdefault((min(a, b), max(a, b)), []).append(e)
        return table

    @cached_property
    def trace_edges(self) -> np.ndarray:
        """Aristas de malla entre nodos consecutivos de la traza (saltando huecos de obstáculos)."""
        edges = []
        for a, b in zip(self.trace_nodes[:-1], self.trace_nodes[1:]):
            key = (int(min(a, b)), int(max(a, b)))
            if key in self._edge_elements:
                edges.append((int(a), int(b)))
        return np.asarray(edges, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def trace_edge_elements(self) -> np.ndarray:
        """(Te, 2): elemento a la izquierda y a la derecha de cada arista de traza."""
        pairs = []
        centroids = self.element_centroids
        for a, b in self.trace_edges:
            owners = self._edge_elements[(int(min(a, b)), int(max(a, b)))]
            if len(owners) != 2:
                raise ValueError("arista de traza sin dos elementos vecinos")
            left, right = sorted(owners, key=lambda e: centroids[e, 0])
            pairs.append((left, right))
        return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)

    def export_lines(self) -> List[str]:
        """Listado de texto: un registro NODE/ELEM/EDGE/PAIR/TRACE por línea."""
        lines = [f"# nodes={self.n_nodes} elements={self.n_elements} height={self.height!r}"]
        for i, (x, y) in enumerate(self.nodes):
            lines.append(f"NODE {i} {x:.12g} {y:.12g}")
        for e, (a, b, c) in enumerate(self.elements):
            lines.append(f"ELEM {e} {a} {b} {c}")
        for (a, b), tag in zip(self.boundary_edges, self.edge_tags):
            lines.append(f"EDGE {a} {b} {tag}")
        for left, right in self.periodic_pairing:
            lines.append(f"PAIR {left} {right}")
        lines.append("TRACE " + " ".join(str(int(n)) for n in self.trace_nodes))
        return lines
