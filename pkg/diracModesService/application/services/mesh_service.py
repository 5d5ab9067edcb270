"""
MeshService - Construye la malla simétrica de la celda periódica.
Sin obstáculos usa una triangulación estructurada tipo "union jack"; con obstáculos,
Delaunay sobre la mitad izquierda y reflexión exacta sobre x1 = 1/2.
"""
import math
from pathlib import Path
from typing import List, Tuple

import numpy as np
from scipy.spatial import Delaunay

from core.exceptions.custom_exceptions import InvalidGeometryException, UnmeshableGeometryException
from core.logging.logger import get_mesh_logger
from domain.entities.mesh import (
    Mesh,
    NEUMANN,
    PERIODIC_LEFT,
    PERIODIC_RIGHT,
    TRACE_LINE,
)
from domain.value_objects.cell_geometry import CellGeometry, MIRROR_LINE

_TOL = 1e-12

logger = get_mesh_logger()


def _orient_ccw(nodes: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Orienta los triángulos en sentido antihorario y descarta los de área nula."""
    a, b, c = nodes[tris[:, 0]], nodes[tris[:, 1]], nodes[tris[:, 2]]
    two_area = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    tris = tris.copy()
    flip = two_area < 0.0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris[np.abs(two_area) > 1e-14]


def _tag_boundary(nodes: np.ndarray, elements: np.ndarray) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """Aristas de un solo elemento (borde) más las aristas interiores sobre la línea de traza."""
    counts = {}
    for tri in elements.tolist():
        for k in range(3):
            a, b = tri[k], tri[(k + 1) % 3]
            key = (min(a, b), max(a, b))
            counts[key] = counts.get(key, 0) + 1

    edges: List[Tuple[int, int]] = []
    tags: List[str] = []
    for (a, b), count in sorted(counts.items()):
        xa, xb = nodes[a, 0], nodes[b, 0]
        on_trace = abs(xa - MIRROR_LINE) < _TOL and abs(xb - MIRROR_LINE) < _TOL
        if count == 1:
            if xa < _TOL and xb < _TOL:
                tag = PERIODIC_LEFT
            elif xa > 1 - _TOL and xb > 1 - _TOL:
                tag = PERIODIC_RIGHT
            else:
                tag = NEUMANN
        elif on_trace:
            tag = TRACE_LINE
        else:
            continue
        edges.append((a, b))
        tags.append(tag)
    return np.asarray(edges, dtype=np.int64).reshape(-1, 2), tuple(tags)


def _pair_faces(nodes: np.ndarray) -> np.ndarray:
    left = np.flatnonzero(nodes[:, 0] < _TOL)
    right = np.flatnonzero(nodes[:, 0] > 1 - _TOL)
    left = left[np.argsort(nodes[left, 1])]
    right = right[np.argsort(nodes[right, 1])]
    if left.size != right.size or np.max(np.abs(nodes[left, 1] - nodes[right, 1])) > 1e-10:
        raise InvalidGeometryException("Caras periódicas no emparejables", "PERIODIC_MISMATCH")
    return np.column_stack([left, right])


def diameter_bound(step: float) -> float:
    """Cota del diámetro de elemento para un paso de malla h: la diagonal de una celda h x h."""
    return math.sqrt(2.0) * step * (1.0 + 1e-9)


def _trace_nodes(nodes: np.ndarray) -> np.ndarray:
    trace = np.flatnonzero(np.abs(nodes[:, 0] - MIRROR_LINE) < _TOL)
    return trace[np.argsort(nodes[trace, 1])]


class MeshService:
    """
    Servicio de mallado.

    La malla resultante es conforme, periódica en x1 y simétrica bajo x1 -> 1 - x1
    (la permutación espejo discreta es exacta).
    """

    def __init__(self):
        self._logger = logger

    def build_mesh(self, geom: CellGeometry) -> Mesh:
        """
        Construye la malla de la celda.

        Args:
            geom: Geometría validada

        Returns:
            Mesh con etiquetas, emparejamiento periódico y nodos de traza

        Raises:
            UnmeshableGeometryException: radio >= H/2
            InvalidGeometryException: obstáculo que toca el borde, solapes o asimetría
        """
        self._validate(geom)
        if geom.has_obstacles:
            nodes, elements = self._obstacle_triangulation(geom)
            structured = False
        else:
            nodes, elements = self._structured_triangulation(geom)
            structured = True

        boundary_edges, tags = _tag_boundary(nodes, elements)
        mesh = Mesh(
            nodes=nodes,
            elements=elements,
            boundary_edges=boundary_edges,
            edge_tags=tags,
            periodic_pairing=_pair_faces(nodes),
            trace_nodes=_trace_nodes(nodes),
            height=geom.strip_height,
            structured=structured,
        )
        stats = mesh.statistics()
        self._logger.info(
            f"Malla construida: {stats.n_nodes} nodos, {stats.n_elements} elementos, "
            f"{stats.n_dofs} gdl, ángulo mínimo {stats.min_angle_deg:.1f} deg"
        )
        bound = diameter_bound(geom.mesh_target_h)
        if stats.max_element_diameter > bound:
            self._logger.warning(
                f"Diámetro de elemento {stats.max_element_diameter:.4f} > {bound:.4f} (paso h={geom.mesh_target_h})"
            )
        return mesh

    def export_mesh(self, mesh: Mesh, path: str) -> Path:
        """Escribe el listado NODE/ELEM/EDGE de la malla."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text("\n".join(mesh.export_lines()) + "\n", encoding="utf-8")
        return target

    # --- validación ---

    def _validate(self, geom: CellGeometry) -> None:
        H = geom.strip_height
        for obstacle in geom.obstacles:
            if obstacle.radius >= 0.5 * H:
                raise UnmeshableGeometryException(
                    f"Radio {obstacle.radius} >= media altura {0.5 * H}"
                )
        for obstacle in geom.obstacles:
            inside = (
                obstacle.center_x - obstacle.radius > 0.0
                and obstacle.center_x + obstacle.radius < 1.0
                and obstacle.center_y - obstacle.radius > 0.0
                and obstacle.center_y + obstacle.radius < H
            )
            if not inside:
                raise InvalidGeometryException(
                    f"Obstáculo en ({obstacle.center_x}, {obstacle.center_y}) toca el borde de la celda",
                    "OBSTACLE_TOUCHES_BOUNDARY",
                )
        for i, a in enumerate(geom.obstacles):
            for b in geom.obstacles[i + 1:]:
                distance = math.hypot(a.center_x - b.center_x, a.center_y - b.center_y)
                if distance <= a.radius + b.radius:
                    raise InvalidGeometryException("Obstáculos solapados", "OVERLAPPING_OBSTACLES")
        if not geom.is_mirror_symmetric():
            raise InvalidGeometryException(
                "La geometría no es simétrica respecto de x1 = 1/2", "NOT_MIRROR_SYMMETRIC"
            )

    # --- mallado estructurado ---

    def _structured_triangulation(self, geom: CellGeometry) -> Tuple[np.ndarray, np.ndarray]:
        h, H = geom.mesh_target_h, geom.strip_height
        nx = 2 * math.ceil(1.0 / (2.0 * h))
        ny = math.ceil(H / h - 1e-9)
        ny += ny % 2  # par: simetría también bajo x2 -> H - x2
        xs = np.linspace(0.0, 1.0, nx + 1)
        ys = np.linspace(0.0, H, ny + 1)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        nodes = np.column_stack([X.ravel(), Y.ravel()])

        def nid(i, j):
            return i * (ny + 1) + j

        tris = []
        for i in range(nx):
            for j in range(ny):
                n00, n10, n01, n11 = nid(i, j), nid(i + 1, j), nid(i, j + 1), nid(i + 1, j + 1)
                if (i + j) % 2 == 0:
                    tris.append([n00, n10, n11])
                    tris.append([n00, n11, n01])
                else:
                    tris.append([n00, n10, n01])
                    tris.append([n10, n11, n01])
        return nodes, _orient_ccw(nodes, np.asarray(tris, dtype=np.int64))

    # --- mallado con obstáculos ---

    def _left_half_points(self, geom: CellGeometry) -> np.ndarray:
        h, H = geom.mesh_target_h, geom.strip_height
        left_obstacles = [o for o in geom.obstacles if o.center_x <= MIRROR_LINE + _TOL]

        def outside(x, y, margin):
            keep = np.ones(np.shape(x), dtype=bool)
            for o in geom.obstacles:
                keep &= ~o.contains(x, y, margin)
            return keep

        ny = math.ceil(H / h - 1e-9)
        ys = np.linspace(0.0, H, ny + 1)
        nxh = math.ceil(MIRROR_LINE / h - 1e-9)
        xs = np.linspace(0.0, MIRROR_LINE, nxh + 1)

        points = [np.column_stack([np.zeros_like(ys), ys])]
        gamma = np.column_stack([np.full_like(ys, MIRROR_LINE), ys])
        points.append(gamma[outside(gamma[:, 0], gamma[:, 1], 0.3 * h)])
        for y_edge in (0.0, H):
            edge = np.column_stack([xs[1:-1], np.full(nxh - 1, y_edge)])
            points.append(edge)

        for o in left_obstacles:
            n_vertices = max(12, 4 * math.ceil(2.0 * math.pi * o.radius / (4.0 * h)))
            theta = 0.5 * math.pi + 2.0 * math.pi * np.arange(n_vertices) / n_vertices
            ring = np.column_stack([o.center_x + o.radius * np.cos(theta), o.center_y + o.radius * np.sin(theta)])
            if o.is_on_mirror_line():
                ring[:, 0] = np.where(np.abs(ring[:, 0] - MIRROR_LINE) < 1e-12, MIRROR_LINE, ring[:, 0])
                ring = ring[ring[:, 0] <= MIRROR_LINE + _TOL]
            points.append(ring)

        # red escalonada interior (evita empates cocirculares en Delaunay)
        dy = H / math.ceil(H / (h * math.sqrt(3.0) / 2.0))
        dx = MIRROR_LINE / nxh
        rows = np.arange(dy, H - 0.5 * dy, dy)
        interior = []
        for r, y in enumerate(rows):
            offset = 0.5 * dx * (r % 2)
            x_row = np.arange(offset, MIRROR_LINE, dx)
            x_row = x_row[(x_row > 0.4 * h) & (x_row < MIRROR_LINE - 0.4 * h)]
            interior.append(np.column_stack([x_row, np.full_like(x_row, y)]))
        interior = np.vstack(interior) if interior else np.empty((0, 2))
        interior = interior[(interior[:, 1] > 0.4 * h) & (interior[:, 1] < H - 0.4 * h)]
        interior = interior[outside(interior[:, 0], interior[:, 1], 0.5 * h)]
        points.append(interior)

        cloud = np.vstack(points)
        _, unique_idx = np.unique(np.round(cloud, 12), axis=0, return_index=True)
        return cloud[np.sort(unique_idx)]

    def _obstacle_triangulation(self, geom: CellGeometry) -> Tuple[np.ndarray, np.ndarray]:
        left = self._left_half_points(geom)
        tris = Delaunay(left).simplices.astype(np.int64)
        centroids = left[tris].mean(axis=1)
        keep = np.ones(len(tris), dtype=bool)
        for o in geom.obstacles:
            keep &= ~o.contains(centroids[:, 0], centroids[:, 1])
        tris = _orient_ccw(left, tris[keep])

        on_gamma = np.abs(left[:, 0] - MIRROR_LINE) < _TOL
        image_index = np.empty(len(left), dtype=np.int64)
        n_left = len(left)
        mirrored = left[~on_gamma].copy()
        mirrored[:, 0] = 2.0 * MIRROR_LINE - mirrored[:, 0]
        image_index[~on_gamma] = n_left + np.arange(mirrored.shape[0])
        image_index[on_gamma] = np.flatnonzero(on_gamma)

        nodes = np.vstack([left, mirrored])
        # la reflexión invierte la orientación
        right_tris = image_index[tris][:, [0, 2, 1]]
        elements = np.vstack([tris, right_tris])
        self._logger.debug(f"Delaunay: {len(tris)} triángulos por mitad")
        return nodes, elements
