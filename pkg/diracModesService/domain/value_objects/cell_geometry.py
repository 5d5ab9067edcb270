"""
Value Objects de la geometría de la celda periódica.
La celda computacional es (0,1)x(0,H) menos obstáculos circulares; el eje espejo es x1 = 1/2.
"""
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

MIRROR_LINE = 0.5


@dataclass(frozen=True)
class Obstacle:
    """
    Obstáculo circular (Neumann en su borde).

    Attributes:
        center_x: Abscisa del centro
        center_y: Ordenada del centro
        radius: Radio
    """
    center_x: float
    center_y: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius debe ser mayor a 0")

    def mirrored(self) -> "Obstacle":
        return Obstacle(2 * MIRROR_LINE - self.center_x, self.center_y, self.radius)

    def is_on_mirror_line(self, tol: float = 1e-12) -> bool:
        return abs(self.center_x - MIRROR_LINE) <= tol

    def contains(self, x, y, margin: float = 0.0):
        """Máscara de puntos a distancia < radius + margin del centro."""
        return (x - self.center_x) ** 2 + (y - self.center_y) ** 2 < (self.radius + margin) ** 2


@dataclass(frozen=True)
class CellGeometry:
    """
    Geometría de la franja periódica.

    Attributes:
        strip_height: Altura H de la franja
        obstacles: Obstáculos (tupla inmutable)
        mesh_target_h: Tamaño de elemento pedido
    """
    strip_height: float
    obstacles: Tuple[Obstacle, ...]
    mesh_target_h: float

    def __post_init__(self):
        if self.strip_height <= 0:
            raise ValueError("strip_height debe ser mayor a 0")
        if self.mesh_target_h <= 0:
            raise ValueError("mesh_target_h debe ser mayor a 0")
        if self.mesh_target_h > min(self.strip_height, 0.5):
            raise ValueError("mesh_target_h excede la escala de la celda")

    @classmethod
    def create(
        cls,
        strip_height: float,
        mesh_target_h: float,
        obstacles: Iterable[Sequence[float]] = (),
    ) -> "CellGeometry":
        """
        Factory method a partir de tuplas (cx, cy, r).

        Args:
            strip_height: Altura H
            mesh_target_h: Tamaño de elemento
            obstacles: Iterable de (cx, cy, r)

        Returns:
            Nueva instancia de CellGeometry
        """
        return cls(
            strip_height=float(strip_height),
            obstacles=tuple(Obstacle(float(cx), float(cy), float(r)) for cx, cy, r in obstacles),
            mesh_target_h=float(mesh_target_h),
        )

    @property
    def has_obstacles(self) -> bool:
        return len(self.obstacles) > 0

    def is_mirror_symmetric(self, tol: float = 1e-12) -> bool:
        """Cada obstáculo está sobre el eje espejo o tiene su imagen en la lista."""
        for obstacle in self.obstacles:
            if obstacle.is_on_mirror_line(tol):
                continue
            image = obstacle.mirrored()
            if not any(
                abs(o.center_x - image.center_x) <= tol
                and abs(o.center_y - image.center_y) <= tol
                and abs(o.radius - image.radius) <= tol
                for o in self.obstacles
            ):
                return False
        return True

    def trace_length(self) -> float:
        """Longitud de la línea de traza x1 = 1/2 fuera de los obstáculos."""
        length = self.strip_height
        for obstacle in self.obstacles:
            dx = abs(obstacle.center_x - MIRROR_LINE)
            if dx < obstacle.radius:
                length -= 2.0 * (obstacle.radius ** 2 - dx ** 2) ** 0.5
        return length
