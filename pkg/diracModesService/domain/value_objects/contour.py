"""
Value Objects de contornos en el plano complejo de cuasimomento.
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from core.utils import circle_trapezoid, gauss_legendre, sinh_gauss_legendre

ROLE_FULL = "full"            # resolvente completa (todas las bandas)
ROLE_REMAINDER = "remainder"  # todas las bandas salvo la de pliegue
ROLE_FOLD = "fold"            # solo la banda de pliegue (arcos complejos)


@dataclass(frozen=True)
class ContourPiece:
    """
    Tramo de contorno.

    Attributes:
        kind: "segment" o "arc"
        start, end: Extremos reales del segmento (o del diámetro del arco)
        nodes: Número de nodos de cuadratura
        role: ROLE_FULL, ROLE_REMAINDER o ROLE_FOLD
        side: +1 arco por encima, -1 por debajo (solo arcos)
        sinh_anchor: Extremo junto al que se concentran nodos (None = Gauss-Legendre simple)
        sinh_width: Ancho de la capa concentrada
    """
    kind: str
    start: float
    end: float
    nodes: int
    role: str
    side: int = 0
    sinh_anchor: float = None
    sinh_width: float = 0.0

    @property
    def center(self) -> float:
        return 0.5 * (self.start + self.end)

    @property
    def radius(self) -> float:
        return 0.5 * (self.end - self.start)

    def quadrature(self, refinement: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        """Nodos p_k y pesos dp_k del tramo (orientado de start a end)."""
        n = self.nodes * refinement
        if self.kind == "segment":
            if self.sinh_anchor is not None:
                p, w = sinh_gauss_legendre(self.start, self.end, n, self.sinh_width, self.sinh_anchor)
            else:
                p, w = gauss_legendre(self.start, self.end, n)
            return p.astype(complex), w.astype(complex)
        theta, w = gauss_legendre(0.0, np.pi, n)
        if self.side > 0:
            # de theta = pi a 0 por encima
            z = self.center + self.radius * np.exp(1j * theta)
            dz = -1j * self.radius * np.exp(1j * theta) * w
        else:
            # de theta = pi a 2pi por debajo
            z = self.center + self.radius * np.exp(1j * (theta + np.pi))
            dz = 1j * self.radius * np.exp(1j * (theta + np.pi)) * w
        return z, dz


@dataclass(frozen=True)
class ContourSpec:
    """
    Contorno compuesto.

    Attributes:
        kind: "C_eps" o "C_tilde_tau"
        pieces: Tramos en orden
    """
    kind: str
    pieces: Tuple[ContourPiece, ...]

    @classmethod
    def around_folds(
        cls,
        q_star: float,
        radius: float,
        fold_slope: float,
        piece_nodes: int,
        arc_nodes: int,
        dirac_width: float,
        kind: str = "C_eps",
    ) -> "ContourSpec":
        """
        [-pi, pi] con semicírculos de radio `radius` en -q* y +q*. El semicírculo queda por
        debajo del polo donde la banda de pliegue tiene pendiente positiva y por encima donde
        es negativa. Los tramos que tocan p = 0 concentran nodos en una capa de ancho dirac_width.
        """
        if not 0.0 < radius < min(q_star, np.pi - q_star):
            raise ValueError("el radio de los semicírculos debe separar 0, +-q* y +-pi")
        side_plus = -1 if fold_slope > 0 else 1
        width = max(dirac_width, 0.0)
        pieces: List[ContourPiece] = [
            ContourPiece("segment", -np.pi, -q_star - radius, piece_nodes, ROLE_FULL),
            ContourPiece("arc", -q_star - radius, -q_star + radius, arc_nodes, ROLE_FOLD, side=-side_plus),
            ContourPiece("segment", -q_star - radius, -q_star + radius, piece_nodes, ROLE_REMAINDER),
            ContourPiece("segment", -q_star + radius, 0.0, piece_nodes, ROLE_FULL,
                         sinh_anchor=0.0 if width > 0 else None, sinh_width=width),
            ContourPiece("segment", 0.0, q_star - radius, piece_nodes, ROLE_FULL,
                         sinh_anchor=0.0 if width > 0 else None, sinh_width=width),
            ContourPiece("segment", q_star - radius, q_star + radius, piece_nodes, ROLE_REMAINDER),
            ContourPiece("arc", q_star - radius, q_star + radius, arc_nodes, ROLE_FOLD, side=side_plus),
            ContourPiece("segment", q_star + radius, np.pi, piece_nodes, ROLE_FULL),
        ]
        return cls(kind=kind, pieces=tuple(pieces))

    def reflected(self) -> "ContourSpec":
        """Contorno conjugado (arcos al otro lado del eje real)."""
        pieces = tuple(
            ContourPiece(p.kind, p.start, p.end, p.nodes, p.role, -p.side, p.sinh_anchor, p.sinh_width)
            if p.kind == "arc" else p
            for p in self.pieces
        )
        return ContourSpec(kind=self.kind, pieces=pieces)

    def nodes(self, refinement: int = 1) -> List[Tuple[complex, complex, str]]:
        """Lista (p, dp, rol) de todos los nodos."""
        out = []
        for piece in self.pieces:
            p, w = piece.quadrature(refinement)
            out.extend((complex(pk), complex(wk), piece.role) for pk, wk in zip(p, w))
        return out

    def node_counts(self) -> dict:
        return {f"{i}_{p.kind}_{p.role}": p.nodes for i, p in enumerate(self.pieces)}

    @staticmethod
    def circle(center: complex, radius: float, n: int) -> List[Tuple[complex, complex]]:
        z, dz = circle_trapezoid(center, radius, n)
        return list(zip(z, dz))
