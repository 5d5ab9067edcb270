"""
Value Objects del índice de refracción.
Perfiles evaluables en coordenadas de celda (x1 en (0,1), x2 en (0,H)); los cosenos se centran en el eje espejo.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from domain.value_objects.cell_geometry import MIRROR_LINE


class IndexProfile(ABC):
    """Interface para un perfil escalar sobre la celda."""

    @abstractmethod
    def evaluate(self, x1: np.ndarray, x2: np.ndarray, height: float) -> np.ndarray:
        """
        Evalúa el perfil en puntos de la celda.

        Args:
            x1: Abscisas (coordenadas de celda)
            x2: Ordenadas
            height: Altura de la franja

        Returns:
            Valores del perfil, misma forma que x1
        """
        pass

    def is_zero(self) -> bool:
        return False


@dataclass(frozen=True)
class ConstantProfile(IndexProfile):
    value: float

    def evaluate(self, x1, x2, height):
        return np.full(np.shape(x1), float(self.value))

    def is_zero(self) -> bool:
        return self.value == 0.0


@dataclass(frozen=True)
class CosineProfile(IndexProfile):
    """
    amplitude * cos(2*pi*frequency*(x1 - 1/2)) * cos(transverse_mode*pi*x2/H), opcionalmente
    restringido a la ventana transversal window = (y_lo, y_hi).
    """
    amplitude: float
    frequency: float
    transverse_mode: int = 0
    window: Optional[Tuple[float, float]] = None

    def evaluate(self, x1, x2, height):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        values = self.amplitude * np.cos(2.0 * np.pi * self.frequency * (x1 - MIRROR_LINE))
        if self.transverse_mode:
            values = values * np.cos(self.transverse_mode * np.pi * x2 / height)
        if self.window is not None:
            lo, hi = self.window
            values = np.where((x2 >= lo) & (x2 <= hi), values, 0.0)
        return values

    def is_zero(self) -> bool:
        return self.amplitude == 0.0


@dataclass(frozen=True)
class Region:
    """Región de valor constante: disco (center, radius) o rectángulo (x_range, y_range)."""
    shape: str
    value: float
    center: Optional[Tuple[float, float]] = None
    radius: Optional[float] = None
    x_range: Optional[Tuple[float, float]] = None
    y_range: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.shape == "disk":
            if self.center is None or self.radius is None or self.radius <= 0:
                raise ValueError("disk requiere center y radius > 0")
        elif self.shape == "rectangle":
            if self.x_range is None or self.y_range is None:
                raise ValueError("rectangle requiere x_range e y_range")
        else:
            raise ValueError(f"shape desconocido: {self.shape}")

    def mask(self, x1, x2):
        if self.shape == "disk":
            cx, cy = self.center
            return (x1 - cx) ** 2 + (x2 - cy) ** 2 <= self.radius ** 2
        (x_lo, x_hi), (y_lo, y_hi) = self.x_range, self.y_range
        return (x1 >= x_lo) & (x1 <= x_hi) & (x2 >= y_lo) & (x2 <= y_hi)


@dataclass(frozen=True)
class PiecewiseRegionsProfile(IndexProfile):
    background: float
    regions: Tuple[Region, ...] = ()

    def evaluate(self, x1, x2, height):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        values = np.full(x1.shape, float(self.background))
        # la última región gana en solapes
        for region in self.regions:
            values = np.where(region.mask(x1, x2), region.value, values)
        return values

    def is_zero(self) -> bool:
        return self.background == 0.0 and all(r.value == 0.0 for r in self.regions)


@dataclass(frozen=True)
class SumProfile(IndexProfile):
    terms: Tuple[IndexProfile, ...]

    def evaluate(self, x1, x2, height):
        total = np.zeros(np.shape(x1))
        for term in self.terms:
            total = total + term.evaluate(x1, x2, height)
        return total

    def is_zero(self) -> bool:
        return all(term.is_zero() for term in self.terms)


@dataclass(frozen=True)
class IndexField:
    """
    Índice base n y dirección de perturbación dn; n_eps = n + eps*dn.

    Attributes:
        base: Perfil n(x), positivo
        direction: Perfil dn(x) = d n_eps / d eps en eps = 0
    """
    base: IndexProfile
    direction: IndexProfile

    @classmethod
    def create(cls, base: Optional[IndexProfile] = None, direction: Optional[IndexProfile] = None) -> "IndexField":
        return cls(
            base=base if base is not None else ConstantProfile(1.0),
            direction=direction if direction is not None else ConstantProfile(0.0),
        )

    def n(self, x1, x2, height):
        return self.base.evaluate(x1, x2, height)

    def dn(self, x1, x2, height):
        return self.direction.evaluate(x1, x2, height)

    def n_eps(self, x1, x2, height, eps: float):
        return self.n(x1, x2, height) + eps * self.dn(x1, x2, height)
