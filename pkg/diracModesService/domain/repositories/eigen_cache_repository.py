"""
Interface EigenCacheRepository - contrato para cachear datos espectrales por nodo de contorno.
Cumple con el principio de Inversión de Dependencias (DIP).
"""
from abc import ABC, abstractmethod
from typing import Hashable, Optional

from domain.entities.greens import SpectralNodeData


class EigenCacheRepository(ABC):
    """
    Interface para la caché de autodatos por (p, eps).
    Las implementaciones concretas estarán en la capa de infraestructura.
    """

    @abstractmethod
    def get(self, key: Hashable) -> Optional[SpectralNodeData]:
        """
        Busca los datos de un nodo.

        Args:
            key: Clave (p, eps, etiqueta de formas)

        Returns:
            Datos cacheados o None
        """
        pass

    @abstractmethod
    def put(self, key: Hashable, data: SpectralNodeData) -> None:
        """Guarda los datos de un nodo."""
        pass

    @abstractmethod
    def clear(self) -> None:
        """Vacía la caché."""
        pass

    @abstractmethod
    def size(self) -> int:
        """Número de entradas."""
        pass
