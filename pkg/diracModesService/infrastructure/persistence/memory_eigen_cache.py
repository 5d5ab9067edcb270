"""
Caché en memoria de datos espectrales por nodo de contorno.
"""
import threading
from typing import Dict, Hashable, Optional

from core.logging.logger import get_infrastructure_logger
from domain.entities.greens import SpectralNodeData
from domain.repositories.eigen_cache_repository import EigenCacheRepository


class MemoryEigenCache(EigenCacheRepository):
    """
    Implementación en memoria: lecturas sin bloqueo, inserción bajo un Lock.
    """

    def __init__(self, max_entries: Optional[int] = None):
        self._data: Dict[Hashable, SpectralNodeData] = {}
        self._lock = threading.Lock()
        self._max_entries = max_entries
        self.logger = get_infrastructure_logger()

    def get(self, key: Hashable) -> Optional[SpectralNodeData]:
        return self._data.get(key)

    def put(self, key: Hashable, data: SpectralNodeData) -> None:
        with self._lock:
            if key in self._data:
                return
            if self._max_entries is not None and len(self._data) >= self._max_entries:
                self.logger.debug(f"Caché llena ({len(self._data)} entradas); se vacía")
                self._data.clear()
            self._data[key] = data

    def clear(self) -> None:
        with self._lock:
            self._data.clear()

    def size(self) -> int:
        return len(self._data)
