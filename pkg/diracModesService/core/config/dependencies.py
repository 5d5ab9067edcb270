"""
Container de inyección de dependencias.
Centraliza la creación de los servicios numéricos y los comparte entre subcomandos.
"""
from core.config.settings import settings
from core.logging.logger import get_infrastructure_logger

logger = get_infrastructure_logger()


class DependencyContainer:
    """
    Container para inyección de dependencias.
    Implementa el patrón Service Locator simplificado.
    """

    _instances = {}

    @classmethod
    def register(cls, interface_name: str, implementation):
        """
        Registra una implementación para una interface.

        Args:
            interface_name: Nombre de la interface
            implementation: Instancia de la implementación
        """
        cls._instances[interface_name] = implementation
        logger.debug(f"Dependencia registrada: {interface_name} -> {type(implementation).__name__}")

    @classmethod
    def get(cls, interface_name: str):
        """
        Obtiene una implementación registrada.

        Raises:
            KeyError: Si la dependencia no está registrada
        """
        if interface_name not in cls._instances:
            raise KeyError(f"Dependencia no registrada: {interface_name}")
        return cls._instances[interface_name]

    @classmethod
    def is_initialized(cls) -> bool:
        return bool(cls._instances)

    @classmethod
    def clear(cls):
        """Limpia todas las dependencias registradas."""
        cls._instances.clear()
        logger.debug("Dependencias limpiadas")


def initialize_dependencies():
    """
    Inicializa los servicios del laboratorio (un único grafo: assembly -> bands -> greens -> interface).
    """
    if DependencyContainer.is_initialized():
        return
    logger.debug(f"Inicializando dependencias (hilos: {settings.max_workers or 'por defecto'})")

    from application.services.assembly_service import AssemblyService
    from application.services.band_service import BandService
    from application.services.greens_service import GreensService
    from application.services.interface_service import InterfaceService
    from application.services.mesh_service import MeshService
    from application.services.perturbation_service import PerturbationService
    from application.services.supercell_service import SupercellService
    from infrastructure.persistence.memory_eigen_cache import MemoryEigenCache

    assembly = AssemblyService()
    bands = BandService(assembly)
    cache = MemoryEigenCache()
    greens = GreensService(bands=bands, assembly=assembly, cache=cache)

    DependencyContainer.register("MeshService", MeshService())
    DependencyContainer.register("AssemblyService", assembly)
    DependencyContainer.register("BandService", bands)
    DependencyContainer.register("PerturbationService", PerturbationService(bands))
    DependencyContainer.register("EigenCacheRepository", cache)
    DependencyContainer.register("GreensService", greens)
    DependencyContainer.register("InterfaceService", InterfaceService(greens))
    DependencyContainer.register("SupercellService", SupercellService(assembly))
    logger.debug("Dependencias inicializadas")


def get_service(name: str):
    """Atajo usado por los casos de uso."""
    initialize_dependencies()
    return DependencyContainer.get(name)
