"""
Fixtures compartidas: una celda vacía de altura 0.54 con malla gruesa (h = 0.1) y los servicios
numéricos construidos a mano, sin pasar por el container.
"""
from pathlib import Path

import pytest
import yaml

from application.services.assembly_service import AssemblyService
from application.services.band_service import BandService
from application.services.greens_service import GreensService
from application.services.interface_service import InterfaceService
from application.services.mesh_service import MeshService
from application.services.perturbation_service import PerturbationService
from application.services.supercell_service import SupercellService
from core.config.dependencies import DependencyContainer
from domain.value_objects.cell_geometry import CellGeometry
from domain.value_objects.index_field import ConstantProfile, CosineProfile, IndexField, SumProfile
from infrastructure.persistence.memory_eigen_cache import MemoryEigenCache

HEIGHT = 0.54
COARSE_H = 0.1
CONFIG_DIR = Path(__file__).resolve().parents[1] / "config"


@pytest.fixture(scope="session")
def geometry():
    return CellGeometry.create(strip_height=HEIGHT, mesh_target_h=COARSE_H)


@pytest.fixture(scope="session")
def default_index():
    return IndexField.create(
        ConstantProfile(1.0),
        SumProfile((CosineProfile(4.0, 2.0), CosineProfile(2.0, 1.0, transverse_mode=1))),
    )


@pytest.fixture(scope="session")
def decoupled_index():
    return IndexField.create(ConstantProfile(1.0), CosineProfile(4.0, 2.0))


# --- servicios ---

@pytest.fixture(scope="session")
def mesh_service():
    return MeshService()


@pytest.fixture(scope="session")
def assembly():
    return AssemblyService()


@pytest.fixture(scope="session")
def bands(assembly):
    return BandService(assembly)


@pytest.fixture(scope="session")
def perturbation(bands):
    return PerturbationService(bands)


@pytest.fixture(scope="session")
def greens(bands, assembly):
    return GreensService(bands=bands, assembly=assembly, cache=MemoryEigenCache())


@pytest.fixture(scope="session")
def interface(greens):
    return InterfaceService(greens)


@pytest.fixture(scope="session")
def supercell(assembly):
    return SupercellService(assembly)


# --- celda por defecto ---

@pytest.fixture(scope="session")
def mesh(mesh_service, geometry):
    return mesh_service.build_mesh(geometry)


@pytest.fixture(scope="session")
def forms(assembly, mesh, default_index):
    return assembly.assemble_forms(mesh, default_index)


@pytest.fixture(scope="session")
def diagram(bands, forms):
    return bands.solve_bands(forms, BandService.symmetric_grid(16), 0.0, 8)


@pytest.fixture(scope="session")
def dirac(bands, diagram, forms):
    return bands.find_dirac(diagram, forms)


@pytest.fixture(scope="session")
def coupling(perturbation, dirac, forms):
    return perturbation.compute_coupling(dirac, forms)


# --- celda desacoplada (solo la componente en x1 de la perturbación) ---

@pytest.fixture(scope="session")
def decoupled_forms(assembly, mesh, decoupled_index):
    return assembly.assemble_forms(mesh, decoupled_index)


@pytest.fixture(scope="session")
def decoupled_dirac(bands, decoupled_forms):
    diagram = bands.solve_bands(decoupled_forms, BandService.symmetric_grid(16), 0.0, 8)
    return bands.find_dirac(diagram, decoupled_forms)


@pytest.fixture(scope="session")
def decoupled_coupling(perturbation, decoupled_dirac, decoupled_forms):
    return perturbation.compute_coupling(decoupled_dirac, decoupled_forms)


# --- configuración en disco ---

@pytest.fixture
def write_config(tmp_path):
    """Copia un YAML de config/ con malla gruesa y las claves dadas sobrescritas."""

    def _write(name="default.yaml", **overrides):
        data = yaml.safe_load((CONFIG_DIR / name).read_text(encoding="utf-8"))
        data.setdefault("discretization", {})["h"] = COARSE_H
        data.setdefault("dirac", {})["grid_points"] = 32
        for dotted, value in overrides.items():
            section, key = dotted.split("__")
            data.setdefault(section, {})[key] = value
        path = tmp_path / f"run_{name}"
        path.write_text(yaml.safe_dump(data, sort_keys=True), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def clean_container():
    DependencyContainer.clear()
    yield DependencyContainer
    DependencyContainer.clear()
