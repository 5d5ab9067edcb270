import numpy as np
import pytest

from application.services.band_service import BandService
from application.services.mesh_service import diameter_bound
from core.exceptions.custom_exceptions import (
    InvalidGeometryException,
    InvalidIndexFieldException,
    MassNotPositiveException,
    UnmeshableGeometryException,
)
from core.utils import loglog_slope
from domain.entities.mesh import PERIODIC_LEFT, PERIODIC_RIGHT
from domain.value_objects.cell_geometry import CellGeometry
from domain.value_objects.index_field import (
    ConstantProfile,
    IndexField,
    PiecewiseRegionsProfile,
    Region,
)
from domain.value_objects.trace_grid import TraceGrid

from conftest import HEIGHT


def test_structured_mesh_counts(mesh):
    stats = mesh.statistics()
    assert stats.structured
    assert stats.n_nodes == 11 * 7
    assert stats.n_elements == 2 * 10 * 6
    assert stats.n_dofs == 10 * 7
    assert stats.n_trace_nodes == 7
    assert stats.min_angle_deg > 30.0


def test_element_diameter_is_the_longest_edge(mesh):
    # paso 0.1 en x1 y 0.54/6 = 0.09 en x2: la arista más larga es la diagonal
    diagonal = np.hypot(0.1, HEIGHT / 6)
    np.testing.assert_allclose(mesh.element_diameters(), diagonal)
    stats = mesh.statistics()
    assert stats.max_element_diameter == pytest.approx(diagonal)
    assert stats.max_element_diameter > np.sqrt(2.0 * mesh.element_areas.max())
    assert stats.max_element_diameter <= diameter_bound(0.1)
    assert "max_element_diameter" in stats.to_dict()


def test_mesh_is_mirror_symmetric_with_paired_faces(mesh):
    assert mesh.is_mirror_symmetric()
    left, right = mesh.periodic_pairing[:, 0], mesh.periodic_pairing[:, 1]
    np.testing.assert_allclose(mesh.nodes[left, 0], 0.0)
    np.testing.assert_allclose(mesh.nodes[right, 0], 1.0)
    np.testing.assert_allclose(mesh.nodes[left, 1], mesh.nodes[right, 1])
    assert np.all(mesh.dof_of_node[left] == mesh.dof_of_node[right])
    assert {PERIODIC_LEFT, PERIODIC_RIGHT}.issubset(set(mesh.edge_tags))


def test_trace_weights_sum_to_height(mesh):
    trace = TraceGrid.from_mesh(mesh)
    assert trace.size == 7
    assert trace.length == pytest.approx(HEIGHT)
    np.testing.assert_allclose(mesh.trace_x[trace.node_ids], 0.0)
    assert trace.integral(np.ones(trace.size)) == pytest.approx(HEIGHT)


def test_obstacle_mesh_is_symmetric(mesh_service):
    geometry = CellGeometry.create(HEIGHT, 0.1, [(0.5, 0.27, 0.1)])
    mesh = mesh_service.build_mesh(geometry)
    assert not mesh.structured
    assert mesh.is_mirror_symmetric()
    trace = TraceGrid.from_mesh(mesh)
    assert trace.length == pytest.approx(HEIGHT - 0.2, abs=0.05)


@pytest.mark.parametrize(
    "obstacles, error, code",
    [
        ([(0.5, 0.27, 0.3)], UnmeshableGeometryException, None),
        ([(0.5, 0.05, 0.1)], InvalidGeometryException, "OBSTACLE_TOUCHES_BOUNDARY"),
        ([(0.3, 0.27, 0.2), (0.7, 0.27, 0.2)], InvalidGeometryException, "OVERLAPPING_OBSTACLES"),
        ([(0.3, 0.27, 0.1)], InvalidGeometryException, "NOT_MIRROR_SYMMETRIC"),
    ],
)
def test_invalid_geometries(mesh_service, obstacles, error, code):
    with pytest.raises(error) as info:
        mesh_service.build_mesh(CellGeometry.create(HEIGHT, 0.1, obstacles))
    if code is not None:
        assert info.value.code == code


def test_mesh_target_above_cell_scale():
    with pytest.raises(ValueError):
        CellGeometry.create(HEIGHT, 0.6)


def test_asymmetric_direction_is_rejected(assembly, mesh):
    direction = PiecewiseRegionsProfile(0.0, (Region("rectangle", 1.0, x_range=(0.1, 0.3), y_range=(0.0, HEIGHT)),))
    with pytest.raises(InvalidIndexFieldException) as info:
        assembly.assemble_forms(mesh, IndexField.create(ConstantProfile(1.0), direction))
    assert info.value.code == "ASYMMETRIC_INDEX"


def test_non_positive_index_is_rejected(assembly, mesh):
    with pytest.raises(InvalidIndexFieldException) as info:
        assembly.assemble_forms(mesh, IndexField.create(ConstantProfile(-1.0)))
    assert info.value.code == "NON_POSITIVE_INDEX"


def test_positivity_bound_and_checked_mass(assembly, forms):
    # max |dn| = 6 en el eje espejo
    assert 1.0 / 6.0 <= forms.positivity_bound < 0.2
    M = assembly.checked_mass(forms, 0.1)
    assert M.shape == (forms.dimension, forms.dimension)
    with pytest.raises(MassNotPositiveException):
        assembly.checked_mass(forms, 0.25)


def test_bloch_matrix_is_hermitian_and_mirror_covariant(assembly, forms):
    p = 0.7
    A, M = assembly.bloch_matrix(forms, p, 0.01)
    A = A.toarray()
    np.testing.assert_allclose(A, A.conj().T, atol=1e-10)
    np.testing.assert_allclose((forms.C + forms.C.T).toarray(), 0.0, atol=1e-12)
    P = forms.P_mirror.toarray()
    A_minus, _ = assembly.bloch_matrix(forms, -p, 0.01)
    np.testing.assert_allclose(P @ A @ P.T, A_minus.toarray(), atol=1e-10)
    M_base = forms.M_base.toarray()
    np.testing.assert_allclose(P @ M_base @ P.T, M_base, atol=1e-12)


def test_export_mesh_listing(mesh_service, mesh, tmp_path):
    path = mesh_service.export_mesh(mesh, tmp_path / "mesh.txt")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith(f"# nodes={mesh.n_nodes}")
    assert sum(line.startswith("NODE ") for line in lines) == mesh.n_nodes
    assert sum(line.startswith("ELEM ") for line in lines) == mesh.n_elements
    assert lines[-1].startswith("TRACE ")


@pytest.mark.slow
def test_empty_cell_eigenvalue_converges_at_second_order(mesh_service, assembly):
    bands = BandService(assembly)
    exact = 4.0 * np.pi ** 2
    sizes, errors = [], []
    for h in (0.1, 0.05, 0.025):
        mesh = mesh_service.build_mesh(CellGeometry.create(HEIGHT, h))
        forms = assembly.assemble_forms(mesh, IndexField.create())
        values, _, _ = bands.solve_at(forms, 0.0, 0.0, 4)
        sizes.append(h)
        errors.append(abs(values[2] - exact))
    assert loglog_slope(sizes, errors) == pytest.approx(2.0, abs=0.3)
