import numpy as np
import pytest


def test_strip_dofs_follow_the_face_identification(supercell, forms, mesh):
    neumann = supercell.build_problem(forms, 1e-2, n_cells_per_side=2, truncation_bc="neumann")
    dirichlet = supercell.build_problem(forms, 1e-2, n_cells_per_side=2, truncation_bc="dirichlet")
    n_pairs = mesh.periodic_pairing.shape[0]
    assert neumann.n_free == 5 * mesh.n_dofs + n_pairs
    assert neumann.n_free - dirichlet.n_free == 2 * n_pairs
    assert neumann.cells == [-2, -1, 0, 1, 2]
    for matrix in (neumann.K, neumann.M):
        assert abs(matrix - matrix.T).max() < 1e-12


def test_unknown_truncation_is_rejected(supercell, forms):
    with pytest.raises(ValueError):
        supercell.build_problem(forms, 1e-2, n_cells_per_side=2, truncation_bc="robin")


def test_unperturbed_strip_has_no_localized_modes(supercell, forms, dirac):
    window = (dirac.lambda_star - 1.0, dirac.lambda_star + 1.0)
    problem = supercell.build_problem(forms, 0.0, n_cells_per_side=8, lambda_window=window, n_eigs=6)
    result = supercell.solve_supercell(forms, problem)
    assert result.modes
    assert result.localized(0.8) == []


def test_field_slice_is_sorted_along_the_strip(supercell, forms):
    problem = supercell.build_problem(forms, 1e-2, n_cells_per_side=2, n_eigs=4)
    vector = np.ones(problem.n_free)
    rows = supercell.field_slice(forms, problem, vector)
    xs = [x for x, _, _ in rows]
    assert xs == sorted(xs)
    assert xs[0] == pytest.approx(-2.5) and xs[-1] == pytest.approx(2.5)


STRIP_EPS = 4e-2
STRIP_CELLS = 12


@pytest.fixture(scope="module")
def decoupled_mode(interface, greens, decoupled_forms, decoupled_dirac, decoupled_coupling):
    contour = greens.contour_for(decoupled_dirac, decoupled_coupling, STRIP_EPS, piece_nodes=32, arc_nodes=32)
    return interface.find_characteristic_value(
        decoupled_forms, decoupled_dirac, decoupled_coupling, STRIP_EPS, contour,
        c0=0.5, moment_nodes=32, window_cells=STRIP_CELLS,
    )


@pytest.mark.slow
def test_interface_mode_appears_in_the_strip(
    supercell, decoupled_forms, decoupled_dirac, decoupled_coupling, decoupled_mode
):
    assert decoupled_mode.is_interface
    lam = decoupled_mode.lambda_found.real
    width = decoupled_coupling.abs_t * STRIP_EPS
    window = (decoupled_dirac.lambda_star - width, decoupled_dirac.lambda_star + width)
    problem = supercell.build_problem(
        decoupled_forms, STRIP_EPS, n_cells_per_side=STRIP_CELLS, lambda_window=window, n_eigs=10
    )
    result = supercell.solve_supercell(decoupled_forms, problem)
    nearest = result.nearest(lam)
    assert abs(nearest.value - lam) <= 1e-2 * width
    assert nearest.localization_score >= 0.8
    assert nearest.rate_right < 0.0
    assert nearest.rate_right == pytest.approx(decoupled_mode.rate_right, rel=0.1)


def test_repeated_solves_are_identical(supercell, forms, dirac):
    window = (dirac.lambda_star - 1.0, dirac.lambda_star + 1.0)
    problem = supercell.build_problem(forms, 1e-2, n_cells_per_side=3, lambda_window=window, n_eigs=4)
    first = supercell.solve_supercell(forms, problem)
    second = supercell.solve_supercell(forms, problem)
    assert [m.value for m in first.modes] == [m.value for m in second.modes]
    for a, b in zip(first.modes, second.modes):
        np.testing.assert_array_equal(a.vector, b.vector)
