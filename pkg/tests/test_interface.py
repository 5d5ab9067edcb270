import numpy as np
import pytest

from application.services.band_service import BandService
from application.services.interface_service import InterfaceService
from domain.entities.interface import INTERFACE, RESONANT, LimitOperator
from domain.value_objects.cell_geometry import CellGeometry

from conftest import HEIGHT

EPS = 1e-2


def _limit(variant="squared"):
    return LimitOperator(
        T_matrix=np.diag([1.0, 2.0]).astype(complex),
        p_dirac=np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex),
        abs_t=4.0,
        alpha=2.0,
        beta_variant=variant,
    )


def test_beta_vanishes_at_the_cone_tip():
    limit = _limit()
    assert limit.beta(0.0) == 0.0
    np.testing.assert_allclose(limit.matrix(0.0), 2.0 * limit.T_matrix)


def test_beta_variants():
    limit = _limit()
    h = 1.0
    scale = -h / (limit.abs_t * limit.alpha)
    squared = scale / np.sqrt(1.0 - 1.0 / 16.0)
    linear = scale / np.sqrt(1.0 - 1.0 / 4.0)
    assert limit.beta(h) == pytest.approx(squared)
    assert limit.beta(h, "linear") == pytest.approx(linear)
    assert _limit("linear").beta(h) == pytest.approx(linear)
    with pytest.raises(ValueError):
        limit.beta(h, "cubic")


def test_limit_sigma_min_tracks_the_dirac_term():
    limit = _limit()
    # 2T + 2 beta P = diag(2 + 2 beta, 4): se anula en beta = -1
    h = limit.abs_t * limit.alpha / np.sqrt(1.0 + limit.alpha ** 2)
    assert limit.beta(h) == pytest.approx(-1.0)
    assert limit.sigma_min(h) < 1e-12
    assert limit.sigma_min(0.0) == pytest.approx(2.0)


@pytest.mark.parametrize(
    "lam, expected",
    [(40.0 - 1e-3j, False), (40.0 + 0j, False), (40.0 + 1e-12j, False), (40.0 + 1e-3j, True)],
)
def test_causality_flag_tolerates_search_noise(lam, expected):
    # umbral 1e-8 * |t| * eps = 1.6e-9
    assert InterfaceService.violates_causality(lam, abs_t=16.0, eps=1e-2) is expected


@pytest.fixture(scope="module")
def decoupled_contour(greens, decoupled_dirac, decoupled_coupling):
    return greens.contour_for(decoupled_dirac, decoupled_coupling, EPS, piece_nodes=32, arc_nodes=32)


@pytest.fixture(scope="module")
def default_contour(greens, dirac, coupling):
    return greens.contour_for(dirac, coupling, EPS, piece_nodes=32, arc_nodes=32)


def test_interface_operator_sums_both_sides(interface, greens, decoupled_forms, decoupled_dirac, decoupled_contour):
    h = 0.1 * decoupled_dirac.alpha
    sample = interface.assemble_interface_operator(decoupled_forms, decoupled_dirac, EPS, h, decoupled_contour)
    lam = decoupled_dirac.lambda_star + EPS * h
    plus = greens.assemble_continued_operator(decoupled_forms, decoupled_dirac, EPS, lam, decoupled_contour)
    minus = greens.assemble_continued_operator(decoupled_forms, decoupled_dirac, -EPS, lam, decoupled_contour)
    np.testing.assert_allclose(sample.matrix, plus.matrix + minus.matrix)
    assert 0.0 <= sample.relative_sigma <= 1.0


@pytest.mark.slow
def test_decoupled_direction_gives_a_real_interface_mode(
    interface, decoupled_forms, decoupled_dirac, decoupled_coupling, decoupled_contour
):
    result = interface.find_characteristic_value(
        decoupled_forms, decoupled_dirac, decoupled_coupling, EPS, decoupled_contour,
        c0=0.5, moment_nodes=32, window_cells=6,
    )
    abs_t = decoupled_coupling.abs_t
    assert result.moment_count == 1
    assert result.classification == INTERFACE
    assert result.is_interface
    assert abs(result.h_found.real) < 0.5 * abs_t
    assert abs(result.h_found.imag) < 1e-6 * abs_t
    assert result.sigma_rel <= 1e-8
    assert result.rate_right < 0.0 and result.rate_left < 0.0
    assert set(range(-6, 7)) <= set(result.mode_field)
    assert {"0-", "0+"} <= set(result.mode_field)
    assert result.summary()["classification"] == INTERFACE
    assert result.summary()["causality_violation"] is False


@pytest.mark.slow
def test_transverse_coupling_makes_the_mode_resonant(interface, greens, forms, dirac, coupling, default_contour):
    result = interface.find_characteristic_value(
        forms, dirac, coupling, EPS, default_contour, c0=0.5, moment_nodes=32, window_cells=6,
    )
    assert result.classification == RESONANT
    assert result.lambda_found.imag < 0.0
    assert not result.causality_violation
    split = greens.radiation_split(forms, dirac, EPS, result.lambda_found, result.phi, default_contour, n_cells=6)
    assert abs(split.amp_plus) > 0.0
    assert split.rate_right < 0.0
    # el campo crece hacia la derecha al ritmo |Im q_+|
    assert result.rate_right > 0.0
    assert abs(interface.growth_rate_ratio(result, split) - 1.0) < 0.15


@pytest.mark.slow
def test_rouche_counts_are_stable(interface, decoupled_forms, decoupled_dirac, decoupled_coupling, decoupled_contour):
    counts = interface.rouche_stability(
        decoupled_forms, decoupled_dirac, decoupled_coupling, EPS, decoupled_contour, c0=0.5, n_nodes=32
    )
    assert counts == {0.8: 1, 1.2: 1}


@pytest.fixture(scope="module")
def decoupled_limit(interface, decoupled_forms, decoupled_dirac, decoupled_coupling):
    return interface.assemble_limit_operator(decoupled_forms, decoupled_dirac, decoupled_coupling, n_nodes=32)


@pytest.mark.slow
def test_limit_operator_shape(decoupled_limit):
    size = decoupled_limit.T_matrix.shape[0]
    assert decoupled_limit.p_dirac.shape == (size, size)
    assert decoupled_limit.dirac_weight == 2.0
    assert np.all(np.isfinite(decoupled_limit.T_matrix))
    assert np.isfinite(decoupled_limit.diagnostics["pv_extrapolation_spread"])


@pytest.mark.slow
def test_interface_operator_converges_to_the_limit(
    interface, greens, decoupled_forms, decoupled_dirac, decoupled_coupling, decoupled_limit
):
    abs_t = decoupled_coupling.abs_t
    h_samples = [-0.4 * abs_t, 0.0, 0.4 * abs_t, complex(0.3, -0.3) * abs_t]

    def contour_factory(eps):
        return greens.contour_for(decoupled_dirac, decoupled_coupling, eps, piece_nodes=32, arc_nodes=32)

    report = interface.convergence_study(
        decoupled_forms, decoupled_dirac, decoupled_limit, contour_factory, [4e-2, 1e-2, 2.5e-3], h_samples
    )
    assert len(report) == 3 * len(h_samples)
    assert report.summary["monotone_squared"]
    assert report.summary["fitted_order_squared"] > 0.0
    # con peso 1 en la dyada de Dirac la distancia al límite no se cierra
    assert report.summary["smallest_eps_difference_weight_1"] > report.summary["smallest_eps_difference"]


@pytest.mark.slow
def test_kernel_defect_shrinks_with_the_mesh(
    interface, mesh_service, assembly, bands, perturbation, decoupled_index,
    decoupled_forms, decoupled_dirac, decoupled_limit,
):
    coarse = interface.kernel_defect(decoupled_forms, decoupled_dirac, decoupled_limit)
    fine_mesh = mesh_service.build_mesh(CellGeometry.create(strip_height=HEIGHT, mesh_target_h=0.05))
    fine_forms = assembly.assemble_forms(fine_mesh, decoupled_index)
    diagram = bands.solve_bands(fine_forms, BandService.symmetric_grid(16), 0.0, 8)
    fine_dirac = bands.find_dirac(diagram, fine_forms)
    fine_coupling = perturbation.compute_coupling(fine_dirac, fine_forms)
    fine_limit = interface.assemble_limit_operator(fine_forms, fine_dirac, fine_coupling, n_nodes=32)
    assert interface.kernel_defect(fine_forms, fine_dirac, fine_limit) < coarse


@pytest.mark.slow
def test_sigma_scan_locates_the_minimum(interface, decoupled_forms, decoupled_dirac, decoupled_coupling, decoupled_contour):
    abs_t = decoupled_coupling.abs_t
    h_values = list(np.linspace(-0.4, 0.4, 9) * abs_t)
    report = interface.scan_sigma_min(decoupled_forms, decoupled_dirac, EPS, decoupled_contour, h_values)
    assert len(report) == 9
    assert abs(report.summary["argmin_h"]) <= 0.2 * abs_t
