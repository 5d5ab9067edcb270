import numpy as np
import pytest

from application.services.perturbation_service import PerturbationService
from domain.value_objects.reduced_matrix import ReducedMatrix


def test_coupling_of_default_direction(coupling, dirac):
    # solo el armónico 4 cos(4 pi (x - 1/2)) acopla e^{2 pi i x} con e^{-2 pi i x}
    assert coupling.abs_t == pytest.approx(4.0 * dirac.lambda_star, rel=0.1)
    assert coupling.diagonals_vanish
    assert coupling.accepted
    assert coupling.relaxed_condition_margin == pytest.approx(2.0 * coupling.abs_t, rel=1e-8)


def test_transverse_term_does_not_change_coupling(coupling, decoupled_coupling):
    assert decoupled_coupling.t_star == pytest.approx(coupling.t_star, rel=1e-8)


def test_coupling_modulus_is_gauge_invariant(perturbation, dirac, forms):
    assert perturbation.gauge_check(dirac, forms, 0.7, -1.3) < 1e-12


def test_vanishing_direction_is_not_accepted(perturbation, dirac, forms, assembly, mesh):
    from domain.value_objects.index_field import CosineProfile, IndexField

    # cos(2 pi (x - 1/2)) no tiene el armónico que acopla el par
    off = assembly.assemble_forms(mesh, IndexField.create(direction=CosineProfile(1.0, 1.0)))
    result = perturbation.compute_coupling(dirac, off)
    assert not result.accepted


def test_reduced_matrix_kernel_on_branch():
    alpha, t, eps, p = 4.0 * np.pi, -160.0 + 0j, 1e-3, 0.01
    radius = ReducedMatrix.branch_radius(alpha, t, eps, p)
    assert radius == pytest.approx(np.hypot(alpha * p, abs(t) * eps))
    for lambda1 in (radius, -radius):
        matrix = ReducedMatrix(alpha=alpha, t_star=t, eps=eps, p=p, lambda1=lambda1)
        assert abs(matrix.determinant()) < 1e-10 * radius ** 2
        assert matrix.is_hermitian()
        np.testing.assert_allclose(matrix.as_array() @ matrix.kernel_vector(), 0.0, atol=1e-10)


def test_reduced_matrix_off_branch_is_invertible():
    matrix = ReducedMatrix(alpha=1.0, t_star=2.0, eps=0.1, p=0.0, lambda1=0.0)
    assert matrix.determinant() == pytest.approx(-0.04)


def test_reduced_dispersion_is_symmetric(coupling, dirac):
    lo, hi = PerturbationService.reduced_dispersion(coupling, dirac, 1e-3, 0.002)
    assert 0.5 * (lo + hi) == pytest.approx(dirac.lambda_star)
    assert hi - lo == pytest.approx(2.0 * np.hypot(dirac.alpha * 0.002, coupling.abs_t * 1e-3))


def test_sweep_points(perturbation, dirac, coupling):
    points = perturbation.sweep_points(dirac, coupling, [1e-2, 1e-3], [0.0, 1.0])
    assert len(points) == 4
    eps, p = points[1]
    assert dirac.alpha * p == pytest.approx(coupling.abs_t * eps)


def test_gap_opens_at_predicted_width(perturbation, forms, dirac, coupling):
    points = perturbation.sweep_points(dirac, coupling, [1e-3, 5e-4], [0.0, 1.0])
    report = perturbation.gap_asymptotics_check(forms, dirac, coupling, points, gate_fraction=1e-2)
    assert len(report) == 4
    for ratio in report.column("gap_ratio"):
        assert ratio == pytest.approx(1.0, abs=0.05)
    assert report.summary["max_defect"] < 0.05


def test_gate_skips_points_outside_regime(perturbation, forms, dirac, coupling):
    points = perturbation.sweep_points(dirac, coupling, [5e-2], [0.0])
    report = perturbation.gap_asymptotics_check(forms, dirac, coupling, points, gate_fraction=1e-2)
    assert len(report) == 0
    assert report.summary["skipped_points"] == 1


def test_lower_band_eigenvector_follows_reduced_kernel(perturbation, forms, dirac, coupling):
    eps = 1e-3
    p_values = [f * coupling.abs_t * eps / dirac.alpha for f in (0.5, 1.0)]
    report = perturbation.eigenfunction_asymptotics_check(forms, dirac, coupling, eps, p_values)
    assert len(report) == 2
    assert report.summary["max_angle_net"] < 0.1


def test_fold_band_samples(perturbation, forms, dirac):
    offsets = [1e-3, 1e-2]
    report = perturbation.fold_asymptotics_check(forms, dirac, 1e-3, offsets)
    assert len(report) == 2 * (1 + 2 * len(offsets))
    assert report.rows[0][2] < 1e-3 * dirac.lambda_star
    assert report.summary["max_slope_defect"] < 0.1 * abs(dirac.fold_slope)
