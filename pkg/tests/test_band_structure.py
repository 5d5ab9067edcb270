import numpy as np
import pytest

from application.services.band_service import BandService, flux_form
from core.exceptions.custom_exceptions import DegenerateEigenvalueException, NoDegeneracyException
from domain.value_objects.index_field import ConstantProfile, CosineProfile, IndexField, SumProfile

LAMBDA_STAR = 4.0 * np.pi ** 2
Q_STAR = np.sqrt(LAMBDA_STAR - (np.pi / 0.54) ** 2)


def test_symmetric_grid_contains_zero_and_excludes_pi():
    grid = BandService.symmetric_grid(8)
    assert grid.size == 16
    assert grid[0] == pytest.approx(-np.pi)
    assert np.any(np.isclose(grid, 0.0))
    assert grid[-1] < np.pi


def test_diagram_shape_and_rows(diagram):
    assert diagram.n_points == 32
    assert diagram.n_bands == 8
    assert len(diagram.rows()) == 32 * 8
    assert diagram.residuals.max() < 1e-8
    for labels in diagram.analytic_map:
        assert sorted(labels.tolist()) == list(range(8))


def test_bands_are_even_in_p(diagram):
    k = diagram.index_of(0.0)
    for offset in range(1, 8):
        np.testing.assert_allclose(diagram.values[k + offset], diagram.values[k - offset], rtol=1e-9)


def test_invalid_grid_is_rejected(bands, forms):
    with pytest.raises(ValueError):
        bands.solve_bands(forms, [0.5, 0.1], 0.0, 4)
    with pytest.raises(ValueError):
        bands.solve_bands(forms, [0.0, 4.0], 0.0, 4)


def test_dirac_point_of_empty_strip(dirac):
    assert dirac.band_indices == (2, 3)
    assert dirac.fold_band == 2
    assert dirac.lambda_star == pytest.approx(LAMBDA_STAR, rel=0.06)
    assert dirac.alpha == pytest.approx(4.0 * np.pi, rel=0.08)
    assert dirac.q_star == pytest.approx(Q_STAR, abs=0.25)
    assert dirac.fold_slope > 0.0
    assert dirac.tolerance_report["degeneracy_gap"] <= 1e-6 * dirac.lambda_star


def test_flux_basis_is_diagonal(dirac, forms):
    report = dirac.tolerance_report
    assert report["flux_defect_n"] < 0.05
    assert report["flux_defect_m"] < 0.05
    assert report["mirror_unimodular_defect"] < 1e-6
    q_nn = flux_form(dirac.v_n_star, dirac.v_n_star, forms.mesh)
    q_mm = flux_form(dirac.v_m_star, dirac.v_m_star, forms.mesh)
    assert q_nn.imag > 0.0 > q_mm.imag
    assert q_nn.imag == pytest.approx(-q_mm.imag, rel=0.05)
    M = forms.M_base
    assert np.real(dirac.v_n_star.conj() @ (M @ dirac.v_n_star)) == pytest.approx(1.0)
    assert abs(dirac.v_n_star.conj() @ (M @ dirac.v_m_star)) < 1e-10


def test_hellmann_feynman_matches_finite_difference(bands, forms):
    p, step = 1.0, 1e-5
    pair = bands.eigenpair_at(forms, p, 0.01, 0)
    slope = bands.group_velocity(forms, pair, 0.01)
    upper = bands.eigenpair_at(forms, p + step, 0.01, 0).value
    lower = bands.eigenpair_at(forms, p - step, 0.01, 0).value
    assert slope == pytest.approx((upper - lower) / (2 * step), rel=1e-6)


def test_group_velocity_refuses_degenerate_pair(bands, forms):
    pair = bands.eigenpair_at(forms, 0.0, 0.0, 2)
    with pytest.raises(DegenerateEigenvalueException):
        bands.group_velocity(forms, pair, 0.0)


def test_fold_root_matches_lambda_star(bands, forms, dirac):
    pair = bands.eigenpair_at(forms, dirac.q_star, 0.0, dirac.fold_band)
    assert pair.value == pytest.approx(dirac.lambda_star, rel=1e-12)


def test_complex_fold_pair_continues_real_band(bands, greens, forms, dirac):
    window = greens.fold_window(forms, dirac, 0.01)
    p = complex(dirac.q_star, 1e-3)
    pairs = bands.solve_bands_complex(forms, p, 0.01, window)
    assert len(pairs) == 1
    real_pair = bands.eigenpair_at(forms, dirac.q_star, 0.01, dirac.fold_band)
    slope = bands.complex_slope(forms, pairs[0])
    assert slope.real == pytest.approx(bands.group_velocity(forms, real_pair, 0.01), rel=1e-2)
    # continuación analítica: lambda(q + i d) ~ lambda(q) + i d lambda'(q)
    assert pairs[0].value.imag == pytest.approx(1e-3 * slope.real, rel=1e-2)


def test_gapped_base_has_no_dirac_point(assembly, mesh, bands):
    index = IndexField.create(
        SumProfile((ConstantProfile(1.0), CosineProfile(0.3, 2.0))),
        CosineProfile(4.0, 2.0),
    )
    forms = assembly.assemble_forms(mesh, index)
    diagram = bands.solve_bands(forms, BandService.symmetric_grid(8), 0.0, 6)
    with pytest.raises(NoDegeneracyException):
        bands.find_dirac(diagram, forms)


def test_find_dirac_requires_unperturbed_diagram(bands, forms):
    diagram = bands.solve_bands(forms, BandService.symmetric_grid(4), 0.01, 6)
    with pytest.raises(ValueError):
        bands.find_dirac(diagram, forms)
