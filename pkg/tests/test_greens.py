import numpy as np
import pytest

from core.exceptions.custom_exceptions import RootFindingException

EPS = 1e-2


@pytest.fixture(scope="module")
def contour(greens, dirac, coupling):
    return greens.contour_for(dirac, coupling, EPS, piece_nodes=32, arc_nodes=32)


@pytest.fixture(scope="module")
def default_contour(greens, dirac, coupling):
    """Cuadratura por defecto de las corridas (settings.contour_nodes / arc_nodes)."""
    return greens.contour_for(dirac, coupling, EPS)


@pytest.fixture(scope="module")
def gap_energy(dirac, coupling):
    """Energía real dentro del gap local, lejos de sus bordes."""
    return dirac.lambda_star + 0.2 * coupling.abs_t * EPS


def test_contour_radius_scales_with_eps(greens, dirac, coupling):
    contour = greens.contour_for(dirac, coupling, EPS, piece_nodes=8, arc_nodes=8)
    arc = next(piece for piece in contour.pieces if piece.kind == "arc")
    assert arc.radius == pytest.approx(EPS ** (1.0 / 3.0))
    small = greens.contour_for(dirac, coupling, EPS, piece_nodes=8, arc_nodes=8, radius_scale=0.5, kind="C_tilde_tau")
    assert small.kind == "C_tilde_tau"
    assert next(p for p in small.pieces if p.kind == "arc").radius == pytest.approx(0.5 * EPS ** (1.0 / 3.0))


def test_real_roots_are_opposite(greens, forms, dirac, gap_energy):
    roots = greens.find_complex_roots(forms, dirac, EPS, gap_energy)
    assert roots.q_plus.imag == 0.0
    assert roots.q_minus == -roots.q_plus
    assert abs(roots.q_plus - dirac.q_star) < EPS ** (1.0 / 3.0)
    assert roots.residual <= 1e-10 * gap_energy
    assert roots.branch_certificate["sign_im_lambda"] == 0


def test_complex_root_moves_with_the_energy(greens, forms, dirac, gap_energy):
    lam = gap_energy - 0.05j
    roots = greens.find_complex_roots(forms, dirac, EPS, lam)
    certificate = roots.branch_certificate
    assert certificate["sign_im_lambda"] == -1
    assert certificate["consistent"]
    # Im q ~ Im lambda / lambda'(q)
    assert roots.q_plus.imag == pytest.approx(-0.05 / dirac.fold_slope, rel=0.05)
    assert roots.slope_minus == -roots.slope_plus


def test_root_leaving_the_disc_is_reported(greens, forms, dirac):
    with pytest.raises(RootFindingException) as info:
        greens.find_complex_roots(forms, dirac, EPS, dirac.lambda_star + 3.0)
    assert info.value.code == "ROOT_ESCAPED_DISC"


def test_spectral_sum_matches_direct_solve(greens, forms, dirac):
    phi = np.linspace(1.0, 2.0, greens.trace_grid(forms).size)
    defect = greens.resolvent_identity_defect(forms, 0.7, EPS, dirac.lambda_star + 0.3, phi)
    assert defect < 1e-8


def test_continued_operator_shape_and_split(greens, forms, dirac, contour, gap_energy):
    sample = greens.assemble_continued_operator(forms, dirac, EPS, gap_energy, contour)
    size = greens.trace_grid(forms).size
    assert sample.matrix.shape == (size, size)
    assert np.all(np.isfinite(sample.matrix))
    np.testing.assert_allclose(sample.matrix, sample.propagating + sample.remainder)
    assert sample.quadrature_nodes == len(contour.nodes())
    phi = np.ones(size)
    np.testing.assert_allclose(sample.apply(phi), sample.matrix @ phi)


def test_schwarz_reflection(greens, forms, dirac, contour, gap_energy):
    assert greens.schwarz_defect(forms, dirac, EPS, gap_energy + 0.1j, contour) < 1e-8


def test_operator_does_not_depend_on_the_arc_radius(greens, forms, dirac, coupling, default_contour, gap_energy):
    smaller = greens.contour_for(dirac, coupling, EPS, radius_scale=0.5)
    assert greens.contour_independence(forms, dirac, EPS, gap_energy, default_contour, smaller) <= 1e-8


def test_operator_is_analytic_in_the_energy(greens, forms, dirac, coupling, contour):
    radius = 0.1 * coupling.abs_t * EPS
    assert greens.cauchy_defect(forms, dirac, EPS, dirac.lambda_star, radius, contour, n=16) < 1e-6


def test_self_convergence(greens, forms, dirac, contour, gap_energy):
    assert greens.self_convergence(forms, dirac, EPS, gap_energy, contour) < 1e-5


def test_jump_relation_on_the_trace(greens, forms, dirac, contour, gap_energy):
    phi = 1.0 + 0.5 * np.cos(np.pi * greens.trace_grid(forms).coordinates / forms.mesh.height)
    defects = greens.jump_check(forms, dirac, EPS, gap_energy, phi, contour)
    assert defects["variational_defect"] < 1e-6
    assert defects["mirror_defect"] < 1e-7
    # el gradiente unilateral solo converge con la malla
    assert defects["gradient_defect"] < 1.0


def test_cache_reuses_node_data(greens, forms, dirac, contour, gap_energy):
    greens.assemble_continued_operator(forms, dirac, EPS, gap_energy, contour)
    size = greens._cache.size()
    greens.assemble_continued_operator(forms, dirac, EPS, gap_energy + 0.05, contour)
    assert greens._cache.size() == size


@pytest.mark.slow
def test_residue_identity_on_both_arcs(greens, forms, dirac, default_contour, gap_energy):
    report = greens.residue_identity_check(forms, dirac, EPS, gap_energy, default_contour)
    assert len(report) == 2
    assert report.summary["max_discrepancy"] <= 1e-4
    assert report.summary["slope_evenness_defect"] < 1e-8
    for with_residue, without in zip(report.column("discrepancy"), report.column("discrepancy_no_residue")):
        assert without > 10.0 * with_residue


@pytest.mark.slow
def test_residue_discrepancy_falls_when_nodes_double(greens, forms, dirac, coupling, contour, gap_energy):
    base = greens.residue_identity_check(forms, dirac, EPS, gap_energy, contour)
    doubled_contour = greens.contour_for(dirac, coupling, EPS, piece_nodes=64, arc_nodes=64)
    doubled = greens.residue_identity_check(forms, dirac, EPS, gap_energy, doubled_contour)
    assert doubled.summary["max_discrepancy"] < base.summary["max_discrepancy"]


@pytest.mark.slow
def test_outgoing_free_density_does_not_radiate_to_the_right(greens, forms, dirac, contour, gap_energy):
    trace = greens.trace_grid(forms)
    phi = 1.0 + 0.5 * np.cos(np.pi * trace.coordinates / forms.mesh.height)
    projected = greens.outgoing_orthogonal_density(forms, dirac, EPS, gap_energy, phi)
    amp_plus, _, _ = greens.amplitudes(forms, dirac, EPS, gap_energy, projected)
    given_plus, _, _ = greens.amplitudes(forms, dirac, EPS, gap_energy, phi)
    assert abs(given_plus) > 0.0
    assert abs(amp_plus) <= 1e-10 * abs(given_plus)

    report = greens.radiation_condition_check(forms, dirac, EPS, gap_energy, phi, contour, n_cells=6)
    assert report.column("density") == ["given", "outgoing_free"]
    assert report.summary["amp_plus_relative"] <= 1e-10
    assert report.summary["outgoing_free_decays"]
    free = report.rows[1]
    assert free[3] < 0.0 and free[4] < 0.0
