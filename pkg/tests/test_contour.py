import numpy as np
import pytest

from core.utils import (
    circle_trapezoid,
    exponential_rate,
    gauss_legendre,
    loglog_slope,
    parallel_map,
    richardson_zero,
    sinh_gauss_legendre,
)
from domain.value_objects.contour import ROLE_FOLD, ROLE_FULL, ROLE_REMAINDER, ContourSpec

Q_STAR = 2.373


def _contour(radius=0.2, slope=4.7):
    return ContourSpec.around_folds(Q_STAR, radius, slope, piece_nodes=16, arc_nodes=16, dirac_width=0.01)


def _total(nodes, skip):
    return sum(dp for _, dp, role in nodes if role != skip)


def test_contour_spans_the_brillouin_zone():
    nodes = _contour().nodes()
    # los arcos y los segmentos de resto cubren el mismo intervalo para conjuntos de bandas distintos
    assert _total(nodes, ROLE_REMAINDER) == pytest.approx(2.0 * np.pi)
    assert _total(nodes, ROLE_FOLD) == pytest.approx(2.0 * np.pi)


def test_arcs_avoid_the_fold_poles_on_opposite_sides():
    contour = _contour()
    arcs = [piece for piece in contour.pieces if piece.role == ROLE_FOLD]
    assert len(arcs) == 2
    by_center = {np.sign(piece.center): piece for piece in arcs}
    # pendiente positiva en +q*: el arco pasa por debajo del polo
    assert by_center[1.0].side == -1
    assert by_center[-1.0].side == 1
    z, _ = by_center[1.0].quadrature()
    assert np.all(z.imag < 0)
    assert np.allclose(np.abs(z - Q_STAR), 0.2)


def test_reflected_contour_conjugates_the_arcs():
    contour = _contour()
    mirrored = contour.reflected()
    original = np.sort_complex(np.conj([p for p, _, _ in contour.nodes()]))
    reflected = np.sort_complex(np.array([q for q, _, _ in mirrored.nodes()]))
    np.testing.assert_allclose(reflected, original, atol=1e-14)
    integral = sum(np.exp(p) * dp for p, dp, _ in contour.nodes())
    assert sum(np.exp(q) * dq for q, dq, _ in mirrored.nodes()) == pytest.approx(np.conj(integral))


def test_refinement_doubles_the_nodes():
    contour = _contour()
    assert len(contour.nodes(refinement=2)) == 2 * len(contour.nodes())
    assert sum(contour.node_counts().values()) == len(contour.nodes())


@pytest.mark.parametrize("radius", [0.0, Q_STAR, np.pi - Q_STAR])
def test_radius_must_separate_the_poles(radius):
    with pytest.raises(ValueError):
        _contour(radius=radius)


def test_arc_integrates_analytic_function_like_its_diameter():
    contour = _contour()
    arc = next(piece for piece in contour.pieces if piece.role == ROLE_FOLD and piece.center > 0)
    z, dz = arc.quadrature()
    exact = (arc.end ** 3 - arc.start ** 3) / 3.0
    assert np.sum(z ** 2 * dz) == pytest.approx(exact, rel=1e-12)


def test_circle_rule_recovers_residue():
    z, dz = circle_trapezoid(0.3 + 0.1j, 0.5, 32)
    assert np.sum(dz / (z - 0.3 - 0.1j)) == pytest.approx(2j * np.pi)
    assert abs(np.sum(dz)) < 1e-12
    assert len(ContourSpec.circle(0.0, 1.0, 8)) == 8


def test_gauss_legendre_rules():
    x, w = gauss_legendre(-1.0, 2.0, 5)
    assert np.sum(w * x ** 9) == pytest.approx((2.0 ** 10 - 1.0) / 10.0)
    x, w = sinh_gauss_legendre(0.0, 1.0, 40, 1e-3, 0.0)
    assert np.sum(w) == pytest.approx(1.0)
    assert np.sum(x < 1e-2) > 10


def test_richardson_is_exact_for_quadratics():
    steps = [1e-2, 5e-3, 2.5e-3]
    values = [np.array([3.0 + 2.0 * s - 7.0 * s * s, 1.0j * s]) for s in steps]
    limit, spread = richardson_zero(steps, values)
    np.testing.assert_allclose(limit, [3.0, 0.0], atol=1e-10)
    assert spread >= 0.0
    with pytest.raises(ValueError):
        richardson_zero(steps, values[:2])


def test_fits():
    k = np.arange(1, 8)
    rate, r2 = exponential_rate(k, 3.0 * np.exp(-0.4 * k))
    assert rate == pytest.approx(-0.4)
    assert r2 == pytest.approx(1.0)
    assert loglog_slope([0.1, 0.05, 0.025], [0.01, 0.0025, 0.000625]) == pytest.approx(2.0)
    assert np.isnan(loglog_slope([1.0], [1.0]))


def test_parallel_map_keeps_order():
    assert parallel_map(lambda v: v * v, range(20), max_workers=4) == [v * v for v in range(20)]
    assert ROLE_FULL != ROLE_REMAINDER
