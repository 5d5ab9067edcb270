"""
BandService - Bandas de Bloch, etiquetado analítico, punto de Dirac y flujo sobre la traza.
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla
from scipy.optimize import brentq, linear_sum_assignment

from application.services.assembly_service import AssemblyService, element_gradients
from core.config.settings import settings
from core.exceptions.custom_exceptions import (
    BandSeparationException,
    BranchTrackingException,
    DegenerateEigenvalueException,
    EigenSolverException,
    FluxNotDiagonalizableException,
    NoDegeneracyException,
    NoFoldCrossingException,
)
from core.logging.logger import get_band_logger
from core.utils import parallel_map, start_vector
from domain.entities.bands import BandDiagram, BlochEigenpair, DiracData
from domain.entities.forms import AssembledForms
from domain.entities.mesh import Mesh
from domain.value_objects.trace_grid import TraceGrid


def _trace_edge_derivatives(u_nodes: np.ndarray, mesh: Mesh) -> np.ndarray:
    """d u / d x1 en cada arista de traza: promedio de los dos valores de un lado."""
    owners = mesh.trace_edge_elements
    if owners.size == 0:
        return np.zeros(0, dtype=complex)
    elements = owners.ravel()
    bx, _ = element_gradients(mesh, mesh.elements[elements], mesh.element_areas[elements])
    one_sided = np.sum(bx * u_nodes[mesh.elements[elements]], axis=1).reshape(-1, 2)
    return one_sided.mean(axis=1)


def flux_form(u: np.ndarray, v: np.ndarray, mesh: Mesh, p: complex = 0.0) -> complex:
    """
    Forma de flujo q(u, v) = int_Gamma (d u/d x1) conj(v) dx2 sobre la línea de traza.

    Con p != 0 mide la función de Bloch e^{ipx}u: se suma i p u a la derivada.

    Args:
        u: Vector sobre gdl periódicos
        v: Vector sobre gdl periódicos
        mesh: Malla de ambos vectores
        p: Cuasimomento del factor de Bloch

    Returns:
        Valor complejo de la forma
    """
    Z = mesh.node_incidence
    u_nodes = Z @ u
    v_nodes = Z @ v
    edges = mesh.trace_edges
    if edges.size == 0:
        return 0.0j
    lengths = np.abs(mesh.nodes[edges[:, 1], 1] - mesh.nodes[edges[:, 0], 1])
    du = _trace_edge_derivatives(u_nodes, mesh)
    va = np.conj(v_nodes[edges[:, 0]])
    vb = np.conj(v_nodes[edges[:, 1]])
    total = np.sum(lengths * du * 0.5 * (va + vb))
    if p != 0:
        total += 1j * p * np.sum(lengths * 0.5 * (u_nodes[edges[:, 0]] * va + u_nodes[edges[:, 1]] * vb))
    return complex(total)


def normal_derivative_trace(u: np.ndarray, mesh: Mesh, trace: TraceGrid) -> np.ndarray:
    """d u / d x1 en los nodos de traza (promedio ponderado por longitud de las aristas vecinas)."""
    u_nodes = mesh.node_incidence @ u
    edges = mesh.trace_edges
    du = _trace_edge_derivatives(u_nodes, mesh)
    lengths = np.abs(mesh.nodes[edges[:, 1], 1] - mesh.nodes[edges[:, 0], 1])
    position = {int(n): i for i, n in enumerate(trace.node_ids)}
    acc = np.zeros(trace.size, dtype=complex)
    mass = np.zeros(trace.size)
    for (a, b), d, length in zip(edges, du, lengths):
        for node in (int(a), int(b)):
            acc[position[node]] += length * d
            mass[position[node]] += length
    return acc / np.where(mass > 0, mass, 1.0)


class BandService:
    """
    Servicio de estructura de bandas.

    Resuelve el pencil (A(p), M(eps)) en mallas de cuasimomento, mantiene las etiquetas
    ascendente y analítica y localiza el punto de Dirac con su pliegue q*.
    """

    def __init__(self, assembly: Optional[AssemblyService] = None):
        self._assembly = assembly or AssemblyService()
        self._logger = get_band_logger()

    # --- autosolvers ---

    def solve_at(
        self, forms: AssembledForms, p: float, eps: float, n_bands: int
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Autopares más bajos del pencil hermitiano en un p real.

        Returns:
            (valores (B,), vectores (D, B) normalizados en M, residuos relativos (B,))

        Raises:
            EigenSolverException: el autosolver no convergió
        """
        A, M = self._assembly.bloch_matrix(forms, p, eps)
        try:
            if forms.dimension <= settings.dense_eigen_limit:
                values, vectors = sla.eigh(A.toarray(), M.toarray(), subset_by_index=[0, n_bands - 1])
            else:
                values, vectors = spla.eigsh(
                    A.tocsc(), k=n_bands, M=M.tocsc(), sigma=-1.0, which="LM",
                    v0=start_vector(A.shape[0], A.dtype),
                )
                order = np.argsort(values)
                values, vectors = values[order], vectors[:, order]
                norms = np.sqrt(np.real(np.einsum("ib,ib->b", vectors.conj(), M @ vectors)))
                vectors = vectors / norms
        except (sla.LinAlgError, spla.ArpackNoConvergence, ValueError) as error:
            raise EigenSolverException(f"Autosolver falló en p={p:.6g}: {error}")
        scale = max(spla.norm(A, 1), 1.0)
        residuals = np.linalg.norm(A @ vectors - (M @ vectors) * values, axis=0) / scale
        return np.real(values), vectors, residuals

    def decompose(self, forms: AssembledForms, p: float, eps: float) -> Tuple[np.ndarray, np.ndarray]:
        """Descomposición completa (todas las bandas discretas) en un p real."""
        A, M = self._assembly.bloch_matrix(forms, p, eps)
        try:
            values, vectors = sla.eigh(A.toarray(), M.toarray())
        except sla.LinAlgError as error:
            raise EigenSolverException(f"Descomposición completa falló en p={p:.6g}: {error}")
        return values, vectors

    def solve_bands(
        self,
        forms: AssembledForms,
        p_grid: Sequence[float],
        eps: float,
        n_bands: int,
    ) -> BandDiagram:
        """
        Diagrama de bandas con etiquetado ascendente y analítico.

        Args:
            forms: Formas ensambladas
            p_grid: Malla ordenada en [-pi, pi]
            eps: Parámetro de perturbación
            n_bands: Número de bandas

        Returns:
            BandDiagram
        """
        p_grid = np.asarray(p_grid, dtype=float)
        if np.any(np.abs(p_grid) > np.pi + 1e-12) or np.any(np.diff(p_grid) <= 0):
            raise ValueError("p_grid debe ser creciente y estar contenido en [-pi, pi]")
        if n_bands > forms.dimension:
            raise ValueError("n_bands excede la dimensión del problema")

        self._logger.info(f"Bandas: {p_grid.size} puntos, {n_bands} bandas, eps={eps:g}")
        results = parallel_map(lambda p: self.solve_at(forms, p, eps, n_bands), p_grid)
        values = np.stack([r[0] for r in results])
        vectors = np.stack([r[1] for r in results])
        residuals = np.stack([r[2] for r in results])
        analytic_map = self._analytic_map(values, vectors, forms.mass(eps))
        return BandDiagram(
            p_grid=p_grid,
            eps=float(eps),
            values=values,
            vectors=vectors,
            analytic_map=analytic_map,
            residuals=residuals,
        )

    @staticmethod
    def symmetric_grid(n_half: int) -> np.ndarray:
        """Malla de 2*n_half puntos p_k = -pi + k*pi/n_half (contiene 0, excluye +pi)."""
        return -np.pi + np.pi * np.arange(2 * n_half) / n_half

    # --- etiquetado analítico ---

    def _has_cluster(self, row: np.ndarray) -> bool:
        scale = max(1.0, float(np.abs(row).max()))
        return bool(np.any(np.diff(row) <= settings.degeneracy_rel_tol * scale))

    def _match(self, overlaps: np.ndarray) -> np.ndarray:
        n = overlaps.shape[0]
        perm = -np.ones(n, dtype=np.int64)
        used = set()
        ambiguous = False
        for a in np.argsort(-overlaps.max(axis=1), kind="stable"):
            b = int(np.argmax(overlaps[a]))
            if b in used or overlaps[a, b] < settings.overlap_threshold:
                ambiguous = True
                break
            perm[a] = b
            used.add(b)
        if ambiguous:
            rows, cols = linear_sum_assignment(-overlaps)
            perm = np.empty(n, dtype=np.int64)
            perm[rows] = cols
        return perm

    def _analytic_map(self, values: np.ndarray, vectors: np.ndarray, M) -> np.ndarray:
        n_points, n_bands = values.shape
        amap = np.empty((n_points, n_bands), dtype=np.int64)
        amap[0] = np.arange(n_bands)
        ref = 0
        for k in range(1, n_points):
            if self._has_cluster(values[k]):
                # punto degenerado: se conserva la asignación y se empareja k-1 con k+1
                amap[k] = amap[ref]
                continue
            previous = vectors[ref][:, amap[ref]]
            overlaps = np.abs(previous.conj().T @ (M @ vectors[k]))
            amap[k] = self._match(overlaps)
            ref = k
        return amap

    # --- derivadas ---

    def group_velocity(
        self,
        forms: AssembledForms,
        pair: BlochEigenpair,
        eps: float,
        degenerate_ok: bool = False,
    ) -> float:
        """
        Cociente de Hellmann-Feynman lambda'(p) = v^H A'(p) v / v^H M v.

        Raises:
            DegenerateEigenvalueException: el par no es simple
        """
        scale = max(1.0, abs(pair.value))
        if not degenerate_ok and pair.spectral_gap <= settings.degeneracy_rel_tol * scale:
            raise DegenerateEigenvalueException(
                f"Autovalor {pair.value:.8g} degenerado en p={pair.p:.6g} (gap {pair.spectral_gap:.2e})"
            )
        v = pair.vector
        numerator = v.conj() @ (forms.pencil_derivative(pair.p) @ v)
        denominator = v.conj() @ (forms.mass(eps) @ v)
        return float(np.real(numerator / denominator))

    def eigenpair_at(self, forms: AssembledForms, p: float, eps: float, band: int) -> BlochEigenpair:
        values, vectors, residuals = self.solve_at(forms, p, eps, band + 2)
        gaps = np.abs(np.delete(values, band) - values[band])
        return BlochEigenpair(
            p=float(p),
            value=float(values[band]),
            vector=vectors[:, band],
            band_ascending=band,
            spectral_gap=float(gaps.min()),
            residual=float(residuals[band]),
        )

    # --- punto de Dirac ---

    def find_dirac(
        self,
        diagram: BandDiagram,
        forms: AssembledForms,
        lambda_guess: Optional[float] = None,
        degeneracy_rel_tol: Optional[float] = None,
    ) -> DiracData:
        """
        Localiza el punto de Dirac en p = 0 y construye la base de flujo diagonal.

        Raises:
            NoDegeneracyException: no hay par degenerado en p = 0
            FluxNotDiagonalizableException: pendiente del cono casi nula
            NoFoldCrossingException: ninguna banda del par vuelve a lambda* en (0, pi)
            BandSeparationException: otra banda alcanza el nivel lambda*
        """
        if diagram.eps != 0.0:
            raise ValueError("find_dirac requiere un diagrama con eps = 0")
        tol = degeneracy_rel_tol or settings.degeneracy_rel_tol
        k0 = diagram.index_of(0.0)
        row = diagram.values[k0]
        j = self._select_pair(row, tol, lambda_guess)
        lambda_star = float(0.5 * (row[j] + row[j + 1]))
        self._logger.info(f"Par degenerado en p=0: bandas {j + 1},{j + 2}, lambda*={lambda_star:.10g}")

        mesh = forms.mesh
        W = diagram.vectors[k0][:, [j, j + 1]]
        # Q[b, a] = q(w_a, w_b)
        Q = np.array([[flux_form(W[:, a], W[:, b], mesh) for a in range(2)] for b in range(2)])
        F = (Q - Q.conj().T) / 2j
        flux_values, flux_vectors = np.linalg.eigh(F)
        v_n = W @ flux_vectors[:, 1]
        v_n = self._fix_phase(v_n, mesh)
        v_m = forms.P_mirror @ v_n

        A_prime = forms.pencil_derivative(0.0)
        M = forms.M_base
        alpha = float(np.real(v_n.conj() @ (A_prime @ v_n)) / np.real(v_n.conj() @ (M @ v_n)))
        if alpha <= 1e-8 * np.sqrt(lambda_star) or flux_values[0] * flux_values[1] >= 0:
            raise FluxNotDiagonalizableException(
                f"Forma de flujo no separa el par: autovalores {flux_values}, alpha={alpha:.3e}"
            )

        fold_band, q_star = self._fold_crossing(diagram, forms, j, lambda_star)
        fold_pair = self.eigenpair_at(forms, q_star, 0.0, fold_band)
        fold_slope = self.group_velocity(forms, fold_pair, 0.0)
        margins = self._check_separation(diagram, j, lambda_star, tol)

        w_m = W @ flux_vectors[:, 0]
        tau = w_m.conj() @ (M @ v_m)
        report = {
            "degeneracy_gap": float(row[j + 1] - row[j]),
            "flux_eigenvalue_minus": float(flux_values[0]),
            "flux_eigenvalue_plus": float(flux_values[1]),
            "flux_defect_n": abs(flux_form(v_n, v_n, mesh) - 0.5j * alpha) / (0.5 * alpha),
            "flux_defect_m": abs(flux_form(v_m, v_m, mesh) + 0.5j * alpha) / (0.5 * alpha),
            "cross_flux": abs(flux_form(v_n, v_m, mesh)) / (0.5 * alpha),
            "hf_offdiagonal": float(abs(v_m.conj() @ (A_prime @ v_n)) / alpha),
            "mirror_unimodular_defect": float(abs(abs(tau) - 1.0)),
            "mirror_residual": float(np.sqrt(abs(np.real(
                (v_m - tau * w_m).conj() @ (M @ (v_m - tau * w_m))
            )))),
            "root_residual": float(abs(fold_pair.value - lambda_star)),
            "separation_margin": margins,
            "min_band_gap": float(diagram.min_band_gaps().min()),
        }
        self._logger.info(
            f"Dirac: lambda*={lambda_star:.10g}, alpha={alpha:.8g}, q*={q_star:.10g} (banda {fold_band + 1})"
        )
        return DiracData(
            lambda_star=lambda_star,
            alpha=alpha,
            v_n_star=v_n,
            v_m_star=v_m,
            q_star=q_star,
            band_indices=(j, j + 1),
            fold_band=fold_band,
            fold_slope=fold_slope,
            fold_vector=fold_pair.vector,
            tolerance_report=report,
        )

    def _select_pair(self, row: np.ndarray, tol: float, lambda_guess: Optional[float]) -> int:
        scale = max(1.0, float(np.abs(row).max()))
        candidates: List[int] = [
            j for j in range(row.size - 1)
            if row[j + 1] - row[j] <= tol * max(abs(row[j]), 1.0) and row[j] > tol * scale
        ]
        if not candidates:
            gaps = ", ".join(f"{g:.3e}" for g in np.diff(row))
            raise NoDegeneracyException(f"No hay autovalor doble en p=0 (gaps: {gaps})")
        if lambda_guess is None:
            return candidates[0]
        return min(candidates, key=lambda j: abs(row[j] - lambda_guess))

    def _fix_phase(self, vector: np.ndarray, mesh: Mesh) -> np.ndarray:
        trace = TraceGrid.from_mesh(mesh)
        integral = trace.integral(trace.restrict(vector))
        if abs(integral) > 1e-8 * trace.norm(trace.restrict(vector)) * np.sqrt(trace.length):
            return vector * np.conj(integral) / abs(integral)
        anchor = vector[int(np.argmax(np.abs(vector)))]
        return vector * np.conj(anchor) / abs(anchor)

    def _fold_crossing(
        self, diagram: BandDiagram, forms: AssembledForms, j: int, lambda_star: float
    ) -> Tuple[int, float]:
        positive = np.flatnonzero(diagram.p_grid > 0)
        p_values = np.append(diagram.p_grid[positive], np.pi)
        k_pi = diagram.index_of(-np.pi) if np.isclose(diagram.p_grid[0], -np.pi) else positive[-1]
        for band in (j, j + 1):
            f = np.append(diagram.values[positive, band], diagram.values[k_pi, band]) - lambda_star
            signs = np.sign(f)
            changes = np.flatnonzero(signs[:-1] * signs[1:] < 0)
            if changes.size == 0:
                continue
            lo, hi = p_values[changes[0]], p_values[changes[0] + 1]

            def residual(p, band=band):
                return self.solve_at(forms, p, 0.0, band + 1)[0][band] - lambda_star

            q_star = brentq(residual, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200)
            if changes.size > 1:
                self._logger.warning(f"La banda {band + 1} cruza lambda* {changes.size} veces en (0, pi)")
            return band, float(q_star)
        raise NoFoldCrossingException(
            f"Ninguna de las bandas {j + 1},{j + 2} vuelve a lambda*={lambda_star:.8g} en (0, pi)"
        )

    def _check_separation(self, diagram: BandDiagram, j: int, lambda_star: float, tol: float) -> float:
        margin = np.inf
        for band in range(diagram.n_bands):
            if band in (j, j + 1):
                continue
            f = diagram.values[:, band] - lambda_star
            distance = float(np.abs(f).min())
            if np.any(np.sign(f[:-1]) * np.sign(f[1:]) < 0) or distance <= tol * lambda_star:
                raise BandSeparationException(
                    f"La banda {band + 1} alcanza el nivel lambda*={lambda_star:.8g}"
                )
            margin = min(margin, distance)
        return float(margin)

    # --- pencil no hermitiano ---

    def solve_bands_complex(
        self,
        forms: AssembledForms,
        p: complex,
        eps: float,
        window: Tuple[float, float],
    ) -> List[BlochEigenpair]:
        """
        Autopares del pencil en un p complejo con parte real del autovalor en la ventana,
        con autovectores izquierdos normalizados a l^H M r = 1.

        Raises:
            BranchTrackingException: colisión de autovalores dentro de la ventana
        """
        A, M = self._assembly.bloch_matrix(forms, p, eps)
        A_dense, M_dense = A.toarray(), M.toarray()
        try:
            values, left, right = sla.eig(A_dense, M_dense, left=True, right=True)
        except sla.LinAlgError as error:
            raise EigenSolverException(f"Autosolver no hermitiano falló en p={p}: {error}")
        order = np.argsort(values.real)
        values, left, right = values[order], left[:, order], right[:, order]
        lo, hi = window
        inside = np.flatnonzero((values.real >= lo) & (values.real <= hi))
        scale = max(1.0, float(np.abs(values[inside]).max())) if inside.size else 1.0
        for a, b in zip(inside[:-1], inside[1:]):
            if abs(values[a] - values[b]) <= settings.degeneracy_rel_tol * scale:
                raise BranchTrackingException(
                    f"Colisión de autovalores en p={p}: {values[a]:.8g} ~ {values[b]:.8g}"
                )
        derivative = forms.pencil_derivative(p)
        pairs = []
        for idx in inside:
            r = right[:, idx]
            r = r / np.sqrt(abs(np.real(r.conj() @ (M_dense @ r))))
            l = left[:, idx]
            l = l / np.conj(l.conj() @ (M_dense @ r))
            gaps = np.abs(np.delete(values, idx) - values[idx])
            residual = np.linalg.norm(A_dense @ r - values[idx] * (M_dense @ r)) / max(spla.norm(A, 1), 1.0)
            pairs.append(BlochEigenpair(
                p=complex(p),
                value=complex(values[idx]),
                vector=r,
                band_ascending=int(idx),
                spectral_gap=float(gaps.min()) if gaps.size else float("inf"),
                residual=float(residual),
                left_vector=l,
            ))
        return pairs

    @staticmethod
    def complex_slope(forms: AssembledForms, pair: BlochEigenpair) -> complex:
        """lambda'(p) = l^H A'(p) r / l^H M r para un par no hermitiano."""
        if pair.left_vector is None:
            raise ValueError("el par no tiene autovector izquierdo")
        l, r = pair.left_vector, pair.vector
        # l^H M r = 1 por normalización
        return complex(l.conj() @ (forms.pencil_derivative(pair.p) @ r))
