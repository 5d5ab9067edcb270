"""
GreensService - Función de Green espectral discreta, raíces q_+/-(lambda) y operador de traza
continuado sobre el contorno C_eps, con las comprobaciones de residuos, radiación y salto.
"""
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse.linalg as spla

from application.services.assembly_service import AssemblyService, element_gradients
from application.services.band_service import BandService
from core.config.settings import settings
from core.exceptions.custom_exceptions import (
    BranchTrackingException,
    DecayFitException,
    ExtrapolationException,
    RootFindingException,
)
from core.logging.logger import get_greens_logger
from core.utils import exponential_rate, gauss_legendre, parallel_map, richardson_zero
from domain.entities.bands import BlochEigenpair, DiracData
from domain.entities.coupling import CouplingData
from domain.entities.forms import AssembledForms
from domain.entities.greens import (
    ComplexMomentumRoot,
    ContinuedOperatorSample,
    RadiationSplit,
    SpectralNodeData,
)
from domain.entities.reports import CheckReport
from domain.repositories.eigen_cache_repository import EigenCacheRepository
from domain.value_objects.contour import ROLE_FOLD, ROLE_FULL, ContourSpec
from domain.value_objects.trace_grid import TraceGrid
from infrastructure.persistence.memory_eigen_cache import MemoryEigenCache

TWO_PI = 2.0 * np.pi


class GreensService:
    """
    Servicio de la función de Green continuada.

    Los datos espectrales de cada nodo de contorno no dependen de lambda y se cachean por (p, eps).
    """

    def __init__(
        self,
        bands: Optional[BandService] = None,
        assembly: Optional[AssemblyService] = None,
        cache: Optional[EigenCacheRepository] = None,
    ):
        self._assembly = assembly or AssemblyService()
        self._bands = bands or BandService(self._assembly)
        self._cache = cache or MemoryEigenCache()
        self._traces: Dict[int, TraceGrid] = {}
        self._windows: Dict[Hashable, float] = {}
        self._logger = get_greens_logger()

    @property
    def assembly(self) -> AssemblyService:
        return self._assembly

    @property
    def bands(self) -> BandService:
        return self._bands

    # --- utilidades ---

    def trace_grid(self, forms: AssembledForms) -> TraceGrid:
        key = forms.token
        if key not in self._traces:
            self._traces[key] = TraceGrid.from_mesh(forms.mesh)
        return self._traces[key]

    def contour_for(
        self,
        dirac: DiracData,
        coupling: CouplingData,
        eps: float,
        piece_nodes: Optional[int] = None,
        arc_nodes: Optional[int] = None,
        radius_exponent: float = 1.0 / 3.0,
        radius_scale: float = 1.0,
        kind: str = "C_eps",
    ) -> ContourSpec:
        """C_eps con semicírculos de radio radius_scale*|eps|^radius_exponent."""
        radius = radius_scale * abs(eps) ** radius_exponent
        limit = min(dirac.q_star, np.pi - dirac.q_star)
        if radius >= 0.9 * limit:
            self._logger.warning(
                f"Radio {radius:.4g} demasiado grande frente a q*={dirac.q_star:.4g}; se reduce a {0.9 * limit:.4g}"
            )
            radius = 0.9 * limit
        return ContourSpec.around_folds(
            q_star=dirac.q_star,
            radius=radius,
            fold_slope=dirac.fold_slope,
            piece_nodes=piece_nodes or settings.contour_nodes,
            arc_nodes=arc_nodes or settings.arc_nodes,
            dirac_width=coupling.abs_t * abs(eps) / dirac.alpha,
            kind=kind,
        )

    def fold_window(self, forms: AssembledForms, dirac: DiracData, eps: float) -> Tuple[float, float]:
        """Ventana de parte real que aísla la banda de pliegue cerca de +-q*."""
        key = (forms.token, float(eps))
        if key not in self._windows:
            pair = self._bands.eigenpair_at(forms, dirac.q_star, eps, dirac.fold_band)
            self._windows[key] = 0.5 * pair.spectral_gap
        half = self._windows[key]
        return dirac.lambda_star - half, dirac.lambda_star + half

    def _fold_pair(self, forms: AssembledForms, dirac: DiracData, eps: float, p: complex) -> BlochEigenpair:
        pairs = self._bands.solve_bands_complex(forms, p, eps, self.fold_window(forms, dirac, eps))
        if len(pairs) != 1:
            raise BranchTrackingException(
                f"Se esperaba un autovalor de pliegue en p={p:.6g}, hay {len(pairs)}"
            )
        return pairs[0]

    # --- datos espectrales por nodo ---

    def node_data(self, forms: AssembledForms, dirac: DiracData, eps: float, p: complex) -> SpectralNodeData:
        key = (forms.token, complex(p), float(eps))
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        trace = self.trace_grid(forms)
        if complex(p).imag == 0.0:
            values, vectors = self._bands.decompose(forms, complex(p).real, eps)
            fold = dirac.fold_band
            data = SpectralNodeData(
                p=complex(p),
                eps=float(eps),
                values=values.astype(complex),
                trace_vectors=vectors[trace.dof_ids, :],
                fold_column=fold,
                fold_vector=vectors[:, fold],
            )
        else:
            pair = self._fold_pair(forms, dirac, eps, p)
            reference = dirac.fold_vector if complex(p).real > 0 else forms.P_mirror @ dirac.fold_vector
            M = forms.mass(eps)
            overlap = abs(reference.conj() @ (M @ pair.vector)) / np.sqrt(
                abs(np.real(reference.conj() @ (forms.M_base @ reference)))
            )
            if overlap < 0.5 * settings.overlap_threshold:
                raise BranchTrackingException(
                    f"Solape {overlap:.3f} con la banda de pliegue en p={p:.6g} por debajo del umbral"
                )
            data = SpectralNodeData(
                p=complex(p),
                eps=float(eps),
                values=np.array([pair.value], dtype=complex),
                trace_vectors=pair.vector[trace.dof_ids][:, None],
                fold_column=0,
                fold_vector=pair.vector,
                left_trace=pair.left_vector[trace.dof_ids],
                left_vector=pair.left_vector,
            )
        self._cache.put(key, data)
        return data

    def ensure_nodes(
        self, forms: AssembledForms, dirac: DiracData, eps: float, points: Sequence[complex]
    ) -> List[SpectralNodeData]:
        return parallel_map(lambda p: self.node_data(forms, dirac, eps, p), list(points))

    # --- operador continuado ---

    def _accumulate(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        lam: complex,
        nodes: Sequence[Tuple[complex, complex, str]],
        power: int = 1,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Sumas (1/2pi) sum dp * dyada / (lam - lambda)^power por partes (pliegue, resto), sin aplicar
        los pesos de traza. Con power = 2 se obtiene -d/d(lambda).
        """
        trace = self.trace_grid(forms)
        T = trace.size
        data = self.ensure_nodes(forms, dirac, eps, [p for p, _, _ in nodes])
        propagating = np.zeros((T, T), dtype=complex)
        remainder = np.zeros((T, T), dtype=complex)
        for (p, dp, role), node in zip(nodes, data):
            coefficients = dp / (lam - node.values) ** power
            if role == ROLE_FOLD:
                r = node.trace_vectors[:, 0]
                propagating += coefficients[0] * np.outer(r, np.conj(node.left_trace))
                continue
            f = node.fold_column
            V = node.trace_vectors
            others = coefficients.copy()
            others[f] = 0.0
            remainder += (V * others) @ V.conj().T
            if role == ROLE_FULL:
                propagating += coefficients[f] * np.outer(V[:, f], np.conj(V[:, f]))
        return propagating / TWO_PI, remainder / TWO_PI

    def assemble_continued_operator(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        lam: complex,
        contour: ContourSpec,
        refinement: int = 1,
    ) -> ContinuedOperatorSample:
        """
        Matriz de la traza del operador continuado actuando sobre densidades (valores nodales):
        G[s, t] = (1/2pi) int_C sum_n Tr u_n(s) conj(u_n(p_bar))(t) w_t / (lam - lambda_n(p)) dp.

        Args:
            forms: Formas ensambladas
            dirac: Datos del punto de Dirac
            eps: Parámetro de perturbación
            lam: Energía
            contour: Contorno
            refinement: Multiplicador de nodos (2 = autoconvergencia)

        Returns:
            ContinuedOperatorSample
        """
        nodes = contour.nodes(refinement)
        propagating, remainder = self._accumulate(forms, dirac, eps, lam, nodes)
        w = self.trace_grid(forms).weights
        propagating = propagating * w[None, :]
        remainder = remainder * w[None, :]
        self._logger.debug(f"G~ en lambda={lam:.8g}, eps={eps:g}: {len(nodes)} nodos, caché {self._cache.size()}")
        return ContinuedOperatorSample(
            lam=complex(lam),
            eps=float(eps),
            matrix=propagating + remainder,
            propagating=propagating,
            remainder=remainder,
            contour_kind=contour.kind,
            quadrature_nodes=len(nodes),
        )

    def continued_operator_derivative(
        self, forms: AssembledForms, dirac: DiracData, eps: float, lam: complex, contour: ContourSpec
    ) -> np.ndarray:
        """d/d(lambda) de la matriz del operador continuado."""
        propagating, remainder = self._accumulate(forms, dirac, eps, lam, contour.nodes(), power=2)
        w = self.trace_grid(forms).weights
        return -(propagating + remainder) * w[None, :]

    def self_convergence(
        self, forms: AssembledForms, dirac: DiracData, eps: float, lam: complex, contour: ContourSpec
    ) -> float:
        """Cambio relativo de la matriz al duplicar los nodos del contorno."""
        base = self.assemble_continued_operator(forms, dirac, eps, lam, contour)
        refined = self.assemble_continued_operator(forms, dirac, eps, lam, contour, refinement=2)
        return float(np.linalg.norm(refined.matrix - base.matrix, 2) / max(refined.norm(), 1e-300))

    # --- raíces complejas ---

    def find_complex_roots(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        lam: complex,
        radius: Optional[float] = None,
        max_iter: int = 50,
    ) -> ComplexMomentumRoot:
        """
        Newton sobre p -> lambda_f(p) - lam desde q*, con derivada por autovectores izquierdo y derecho.

        Raises:
            RootFindingException: NEWTON_NOT_CONVERGED o ROOT_ESCAPED_DISC
        """
        radius = radius if radius is not None else abs(eps) ** (1.0 / 3.0)
        lam = complex(lam)
        tol = settings.root_tol * max(1.0, abs(lam))
        q = complex(dirac.q_star)
        residual = np.inf
        slope = 0j
        iterations = 0
        for iterations in range(max_iter + 1):
            if lam.imag == 0.0:
                pair = self._bands.eigenpair_at(forms, q.real, eps, dirac.fold_band)
                value = complex(pair.value)
                slope = complex(self._bands.group_velocity(forms, pair, eps))
            else:
                pair = self._fold_pair(forms, dirac, eps, q)
                value = pair.value
                slope = self._bands.complex_slope(forms, pair)
            residual = abs(value - lam)
            if residual <= tol:
                break
            if iterations == max_iter:
                raise RootFindingException(
                    f"Newton sin convergencia en lambda={lam:.10g} (residuo {residual:.2e})"
                )
            q = q - (value - lam) / slope
            if lam.imag == 0.0:
                q = complex(q.real, 0.0)
            if abs(q - dirac.q_star) >= radius:
                raise RootFindingException(
                    f"La raíz {q:.8g} sale del disco de radio {radius:.4g} alrededor de q*",
                    "ROOT_ESCAPED_DISC",
                )
        sign_lam = int(np.sign(lam.imag))
        sign_q = int(np.sign(q.imag)) if abs(q.imag) > 1e-10 else 0
        expected = sign_lam * int(np.sign(dirac.fold_slope))
        certificate = {
            "sign_im_lambda": sign_lam,
            "sign_im_q": sign_q,
            "consistent": sign_q == expected,
        }
        self._logger.debug(f"Raíz q+={q:.12g} en lambda={lam:.10g} ({iterations} iteraciones)")
        return ComplexMomentumRoot(
            lam=lam,
            eps=float(eps),
            q_plus=q,
            q_minus=-q,
            slope_plus=slope,
            slope_minus=-slope,
            iterations=iterations,
            residual=float(residual),
            branch_certificate=certificate,
        )

    # --- identidad de residuos ---

    def _fold_dyad(self, node: SpectralNodeData) -> Tuple[np.ndarray, complex]:
        v = node.trace_vectors[:, node.fold_column]
        return np.outer(v, np.conj(v)), node.values[node.fold_column]

    def _pv_fold(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        lam: float,
        a: float,
        b: float,
        pole: float,
        tau: float,
        n: int,
    ) -> np.ndarray:
        """
        Valor principal de (1/2pi) int_a^b dyada_f / (lam - lambda_f) con plegado simétrico en torno
        al polo y exclusión [pole - tau, pole + tau].
        """
        half = min(pole - a, b - pole)
        pieces: List[Tuple[np.ndarray, np.ndarray, int]] = []
        u, wu = gauss_legendre(tau, half, n)
        pieces.append((pole + u, wu, 1))
        pieces.append((pole - u, wu, 1))
        if pole - half > a + 1e-15:
            x, wx = gauss_legendre(a, pole - half, n)
            pieces.append((x, wx, 1))
        if pole + half < b - 1e-15:
            x, wx = gauss_legendre(pole + half, b, n)
            pieces.append((x, wx, 1))
        points = np.concatenate([p for p, _, _ in pieces])
        weights = np.concatenate([w for _, w, _ in pieces])
        data = self.ensure_nodes(forms, dirac, eps, points.astype(complex))
        total = 0j
        for weight, node in zip(weights, data):
            dyad, value = self._fold_dyad(node)
            total = total + weight * dyad / (lam - value)
        return total / TWO_PI

    def residue_identity_check(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        lam: float,
        contour: ContourSpec,
        tau_list: Sequence[float] = (1e-2, 5e-3, 2.5e-3),
    ) -> CheckReport:
        """
        Compara, en cada semicírculo, la integral de la dyada de pliegue sobre el arco con el valor
        principal sobre el diámetro más el término -(i/2) dyada/|lambda'| en la raíz real.
        """
        lam = float(np.real(lam))
        roots = self.find_complex_roots(forms, dirac, eps, lam)
        w = self.trace_grid(forms).weights
        sample = self.assemble_continued_operator(forms, dirac, eps, lam, contour)
        scale = max(sample.norm(), 1e-300)
        report = CheckReport(
            name="residue_identity",
            columns=("lambda", "center", "root", "slope_abs", "discrepancy", "discrepancy_no_residue",
                     "predicted_jump", "pv_extrapolation_spread"),
        )
        slopes = []
        arcs = [piece for piece in contour.pieces if piece.role == ROLE_FOLD]
        for piece in arcs:
            root = roots.q_plus.real if piece.center > 0 else roots.q_minus.real
            pair = self._bands.eigenpair_at(forms, root, eps, dirac.fold_band)
            slope = abs(self._bands.group_velocity(forms, pair, eps))
            slopes.append(slope)
            z, dz = piece.quadrature()
            arc_nodes = [(complex(zk), complex(wk), ROLE_FOLD) for zk, wk in zip(z, dz)]
            arc_part, _ = self._accumulate(forms, dirac, eps, lam, arc_nodes)
            values = [
                self._pv_fold(forms, dirac, eps, lam, piece.start, piece.end, root, tau, piece.nodes)
                for tau in tau_list
            ]
            pv, spread = richardson_zero(tau_list, values)
            if not np.all(np.isfinite(pv)):
                raise ExtrapolationException(f"Valor principal no finito en el semicírculo de {piece.center:.6g}")
            trace_u = self.trace_grid(forms).restrict(pair.vector)
            residue = -0.5j * np.outer(trace_u, np.conj(trace_u)) / slope
            with_residue = (arc_part - pv - residue) * w[None, :]
            without = (arc_part - pv) * w[None, :]
            predicted = np.linalg.norm(trace_u) * np.linalg.norm(w * np.conj(trace_u)) / (2.0 * slope)
            report.add_row(
                lam, piece.center, root, slope,
                float(np.linalg.norm(with_residue, 2) / scale),
                float(np.linalg.norm(without, 2) / scale),
                float(predicted / scale),
                spread / scale,
            )
        report.summary["max_discrepancy"] = float(max(report.column("discrepancy")))
        report.summary["slope_evenness_defect"] = (
            float(abs(slopes[0] - slopes[1]) / max(slopes)) if len(slopes) == 2 else 0.0
        )
        report.summary["operator_norm"] = scale
        return report

    # --- campo en volumen ---

    def volume_field(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        lam: complex,
        phi: np.ndarray,
        contour: ContourSpec,
        cells: Sequence[int],
    ) -> Dict[int, np.ndarray]:
        """
        Campo u = G~(lam) phi en las celdas desplazadas k (valores por nodo de la malla),
        u_k(x) = (1/2pi) int_C e^{ip(k + x)} x_p(x) dp con x medido desde la línea de traza.
        """
        trace = self.trace_grid(forms)
        mesh = forms.mesh
        Z = mesh.node_incidence
        load = trace.extension @ np.asarray(phi, dtype=complex)
        M = forms.mass(eps)
        nodes = contour.nodes()
        data = self.ensure_nodes(forms, dirac, eps, [p for p, _, _ in nodes])

        def periodic_part(item):
            (p, _, role), node = item
            if role == ROLE_FOLD:
                r, l = node.fold_vector, node.left_vector
                return Z @ (r * (l.conj() @ load) / (lam - node.values[0]))
            A, _ = self._assembly.bloch_matrix(forms, p, eps)
            operator = (A - lam * M).tocsc()
            rhs = load
            if role != ROLE_FULL:
                v = node.fold_vector
                rhs = load - M @ (v * (v.conj() @ load))
            return Z @ (-spla.splu(operator).solve(rhs))

        parts = parallel_map(periodic_part, list(zip(nodes, data)))
        x_hat = mesh.trace_x
        fields = {}
        for k in cells:
            total = np.zeros(mesh.n_nodes, dtype=complex)
            for (p, dp, _), part in zip(nodes, parts):
                total += dp * np.exp(1j * p * (k + x_hat)) * part
            fields[int(k)] = total / TWO_PI
        return fields

    def resolvent_identity_defect(
        self, forms: AssembledForms, p: float, eps: float, lam: float, phi: np.ndarray
    ) -> float:
        """Diferencia relativa entre la suma espectral sobre todas las bandas y la solución directa."""
        trace = self.trace_grid(forms)
        load = trace.extension @ np.asarray(phi, dtype=complex)
        values, vectors = self._bands.decompose(forms, p, eps)
        spectral = vectors @ ((vectors.conj().T @ load) / (lam - values))
        A, M = self._assembly.bloch_matrix(forms, p, eps)
        direct = -spla.splu((A - lam * M).tocsc()).solve(load)
        return float(np.linalg.norm(spectral - direct) / max(np.linalg.norm(direct), 1e-300))

    def jump_check(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        lam: complex,
        phi: np.ndarray,
        contour: ContourSpec,
    ) -> Dict[str, float]:
        """
        Derivada normal por la derecha del campo en la celda 0 frente a phi/2: flujo variacional
        (-(K_R - lam M_R) u)_i / w_i y gradiente unilateral promediado. También mide la simetría espejo.
        """
        mesh = forms.mesh
        trace = self.trace_grid(forms)
        phi = np.asarray(phi, dtype=complex)
        u = self.volume_field(forms, dirac, eps, lam, phi, contour, [0])[0]
        right = mesh.element_centroids[:, 0] > 0.5
        half = self._assembly.assemble_node_forms(mesh, forms.index, right)
        residual = half.K @ u - lam * (half.mass(eps) @ u)
        variational = -residual[trace.node_ids] / trace.weights
        target = 0.5 * phi
        norm = max(trace.norm(target), 1e-300)

        owners = mesh.trace_edge_elements[:, 1]
        bx, _ = element_gradients(mesh, mesh.elements[owners], mesh.element_areas[owners])
        du = np.sum(bx * u[mesh.elements[owners]], axis=1)
        position = {int(n): i for i, n in enumerate(trace.node_ids)}
        acc = np.zeros(trace.size, dtype=complex)
        length_sum = np.zeros(trace.size)
        for (a, b), d in zip(mesh.trace_edges, du):
            length = abs(mesh.nodes[b, 1] - mesh.nodes[a, 1])
            for node in (int(a), int(b)):
                if node in position:
                    acc[position[node]] += length * d
                    length_sum[position[node]] += length
        gradient = acc / np.where(length_sum > 0, length_sum, 1.0)

        mirror = mesh.mirror_node_permutation
        return {
            "variational_defect": trace.norm(variational - target) / norm,
            "gradient_defect": trace.norm(gradient - target) / norm,
            "mirror_defect": float(np.abs(u[mirror] - u).max() / max(np.abs(u).max(), 1e-300)),
        }

    # --- radiación ---

    def _outgoing_pairs(
        self, forms: AssembledForms, dirac: DiracData, eps: float, roots: ComplexMomentumRoot
    ) -> Tuple[BlochEigenpair, BlochEigenpair]:
        return (
            self._fold_pair(forms, dirac, eps, roots.q_plus),
            self._fold_pair(forms, dirac, eps, roots.q_minus),
        )

    def amplitudes(
        self, forms: AssembledForms, dirac: DiracData, eps: float, lam: complex, phi: np.ndarray
    ) -> Tuple[complex, complex, ComplexMomentumRoot]:
        """
        amp_+ = -i <phi, conj u(q_+bar)> / lambda'(q_+), amp_- = i <phi, conj u(q_-bar)> / lambda'(q_-).
        """
        trace = self.trace_grid(forms)
        roots = self.find_complex_roots(forms, dirac, eps, lam)
        plus, minus = self._outgoing_pairs(forms, dirac, eps, roots)
        slope_plus = self._bands.complex_slope(forms, plus)
        slope_minus = self._bands.complex_slope(forms, minus)
        amp_plus = -1j * trace.pairing(phi, np.conj(trace.restrict(plus.left_vector))) / slope_plus
        amp_minus = 1j * trace.pairing(phi, np.conj(trace.restrict(minus.left_vector))) / slope_minus
        return complex(amp_plus), complex(amp_minus), roots

    def coupling_amplitude(
        self, forms: AssembledForms, dirac: DiracData, eps: float, q: complex, phi: np.ndarray
    ) -> complex:
        """<phi, conj u(q_bar)> con el autovector izquierdo de la banda de pliegue en q."""
        trace = self.trace_grid(forms)
        pair = self._fold_pair(forms, dirac, eps, q)
        return trace.pairing(phi, np.conj(trace.restrict(pair.left_vector)))

    def outgoing_orthogonal_density(
        self, forms: AssembledForms, dirac: DiracData, eps: float, lam: complex, phi: np.ndarray
    ) -> np.ndarray:
        """Proyecta phi para anular el acoplamiento con la onda saliente hacia la derecha."""
        trace = self.trace_grid(forms)
        roots = self.find_complex_roots(forms, dirac, eps, lam)
        pair = self._fold_pair(forms, dirac, eps, roots.q_plus)
        ell = np.conj(trace.restrict(pair.left_vector))
        phi = np.asarray(phi, dtype=complex)
        return phi - trace.pairing(phi, ell) / trace.pairing(np.conj(ell), ell) * np.conj(ell)

    def radiation_split(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        lam: complex,
        phi: np.ndarray,
        contour: ContourSpec,
        n_cells: int = 8,
    ) -> RadiationSplit:
        """
        Amplitudes salientes y ajuste del resto u_k - amp u_f(q) e^{iq(k + x)} en k = 1..K a cada lado.

        Raises:
            DecayFitException: el residuo no admite un ajuste exponencial
        """
        amp_plus, amp_minus, roots = self.amplitudes(forms, dirac, eps, lam, phi)
        plus, minus = self._outgoing_pairs(forms, dirac, eps, roots)
        mesh = forms.mesh
        Z = mesh.node_incidence
        x_hat = mesh.trace_x
        cells = np.arange(1, n_cells + 1)
        fields = self.volume_field(forms, dirac, eps, lam, phi, contour, list(cells) + list(-cells))
        right, left = [], []
        for k in cells:
            wave_r = amp_plus * (Z @ plus.vector) * np.exp(1j * roots.q_plus * (k + x_hat))
            wave_l = amp_minus * (Z @ minus.vector) * np.exp(1j * roots.q_minus * (-k + x_hat))
            right.append(float(np.abs(fields[int(k)] - wave_r).max()))
            left.append(float(np.abs(fields[int(-k)] - wave_l).max()))
        rate_r, r2_r = exponential_rate(cells, right)
        rate_l, r2_l = exponential_rate(cells, left)
        if not (np.isfinite(rate_r) and np.isfinite(rate_l)):
            raise DecayFitException(
                f"Residuo de campo sin ajuste exponencial (tasas {rate_r}, {rate_l})"
            )
        self._logger.info(
            f"Radiación en lambda={lam:.8g}: amp+={abs(amp_plus):.3e}, amp-={abs(amp_minus):.3e}, "
            f"tasas resto {rate_r:.4f}/{rate_l:.4f}"
        )
        return RadiationSplit(
            lam=complex(lam),
            amp_plus=amp_plus,
            amp_minus=amp_minus,
            roots=roots,
            cells=cells,
            residual_right=np.asarray(right),
            residual_left=np.asarray(left),
            rate_right=rate_r,
            rate_left=rate_l,
            fit_r2_right=r2_r,
            fit_r2_left=r2_l,
        )

    def radiation_condition_check(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        lam: complex,
        phi: np.ndarray,
        contour: ContourSpec,
        n_cells: int = 8,
    ) -> CheckReport:
        """
        Separación de radiación para phi y para su proyección sin acoplamiento a la onda saliente
        hacia la derecha: con amp_+ = 0 el campo completo decae en k -> +inf.
        """
        report = CheckReport(
            name="radiation_condition",
            columns=("density", "amp_plus_abs", "amp_minus_abs", "rate_right", "rate_left"),
        )
        projected = self.outgoing_orthogonal_density(forms, dirac, eps, lam, phi)
        splits = {}
        for label, density in (("given", phi), ("outgoing_free", projected)):
            split = self.radiation_split(forms, dirac, eps, lam, density, contour, n_cells)
            splits[label] = split
            report.add_row(label, abs(split.amp_plus), abs(split.amp_minus), split.rate_right, split.rate_left)
        given, free = splits["given"], splits["outgoing_free"]
        report.summary["amp_plus_relative"] = abs(free.amp_plus) / max(abs(given.amp_plus), 1e-300)
        report.summary["outgoing_free_decays"] = bool(free.rate_right < 0.0)
        return report

    # --- propiedades del operador ---

    def contour_independence(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        lam: complex,
        first: ContourSpec,
        second: ContourSpec,
    ) -> float:
        a = self.assemble_continued_operator(forms, dirac, eps, lam, first)
        b = self.assemble_continued_operator(forms, dirac, eps, lam, second)
        return float(np.linalg.norm(a.matrix - b.matrix, 2) / max(a.norm(), 1e-300))

    def cauchy_defect(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        eps: float,
        center: complex,
        radius: float,
        contour: ContourSpec,
        n: int = 16,
    ) -> float:
        """Reconstruye G(center) con la fórmula integral de Cauchy sobre una circunferencia."""
        circle = ContourSpec.circle(center, radius, n)
        reference = self.assemble_continued_operator(forms, dirac, eps, center, contour).matrix
        samples = parallel_map(
            lambda z: self.assemble_continued_operator(forms, dirac, eps, z[0], contour).matrix, circle
        )
        rebuilt = sum(s * dz / (z - center) for s, (z, dz) in zip(samples, circle)) / (2j * np.pi)
        return float(np.linalg.norm(rebuilt - reference, 2) / max(np.linalg.norm(reference, 2), 1e-300))

    def schwarz_defect(
        self, forms: AssembledForms, dirac: DiracData, eps: float, lam: complex, contour: ContourSpec
    ) -> float:
        """|| S(conj lam, contorno reflejado) - S(lam)^H || con S = G diag(w)^-1."""
        w = self.trace_grid(forms).weights
        direct = self.assemble_continued_operator(forms, dirac, eps, lam, contour).matrix / w[None, :]
        mirrored = self.assemble_continued_operator(
            forms, dirac, eps, np.conj(lam), contour.reflected()
        ).matrix / w[None, :]
        return float(np.linalg.norm(mirrored - direct.conj().T, 2) / max(np.linalg.norm(direct, 2), 1e-300))

    # --- operador límite en eps = 0 ---

    def limit_T(
        self,
        forms: AssembledForms,
        dirac: DiracData,
        n_nodes: Optional[int] = None,
        tau_list: Sequence[float] = (1e-2, 5e-3, 2.5e-3),
    ) -> Tuple[np.ndarray, Dict[str, float]]:
        """
        T = (1/2pi) vp int_{-pi}^{pi} sum_n Tr v_n <., conj v_n> / (lambda* - mu_n(p)) dp
            - (i/2) sum_{+-q*} Tr v_f <., conj v_f> / |mu_f'(+-q*)|,
        con valor principal en -q*, 0 y q* por plegado simétrico y extrapolación en tau.

        Returns:
            (matriz T x T, diagnósticos)
        """
        n = n_nodes or settings.contour_nodes
        lam = dirac.lambda_star
        q = dirac.q_star
        half = 0.45 * min(q, np.pi - q)
        trace = self.trace_grid(forms)
        w = trace.weights

        def integrate(points, weights):
            data = self.ensure_nodes(forms, dirac, 0.0, np.asarray(points, dtype=complex))
            total = np.zeros((trace.size, trace.size), dtype=complex)
            for weight, node in zip(weights, data):
                V = node.trace_vectors
                total += (V * (weight / (lam - node.values))) @ V.conj().T
            return total

        regular = 0j
        for a, b in ((-np.pi, -q - half), (-q + half, -half), (half, q - half), (q + half, np.pi)):
            x, wx = gauss_legendre(a, b, n)
            regular = regular + integrate(x, wx)

        windows = []
        for tau in tau_list:
            u, wu = gauss_legendre(tau, half, n)
            total = 0j
            for center in (-q, 0.0, q):
                total = total + integrate(np.concatenate([center + u, center - u]), np.concatenate([wu, wu]))
            windows.append(total)
        singular, spread = richardson_zero(tau_list, windows)
        if not np.all(np.isfinite(singular)):
            raise ExtrapolationException("Valor principal no finito en el operador límite")

        residues = 0j
        for vector in (dirac.fold_vector, forms.P_mirror @ dirac.fold_vector):
            tr = trace.restrict(vector)
            residues = residues - 0.5j * np.outer(tr, np.conj(tr)) / abs(dirac.fold_slope)
        T = ((regular + singular) / TWO_PI + residues) * w[None, :]
        relative_spread = spread / TWO_PI / max(np.linalg.norm(T, 2), 1e-300)
        self._logger.info(f"Operador límite T: norma {np.linalg.norm(T, 2):.6g}, dispersión vp {relative_spread:.2e}")
        return T, {"pv_extrapolation_spread": float(relative_spread), "window_half_width": float(half)}
