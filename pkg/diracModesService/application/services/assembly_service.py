"""
AssemblyService - Ensamblado P1 de las formas de la celda y del pencil de Bloch.
Cuadratura de 3 puntos (orden 2) para todas las masas ponderadas; ensamblado COO -> CSR.
"""
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from core.config.settings import settings
from core.exceptions.custom_exceptions import InvalidIndexFieldException, MassNotPositiveException
from core.logging.logger import get_mesh_logger
from domain.entities.forms import AssembledForms, NodeForms
from domain.entities.mesh import Mesh
from domain.value_objects.cell_geometry import MIRROR_LINE
from domain.value_objects.index_field import IndexField

# baricéntricas de los 3 puntos interiores (orden 2), pesos área/3
_QUAD_BARY = np.array([
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
])


def quadrature_points(mesh: Mesh) -> np.ndarray:
    """Puntos de cuadratura (E, 3, 2)."""
    vertices = mesh.nodes[mesh.elements]  # (E, 3, 2)
    return np.einsum("qk,ekd->eqd", _QUAD_BARY, vertices)


def _coo(elements: np.ndarray, local: np.ndarray, n: int) -> sp.csr_matrix:
    rows = np.repeat(elements, 3, axis=1).ravel()
    cols = np.tile(elements, (1, 3)).ravel()
    return sp.coo_matrix((local.reshape(len(elements), 9).ravel(), (rows, cols)), shape=(n, n)).tocsr()


def element_gradients(mesh: Mesh, elements: np.ndarray, areas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Gradientes de las funciones base P1 por elemento: (d/dx1, d/dx2), cada uno (E, 3)."""
    p = mesh.nodes[elements]
    b = np.stack([p[:, 1, 1] - p[:, 2, 1], p[:, 2, 1] - p[:, 0, 1], p[:, 0, 1] - p[:, 1, 1]], axis=1)
    c = np.stack([p[:, 2, 0] - p[:, 1, 0], p[:, 0, 0] - p[:, 2, 0], p[:, 1, 0] - p[:, 0, 0]], axis=1)
    return b / (2.0 * areas[:, None]), c / (2.0 * areas[:, None])


def _weighted_mass(elements, areas, weights_q, n):
    """Masa con peso evaluado en los 3 puntos de cuadratura: sum_q (A/3) w_q phi_i phi_j."""
    local = np.einsum("e,eq,qi,qj->eij", areas / 3.0, weights_q, _QUAD_BARY, _QUAD_BARY)
    return _coo(elements, local, n)


class AssemblyService:
    """
    Servicio de ensamblado de formas.

    Produce AssembledForms inmutables y las matrices (A(p), M(eps)) del pencil de Bloch.
    """

    def __init__(self, dense_limit: Optional[int] = None):
        self._dense_limit = dense_limit or settings.dense_eigen_limit
        self._logger = get_mesh_logger()

    def assemble_node_forms(
        self,
        mesh: Mesh,
        index: IndexField,
        element_mask: Optional[np.ndarray] = None,
    ) -> NodeForms:
        """
        Ensambla las formas a nivel de nodo, opcionalmente sobre un subconjunto de elementos.

        Args:
            mesh: Malla
            index: Índice de refracción
            element_mask: Máscara booleana de elementos (None = todos)

        Returns:
            NodeForms

        Raises:
            InvalidIndexFieldException: n <= 0 en algún punto de cuadratura
        """
        mask = np.ones(mesh.n_elements, dtype=bool) if element_mask is None else np.asarray(element_mask)
        elements = mesh.elements[mask]
        areas = mesh.element_areas[mask]
        n = mesh.n_nodes

        b, c = element_gradients(mesh, elements, areas)
        K_local = areas[:, None, None] * (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :])
        # C_raw[i, j] = int d(phi_j)/dx1 * phi_i = b_j * A/3
        C_local = (areas / 3.0)[:, None, None] * np.broadcast_to(b[:, None, :], (len(elements), 3, 3))

        qp = quadrature_points(mesh)[mask]
        x1, x2 = qp[..., 0], qp[..., 1]
        n_q = index.n(x1, x2, mesh.height)
        dn_q = index.dn(x1, x2, mesh.height)
        if np.any(n_q <= 0.0):
            raise InvalidIndexFieldException(
                f"n <= 0 en un punto de cuadratura (min {n_q.min():.3g})", "NON_POSITIVE_INDEX"
            )

        return NodeForms(
            K=_coo(elements, K_local, n),
            C_raw=_coo(elements, C_local, n),
            M0=_weighted_mass(elements, areas, np.ones_like(n_q), n),
            M_base=_weighted_mass(elements, areas, n_q ** 2, n),
            M_dir=_weighted_mass(elements, areas, 2.0 * n_q * dn_q, n),
            M_dir2=_weighted_mass(elements, areas, dn_q ** 2, n),
        )

    def assemble_forms(
        self, mesh: Mesh, index: IndexField, symmetric_direction: bool = True
    ) -> AssembledForms:
        """
        Ensambla K, C, M0, M_base, M_dir, M_dir2 y P_mirror sobre gdl periódicos.

        Args:
            mesh: Malla conforme y simétrica
            index: Índice base y dirección de perturbación
            symmetric_direction: Exigir dn simétrico (False solo para estudios de simetría)

        Returns:
            AssembledForms

        Raises:
            InvalidIndexFieldException: n <= 0 o índice no simétrico
        """
        self._check_index(mesh, index, symmetric_direction)
        node_forms = self.assemble_node_forms(mesh, index)
        Z = mesh.node_incidence

        def identify(matrix):
            return (Z.T @ matrix @ Z).tocsr()

        C_dof = identify(node_forms.C_raw)
        perm = mesh.mirror_dof_permutation
        D = mesh.n_dofs
        P = sp.csr_matrix((np.ones(D), (np.arange(D), perm)), shape=(D, D))

        forms = AssembledForms(
            mesh=mesh,
            index=index,
            K=identify(node_forms.K),
            C=(0.5 * (C_dof - C_dof.T)).tocsr(),
            M0=identify(node_forms.M0),
            M_base=identify(node_forms.M_base),
            M_dir=identify(node_forms.M_dir),
            M_dir2=identify(node_forms.M_dir2),
            P_mirror=P,
            positivity_bound=self._positivity_bound(mesh, index),
            node_forms=node_forms,
        )
        self._logger.info(
            f"Formas ensambladas: dimensión {forms.dimension}, cota |eps| < {forms.positivity_bound:.4g}"
        )
        return forms

    def bloch_matrix(self, forms: AssembledForms, p: complex, eps: float) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
        """
        Pencil de Bloch en el gauge periódico.

        Args:
            forms: Formas ensambladas
            p: Cuasimomento (real o complejo)
            eps: Parámetro de perturbación (real)

        Returns:
            (A, M) con A = K - 2ip C + p^2 M0 y M = M(eps)

        Raises:
            MassNotPositiveException: |eps| fuera de la cota o M no definida positiva
        """
        M = self.checked_mass(forms, eps)
        A = (forms.K - 2j * p * forms.C + (p * p) * forms.M0).tocsr()
        return A, M

    def checked_mass(self, forms: AssembledForms, eps: float) -> sp.csr_matrix:
        """M(eps) tras comprobar positividad (cota puntual y factorización de Cholesky)."""
        eps = float(eps)
        if abs(eps) >= forms.positivity_bound:
            raise MassNotPositiveException(
                f"|eps|={abs(eps):.3g} >= cota de positividad {forms.positivity_bound:.3g}"
            )
        M = forms.mass(eps)
        if eps not in forms._checked_masses:
            if forms.dimension <= self._dense_limit:
                try:
                    sla.cho_factor(M.toarray(), lower=True, check_finite=False)
                except sla.LinAlgError as error:
                    raise MassNotPositiveException(f"Cholesky de M(eps) falló: {error}")
            forms._checked_masses[eps] = True
        return M

    # --- comprobaciones del índice ---

    def _check_index(self, mesh: Mesh, index: IndexField, symmetric_direction: bool) -> None:
        qp = quadrature_points(mesh).reshape(-1, 2)
        mirrored_x = 2.0 * MIRROR_LINE - qp[:, 0]
        profiles = [("n", index.n)] + ([("dn", index.dn)] if symmetric_direction else [])
        for name, profile in profiles:
            values = profile(qp[:, 0], qp[:, 1], mesh.height)
            images = profile(mirrored_x, qp[:, 1], mesh.height)
            scale = max(1.0, float(np.abs(values).max()))
            if np.max(np.abs(values - images)) > 1e-10 * scale:
                raise InvalidIndexFieldException(
                    f"El perfil {name} no es simétrico respecto de x1 = 1/2", "ASYMMETRIC_INDEX"
                )

    def _positivity_bound(self, mesh: Mesh, index: IndexField) -> float:
        qp = quadrature_points(mesh).reshape(-1, 2)
        n_q = index.n(qp[:, 0], qp[:, 1], mesh.height)
        dn_q = np.abs(index.dn(qp[:, 0], qp[:, 1], mesh.height))
        active = dn_q > 0.0
        if not np.any(active):
            return float("inf")
        return float(np.min(n_q[active] / dn_q[active]))
