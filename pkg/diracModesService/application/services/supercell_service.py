"""
SupercellService - Tira finita de 2N+1 celdas para validar de forma independiente los modos
de interfaz hallados por el método de ecuación integral.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from application.services.assembly_service import AssemblyService
from core.exceptions.custom_exceptions import EigenSolverException
from core.logging.logger import get_supercell_logger
from core.utils import exponential_rate, start_vector
from domain.entities.forms import AssembledForms, NodeForms
from domain.entities.reports import CheckReport
from domain.entities.supercell import SupercellMode, SupercellProblem, SupercellResult


class SupercellService:
    """
    Servicio de supercelda.

    La celda c ocupa x en [c - 1/2, c + 1/2] medido desde la línea de traza de la celda central;
    la celda central lleva n - eps dn a la izquierda de la traza y n + eps dn a la derecha.
    """

    def __init__(self, assembly: Optional[AssemblyService] = None):
        self._assembly = assembly or AssemblyService()
        self._halves: Dict[int, Tuple[NodeForms, NodeForms]] = {}
        self._logger = get_supercell_logger()

    def _half_forms(self, forms: AssembledForms) -> Tuple[NodeForms, NodeForms]:
        key = forms.token
        if key not in self._halves:
            mesh = forms.mesh
            right = mesh.element_centroids[:, 0] > 0.5
            self._halves[key] = (
                self._assembly.assemble_node_forms(mesh, forms.index, ~right),
                self._assembly.assemble_node_forms(mesh, forms.index, right),
            )
        return self._halves[key]

    def _cell_mass(self, forms: AssembledForms, eps: float, cell: int) -> sp.csr_matrix:
        if cell > 0:
            return forms.node_forms.mass(eps)
        if cell < 0:
            return forms.node_forms.mass(-eps)
        left, right = self._half_forms(forms)
        return (left.mass(-eps) + right.mass(eps)).tocsr()

    # --- ensamblado ---

    def build_problem(
        self,
        forms: AssembledForms,
        eps: float,
        n_cells_per_side: int = 16,
        truncation_bc: str = "neumann",
        lambda_window: Tuple[float, float] = (0.0, np.inf),
        n_eigs: int = 6,
    ) -> SupercellProblem:
        """
        Ensambla K y M de la tira con identificación de las caras compartidas entre celdas.

        Args:
            forms: Formas de la celda
            eps: Parámetro de perturbación
            n_cells_per_side: N
            truncation_bc: "neumann" o "dirichlet" en x = -(N + 1/2) y x = N + 1/2
            lambda_window: Ventana de energías
            n_eigs: Autopares a calcular

        Returns:
            SupercellProblem
        """
        if truncation_bc not in ("neumann", "dirichlet"):
            raise ValueError(f"condición de truncamiento desconocida: {truncation_bc}")
        mesh = forms.mesh
        self._assembly.checked_mass(forms, eps)
        D = mesh.n_dofs
        dof = mesh.dof_of_node
        N = int(n_cells_per_side)
        cells = list(range(-N, N + 1))

        is_right = np.zeros(mesh.n_nodes, dtype=bool)
        is_right[mesh.periodic_pairing[:, 1]] = True
        is_left = np.zeros(mesh.n_nodes, dtype=bool)
        is_left[mesh.periodic_pairing[:, 0]] = True

        raw = {}
        for c in cells:
            block = c + N
            raw[c] = np.where(is_right, (block + 1) * D + dof, block * D + dof)
        fixed = set()
        if truncation_bc == "dirichlet":
            fixed.update(raw[-N][is_left].tolist())
            fixed.update(raw[N][is_right].tolist())
        used = np.unique(np.concatenate(list(raw.values())))
        used = used[~np.isin(used, list(fixed))] if fixed else used
        compress = -np.ones((len(cells) + 1) * D, dtype=np.int64)
        compress[used] = np.arange(used.size)
        cell_maps = {c: compress[raw[c]] for c in cells}

        n_free = int(used.size)
        k_vals, m_vals = [], []
        K_cell = forms.node_forms.K.tocoo()
        for c in cells:
            index = cell_maps[c]
            M_cell = self._cell_mass(forms, eps, c).tocoo()
            for matrix, values in ((K_cell, k_vals), (M_cell, m_vals)):
                r, s = index[matrix.row], index[matrix.col]
                keep = (r >= 0) & (s >= 0)
                values.append((r[keep], s[keep], matrix.data[keep]))
        K = sp.coo_matrix(
            (np.concatenate([v for _, _, v in k_vals]),
             (np.concatenate([r for r, _, _ in k_vals]), np.concatenate([s for _, s, _ in k_vals]))),
            shape=(n_free, n_free),
        ).tocsr()
        M = sp.coo_matrix(
            (np.concatenate([v for _, _, v in m_vals]),
             (np.concatenate([r for r, _, _ in m_vals]), np.concatenate([s for _, s, _ in m_vals]))),
            shape=(n_free, n_free),
        ).tocsr()
        self._logger.info(f"Supercelda: {len(cells)} celdas, {n_free} gdl, eps={eps:g}, bc={truncation_bc}")
        return SupercellProblem(
            n_cells_per_side=N,
            truncation_bc=truncation_bc,
            eps=float(eps),
            lambda_window=(float(lambda_window[0]), float(lambda_window[1])),
            n_eigs=int(n_eigs),
            K=K,
            M=M,
            cell_maps=cell_maps,
            n_free=n_free,
        )

    # --- solución ---

    def solve_supercell(self, forms: AssembledForms, problem: SupercellProblem) -> SupercellResult:
        """
        Autopares más cercanos al centro de la ventana (shift-invert) con puntuación de localización.

        Raises:
            EigenSolverException: el autosolver no convergió
        """
        lo, hi = problem.lambda_window
        center = 0.5 * (lo + hi) if np.isfinite(hi) else lo
        k = min(problem.n_eigs, problem.n_free - 2)
        try:
            values, vectors = spla.eigsh(
                problem.K, k=k, M=problem.M, sigma=center, which="LM",
                v0=start_vector(problem.n_free, problem.K.dtype),
            )
        except (spla.ArpackNoConvergence, RuntimeError) as error:
            raise EigenSolverException(f"Autosolver de supercelda falló: {error}")
        order = np.argsort(np.abs(values - center))
        modes = []
        for idx in order:
            vector = vectors[:, idx]
            vector = vector / np.sqrt(abs(vector @ (problem.M @ vector)))
            score = self.localization_score(forms, problem, vector)
            rate_right, rate_left = self.decay_rates(problem, vector)
            modes.append(SupercellMode(
                value=float(values[idx]),
                localization_score=score,
                rate_right=rate_right,
                rate_left=rate_left,
                in_window=bool(lo <= values[idx] <= hi),
                vector=vector,
            ))
        best = max(modes, key=lambda m: m.localization_score)
        self._logger.info(
            f"Supercelda: {len(modes)} autovalores, mayor localización {best.localization_score:.3f} "
            f"en lambda={best.value:.10g}"
        )
        return SupercellResult(problem=problem, modes=modes)

    def localization_score(self, forms: AssembledForms, problem: SupercellProblem, vector: np.ndarray) -> float:
        """Fracción de la masa n^2 en |x| <= 2 (celdas -1, 0, 1 y las mitades interiores de -2 y 2)."""
        left, right = self._half_forms(forms)
        eps = problem.eps
        central = 0.0
        total = 0.0
        for c in problem.cells:
            u = problem.cell_values(vector, c)
            mass = float(np.real(u.conj() @ (self._cell_mass(forms, eps, c) @ u)))
            total += mass
            if abs(c) <= 1:
                central += mass
            elif c == 2:
                central += float(np.real(u.conj() @ (left.mass(eps) @ u)))
            elif c == -2:
                central += float(np.real(u.conj() @ (right.mass(-eps) @ u)))
        return central / max(total, 1e-300)

    @staticmethod
    def decay_rates(problem: SupercellProblem, vector: np.ndarray) -> Tuple[float, float]:
        N = problem.n_cells_per_side
        if N < 2:
            return float("nan"), float("nan")
        cells = np.arange(1, N + 1)
        right = [float(np.abs(problem.cell_values(vector, int(c))).max()) for c in cells]
        left = [float(np.abs(problem.cell_values(vector, int(-c))).max()) for c in cells]
        # las últimas celdas sienten el truncamiento
        cut = max(2, int(0.75 * N))
        return exponential_rate(cells[:cut], right[:cut])[0], exponential_rate(cells[:cut], left[:cut])[0]

    def field_slice(
        self, forms: AssembledForms, problem: SupercellProblem, vector: np.ndarray
    ) -> List[Tuple[float, float, float]]:
        """Filas (x, re u, im u) a lo largo de la fila de nodos más cercana a x2 = H/2."""
        mesh = forms.mesh
        y = mesh.nodes[:, 1]
        row = np.flatnonzero(np.isclose(y, y[np.argmin(np.abs(y - 0.5 * mesh.height))]))
        row = row[np.argsort(mesh.nodes[row, 0])]
        out = []
        for c in problem.cells:
            u = problem.cell_values(vector, c)
            for node in row:
                x = c + mesh.trace_x[node]
                if out and abs(out[-1][0] - x) < 1e-12:
                    continue
                out.append((float(x), float(np.real(u[node])), float(np.imag(u[node]))))
        return out

    # --- estabilidad ---

    def stability_check(self, forms: AssembledForms, result: SupercellResult) -> CheckReport:
        """Desplazamiento de cada autovalor de la ventana al pasar de N a N+2 celdas por lado."""
        problem = result.problem
        larger = self.build_problem(
            forms, problem.eps, problem.n_cells_per_side + 2, problem.truncation_bc,
            problem.lambda_window, problem.n_eigs,
        )
        extended = self.solve_supercell(forms, larger)
        report = CheckReport(
            name="supercell_stability",
            columns=("value", "localization_score", "shift", "predicted_shift", "stable"),
        )
        N = problem.n_cells_per_side
        for mode in result.modes:
            if not mode.in_window:
                continue
            shift = abs(extended.nearest(mode.value).value - mode.value)
            rates = [abs(r) for r in (mode.rate_right, mode.rate_left) if np.isfinite(r)]
            rate = min(rates) if rates else 0.0
            predicted = abs(mode.value) * np.exp(-2.0 * rate * N)
            report.add_row(mode.value, mode.localization_score, shift, predicted, bool(shift <= 10.0 * predicted))
        return report

    def boundary_sensitivity(self, forms: AssembledForms, problem: SupercellProblem, value: float) -> float:
        """Desplazamiento del autovalor más cercano a `value` al cambiar neumann <-> dirichlet."""
        other = "dirichlet" if problem.truncation_bc == "neumann" else "neumann"
        switched = self.build_problem(
            forms, problem.eps, problem.n_cells_per_side, other, problem.lambda_window, problem.n_eigs
        )
        result = self.solve_supercell(forms, switched)
        return float(abs(result.nearest(value).value - value))
