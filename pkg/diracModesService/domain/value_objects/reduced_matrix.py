"""
Value Object ReducedMatrix - matriz 2x2 de la reducción al par de Dirac.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ReducedMatrix:
    """
    Matriz reducida a orden principal, M(eps, p, l1) = l1*I - H con
    H = [[alpha*p + eps*diag_n, eps*t], [eps*conj(t), -alpha*p + eps*diag_m]].

    Las entradas fuera de la diagonal se guardan como -t*eps y -conj(t)*eps, de modo que el
    vector del núcleo es directamente el autovector predicho (coeficiente de v_n, coeficiente de v_m).
    """
    alpha: float
    t_star: complex
    eps: float
    p: float
    lambda1: complex
    diag_n: complex = 0.0
    diag_m: complex = 0.0

    @property
    def M11(self) -> complex:
        return self.lambda1 - self.alpha * self.p - self.eps * self.diag_n

    @property
    def M22(self) -> complex:
        return self.lambda1 + self.alpha * self.p - self.eps * self.diag_m

    @property
    def M12(self) -> complex:
        return -self.t_star * self.eps

    @property
    def M21(self) -> complex:
        return -np.conj(self.t_star) * self.eps

    def as_array(self) -> np.ndarray:
        return np.array([[self.M11, self.M12], [self.M21, self.M22]], dtype=complex)

    def determinant(self) -> complex:
        return complex(self.M11 * self.M22 - self.M12 * self.M21)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        matrix = self.as_array()
        scale = max(1.0, float(np.abs(matrix).max()))
        return bool(np.abs(matrix - matrix.conj().T).max() <= tol * scale)

    def kernel_vector(self) -> np.ndarray:
        """Vector (c_n, 1) con M (c_n, 1)^T = 0 en la primera fila; requiere M11 != 0."""
        if self.M11 == 0:
            return np.array([1.0, 0.0], dtype=complex)
        return np.array([-self.M12 / self.M11, 1.0], dtype=complex)

    @staticmethod
    def branch_radius(alpha: float, t_star: complex, eps: float, p: float) -> float:
        """sqrt(alpha^2 p^2 + |t|^2 eps^2)."""
        return float(np.hypot(alpha * p, abs(t_star) * eps))
