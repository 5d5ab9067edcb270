"""
Entidades de la función de Green continuada: raíces complejas, datos espectrales por nodo
de contorno y muestras del operador de traza.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np


@dataclass(frozen=True)
class ComplexMomentumRoot:
    """
    Raíces q_+/-(lambda) de lambda_f(q) = lambda cerca de +-q*.

    Attributes:
        lam: Energía
        eps: Parámetro de perturbación
        q_plus: Raíz cerca de +q*
        q_minus: Raíz cerca de -q* (= -q_plus)
        slope_plus: lambda_f'(q_plus)
        slope_minus: lambda_f'(q_minus)
        iterations: Iteraciones de Newton
        residual: |lambda_f(q_plus) - lambda|
        branch_certificate: Signos de Im(lambda) e Im(q_plus) y su consistencia
    """
    lam: complex
    eps: float
    q_plus: complex
    q_minus: complex
    slope_plus: complex
    slope_minus: complex
    iterations: int
    residual: float
    branch_certificate: Dict[str, object] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class SpectralNodeData:
    """
    Datos espectrales de un nodo de contorno, independientes de lambda.

    Para p real: todos los autovalores y las trazas de todos los autovectores.
    Para p complejo: solo la banda de pliegue, con trazas de sus vectores derecho e izquierdo.

    Attributes:
        p: Cuasimomento del nodo
        eps: Parámetro de perturbación
        values: Autovalores (D,) o (1,)
        trace_vectors: Trazas Tr v (T, D) o (T, 1)
        fold_column: Columna de la banda de pliegue en values
        fold_vector: Autovector derecho de pliegue (D,)
        left_trace: Traza del autovector izquierdo (solo p complejo), l^H M r = 1
    """
    p: complex
    eps: float
    values: np.ndarray
    trace_vectors: np.ndarray
    fold_column: int
    fold_vector: np.ndarray
    left_trace: Optional[np.ndarray] = None
    left_vector: Optional[np.ndarray] = None

    @property
    def is_complex(self) -> bool:
        return self.left_trace is not None


@dataclass(frozen=True, eq=False)
class ContinuedOperatorSample:
    """
    Matriz del operador de traza continuado en una energía.

    Attributes:
        lam: Energía
        eps: Parámetro de perturbación
        matrix: Matriz T x T que actúa sobre valores nodales de la densidad
        propagating: Parte de la banda de pliegue
        remainder: Parte de las demás bandas
        contour_kind: Tipo de contorno usado
        quadrature_nodes: Nodos totales del contorno
    """
    lam: complex
    eps: float
    matrix: np.ndarray
    propagating: np.ndarray
    remainder: np.ndarray
    contour_kind: str = "C_eps"
    quadrature_nodes: int = 0

    def apply(self, phi: np.ndarray) -> np.ndarray:
        return self.matrix @ phi

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


@dataclass(frozen=True, eq=False)
class RadiationSplit:
    """
    Amplitudes de campo lejano y certificados de decaimiento del resto.

    Attributes:
        lam: Energía
        amp_plus: Amplitud de u(q_plus) e^{i q_plus x} hacia la derecha
        amp_minus: Amplitud de u(q_minus) e^{i q_minus x} hacia la izquierda
        roots: Raíces usadas
        cells: Celdas evaluadas a cada lado
        residual_right: Norma del resto por celda a la derecha
        residual_left: Norma del resto por celda a la izquierda
        rate_right, rate_left: Tasas ajustadas log-lineales (negativas si decae)
        fit_r2_right, fit_r2_left: Calidad del ajuste
    """
    lam: complex
    amp_plus: complex
    amp_minus: complex
    roots: ComplexMomentumRoot
    cells: np.ndarray
    residual_right: np.ndarray
    residual_left: np.ndarray
    rate_right: float
    rate_left: float
    fit_r2_right: float
    fit_r2_left: float
