"""
Entidades del problema de interfaz: muestras del operador, operador límite y modo hallado.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from domain.entities.greens import ContinuedOperatorSample

INTERFACE = "interface"
RESONANT = "resonant"


@dataclass(frozen=True, eq=False)
class InterfaceOperatorSample:
    """
    G^Gamma_eps(lambda* + eps h) = G~_eps + G~_{-eps} sobre la traza.

    Attributes:
        h: Energía reescalada
        lam: lambda* + eps h
        eps: Parámetro de perturbación (> 0)
        matrix: Suma de las dos muestras
        sigma_min: Menor valor singular
        sigma_max: Mayor valor singular
        plus, minus: Muestras en +eps y -eps
    """
    h: complex
    lam: complex
    eps: float
    matrix: np.ndarray
    sigma_min: float
    sigma_max: float
    plus: ContinuedOperatorSample
    minus: ContinuedOperatorSample

    @property
    def relative_sigma(self) -> float:
        return self.sigma_min / max(self.sigma_max, 1e-300)


@dataclass(frozen=True, eq=False)
class LimitOperator:
    """
    Operador límite 2T + w * beta(h) * P^Dirac.

    Attributes:
        T_matrix: Discretización de T
        p_dirac: Dyada Tr v_n <., conj Tr v_n> (con pesos de traza)
        abs_t: |t*|
        alpha: Pendiente del cono
        beta_variant: "squared" (sqrt(1 - h^2/|t|^2)) o "linear" (sqrt(1 - h^2/|t|))
        dirac_weight: Factor que multiplica beta(h) P^Dirac
        diagnostics: Dispersión de la extrapolación del valor principal, ventanas
    """
    T_matrix: np.ndarray
    p_dirac: np.ndarray
    abs_t: float
    alpha: float
    beta_variant: str = "squared"
    dirac_weight: float = 2.0
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def beta(self, h: complex, variant: Optional[str] = None) -> complex:
        variant = variant or self.beta_variant
        h = complex(h)
        if variant == "squared":
            root = np.sqrt(1.0 - h * h / self.abs_t ** 2 + 0j)
        elif variant == "linear":
            root = np.sqrt(1.0 - h * h / self.abs_t + 0j)
        else:
            raise ValueError(f"variante de beta desconocida: {variant}")
        return complex(-(h / (self.abs_t * self.alpha)) / root)

    def matrix(self, h: complex, variant: Optional[str] = None) -> np.ndarray:
        return 2.0 * self.T_matrix + self.dirac_weight * self.beta(h, variant) * self.p_dirac

    def sigma_min(self, h: complex, variant: Optional[str] = None) -> float:
        return float(np.linalg.svd(self.matrix(h, variant), compute_uv=False)[-1])


@dataclass(frozen=True, eq=False)
class ModeResult:
    """
    Valor característico hallado y modo bifurcado.

    Attributes:
        lambda_found: lambda* + eps h_found
        h_found: Energía reescalada
        eps: Parámetro de perturbación
        phi: Densidad en la traza (vector singular derecho)
        coupling_plus, coupling_minus: <phi, conj u_f(q_+bar)> en +eps y <phi, conj u_f(q_-bar)> en -eps
        coupling_tolerance: Umbral de clasificación
        classification: "interface" o "resonant"
        moment_count: Conteo de valores característicos dentro de |h| = c0|t*|
        moment_value: Valor complejo del momento antes de redondear
        sigma_min: Menor valor singular en la solución
        sigma_rel: sigma_min / ||G||
        self_convergence: Estimación de autoconvergencia de la cuadratura
        amp_plus: Amplitud saliente hacia la derecha
        rate_right, rate_left: Tasas por celda de |u| (negativas si decae)
        energy_residual: Residuo relativo de la identidad de energía en la ventana
        causality_violation: Im(lambda) > 0 por encima del ruido de la búsqueda
        mode_field: Campo por celda k (valores por nodo)
    """
    lambda_found: complex
    h_found: complex
    eps: float
    phi: np.ndarray
    coupling_plus: complex
    coupling_minus: complex
    coupling_tolerance: float
    classification: str
    moment_count: int
    moment_value: complex
    sigma_min: float
    sigma_rel: float
    self_convergence: float
    amp_plus: complex = 0j
    rate_right: float = float("nan")
    rate_left: float = float("nan")
    energy_residual: float = float("nan")
    causality_violation: bool = False
    mode_field: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def is_interface(self) -> bool:
        return self.classification == INTERFACE

    def summary(self) -> Dict[str, object]:
        return {
            "lambda_re": self.lambda_found.real,
            "lambda_im": self.lambda_found.imag,
            "h_re": self.h_found.real,
            "h_im": self.h_found.imag,
            "eps": self.eps,
            "coupling_plus_abs": abs(self.coupling_plus),
            "coupling_minus_abs": abs(self.coupling_minus),
            "coupling_tolerance": self.coupling_tolerance,
            "classification": self.classification,
            "moment_count": self.moment_count,
            "moment_value_re": self.moment_value.real,
            "moment_value_im": self.moment_value.imag,
            "sigma_min": self.sigma_min,
            "sigma_rel": self.sigma_rel,
            "self_convergence": self.self_convergence,
            "amp_plus_abs": abs(self.amp_plus),
            "rate_right": self.rate_right,
            "rate_left": self.rate_left,
            "energy_residual": self.energy_residual,
            "causality_violation": self.causality_violation,
        }
