"""
Entidad CouplingData - integrales de la perturbación sobre el par de Dirac.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class CouplingData:
    """
    Attributes:
        t_star: Acoplamiento fuera de la diagonal, -lambda* v_n^H M_dir v_m
        diag_n: -lambda* v_n^H M_dir v_n
        diag_m: -lambda* v_m^H M_dir v_m
        relaxed_condition_margin: 2|t*| - |diag_n + diag_m|
        tolerance: Umbral bajo el cual una integral se considera nula
    """
    t_star: complex
    diag_n: complex
    diag_m: complex
    relaxed_condition_margin: float
    tolerance: float

    @property
    def abs_t(self) -> float:
        return abs(self.t_star)

    @property
    def diagonals_vanish(self) -> bool:
        return abs(self.diag_n) <= self.tolerance and abs(self.diag_m) <= self.tolerance

    @property
    def accepted(self) -> bool:
        """Acoplamiento no nulo y condición relajada satisfecha."""
        return self.abs_t > self.tolerance and self.relaxed_condition_margin > 0

    def to_dict(self) -> dict:
        return {
            "t_star_re": self.t_star.real,
            "t_star_im": self.t_star.imag,
            "abs_t_star": self.abs_t,
            "diag_n_re": self.diag_n.real,
            "diag_n_im": self.diag_n.imag,
            "diag_m_re": self.diag_m.real,
            "diag_m_im": self.diag_m.imag,
            "relaxed_condition_margin": self.relaxed_condition_margin,
            "diagonals_vanish": self.diagonals_vanish,
            "accepted": self.accepted,
        }
