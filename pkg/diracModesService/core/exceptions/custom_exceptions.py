"""
Excepciones personalizadas del laboratorio.
Cada excepción lleva un código fijo; la capa base decide el código de salida del CLI.
"""


class DiracModesBaseException(Exception):
    """Excepción base para todas las excepciones del laboratorio."""

    def __init__(self, message: str, code: str = "DIRAC_MODES_ERROR"):
        self.message = message
        self.code = code
        super().__init__(self.message)


# Excepciones de configuración
class ConfigurationException(DiracModesBaseException):
    """Configuración inválida (YAML o variables de entorno)."""

    def __init__(self, message: str = "Configuración inválida", code: str = "CONFIG_ERROR"):
        super().__init__(message, code)


# Excepciones de dominio
class DomainException(DiracModesBaseException):
    """Excepción base para errores de dominio (geometría, índice, matrices)."""
    pass


class InvalidGeometryException(DomainException):
    """Geometría de la celda inválida."""

    def __init__(self, message: str = "Geometría inválida", code: str = "INVALID_GEOMETRY"):
        super().__init__(message, code)


class UnmeshableGeometryException(DomainException):
    """El obstáculo no deja espacio para mallar la franja."""

    def __init__(self, message: str = "Geometría no mallable: radio >= media altura de la franja"):
        super().__init__(message, "UNMESHABLE_GEOMETRY")


class InvalidIndexFieldException(DomainException):
    """Índice de refracción no positivo o no simétrico."""

    def __init__(self, message: str = "Índice de refracción inválido", code: str = "INVALID_INDEX"):
        super().__init__(message, code)


class MassNotPositiveException(DomainException):
    """La matriz de masa ponderada deja de ser definida positiva (eps demasiado grande)."""

    def __init__(self, message: str = "Matriz de masa no definida positiva"):
        super().__init__(message, "MASS_NOT_POSITIVE")


# Excepciones de hipótesis (estructura no apta)
class AssumptionException(DiracModesBaseException):
    """Excepción base cuando la estructura no cumple una hipótesis del modelo."""
    pass


class NoDegeneracyException(AssumptionException):
    """No hay autovalor doble en p=0."""

    def __init__(self, message: str = "No hay degeneración en p=0"):
        super().__init__(message, "NO_DEGENERACY")


class FluxNotDiagonalizableException(AssumptionException):
    """La forma de flujo no separa el par degenerado (alpha casi nulo)."""

    def __init__(self, message: str = "Forma de flujo no diagonalizable sobre el par degenerado"):
        super().__init__(message, "FLUX_NOT_DIAGONALIZABLE")


class NoFoldCrossingException(AssumptionException):
    """Ninguna banda del par vuelve a cruzar lambda* en (0, pi)."""

    def __init__(self, message: str = "No existe cruce de pliegue q* en (0, pi)"):
        super().__init__(message, "NO_FOLD_CROSSING")


class BandSeparationException(AssumptionException):
    """Otra banda toca el nivel lambda*."""

    def __init__(self, message: str = "Otra banda cruza el nivel lambda*"):
        super().__init__(message, "BAND_SEPARATION_VIOLATED")


class VanishingCouplingException(AssumptionException):
    """t* nulo: el gap local no se abre."""

    def __init__(self, message: str = "Acoplamiento t* nulo: el gap local no se abre"):
        super().__init__(message, "VANISHING_COUPLING")


# Excepciones de solvers numéricos
class SolverException(DiracModesBaseException):
    """Excepción base para fallos numéricos."""
    pass


class EigenSolverException(SolverException):
    """El autosolver no convergió."""

    def __init__(self, message: str = "El autosolver no convergió"):
        super().__init__(message, "EIGENSOLVER_FAILED")


class DegenerateEigenvalueException(SolverException):
    """Autovalor degenerado donde se esperaba uno simple."""

    def __init__(self, message: str = "Autovalor degenerado: usar la maquinaria 2x2"):
        super().__init__(message, "DEGENERATE_EIGENVALUE")


class BranchTrackingException(SolverException):
    """Continuación de rama ambigua (colisión o solape insuficiente)."""

    def __init__(self, message: str = "Seguimiento de rama ambiguo"):
        super().__init__(message, "BRANCH_TRACKING_FAILED")


class RootFindingException(SolverException):
    """Newton en momento complejo no convergió o la raíz salió del disco."""

    def __init__(self, message: str = "Newton no convergió", code: str = "NEWTON_NOT_CONVERGED"):
        super().__init__(message, code)


class QuadratureException(SolverException):
    """La cuadratura no autoconverge al duplicar nodos."""

    def __init__(self, message: str = "Cuadratura sin autoconvergencia"):
        super().__init__(message, "QUADRATURE_NOT_CONVERGED")


class ExtrapolationException(SolverException):
    """La extrapolación de Richardson del valor principal no converge."""

    def __init__(self, message: str = "Extrapolación de valor principal no convergente"):
        super().__init__(message, "PV_EXTRAPOLATION_FAILED")


class MomentCountException(SolverException):
    """El conteo por momentos no da exactamente un valor característico."""

    def __init__(self, count: int):
        self.count = count
        super().__init__(f"Conteo de valores característicos = {count} (se esperaba 1)", "MOMENT_COUNT")


class RefinementStagnationException(SolverException):
    """El refinamiento se estanca por encima de la tolerancia de sigma_min."""

    def __init__(self, message: str = "Refinamiento estancado"):
        super().__init__(message, "REFINEMENT_STAGNATED")


class DecayFitException(SolverException):
    """El residuo de campo no decae exponencialmente."""

    def __init__(self, message: str = "Ajuste de decaimiento fallido"):
        super().__init__(message, "DECAY_FIT_FAILED")
