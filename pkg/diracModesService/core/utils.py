"""
Utilidades generales del laboratorio.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Tuple, TypeVar

import numpy as np

from core.config.settings import settings

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], max_workers: Optional[int] = None) -> List[R]:
    """
    Aplica fn a cada elemento en un pool de hilos, preservando el orden de entrada.

    Args:
        fn: Función pura
        items: Elementos
        max_workers: Hilos (por defecto settings.max_workers / DIRAC_MODES_THREADS)

    Returns:
        Resultados en el mismo orden que items
    """
    items = list(items)
    workers = max_workers or settings.max_workers
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- cuadraturas ---

def gauss_legendre(a: float, b: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodos y pesos de Gauss-Legendre de n puntos en [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def sinh_gauss_legendre(a: float, b: float, n: int, width: float, anchor: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre sobre [a, b] con el cambio p = anchor + width*sinh(s), que concentra nodos
    en una capa de ancho width junto a anchor (anchor debe ser a o b).
    """
    if width <= 0:
        return gauss_legendre(a, b, n)
    s_a = np.arcsinh((a - anchor) / width)
    s_b = np.arcsinh((b - anchor) / width)
    s, ws = gauss_legendre(s_a, s_b, n)
    return anchor + width * np.sinh(s), ws * width * np.cosh(s)


def circle_trapezoid(center: complex, radius: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Regla del trapecio sobre una circunferencia recorrida en sentido antihorario.

    Returns:
        (puntos z_k, pesos dz_k) con sum f(z_k) dz_k ~ contour integral de f
    """
    theta = 2.0 * np.pi * np.arange(n) / n
    z = center + radius * np.exp(1j * theta)
    dz = 1j * radius * np.exp(1j * theta) * (2.0 * np.pi / n)
    return z, dz


START_VECTOR_SEED = 20240611


def start_vector(n: int, dtype=float) -> np.ndarray:
    """
    Vector inicial fijo para ARPACK (sin él eigsh arranca de uno aleatorio distinto en cada llamada).
    Sin simetrías: un vector constante no ve los autovectores impares bajo los espejos de la malla.
    """
    vector = np.random.default_rng(START_VECTOR_SEED).standard_normal(n)
    return (vector / np.linalg.norm(vector)).astype(dtype)


def loglog_slope(x: Iterable[float], y: Iterable[float]) -> float:
    """Pendiente de mínimos cuadrados de log(y) frente a log(x); nan si hay menos de 2 puntos válidos."""
    x = np.asarray(list(x), dtype=float)
    y = np.asarray(list(y), dtype=float)
    valid = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    if np.count_nonzero(valid) < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(x[valid]), np.log(y[valid]), 1)
    return float(slope)


def exponential_rate(k: Iterable[float], values: Iterable[float]) -> Tuple[float, float]:
    """
    Ajuste log-lineal values ~ C*exp(rate*k).

    Returns:
        (rate, r2) con r2 el coeficiente de determinación del ajuste en escala logarítmica
    """
    k = np.asarray(list(k), dtype=float)
    values = np.asarray(list(values), dtype=float)
    valid = values > 0
    if np.count_nonzero(valid) < 2:
        return float("nan"), 0.0
    logs = np.log(values[valid])
    slope, intercept = np.polyfit(k[valid], logs, 1)
    residual = logs - (slope * k[valid] + intercept)
    spread = np.sum((logs - logs.mean()) ** 2)
    r2 = 1.0 - float(np.sum(residual ** 2) / spread) if spread > 0 else 1.0
    return float(slope), r2


def richardson_zero(steps: Iterable[float], values: List[np.ndarray]) -> Tuple[np.ndarray, float]:
    """
    Extrapola a paso cero por interpolación polinómica (Neville) en los pasos dados.

    Returns:
        (valor extrapolado, norma de la diferencia con la extrapolación de un orden menor)
    """
    steps = np.asarray(list(steps), dtype=float)
    values = [np.asarray(v) for v in values]
    if steps.size != len(values) or steps.size == 0:
        raise ValueError("se requiere un valor por paso")

    def extrapolate(idx):
        total = np.zeros_like(values[idx[0]], dtype=complex)
        for k in idx:
            weight = 1.0
            for j in idx:
                if j != k:
                    weight *= steps[j] / (steps[j] - steps[k])
            total = total + weight * values[k]
        return total

    full = extrapolate(list(range(steps.size)))
    if steps.size == 1:
        return full, float("nan")
    lower = extrapolate(list(range(1, steps.size)))
    return full, float(np.linalg.norm(np.atleast_1d(full - lower)))
