from dataclasses import dataclass, field
from typing import List

import numpy as np


@dataclass(frozen=True, eq=False)
class SeriesTerm:
    """vₙ(t, x, y) como matriz d×d"""

    n: int
    value: np.ndarray
    quadrature_order: int
    mode_tuple_count: int

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.value, 2))


@dataclass(frozen=True, eq=False)
class KernelResult:
    t: complex
    x: np.ndarray
    y: np.ndarray
    p0: complex
    terms: List[SeriesTerm] = field(default_factory=list)
    pconj: np.ndarray = None
    tail_bound: float = 0.0
    p: np.ndarray = None

    @property
    def orders_used(self) -> int:
        return len(self.terms)


@dataclass(frozen=True, eq=False)
class SchrodingerBounds:
    """Muestreo de la serie sobre el eje imaginario t = iτ"""

    taus: np.ndarray
    radii: np.ndarray
    majorant_ratio: float  # max |vₙ| / ((Σ sup|a_m|)·|t|)ⁿ/n!
    growth: np.ndarray  # (τ, R): |∂ₜp^conj| / (1 + R)
    growth_slope: float  # pendiente de log(max_τ growth) frente a log(1 + R)
