from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.shared.numerics.interpolation import ChebyshevTable2D


@dataclass(frozen=True, eq=False)
class DeformationKernel:
    """
    K̃ₜ(s, s′) interpolado sobre el triángulo s ≤ s′.

    La tabla guarda G(u, v) = K̃ₜ(u·v, v) en nodos de Chebyshev–Lobatto; u = 1 es
    la diagonal (cuadratura directa compartida por ambos triángulos) y el
    triángulo s > s′ se obtiene por transposición.
    """

    t: complex
    nu: int
    quadrature_order: int
    u_nodes: np.ndarray
    v_nodes: np.ndarray
    nodal_values: np.ndarray  # (n_u, n_v, ν, ν)
    table: ChebyshevTable2D
    tau_nodes: np.ndarray
    model_key: Optional[str] = None

    def __call__(self, s, s_prime) -> np.ndarray:
        s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
        s_prime = np.clip(np.asarray(s_prime, dtype=float), 0.0, 1.0)
        s, s_prime = np.broadcast_arrays(s, s_prime)
        upper = np.maximum(s, s_prime)
        lower = np.minimum(s, s_prime)
        u = np.divide(lower, upper, out=np.zeros_like(lower), where=upper > 0)
        values = self.table(u, upper)
        swapped = np.swapaxes(values, -1, -2)
        out = np.where((s <= s_prime)[..., None, None], values, swapped)
        return np.where((upper > 0)[..., None, None], out, 0.0)

    def diagonal_mismatch(self) -> float:
        """Diferencia entre los dos interpolantes triangulares sobre s = s′"""
        diagonal = self.table(np.ones_like(self.v_nodes), self.v_nodes)
        return float(np.max(np.abs(diagonal - np.swapaxes(diagonal, -1, -2))))


@dataclass(frozen=True)
class Mass:
    s: float
    xi: np.ndarray


@dataclass(frozen=True)
class PropagatorReport:
    s_prime: float
    homogeneous_residual: float
    dirichlet: float
    jump: np.ndarray
    jump_defect: float


@dataclass(frozen=True)
class PositivityReport:
    t: complex
    form_t: complex
    form_0: float
    real_part: float
    form_ratio: float
    size_ratio: float
    degenerate: bool

    @property
    def passed(self) -> bool:
        return (
            not self.degenerate
            and self.real_part >= -1e-12
            and self.form_ratio <= 2.0 + 1e-9
            and self.size_ratio <= 1.0 + 1e-9
        )
