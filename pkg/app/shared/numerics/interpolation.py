from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev


def lobatto_nodes(n: int) -> np.ndarray:
    """Nodos de Chebyshev–Lobatto en [0, 1], extremos incluidos, crecientes"""
    k = np.arange(n)
    return 0.5 * (1.0 - np.cos(np.pi * k / (n - 1)))


@dataclass(frozen=True, eq=False)
class ChebyshevTable2D:
    """Interpolante tensorial de Chebyshev en [0, 1]² con valores matriciales"""

    coefficients: np.ndarray  # (n_u, n_v, ...)

    @classmethod
    def fit(cls, u_nodes: np.ndarray, v_nodes: np.ndarray, values: np.ndarray) -> "ChebyshevTable2D":
        n_u, n_v = len(u_nodes), len(v_nodes)
        tail = values.shape[2:]
        vu = chebyshev.chebvander(2.0 * u_nodes - 1.0, n_u - 1)
        vv = chebyshev.chebvander(2.0 * v_nodes - 1.0, n_v - 1)
        step = np.linalg.solve(vu, values.reshape(n_u, -1)).reshape((n_u, n_v) + tail)
        moved = np.moveaxis(step, 1, 0).reshape(n_v, -1)
        coeffs = np.linalg.solve(vv, moved).reshape((n_v, n_u) + tail)
        coeffs = np.ascontiguousarray(np.moveaxis(coeffs, 0, 1))
        coeffs.setflags(write=False)
        return cls(coefficients=coeffs)

    def __call__(self, u, v) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        u, v = np.broadcast_arrays(u, v)
        shape = u.shape
        n_u, n_v = self.coefficients.shape[:2]
        vu = chebyshev.chebvander(2.0 * u.ravel() - 1.0, n_u - 1)
        vv = chebyshev.chebvander(2.0 * v.ravel() - 1.0, n_v - 1)
        tail = self.coefficients.shape[2:]
        partial = (vu @ self.coefficients.reshape(n_u, -1)).reshape((vu.shape[0], n_v, -1))
        out = np.einsum("pjr,pj->pr", partial, vv)
        return out.reshape(shape + tail)
