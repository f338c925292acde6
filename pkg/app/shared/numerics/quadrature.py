from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=128)
def _reference_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(n: int, a: float = 0.0, b: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Nodos y pesos de Gauss–Legendre de n puntos en [a, b]"""
    if n < 1:
        raise ValueError("La regla necesita al menos un nodo")
    x, w = _reference_rule(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def log_gauss_legendre(a: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Regla de Gauss–Legendre sobre [a, 1] en la variable w = log τ.

    El integrando de la matriz de deformación se comporta como 1/τ² cuando
    s∨s′ es pequeño; en log τ queda entero y la regla converge rápido.
    """
    if not 0.0 < a <= 1.0:
        raise ValueError(f"Extremo inferior fuera de (0, 1]: {a}")
    if a == 1.0:
        return np.ones(0), np.zeros(0)
    w_nodes, w_weights = gauss_legendre(n, np.log(a), 0.0)
    tau = np.exp(w_nodes)
    return tau, w_weights * tau


@lru_cache(maxsize=32)
def _simplex_rule(n: int, q: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = gauss_legendre(q)
    if n == 1:
        return x[:, None].copy(), w.copy()
    inner_points, inner_weights = _simplex_rule(n - 1, q)
    blocks, block_weights = [], []
    for xi, wi in zip(x, w):
        outer = np.full((inner_points.shape[0], 1), xi)
        blocks.append(np.hstack([xi * inner_points, outer]))
        block_weights.append(wi * xi ** (n - 1) * inner_weights)
    return np.vstack(blocks), np.concatenate(block_weights)


def simplex_rule(n: int, q: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss–Legendre anidado sobre el símplex ordenado 0 < s_1 < ... < s_n < 1.

    s_n recorre [0, 1] y cada s_j interior recorre [0, s_{j+1}]. Devuelve puntos
    (q**n, n) con columnas crecientes y pesos cuya suma es 1/n!.
    """
    points, weights = _simplex_rule(n, q)
    return points.copy(), weights.copy()
