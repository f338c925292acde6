from typing import Callable, Sequence, Tuple

import numpy as np

Stencil = Sequence[Tuple[int, float]]

FIRST_CENTRAL: Stencil = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))
SECOND_CENTRAL: Stencil = ((-2, -1 / 12), (-1, 16 / 12), (0, -30 / 12), (1, 16 / 12), (2, -1 / 12))
FIRST_FORWARD: Stencil = ((0, -25 / 12), (1, 48 / 12), (2, -36 / 12), (3, 16 / 12), (4, -3 / 12))


def apply_stencil(f: Callable, x0, h: float, stencil: Stencil, order: int = 1):
    """Suma Σ c_k f(x0 + k·h) / h^order; f puede devolver arreglos"""
    total = None
    for offset, coeff in stencil:
        value = coeff * np.asarray(f(x0 + offset * h))
        total = value if total is None else total + value
    return total / h ** order


def backward(stencil: Stencil) -> Stencil:
    """Refleja una plantilla lateral hacia la izquierda (primera derivada)"""
    return tuple((-offset, -coeff) for offset, coeff in stencil)


def gradient(f: Callable, x: np.ndarray, h: float) -> np.ndarray:
    """Gradiente de cuarto orden de f: ℂ^ν → arreglo, componente a componente"""
    x = np.asarray(x, dtype=complex)
    parts = []
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = 1.0
        parts.append(apply_stencil(lambda a: f(x + a * e), 0.0, h, FIRST_CENTRAL))
    return np.stack(parts)


def hessian(f: Callable, x: np.ndarray, h: float) -> np.ndarray:
    """Hessiana: diagonal de cuarto orden, términos cruzados de segundo orden"""
    x = np.asarray(x, dtype=complex)
    nu = x.shape[0]
    basis = np.eye(nu, dtype=complex)
    rows = [[None] * nu for _ in range(nu)]
    for j in range(nu):
        rows[j][j] = apply_stencil(lambda a: f(x + a * basis[j]), 0.0, h, SECOND_CENTRAL, order=2)
        for k in range(j + 1, nu):
            ej, ek = basis[j] * h, basis[k] * h
            mixed = (
                np.asarray(f(x + ej + ek)) - np.asarray(f(x + ej - ek))
                - np.asarray(f(x - ej + ek)) + np.asarray(f(x - ej - ek))
            ) / (4 * h * h)
            rows[j][k] = rows[k][j] = mixed
    return np.array([[np.asarray(v) for v in row] for row in rows])
