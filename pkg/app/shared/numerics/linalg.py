from typing import Callable

import numpy as np


def op_norm(matrix) -> np.ndarray:
    """Norma de operador 2 (|AB| ≤ |A||B|, |𝟙| = 1) sobre los dos últimos ejes"""
    matrix = np.asarray(matrix)
    if matrix.ndim < 2:
        return np.abs(matrix)
    return np.linalg.norm(matrix, 2, axis=(-2, -1))


def bilinear(u, matrix, v):
    """u · M v sin conjugación"""
    return np.einsum("...i,...ij,...j->...", u, matrix, v)


def matrix_function(matrix: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """
    f(M) por diagonalización; pensado para matrices normales (β antisimétrica).

    f recibe los autovalores (ν,) y puede devolver (..., ν) para evaluar una
    familia f_s(M) de una vez; el resultado es (..., ν, ν).
    """
    eigvals, eigvecs = np.linalg.eig(np.asarray(matrix, dtype=complex))
    values = np.asarray(f(eigvals))
    return (eigvecs * values[..., None, :]) @ np.linalg.inv(eigvecs)


def symmetry_defect(matrix) -> float:
    matrix = np.asarray(matrix)
    return float(np.max(np.abs(matrix - np.swapaxes(matrix, -1, -2)), initial=0.0))
