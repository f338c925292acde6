import numpy as np


def rk4_linear(generator: np.ndarray, z0: np.ndarray, steps: int) -> np.ndarray:
    """
    RK4 clásico de paso fijo para Z′ = M(s) Z en s ∈ [0, 1], por lotes.

    generator: M muestreada en la malla de medio paso, forma (m, 2·steps+1, k, k).
    z0: condición inicial (k, k) o (m, k, k).
    Devuelve Z en los nodos s_i = i/steps, forma (m, steps+1, k, k).
    """
    m = generator.shape[0]
    k = generator.shape[-1]
    h = 1.0 / steps
    z = np.broadcast_to(z0, (m, k, k)).astype(complex)
    out = np.empty((m, steps + 1, k, k), dtype=complex)
    out[:, 0] = z
    for i in range(steps):
        m0 = generator[:, 2 * i]
        m1 = generator[:, 2 * i + 1]
        m2 = generator[:, 2 * i + 2]
        k1 = m0 @ z
        k2 = m1 @ (z + 0.5 * h * k1)
        k3 = m1 @ (z + 0.5 * h * k2)
        k4 = m2 @ (z + h * k3)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[:, i + 1] = z
    return out


def hermite_eval(values: np.ndarray, derivs: np.ndarray, s) -> np.ndarray:
    """
    Interpolación cúbica de Hermite sobre la malla uniforme de [0, 1].

    values, derivs: (steps+1, ...) valores y derivadas en los nodos.
    s: escalar o arreglo en [0, 1]; el resultado tiene forma s.shape + values.shape[1:].
    """
    steps = values.shape[0] - 1
    s = np.asarray(s, dtype=float)
    scaled = np.clip(s, 0.0, 1.0) * steps
    idx = np.minimum(np.floor(scaled).astype(int), steps - 1)
    theta = scaled - idx
    h = 1.0 / steps
    extra = (None,) * (values.ndim - 1)
    th = theta[(...,) + extra]
    th2, th3 = th * th, th * th * th
    h00 = 2 * th3 - 3 * th2 + 1
    h10 = th3 - 2 * th2 + th
    h01 = -2 * th3 + 3 * th2
    h11 = th3 - th2
    return (
        h00 * values[idx]
        + h10 * h * derivs[idx]
        + h01 * values[idx + 1]
        + h11 * h * derivs[idx + 1]
    )
