"""
Módulo Oráculos de Referencia

Valores de referencia calculados sin las cuadraturas ni los integradores
del camino principal.

Funcionalidades principales:
- Núcleo libre y núcleo de Mehler (forma estable, admite ω = 0)
- Trayectorias, matriz de deformación y acción en forma cerrada (free, harmonic, magnetic)
- Función de Green por variación de parámetros (solve_ivp DOP853)
- vₙ de bajo orden por Gauss–Kronrod adaptativo anidado
- Evolución Crank–Nicolson 1D con LU dispersa
"""

from .models import Grid1D
from .service import (
    GreenKernelOracle,
    brute_force_vn,
    closed_form_kernel,
    closed_form_trajectories,
    cn_evolve,
    free_kernel,
    has_closed_form,
    mehler_kernel,
    snapshot_rows,
)

__all__ = [
    "Grid1D",
    "GreenKernelOracle",
    "brute_force_vn",
    "closed_form_kernel",
    "closed_form_trajectories",
    "cn_evolve",
    "free_kernel",
    "has_closed_form",
    "mehler_kernel",
    "snapshot_rows",
]
