from dataclasses import dataclass

import numpy as np

MIN_INTERIOR_POINTS = 200


@dataclass(frozen=True)
class Grid1D:
    """Malla uniforme de [−L, L] con Nx puntos interiores y paredes de Dirichlet"""

    L: float
    Nx: int
    dt: float

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("L debe ser positivo")
        if self.Nx < MIN_INTERIOR_POINTS:
            raise ValueError(f"Nx debe ser ≥ {MIN_INTERIOR_POINTS}")
        if self.dt <= 0:
            raise ValueError("dt debe ser positivo")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / (self.Nx + 1)

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(1, self.Nx + 1)
