"""
Tipos inmutables del modelo de operador.

TaylorMatrix representa una función matricial analítica como polinomio de
Taylor con coeficientes matriciales; CoefficientModel agrupa A, B, C y
FourierPotential es la suma finita de modos a_m(t)·e^{ix·ξ_m}.
"""
import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

ZERO_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class TaylorMatrix:
    """g(t) = Σ_k g_k t^k con g_k matrices (rows × cols) complejas"""

    coefficients: np.ndarray  # (K, rows, cols)

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=complex)
        if coeffs.ndim != 3 or coeffs.shape[0] == 0:
            raise ValueError("Se esperan coeficientes de forma (K, filas, columnas)")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    # ===== CONSTRUCTORES =====

    @classmethod
    def constant(cls, matrix) -> "TaylorMatrix":
        return cls(np.asarray(matrix, dtype=complex)[None, :, :])

    @classmethod
    def identity(cls, n: int) -> "TaylorMatrix":
        return cls.constant(np.eye(n))

    @classmethod
    def zeros(cls, rows: int, cols: Optional[int] = None) -> "TaylorMatrix":
        return cls.constant(np.zeros((rows, cols or rows)))

    # ===== PROPIEDADES =====

    @property
    def degree(self) -> int:
        return self.coefficients.shape[0] - 1

    @property
    def shape(self) -> Tuple[int, int]:
        return self.coefficients.shape[1], self.coefficients.shape[2]

    def is_constant(self) -> bool:
        return bool(np.all(np.abs(self.coefficients[1:]) <= ZERO_TOL))

    def is_zero(self) -> bool:
        return bool(np.all(np.abs(self.coefficients) <= ZERO_TOL))

    # ===== EVALUACIÓN =====

    def __call__(self, t) -> np.ndarray:
        """Horner vectorizado: t escalar o arreglo → t.shape + (rows, cols)"""
        t = np.asarray(t, dtype=complex)
        tt = t[..., None, None]
        result = np.broadcast_to(self.coefficients[-1], t.shape + self.shape).astype(complex)
        for coeff in self.coefficients[-2::-1]:
            result = result * tt + coeff
        return result

    def coefficient_norms(self) -> np.ndarray:
        return np.linalg.norm(self.coefficients, 2, axis=(1, 2))

    # ===== ÁLGEBRA =====

    def derivative(self) -> "TaylorMatrix":
        if self.degree == 0:
            return TaylorMatrix.zeros(*self.shape)
        k = np.arange(1, self.degree + 1)[:, None, None]
        return TaylorMatrix(self.coefficients[1:] * k)

    def transpose(self) -> "TaylorMatrix":
        return TaylorMatrix(np.swapaxes(self.coefficients, 1, 2))

    def scale(self, factor: complex) -> "TaylorMatrix":
        return TaylorMatrix(self.coefficients * factor)

    def substitute(self, factor: complex) -> "TaylorMatrix":
        """s ↦ g(factor·s)"""
        powers = factor ** np.arange(self.degree + 1)
        return TaylorMatrix(self.coefficients * powers[:, None, None])

    def integral(self) -> "TaylorMatrix":
        """Primitiva que se anula en 0"""
        k = np.arange(1, self.degree + 2)[:, None, None]
        head = np.zeros((1,) + self.shape, dtype=complex)
        return TaylorMatrix(np.concatenate([head, self.coefficients / k]))

    def __add__(self, other: "TaylorMatrix") -> "TaylorMatrix":
        size = max(self.degree, other.degree) + 1
        out = np.zeros((size,) + self.shape, dtype=complex)
        out[: self.degree + 1] += self.coefficients
        out[: other.degree + 1] += other.coefficients
        return TaylorMatrix(out)

    def __neg__(self) -> "TaylorMatrix":
        return self.scale(-1.0)

    def __sub__(self, other: "TaylorMatrix") -> "TaylorMatrix":
        return self + (-other)

    def __matmul__(self, other: "TaylorMatrix") -> "TaylorMatrix":
        rows, cols = self.shape[0], other.shape[1]
        out = np.zeros((self.degree + other.degree + 1, rows, cols), dtype=complex)
        for i, left in enumerate(self.coefficients):
            for j, right in enumerate(other.coefficients):
                out[i + j] += left @ right
        return TaylorMatrix(out)

    def to_list(self) -> list:
        return [[[complex(v) for v in row] for row in m] for m in self.coefficients]


@dataclass(frozen=True, eq=False)
class CoefficientModel:
    """Coeficientes de P₀ = A(t)·(∂ₓ + B(t)x)² − C(t)·x⊗x"""

    nu: int
    A: TaylorMatrix
    B: TaylorMatrix
    C: TaylorMatrix
    validity_radius: float = 1.0
    name: str = "custom-polynomial"
    builtin: Optional[Tuple[str, Dict[str, Any]]] = None

    def __post_init__(self):
        for label, g in (("A", self.A), ("B", self.B), ("C", self.C)):
            if g.shape != (self.nu, self.nu):
                raise ValueError(f"{label} debe ser {self.nu}×{self.nu}, recibido {g.shape}")
        if self.validity_radius <= 0:
            raise ValueError("validity_radius debe ser positivo")

    @cached_property
    def key(self) -> str:
        """Huella estable del modelo, usada como clave de memoización"""
        digest = hashlib.sha1()
        digest.update(f"{self.nu}|{self.validity_radius!r}".encode())
        for g in (self.A, self.B, self.C):
            digest.update(np.ascontiguousarray(g.coefficients).tobytes())
        return digest.hexdigest()[:16]

    @property
    def builtin_name(self) -> Optional[str]:
        return self.builtin[0] if self.builtin else None

    def is_autonomous(self) -> bool:
        return self.A.is_constant() and self.B.is_constant() and self.C.is_constant()


@dataclass(frozen=True, eq=False)
class FourierMode:
    xi: np.ndarray  # (nu,)
    amplitude: TaylorMatrix  # d × d

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float).reshape(-1)
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)


@dataclass(frozen=True, eq=False)
class FourierPotential:
    """c(t, x) = Σ_m a_m(t) e^{ix·ξ_m}; lista vacía = potencial nulo"""

    nu: int
    d: int = 1
    modes: Tuple[FourierMode, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        for mode in self.modes:
            if mode.xi.shape != (self.nu,):
                raise ValueError(f"ξ debe tener dimensión {self.nu}")
            if mode.amplitude.shape != (self.d, self.d):
                raise ValueError(f"Las amplitudes deben ser {self.d}×{self.d}")

    @classmethod
    def zero(cls, nu: int, d: int = 1) -> "FourierPotential":
        return cls(nu=nu, d=d, modes=())

    @classmethod
    def constant(cls, nu: int, value) -> "FourierPotential":
        amplitude = np.atleast_2d(np.asarray(value, dtype=complex))
        return cls(
            nu=nu,
            d=amplitude.shape[0],
            modes=(FourierMode(np.zeros(nu), TaylorMatrix.constant(amplitude)),),
        )

    @classmethod
    def cosine(cls, nu: int, xi: Sequence[float], weight: complex = 1.0) -> "FourierPotential":
        """weight·cos(x·ξ) como par de modos ±ξ con amplitud weight/2"""
        half = TaylorMatrix.constant([[weight / 2]])
        xi = np.asarray(xi, dtype=float)
        return cls(nu=nu, d=1, modes=(FourierMode(xi, half), FourierMode(-xi, half)))

    @property
    def is_zero(self) -> bool:
        return len(self.modes) == 0 or all(m.amplitude.is_zero() for m in self.modes)

    @property
    def is_spatially_constant(self) -> bool:
        return all(not np.any(m.xi) for m in self.modes)

    @property
    def frequencies(self) -> np.ndarray:
        if not self.modes:
            return np.zeros((0, self.nu))
        return np.stack([m.xi for m in self.modes])


@dataclass(frozen=True, eq=False)
class Problem:
    """Definición completa cargada desde un archivo de problema"""

    model: CoefficientModel
    potential: FourierPotential
    name: str = "problem"


@dataclass(frozen=True)
class RealityReport:
    real: bool
    offending: Tuple[str, ...] = ()
