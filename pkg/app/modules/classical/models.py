from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from app.core.errors import SingularCoefficientError
from app.modules.operator_model.models import CoefficientModel, TaylorMatrix
from app.shared.numerics.ode import hermite_eval


@dataclass(frozen=True, eq=False)
class ELCoefficients:
    """
    E = ȦA⁻¹ + 2A(ᵀB − B), F = 4AC − 2AḂ.

    F siempre es polinomial; E lo es cuando A es constante y si no se evalúa
    punto a punto con la inversa de A.
    """

    model: CoefficientModel
    F_poly: TaylorMatrix
    E_poly: Optional[TaylorMatrix] = None
    singular_limit: float = 1e12

    @property
    def nu(self) -> int:
        return self.model.nu

    def E(self, t) -> np.ndarray:
        if self.E_poly is not None:
            return self.E_poly(t)
        A = self.model.A(t)
        cond = np.linalg.cond(A)
        if not np.all(np.isfinite(cond)) or np.max(cond) > self.singular_limit:
            raise SingularCoefficientError(
                "A(t) numéricamente singular en un punto de evaluación",
                condition=float(np.max(cond)),
            )
        A_dot = self.model.A.derivative()(t)
        B = self.model.B(t)
        return A_dot @ np.linalg.inv(A) + 2.0 * A @ (np.swapaxes(B, -1, -2) - B)

    def F(self, t) -> np.ndarray:
        return self.F_poly(t)

    def evaluate(self, t) -> Tuple[np.ndarray, np.ndarray]:
        return self.E(t), self.F(t)


@dataclass(frozen=True, eq=False)
class TrajectoryBundle:
    """
    Soluciones reescaladas q̃♭ₜ, q̃♯ₜ en s ∈ [0, 1] para un t complejo.

    Se guardan valor, primera y segunda derivada en los nodos RK4; la salida
    densa es Hermite cúbica (valores con primeras derivadas, o primeras
    derivadas con segundas).
    """

    t: complex
    steps: int
    flat: np.ndarray
    flat_d: np.ndarray
    flat_dd: np.ndarray
    sharp: np.ndarray
    sharp_d: np.ndarray
    sharp_dd: np.ndarray
    conditioning: float

    @property
    def nu(self) -> int:
        return self.flat.shape[-1]

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.steps + 1)

    def q_flat(self, s, derivative: int = 0) -> np.ndarray:
        if derivative == 0:
            return hermite_eval(self.flat, self.flat_d, s)
        if derivative == 1:
            return hermite_eval(self.flat_d, self.flat_dd, s)
        raise ValueError("Solo se soportan derivadas de orden 0 y 1")

    def q_sharp(self, s, derivative: int = 0) -> np.ndarray:
        if derivative == 0:
            return hermite_eval(self.sharp, self.sharp_d, s)
        if derivative == 1:
            return hermite_eval(self.sharp_d, self.sharp_dd, s)
        raise ValueError("Solo se soportan derivadas de orden 0 y 1")

    def boundary_defect(self) -> float:
        eye = np.eye(self.nu)
        return float(max(
            np.max(np.abs(self.flat[0])),
            np.max(np.abs(self.flat[-1] - eye)),
            np.max(np.abs(self.sharp[0] - eye)),
            np.max(np.abs(self.sharp[-1])),
        ))

    def sup_norms(self) -> Tuple[float, float]:
        """sup_s |q̃♭(s)|, sup_s |q̃♯(s)| en norma de operador sobre los nodos"""
        return (
            float(np.max(np.linalg.norm(self.flat, 2, axis=(-2, -1)))),
            float(np.max(np.linalg.norm(self.sharp, 2, axis=(-2, -1)))),
        )


@dataclass(frozen=True, eq=False)
class ActionForm:
    """Φ(x, y, t) = zᵀHz con z = (x, y) y H simétrica 2ν×2ν"""

    t: complex
    hessian: np.ndarray

    @property
    def nu(self) -> int:
        return self.hessian.shape[0] // 2

    def _z(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        x, y = np.broadcast_arrays(x, y)
        return np.concatenate([x, y], axis=-1)

    def value(self, x, y):
        z = self._z(x, y)
        return np.einsum("...i,ij,...j->...", z, self.hessian, z)

    def grad_x(self, x, y) -> np.ndarray:
        z = self._z(x, y)
        return 2.0 * (z @ self.hessian.T)[..., : self.nu]

    @property
    def hess_xx(self) -> np.ndarray:
        return 2.0 * self.hessian[: self.nu, : self.nu]


@dataclass(frozen=True)
class ActionResult:
    phi: complex
    psi: complex
    phi0: complex
    phi1: complex
    theta_integral: complex


@dataclass(frozen=True)
class IdentityReport:
    gradient_identity: float
    transport_identity: float
    symplectic_invariant: float

    def worst(self) -> float:
        return max(self.gradient_identity, self.transport_identity, self.symplectic_invariant)


@dataclass(frozen=True, eq=False)
class ClassicalEvaluation:
    """Resumen de la dinámica clásica en un (t, x, y)"""

    t: complex
    x: np.ndarray
    y: np.ndarray
    bundle: TrajectoryBundle
    action: ActionResult
    p0: complex
    eikonal_residual: float
    identities: IdentityReport

    def residuals(self) -> dict:
        return {
            "boundary_defect": self.bundle.boundary_defect(),
            "eikonal": self.eikonal_residual,
            "gradient_identity": self.identities.gradient_identity,
            "transport_identity": self.identities.transport_identity,
            "symplectic_invariant": self.identities.symplectic_invariant,
        }
