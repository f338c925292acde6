"""
Módulo Dinámica Clásica

Resuelve el problema de contorno de Euler–Lagrange en tiempo complejo y
construye la parte gaussiana p⁰ del núcleo.

Funcionalidades principales:
- Coeficientes E, F y trayectorias reescaladas q̃♭, q̃♯ (RK4 + Hermite)
- Detector de puntos focales por condicionamiento de V(1)
- Acción Φ como forma cuadrática en (x, y), prefactor θ y fase Φ₀
- p⁰ = (4πΔt)^{−ν/2} e^{−Φ₀/t}
- Residuos eikonal, de gradiente, de transporte y del invariante simpléctico
- Memoización LRU de trayectorias
"""

from .models import ActionForm, ActionResult, ClassicalEvaluation, IdentityReport, TrajectoryBundle
from .repository import TrajectoryRepository, trajectory_cache
from .router import router as classical_router
from .service import ClassicalService, euler_lagrange_coeffs, solve_bvp, solve_bvp_many

__all__ = [
    "classical_router",
    "ActionForm",
    "ActionResult",
    "ClassicalEvaluation",
    "IdentityReport",
    "TrajectoryBundle",
    "TrajectoryRepository",
    "trajectory_cache",
    "ClassicalService",
    "euler_lagrange_coeffs",
    "solve_bvp",
    "solve_bvp_many",
]
