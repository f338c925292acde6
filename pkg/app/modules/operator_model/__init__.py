"""
Módulo Modelo de Operador

Define los coeficientes del operador cuadrático
P₀ = A(t)·(∂ₓ + B(t)x)² − C(t)·x⊗x y el potencial perturbador como suma
finita de modos de Fourier con amplitudes matriciales polinomiales.

Funcionalidades principales:
- Evaluación de A, B, C dentro del radio de validez
- Hipótesis de realidad (A, iB, C reales en el eje imaginario) con reporte
- Evaluación del potencial y cota de momentos Σ e^{R|ξ|} sup|a_m|
- Registro incorporado: free, harmonic(λ), magnetic(β)
- Carga y validación de archivos de problema (JSON)
"""

from .models import CoefficientModel, FourierMode, FourierPotential, Problem, RealityReport, TaylorMatrix
from .repository import ProblemRepository
from .router import router as problems_router
from .service import (
    check_reality,
    eval_coefficients,
    eval_potential,
    moment_bound,
    validate_hypotheses,
)

__all__ = [
    "problems_router",
    "TaylorMatrix",
    "CoefficientModel",
    "FourierMode",
    "FourierPotential",
    "Problem",
    "RealityReport",
    "ProblemRepository",
    "eval_coefficients",
    "check_reality",
    "eval_potential",
    "moment_bound",
    "validate_hypotheses",
]
