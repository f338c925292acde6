"""
Módulo Matriz de Deformación

Construye K̃ₜ(s, s′) a partir de las trayectorias de contorno y verifica sus
propiedades: ecuación del propagador, simetría, positividad y cotas.

Funcionalidades principales:
- Cuadratura en log τ y tabla de Chebyshev sobre el triángulo s ≤ s′
- Evaluación directa sin interpolación para diferencias finitas
- Forma cuadrática (μ,μ)ₜ de masas puntuales
- Residuos de la ecuación del propagador (homogéneo, Dirichlet, salto)
- Volcado CSV de la malla (s, s′, Re K̃, Im K̃)
"""

from .models import DeformationKernel, Mass, PositivityReport, PropagatorReport
from .repository import KernelRepository, kernel_cache
from .router import router as deformation_router
from .service import (
    DeformationService,
    build_kernel,
    positivity_and_bounds,
    propagator_residual,
    quadratic_form,
    reference_form,
    unscaled_kernel,
)

__all__ = [
    "deformation_router",
    "DeformationKernel",
    "Mass",
    "PositivityReport",
    "PropagatorReport",
    "KernelRepository",
    "kernel_cache",
    "DeformationService",
    "build_kernel",
    "positivity_and_bounds",
    "propagator_residual",
    "quadratic_form",
    "reference_form",
    "unscaled_kernel",
]
