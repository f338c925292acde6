from typing import List

import numpy as np
from fastapi import APIRouter

from app.modules.operator_model.repository import ProblemRepository
from app.modules.operator_model.schemas import (
    ComplexValue, PotentialRequest, ProblemReport, ProblemSpec, RealityResponse, parse_complex
)
from app.modules.operator_model.service import (
    a0_eigenvalues, analyticity_residual, check_reality, eval_potential, moment_bound
)

router = APIRouter(prefix="/problems", tags=["Problems"])


@router.post("/validate", response_model=ProblemReport)
async def validate_problem(spec: ProblemSpec):
    """
    Validar un problema y reportar sus hipótesis estructurales

    **Comprueba:**
    - Simetría de A y C, A(0) real definida positiva
    - Hipótesis de realidad sobre el eje imaginario (coeficientes infractores)
    - Residuo de Cauchy–Riemann y cota de momentos del potencial
    """
    problem = ProblemRepository().from_spec(spec)
    model, potential = problem.model, problem.potential
    reality = check_reality(model)
    radius = model.validity_radius
    return ProblemReport(
        name=problem.name,
        nu=model.nu,
        d=potential.d,
        validity_radius=radius,
        autonomous=model.is_autonomous(),
        mode_count=len(potential.modes),
        a0_eigenvalues=a0_eigenvalues(model).tolist(),
        reality=RealityResponse(real=reality.real, offending=list(reality.offending)),
        analyticity_residual=analyticity_residual(model),
        moment_bound=moment_bound(potential, radius, radius),
    )


@router.post("/potential", response_model=List[List[ComplexValue]])
async def evaluate_potential(request: PotentialRequest):
    """Evaluar c(t, x) como matriz d×d"""
    problem = ProblemRepository().from_spec(request.problem)
    x = np.array([parse_complex(v) for v in request.x])
    value = eval_potential(problem.potential, parse_complex(request.t), x)
    return [[ComplexValue.of(v) for v in row] for row in value]
