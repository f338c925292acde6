from typing import List

from fastapi import APIRouter

from app.modules.classical.schemas import ClassicalRecord, ClassicalRequest
from app.modules.classical.service import ClassicalService
from app.modules.operator_model.repository import ProblemRepository
from app.modules.operator_model.schemas import parse_complex

router = APIRouter(prefix="/classical", tags=["Classical"])


@router.post("/evaluate", response_model=List[ClassicalRecord])
def evaluate_classical(request: ClassicalRequest):
    """
    Resolver la dinámica clásica en cada t de la lista

    **Funcionalidad:**
    - Trayectorias reescaladas q̃♭, q̃♯ muestreadas en [0, 1]
    - Acción Φ, fase Φ₀, integral de θ y p⁰ en (x, y)
    - Residuos eikonal, de gradiente, de transporte y simpléctico
    """
    problem = ProblemRepository().from_spec(request.problem)
    service = ClassicalService(problem.model)
    return [
        ClassicalRecord.from_evaluation(
            service.evaluate(parse_complex(t), request.x, request.y), samples=request.samples
        )
        for t in request.t
    ]
