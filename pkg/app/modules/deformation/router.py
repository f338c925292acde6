from fastapi import APIRouter

from app.modules.deformation.schemas import PositivityResponse, QuadraticFormRequest
from app.modules.deformation.service import DeformationService, positivity_and_bounds
from app.modules.operator_model.repository import ProblemRepository
from app.modules.operator_model.schemas import parse_complex

router = APIRouter(prefix="/deformation", tags=["Deformation"])


@router.post("/quadratic-form", response_model=PositivityResponse)
def evaluate_quadratic_form(request: QuadraticFormRequest):
    """
    Evaluar la forma cuadrática de masas puntuales con la matriz de deformación

    **Funcionalidad:**
    - Σ ξ_j·K̃ₜ(s_j, s_k)ξ_k leída de la malla interpolada
    - Positividad Re(t(μ,μ)ₜ) ≥ 0 y cotas |(μ,μ)ₜ| ≤ 2(μ,μ)₀
    - Masas en s ∈ {0, 1} rechazadas con 422
    """
    problem = ProblemRepository().from_spec(request.problem)
    kernel = DeformationService(problem.model).kernel(parse_complex(request.t))
    masses = [(m.s, m.xi) for m in request.masses]
    return PositivityResponse.from_report(positivity_and_bounds(kernel, problem.model, masses))
