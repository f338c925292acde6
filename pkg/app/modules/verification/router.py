from fastapi import APIRouter

from app.modules.operator_model.repository import ProblemRepository
from app.modules.verification.schemas import VerificationRequest, VerificationResponse
from app.modules.verification.service import VerificationService

router = APIRouter(prefix="/verification", tags=["Verification"])


@router.post("/run", response_model=VerificationResponse)
def run_verification(request: VerificationRequest):
    """
    Ejecutar la suite de invariantes sobre un problema

    **Funcionalidad:**
    - Condiciones de contorno, invariante simpléctico e identidades clásicas
    - Realidad, ecuación del propagador y positividad (omitida si falla la realidad)
    - Majorante de la serie, residuo de la EDP y oráculo de bajo orden
    - Contraste Crank–Nicolson opcional (`include_slow`)
    """
    problem = ProblemRepository().from_spec(request.problem)
    report = VerificationService(problem, seed=request.seed, include_slow=request.include_slow).run()
    return VerificationResponse.from_report(report)
