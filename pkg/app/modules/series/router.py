from typing import List

import numpy as np
from fastapi import APIRouter

from app.modules.operator_model.repository import ProblemRepository
from app.modules.operator_model.schemas import parse_complex
from app.modules.series.schemas import KernelRecord, KernelRequest
from app.modules.series.service import SeriesService

router = APIRouter(prefix="/series", tags=["Series"])


@router.post("/kernel", response_model=List[KernelRecord])
def evaluate_kernel(request: KernelRequest):
    """
    Evaluar el núcleo p = p⁰·(𝟙 + Σ vₙ) con cota de truncación certificada

    **Funcionalidad:**
    - Una resolución clásica y una matriz de deformación por cada t
    - Parada temprana cuando la cota de cola es menor que `tol`
    - Registros por punto con p⁰, p^conj, p y órdenes usados
    """
    problem = ProblemRepository().from_spec(request.problem)
    service = SeriesService(problem.model, problem.potential, nodes=request.quad)
    xs = np.array([p.x for p in request.points], dtype=float)
    ys = np.array([p.y for p in request.points], dtype=float)
    records = []
    for raw_t in request.t:
        results = service.eval_kernel_batch(parse_complex(raw_t), xs, ys, request.n_max, request.tol)
        records.extend(KernelRecord.from_result(r) for r in results)
    return records
