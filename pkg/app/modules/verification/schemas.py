from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from app.config.settings import settings
from app.modules.operator_model.schemas import ProblemSpec


class VerificationRequest(BaseModel):
    problem: ProblemSpec
    seed: int = Field(default_factory=lambda: settings.default_seed)
    include_slow: bool = Field(False, description="Incluir el contraste Crank–Nicolson")


class CheckRecord(BaseModel):
    name: str
    status: str
    measured: Optional[float] = None
    threshold: Optional[float] = None
    detail: str = ""
    samples: Optional[int] = Field(None, description="Número de muestras aleatorias evaluadas")


class VerificationResponse(BaseModel):
    """Informe legible por máquina: PASS/FAIL/SKIPPED por invariante"""
    problem: str
    seed: int
    passed: bool
    counts: Dict[str, int]
    max_conditioning: Optional[float] = Field(None, description="Peor κ(V(1)) entre los problemas de contorno resueltos")
    checks: List[CheckRecord]

    @classmethod
    def from_report(cls, report) -> "VerificationResponse":
        return cls(
            problem=report.problem,
            seed=report.seed,
            passed=report.passed,
            counts=report.counts(),
            max_conditioning=report.max_conditioning,
            checks=[
                CheckRecord(
                    name=c.name,
                    status=c.status.value,
                    measured=c.measured,
                    threshold=c.threshold,
                    detail=c.detail,
                    samples=c.samples,
                )
                for c in report.checks
            ],
        )
