from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from app.modules.operator_model.schemas import ComplexEntry, ComplexValue, ProblemSpec

# ==================== REQUEST SCHEMAS ====================


class ClassicalRequest(BaseModel):
    problem: ProblemSpec
    t: List[ComplexEntry] = Field(..., min_length=1, description="Tiempos complejos, p. ej. '0.3i'")
    x: List[float] = Field(..., min_length=1)
    y: List[float] = Field(..., min_length=1)
    samples: int = Field(11, ge=2, le=1001, description="Muestras de trayectoria en [0, 1]")


# ==================== RESPONSE SCHEMAS ====================


class TrajectorySample(BaseModel):
    s: float
    flat: List[List[ComplexValue]]
    sharp: List[List[ComplexValue]]


class ClassicalRecord(BaseModel):
    """Acción, prefactor y residuos de identidades clásicas en un t"""
    t: ComplexValue
    conditioning: float
    phi: ComplexValue
    phi0: ComplexValue
    phi1: ComplexValue
    theta_integral: ComplexValue
    p0: ComplexValue
    residuals: Dict[str, float]
    closed_form_error: Optional[float] = None
    trajectories: List[TrajectorySample] = Field(default_factory=list)

    @classmethod
    def from_evaluation(cls, evaluation, samples: int = 0,
                        closed_form_error: Optional[float] = None) -> "ClassicalRecord":
        bundle, action = evaluation.bundle, evaluation.action
        trajectories = []
        if samples:
            for s in [i / (samples - 1) for i in range(samples)]:
                trajectories.append(TrajectorySample(
                    s=s,
                    flat=[[ComplexValue.of(z) for z in row] for row in bundle.q_flat(s)],
                    sharp=[[ComplexValue.of(z) for z in row] for row in bundle.q_sharp(s)],
                ))
        return cls(
            t=ComplexValue.of(evaluation.t),
            conditioning=bundle.conditioning,
            phi=ComplexValue.of(action.phi),
            phi0=ComplexValue.of(action.phi0),
            phi1=ComplexValue.of(action.phi1),
            theta_integral=ComplexValue.of(action.theta_integral),
            p0=ComplexValue.of(evaluation.p0),
            residuals=evaluation.residuals(),
            closed_form_error=closed_form_error,
            trajectories=trajectories,
        )
