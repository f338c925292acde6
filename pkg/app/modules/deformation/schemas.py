from typing import List

from pydantic import BaseModel, Field

from app.modules.operator_model.schemas import ComplexEntry, ComplexValue, ProblemSpec

# ==================== REQUEST SCHEMAS ====================


class MassSpec(BaseModel):
    s: float = Field(..., description="Posición de la masa puntual en (0, 1)")
    xi: List[float] = Field(..., min_length=1)


class QuadraticFormRequest(BaseModel):
    problem: ProblemSpec
    t: ComplexEntry
    masses: List[MassSpec] = Field(default_factory=list)


# ==================== RESPONSE SCHEMAS ====================


class PositivityResponse(BaseModel):
    """(μ,μ)ₜ frente a (μ,μ)₀ y las cotas de tamaño"""
    t: ComplexValue
    form_t: ComplexValue
    form_0: float
    real_part: float
    form_ratio: float
    size_ratio: float
    degenerate: bool
    passed: bool

    @classmethod
    def from_report(cls, report) -> "PositivityResponse":
        return cls(
            t=ComplexValue.of(report.t),
            form_t=ComplexValue.of(report.form_t),
            form_0=report.form_0,
            real_part=report.real_part,
            form_ratio=report.form_ratio,
            size_ratio=report.size_ratio,
            degenerate=report.degenerate,
            passed=report.passed,
        )
