from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

from app.modules.operator_model.schemas import ComplexEntry, ComplexValue, ProblemSpec


def _matrix(value) -> List[List[ComplexValue]]:
    return [[ComplexValue.of(z) for z in row] for row in value]


def _vector(value) -> List[float]:
    return [float(complex(v).real) for v in value]


class PointPair(BaseModel):
    x: List[float] = Field(..., min_length=1)
    y: List[float] = Field(..., min_length=1)


class KernelRequest(BaseModel):
    """Evaluación de p = p⁰·p^conj en una lista de tiempos y pares (x, y)"""
    problem: ProblemSpec
    t: List[ComplexEntry] = Field(..., min_length=1)
    points: List[PointPair] = Field(..., min_length=1)
    n_max: Optional[int] = Field(None, ge=0)
    tol: Optional[float] = Field(None, ge=0)
    quad: Optional[int] = Field(None, gt=0, description="Nodos Q por dimensión del símplice")

    @field_validator("points")
    @classmethod
    def same_dimension(cls, value):
        dims = {len(p.x) for p in value} | {len(p.y) for p in value}
        if len(dims) != 1:
            raise ValueError("Todos los puntos deben tener la misma dimensión")
        return value


class TermRecord(BaseModel):
    n: int
    norm: float
    quadrature_order: int
    mode_tuple_count: int


class KernelRecord(BaseModel):
    """Registro JSON {t, x, y, p0, pconj, p, tail_bound, orders_used}"""
    t: ComplexValue
    x: List[float]
    y: List[float]
    p0: ComplexValue
    pconj: List[List[ComplexValue]]
    p: List[List[ComplexValue]]
    tail_bound: float
    orders_used: int
    terms: List[TermRecord] = Field(default_factory=list)

    @classmethod
    def from_result(cls, result) -> "KernelRecord":
        return cls(
            t=ComplexValue.of(result.t),
            x=_vector(result.x),
            y=_vector(result.y),
            p0=ComplexValue.of(result.p0),
            pconj=_matrix(result.pconj),
            p=_matrix(result.p),
            tail_bound=result.tail_bound,
            orders_used=result.orders_used,
            terms=[
                TermRecord(
                    n=term.n,
                    norm=term.norm,
                    quadrature_order=term.quadrature_order,
                    mode_tuple_count=term.mode_tuple_count,
                )
                for term in result.terms
            ],
        )
