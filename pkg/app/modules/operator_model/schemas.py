from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

# ===== TIPOS BÁSICOS =====

ComplexEntry = Union[float, int, str]
MatrixEntry = Union[ComplexEntry, List[List[ComplexEntry]]]


def parse_complex(value: ComplexEntry) -> complex:
    """Acepta números o cadenas tipo '1+2i' / '0.5j'"""
    if isinstance(value, str):
        text = value.strip().replace(" ", "").replace("i", "j")
        try:
            return complex(text)
        except ValueError as exc:
            raise ValueError(f"Número complejo inválido: {value!r}") from exc
    return complex(value)


class ComplexValue(BaseModel):
    re: float
    im: float

    @classmethod
    def of(cls, z: complex) -> "ComplexValue":
        z = complex(z)
        return cls(re=z.real, im=z.imag)


# ===== DEFINICIÓN DEL PROBLEMA =====

class BuiltinSpec(BaseModel):
    """Modelo del registro incorporado"""
    name: Literal["free", "harmonic", "magnetic"]
    lam: Optional[float] = Field(None, description="λ del caso armónico (C = λ𝟙)")
    beta: Optional[List[List[float]]] = Field(None, description="Matriz antisimétrica β del caso magnético")


class CoefficientSpec(BaseModel):
    """Un coeficiente A, B o C: polinomio de Taylor o forma cerrada del registro"""
    taylor: Optional[List[MatrixEntry]] = Field(None, description="Coeficientes g_k; escalar = g_k·𝟙")
    builtin: Optional[Literal["free", "harmonic", "magnetic"]] = None
    lam: Optional[float] = None
    beta: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def check_one_source(self):
        if (self.taylor is None) == (self.builtin is None):
            raise ValueError("Indique exactamente uno de 'taylor' o 'builtin'")
        if self.taylor is not None and len(self.taylor) == 0:
            raise ValueError("La lista 'taylor' no puede estar vacía")
        return self


class ModeSpec(BaseModel):
    xi: List[float] = Field(..., min_length=1)
    amplitude_taylor: List[MatrixEntry] = Field(..., min_length=1)


class PotentialSpec(BaseModel):
    d: int = Field(1, gt=0)
    modes: List[ModeSpec] = Field(default_factory=list)


class ProblemSpec(BaseModel):
    """Esquema del archivo de problema (JSON)"""
    name: Optional[str] = None
    nu: int = Field(..., gt=0, description="Dimensión espacial ν")
    builtin: Optional[BuiltinSpec] = None
    A: Optional[CoefficientSpec] = None
    B: Optional[CoefficientSpec] = None
    C: Optional[CoefficientSpec] = None
    potential: Optional[PotentialSpec] = None
    validity_radius: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def check_coefficients(self):
        if self.builtin is None and self.A is None:
            raise ValueError("Sin 'builtin' es obligatorio definir al menos A")
        return self


# ===== RESPUESTAS =====

class RealityResponse(BaseModel):
    real: bool
    offending: List[str] = []


class ProblemReport(BaseModel):
    name: str
    nu: int
    d: int
    validity_radius: float
    autonomous: bool
    mode_count: int
    a0_eigenvalues: List[float]
    reality: RealityResponse
    analyticity_residual: float
    moment_bound: float = Field(..., description="Σ e^{R|ξ|} sup|a_m| con R = T = radio de validez")


class PotentialRequest(BaseModel):
    problem: ProblemSpec
    t: ComplexEntry = 0.0
    x: List[ComplexEntry]

    @field_validator("x")
    @classmethod
    def non_empty(cls, value):
        if not value:
            raise ValueError("x no puede estar vacío")
        return value
