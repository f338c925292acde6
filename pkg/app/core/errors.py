"""
Jerarquía de errores del dominio.

Cada error sabe cómo se traduce en la API (status_code) y en la CLI (exit_code):
0 éxito, 2 error de configuración, 3 radio matemático excedido, 4 verificación fallida.
"""
import math
from typing import Any, Dict, Optional


def _jsonable(value: Any) -> Any:
    # JSON estricto: sin inf/nan ni complejos
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


class DeformationError(Exception):
    status_code: int = 500
    exit_code: int = 4

    def __init__(self, detail: str, **context: Any):
        super().__init__(detail)
        self.detail = detail
        self.context: Dict[str, Any] = context

    def to_dict(self) -> Dict[str, Any]:
        payload = {"error": type(self).__name__, "detail": self.detail}
        if self.context:
            payload["context"] = {k: _jsonable(v) for k, v in self.context.items()}
        return payload


class ProblemDefinitionError(DeformationError):
    """Archivo de problema inválido o hipótesis estructurales violadas"""
    status_code = 422
    exit_code = 2


class BoundaryMassError(DeformationError):
    status_code = 422
    exit_code = 2


class OutOfRadiusError(DeformationError):
    status_code = 422
    exit_code = 3


class SingularCoefficientError(DeformationError):
    status_code = 422
    exit_code = 3


class FocalPointError(DeformationError):
    """t fuera de T̄: el problema de contorno deja de ser únicamente soluble"""
    status_code = 409
    exit_code = 3

    def __init__(self, detail: str, conditioning: Optional[float] = None, **context: Any):
        super().__init__(detail, conditioning=conditioning, **context)
        self.conditioning = conditioning


class UndefinedAtZeroError(DeformationError):
    status_code = 422
    exit_code = 3


class CancellationError(DeformationError):
    status_code = 422
    exit_code = 3


class SeriesBudgetError(DeformationError):
    status_code = 413
    exit_code = 3


class OracleToleranceError(DeformationError):
    status_code = 500
    exit_code = 4

    def __init__(self, detail: str, estimate: Optional[float] = None, **context: Any):
        super().__init__(detail, estimate=estimate, **context)
        self.estimate = estimate


class DivergenceError(DeformationError):
    status_code = 500
    exit_code = 4
