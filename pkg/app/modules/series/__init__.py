"""
Módulo Serie de Deformación

Evalúa los términos vₙ de la serie de deformación para potenciales
trigonométricos finitos y ensambla p = p⁰·p^conj con cota de cola certificada.

Funcionalidades principales:
- Cuadratura de Gauss–Legendre anidada sobre el símplice ordenado
- Producto de amplitudes en orden descendente c(sₙt)···c(s₁t)
- Recursión exacta de Dyson para potenciales sin dependencia espacial
- Forma operador (d = 1, n ≤ 2) para contraste algebraico
- Cota de truncación Σ_{n>N} (Â|t|)ⁿ/n! y parada temprana
- Residuo de la EDP ∂ₜp = (P₀ + c)p por diferencias finitas
"""

from .models import KernelResult, SeriesTerm
from .router import router as series_router
from .service import SeriesService, eval_vn, eval_vn_batch, majorant, truncation_bound

__all__ = [
    "series_router",
    "SeriesTerm",
    "KernelResult",
    "SeriesService",
    "eval_vn",
    "eval_vn_batch",
    "majorant",
    "truncation_bound",
]
