"""
Módulo Verificación

Suite de invariantes que respalda el comando `verify`: cada comprobación
reporta valor medido, umbral y estado PASS / FAIL / SKIPPED.

Funcionalidades principales:
- Dinámica clásica: contorno, cota de trayectorias, invariante simpléctico, identidades
- Formas cerradas y función de Green como contraste de la matriz de deformación
- Realidad con compuerta sobre la positividad
- Serie: majorante, residuo de la EDP y oráculo adaptativo de bajo orden
- Contraste de semigrupo con Crank–Nicolson (lento, opcional)
"""

from .models import CheckResult, CheckStatus, VerificationReport
from .router import router as verification_router
from .service import VerificationService, semigroup_crosscheck

__all__ = [
    "verification_router",
    "CheckResult",
    "CheckStatus",
    "VerificationReport",
    "VerificationService",
    "semigroup_crosscheck",
]
