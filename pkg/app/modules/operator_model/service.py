import logging
from typing import Tuple

import numpy as np

from app.core.errors import OutOfRadiusError, ProblemDefinitionError
from app.modules.operator_model.models import (
    CoefficientModel, FourierPotential, RealityReport, TaylorMatrix
)
from app.shared.numerics.linalg import op_norm, symmetry_defect

logger = logging.getLogger(__name__)

REALITY_TOL = 1e-12
SYMMETRY_TOL = 1e-12
MOMENT_CIRCLE_SAMPLES = 64


# ===== COEFICIENTES =====

def eval_coefficients(model: CoefficientModel, t) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """A(t), B(t), C(t); t escalar o arreglo dentro del radio de validez"""
    t_arr = np.asarray(t, dtype=complex)
    if t_arr.size and np.max(np.abs(t_arr)) >= model.validity_radius:
        raise OutOfRadiusError(
            f"|t| = {np.max(np.abs(t_arr)):.6g} fuera del radio de validez {model.validity_radius:g}",
            validity_radius=model.validity_radius,
        )
    return model.A(t_arr), model.B(t_arr), model.C(t_arr)


def _axis_reality(g: TaylorMatrix, shift: int, step: int = 1) -> list:
    # g(iτ) real ⇔ i^{k+shift} g_k real para todo k; con step = 0, g(τ) real ⇔ g_k real
    offending = []
    for k, coeff in enumerate(g.coefficients):
        rotated = (1j ** ((step * k + shift) % 4)) * coeff
        scale = max(1.0, float(np.max(np.abs(coeff))))
        if np.max(np.abs(rotated.imag)) > REALITY_TOL * scale:
            offending.append(k)
    return offending


def check_reality(model: CoefficientModel) -> RealityReport:
    """A, iB, C reales sobre el eje imaginario"""
    offending = []
    for label, g, shift in (("A", model.A, 0), ("iB", model.B, 1), ("C", model.C, 0)):
        offending.extend(f"{label}[{k}]" for k in _axis_reality(g, shift))
    report = RealityReport(real=not offending, offending=tuple(offending))
    if not report.real:
        logger.warning(f"⚠️ Modelo {model.name} no cumple la hipótesis de realidad: {', '.join(offending)}")
    return report


def check_real_axis(model: CoefficientModel) -> RealityReport:
    """A, B, C reales para t real (coeficientes de Taylor reales)"""
    offending = []
    for label, g in (("A", model.A), ("B", model.B), ("C", model.C)):
        offending.extend(f"{label}[{k}]" for k in _axis_reality(g, 0, step=0))
    return RealityReport(real=not offending, offending=tuple(offending))


def validate_hypotheses(model: CoefficientModel, samples: int = 8) -> None:
    """A y C simétricas en puntos de muestra; A(0) real simétrica definida positiva"""
    angles = 2 * np.pi * np.arange(samples) / samples
    ts = np.concatenate([[0.0], 0.5 * model.validity_radius * np.exp(1j * angles)])
    for label, g in (("A", model.A), ("C", model.C)):
        defect = symmetry_defect(g(ts))
        if defect > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(g.coefficients)))):
            raise ProblemDefinitionError(f"{label}(t) no es simétrica (defecto {defect:.3e})")
    a0 = model.A.coefficients[0]
    if np.max(np.abs(a0.imag)) > SYMMETRY_TOL:
        raise ProblemDefinitionError("A(0) debe ser real")
    eigenvalues = np.linalg.eigvalsh(a0.real)
    if eigenvalues.min() <= 0:
        raise ProblemDefinitionError(
            "A(0) debe ser definida positiva", eigenvalues=eigenvalues.tolist()
        )


def a0_eigenvalues(model: CoefficientModel) -> np.ndarray:
    return np.linalg.eigvalsh(model.A.coefficients[0].real)


def analyticity_residual(model: CoefficientModel, samples: int = 6, h: float = 1e-5) -> float:
    """Residuo de Cauchy–Riemann por diferencias finitas: ∂_Re g − (−i)∂_Im g"""
    angles = 2 * np.pi * np.arange(samples) / samples
    ts = 0.5 * model.validity_radius * np.exp(1j * angles)
    worst = 0.0
    for g in (model.A, model.B, model.C):
        d_real = (g(ts + h) - g(ts - h)) / (2 * h)
        d_imag = (g(ts + 1j * h) - g(ts - 1j * h)) / (2j * h)
        worst = max(worst, float(np.max(np.abs(d_real - d_imag))))
    return worst


# ===== POTENCIAL =====

def eval_potential(pot: FourierPotential, t, x) -> np.ndarray:
    """
    c(t, x) = Σ_m a_m(t) e^{i x·ξ_m}.

    x: (..., ν); t escalar o arreglo difundible con x[..., 0].
    Devuelve (..., d, d).
    """
    x = np.asarray(x, dtype=complex)
    batch = x.shape[:-1]
    t = np.broadcast_to(np.asarray(t, dtype=complex), batch)
    out = np.zeros(batch + (pot.d, pot.d), dtype=complex)
    for mode in pot.modes:
        phase = np.exp(1j * (x @ mode.xi))
        out += mode.amplitude(t) * phase[..., None, None]
    return out


def amplitude_sup(g: TaylorMatrix, T: float, samples: int = MOMENT_CIRCLE_SAMPLES) -> float:
    """
    Cota de sup_{|t|≤T} |g(t)|.

    Mínimo entre la suma de normas Σ|g_k|T^k y el máximo muestreado sobre la
    circunferencia más la corrección de Lipschitz entre muestras.
    """
    norms = g.coefficient_norms()
    powers = T ** np.arange(len(norms))
    coarse = float(np.sum(norms * powers))
    if g.is_constant() or T == 0:
        return min(coarse, float(norms[0]))
    angles = 2 * np.pi * np.arange(samples) / samples
    sampled = float(np.max(op_norm(g(T * np.exp(1j * angles)))))
    k = np.arange(1, len(norms))
    lipschitz = float(np.sum(k * norms[1:] * T ** (k - 1)))
    return min(coarse, sampled + np.pi * T / samples * lipschitz)


def moment_bound(pot: FourierPotential, R: float, T: float) -> float:
    """Σ_m e^{R|ξ_m|} sup_{|t|≤T} |a_m(t)|"""
    total = 0.0
    for mode in pot.modes:
        total += float(np.exp(R * np.linalg.norm(mode.xi))) * amplitude_sup(mode.amplitude, T)
    return total
