import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.config.settings import settings
from app.core.errors import (
    CancellationError, FocalPointError, OutOfRadiusError, UndefinedAtZeroError
)
from app.modules.classical.models import (
    ActionForm, ActionResult, ClassicalEvaluation, ELCoefficients, IdentityReport, TrajectoryBundle
)
from app.modules.classical.repository import TrajectoryRepository, trajectory_cache
from app.modules.operator_model.models import CoefficientModel
from app.modules.operator_model.service import eval_coefficients
from app.shared.numerics.finite_difference import FIRST_CENTRAL, gradient
from app.shared.numerics.linalg import op_norm
from app.shared.numerics.ode import rk4_linear
from app.shared.numerics.quadrature import gauss_legendre

logger = logging.getLogger(__name__)

BATCH_CHUNK = 64
PSI_SERIES_RADIUS = 1e-6
PSI_PROBE = 1e-4
CANCELLATION_TOL = 1e-13
THETA_EXTRAPOLATION_FACTORS = (2.0, 4.0, 8.0)
T_STEP_FACTOR = 1e-5


def _swap(m: np.ndarray) -> np.ndarray:
    return np.swapaxes(m, -1, -2)


def _vector(v, nu: int) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    if v.shape[-1] != nu:
        raise ValueError(f"Se esperaba un vector de dimensión {nu}")
    return v


# ===== ECUACIONES DE EULER–LAGRANGE =====

def euler_lagrange_coeffs(model: CoefficientModel, singular_limit: Optional[float] = None) -> ELCoefficients:
    A, B, C = model.A, model.B, model.C
    F = (A @ C).scale(4.0) - (A @ B.derivative()).scale(2.0)
    E = (A @ (B.transpose() - B)).scale(2.0) if A.is_constant() else None
    return ELCoefficients(
        model=model,
        F_poly=F,
        E_poly=E,
        singular_limit=singular_limit or settings.singular_condition_limit,
    )


# ===== PROBLEMA DE CONTORNO =====

def _assemble_bundle(t: complex, steps: int, Z: np.ndarray, dZ: np.ndarray,
                     focal_limit: float) -> TrajectoryBundle:
    nu = Z.shape[-1] // 2
    U, V = Z[:, :nu, :nu], Z[:, :nu, nu:]
    U_d, V_d = Z[:, nu:, :nu], Z[:, nu:, nu:]
    U_dd, V_dd = dZ[:, nu:, :nu], dZ[:, nu:, nu:]
    V1 = V[-1]
    try:
        V1_inv = np.linalg.inv(V1)
        conditioning = float(max(np.linalg.cond(V1), op_norm(V1_inv) * np.max(op_norm(V))))
    except np.linalg.LinAlgError:
        conditioning = float("inf")
    if not np.isfinite(conditioning) or conditioning > focal_limit:
        logger.warning(f"⚠️ Punto focal cerca de t = {t}: κ(V(1)) = {conditioning:.3e}")
        raise FocalPointError(
            f"t = {t} fuera de T̄: el problema de contorno no es únicamente soluble",
            conditioning=conditioning,
            t=str(t),
        )
    W = V1_inv @ U[-1]
    return TrajectoryBundle(
        t=t,
        steps=steps,
        flat=V @ V1_inv,
        flat_d=V_d @ V1_inv,
        flat_dd=V_dd @ V1_inv,
        sharp=U - V @ W,
        sharp_d=U_d - V_d @ W,
        sharp_dd=U_dd - V_dd @ W,
        conditioning=conditioning,
    )


def solve_bvp_many(coeffs: ELCoefficients, ts: Sequence[complex], steps: Optional[int] = None,
                   focal_limit: Optional[float] = None) -> List[TrajectoryBundle]:
    """
    Disparo por soluciones fundamentales U, V de q″ = tE(ts)q′ + t²F(ts)q.

    Todos los t se integran juntos con RK4 de paso fijo; q̃♭ = V V(1)⁻¹ y
    q̃♯ = U − V V(1)⁻¹ U(1).
    """
    steps = steps or settings.rk_steps
    if steps < 16:
        raise ValueError("steps debe ser ≥ 16")
    focal_limit = focal_limit or settings.focal_condition_limit
    ts = np.atleast_1d(np.asarray(ts, dtype=complex)).ravel()
    radius = coeffs.model.validity_radius
    if ts.size and np.max(np.abs(ts)) >= radius:
        raise OutOfRadiusError(
            f"|t| = {np.max(np.abs(ts)):.6g} fuera del radio de validez {radius:g}",
            validity_radius=radius,
        )
    nu = coeffs.nu
    s_half = np.linspace(0.0, 1.0, 2 * steps + 1)
    bundles: List[TrajectoryBundle] = []
    for start in range(0, ts.size, BATCH_CHUNK):
        chunk = ts[start:start + BATCH_CHUNK]
        E, F = coeffs.evaluate(chunk[:, None] * s_half[None, :])
        generator = np.zeros(E.shape[:2] + (2 * nu, 2 * nu), dtype=complex)
        generator[..., :nu, nu:] = np.eye(nu)
        generator[..., nu:, :nu] = (chunk ** 2)[:, None, None, None] * F
        generator[..., nu:, nu:] = chunk[:, None, None, None] * E
        Z = rk4_linear(generator, np.eye(2 * nu), steps)
        dZ = generator[:, ::2] @ Z
        for k, t in enumerate(chunk):
            bundles.append(_assemble_bundle(complex(t), steps, Z[k], dZ[k], focal_limit))
    return bundles


def solve_bvp(coeffs: ELCoefficients, t: complex, steps: Optional[int] = None) -> TrajectoryBundle:
    return solve_bvp_many(coeffs, [t], steps)[0]


def assemble_qnat(bundle: TrajectoryBundle, x, y, s, derivative: int = 0) -> np.ndarray:
    """q̃♮ₜ(s) = q̃♭ₜ(s)x + q̃♯ₜ(s)y (o su derivada en s)"""
    x = _vector(x, bundle.nu)
    y = _vector(y, bundle.nu)
    return bundle.q_flat(s, derivative) @ x + bundle.q_sharp(s, derivative) @ y


def unscaled_trajectory(bundle: TrajectoryBundle, x, y, sigma) -> Tuple[np.ndarray, np.ndarray]:
    """q♮ₜ(σ) = q̃♮ₜ(σ/t) y su derivada en σ, para σ sobre el segmento [0, t]"""
    t = bundle.t
    if t == 0:
        raise UndefinedAtZeroError("La trayectoria sin reescalar no está definida en t = 0")
    s = np.real_if_close(np.asarray(sigma, dtype=complex) / t)
    s = np.asarray(s, dtype=float)
    return assemble_qnat(bundle, x, y, s), assemble_qnat(bundle, x, y, s, derivative=1) / t


def momentum(model: CoefficientModel, bundle: TrajectoryBundle, q: np.ndarray, q_dot: np.ndarray,
             s) -> np.ndarray:
    """p = ½A⁻¹q̇ + Bq evaluado en el tiempo físico t·s"""
    A, B, _ = eval_coefficients(model, bundle.t * np.asarray(s, dtype=float))
    return 0.5 * np.linalg.solve(A, q_dot) + B @ q


def symplectic_defect(model: CoefficientModel, bundle: TrajectoryBundle) -> float:
    """sup_s |ᵀq♭ p♭ − ᵀp♭ q♭|; el invariante vale 0 en s = 0"""
    t = bundle.t
    s = bundle.nodes[1:]
    q = bundle.flat[1:]
    p = momentum(model, bundle, q, bundle.flat_d[1:] / t, s)
    W = _swap(q) @ p - _swap(p) @ q
    return float(np.max(op_norm(W)))


# ===== ACCIÓN =====

def action_form(model: CoefficientModel, bundle: TrajectoryBundle, nodes: Optional[int] = None) -> ActionForm:
    """H tal que Φ = zᵀHz, por Gauss–Legendre de L̃ a lo largo de q̃♮"""
    s, w = gauss_legendre(nodes or settings.action_quadrature_nodes)
    t = bundle.t
    Q = np.concatenate([bundle.q_flat(s), bundle.q_sharp(s)], axis=-1)
    Q_d = np.concatenate([bundle.q_flat(s, 1), bundle.q_sharp(s, 1)], axis=-1)
    A, B, C = eval_coefficients(model, t * s)
    kinetic = 0.25 * _swap(Q_d) @ np.linalg.inv(A) @ Q_d
    cross = t * _swap(Q_d) @ B @ Q
    potential = t ** 2 * _swap(Q) @ C @ Q
    H = np.einsum("j,jab->ab", w, kinetic + 0.5 * (cross + _swap(cross)) + potential)
    return ActionForm(t=t, hessian=0.5 * (H + H.T))


def _lagrange(nodes: np.ndarray, values: np.ndarray, t: complex) -> complex:
    total = 0j
    for k, node in enumerate(nodes):
        basis = 1.0 + 0j
        for j, other in enumerate(nodes):
            if j != k:
                basis *= (t - other) / (node - other)
        total += values[k] * basis
    return total


class ClassicalService:
    """Dinámica clásica de un modelo con memoización de trayectorias"""

    def __init__(self, model: CoefficientModel, steps: Optional[int] = None,
                 repository: Optional[TrajectoryRepository] = None):
        self.model = model
        self.steps = steps or settings.rk_steps
        self.repository = repository if repository is not None else trajectory_cache
        self.coeffs = euler_lagrange_coeffs(model)
        self.epsilon_theta = settings.theta_epsilon_factor * model.validity_radius
        self.action_nodes = settings.action_quadrature_nodes
        self.theta_nodes = settings.theta_quadrature_nodes
        self._a0_inv = np.linalg.inv(model.A.coefficients[0])
        self._delta = float(np.linalg.det(model.A.coefficients[0].real))

    # ===== TRAYECTORIAS =====

    def solve_bvp(self, t: complex) -> TrajectoryBundle:
        return self.solve_bvp_many([t])[0]

    def solve_bvp_many(self, ts: Sequence[complex]) -> List[TrajectoryBundle]:
        ts = np.atleast_1d(np.asarray(ts, dtype=complex)).ravel()
        keys = [self.repository.key(self.model.key, t, self.steps) for t in ts]
        found = self.repository.get_many(dict.fromkeys(keys))
        missing = {}
        for key, t in zip(keys, ts):
            if key not in found and key not in missing:
                missing[key] = t
        if missing:
            solved = solve_bvp_many(self.coeffs, list(missing.values()), self.steps)
            for key, bundle in zip(missing, solved):
                self.repository.put(key, bundle)
                found[key] = bundle
        return [found[key] for key in keys]

    def action_form(self, t: complex) -> ActionForm:
        return action_form(self.model, self.solve_bvp(t), self.action_nodes)

    def action_forms(self, ts: Sequence[complex]) -> List[ActionForm]:
        return [action_form(self.model, b, self.action_nodes) for b in self.solve_bvp_many(ts)]

    # ===== ACCIÓN Y PREFACTOR =====

    def action_phi(self, bundle: TrajectoryBundle, x, y) -> ActionResult:
        x = _vector(x, self.model.nu)
        y = _vector(y, self.model.nu)
        form = action_form(self.model, bundle, self.action_nodes)
        phi = complex(form.value(x, y))
        theta_integral = self.theta_integral(bundle.t)
        return ActionResult(
            phi=phi,
            psi=self.psi(bundle.t, x, y, form),
            phi0=phi - theta_integral,
            phi1=phi - complex(form.value(y, y)),
            theta_integral=theta_integral,
        )

    def psi(self, t: complex, x, y, form: Optional[ActionForm] = None) -> complex:
        """Ψ = (Φ − ¼A⁻¹(0)·(x−y)²)/t, extrapolado linealmente cerca de t = 0"""
        t = complex(t)
        diff = np.asarray(x, dtype=complex) - np.asarray(y, dtype=complex)
        free_part = 0.25 * diff @ self._a0_inv @ diff

        def direct(f: ActionForm) -> complex:
            return complex((f.value(x, y) - free_part) / f.t)

        if abs(t) >= PSI_SERIES_RADIUS:
            return direct(form if form is not None else self.action_form(t))
        u = t / abs(t) if t != 0 else 1.0
        near, far = self.action_forms([PSI_PROBE * u, 2 * PSI_PROBE * u])
        v1, v2 = direct(near), direct(far)
        return v1 + (t - near.t) * (v2 - v1) / (far.t - near.t)

    def _theta_direct(self, forms: List[ActionForm]) -> np.ndarray:
        values = np.empty(len(forms), dtype=complex)
        for k, form in enumerate(forms):
            A, B, _ = eval_coefficients(self.model, form.t)
            gamma = np.trace(A @ B)
            excess = np.sum(A * form.hess_xx) - self.model.nu / 2
            values[k] = -excess / form.t + gamma
        return values

    def theta_many(self, ts: Sequence[complex]) -> np.ndarray:
        """θ(t) directo para |t| ≥ ε_θ; extrapolación cuadrática desde {2ε, 4ε, 8ε} si no"""
        ts = np.atleast_1d(np.asarray(ts, dtype=complex)).ravel()
        eps = self.epsilon_theta
        factors = np.array(THETA_EXTRAPOLATION_FACTORS)
        points: List[complex] = []
        plan = []
        for t in ts:
            if abs(t) >= eps:
                plan.append((len(points), None))
                points.append(t)
            else:
                u = t / abs(t) if t != 0 else 1.0
                nodes = factors * eps * u
                plan.append((len(points), nodes))
                points.extend(nodes)
        direct = self._theta_direct(self.action_forms(points))
        out = np.empty(ts.size, dtype=complex)
        for k, (t, (index, nodes)) in enumerate(zip(ts, plan)):
            if nodes is None:
                out[k] = direct[index]
            else:
                out[k] = _lagrange(nodes, direct[index:index + len(nodes)], t)
        return out

    def gamma_theta(self, t: complex, extrapolate: bool = True) -> Tuple[complex, complex]:
        t = complex(t)
        A, B, _ = eval_coefficients(self.model, t)
        gamma = complex(np.trace(A @ B))
        if abs(t) >= self.epsilon_theta or extrapolate:
            return gamma, complex(self.theta_many([t])[0])
        if t == 0:
            raise CancellationError("θ(0) requiere extrapolación", epsilon_theta=self.epsilon_theta)
        form = self.action_form(t)
        excess = complex(np.sum(A * form.hess_xx) - self.model.nu / 2)
        if abs(excess) < CANCELLATION_TOL:
            raise CancellationError(
                f"Cancelación en θ: |A·∂ₓ²Φ − ν/2| = {abs(excess):.2e} con |t| < ε_θ",
                t=str(t),
                epsilon_theta=self.epsilon_theta,
            )
        return gamma, -excess / t + gamma

    def theta_integral(self, t: complex) -> complex:
        """t²∫₀¹θ(ts)ds por Gauss–Legendre en la variable reescalada"""
        t = complex(t)
        if t == 0:
            return 0j
        s, w = gauss_legendre(self.theta_nodes)
        return complex(t ** 2 * np.sum(w * self.theta_many(t * s)))

    def prefactor(self, t: complex) -> complex:
        t = complex(t)
        if t == 0:
            raise UndefinedAtZeroError("p⁰ no está definido en t = 0")
        return complex(np.power(4 * np.pi * self._delta * t, -self.model.nu / 2))

    def p0_eval(self, bundle: TrajectoryBundle, action: ActionResult, t: complex, x, y) -> complex:
        """(4πΔt)^{−ν/2} e^{−Φ₀/t} con raíz principal"""
        t = complex(t)
        prefactor = self.prefactor(t)
        return complex(prefactor * np.exp(-action.phi0 / t))

    def p0(self, t: complex, x, y) -> complex:
        bundle = self.solve_bvp(t)
        return self.p0_eval(bundle, self.action_phi(bundle, x, y), t, x, y)

    def p0_field(self, t: complex, x, y) -> np.ndarray:
        """p⁰ vectorizado sobre lotes de x (…, ν) con una sola resolución"""
        prefactor = self.prefactor(t)
        form = self.action_form(t)
        phi0 = form.value(x, y) - self.theta_integral(t)
        return prefactor * np.exp(-phi0 / complex(t))

    # ===== IDENTIDADES CLÁSICAS =====

    def eikonal_residual(self, t: complex, x, y) -> float:
        """|∂ₜS + H(x, ∂ₓS)| con S = Φ/t, derivada temporal de cuarto orden"""
        t = complex(t)
        x = _vector(x, self.model.nu)
        y = _vector(y, self.model.nu)
        h = T_STEP_FACTOR * t
        stencil_ts = [t + offset * h for offset, _ in FIRST_CENTRAL]
        forms = self.action_forms(stencil_ts + [t])
        dS = sum(c * f.value(x, y) / f.t for (_, c), f in zip(FIRST_CENTRAL, forms)) / h
        p = forms[-1].grad_x(x, y) / t
        A, B, C = eval_coefficients(self.model, t)
        v = p - B @ x
        hamiltonian = v @ A @ v - x @ C @ x
        return float(abs(dS + hamiltonian))

    def classical_identity_residuals(self, t: complex, x, y, samples: int = 9) -> IdentityReport:
        t = complex(t)
        if t == 0:
            raise UndefinedAtZeroError("Las identidades clásicas requieren t ≠ 0")
        x = _vector(x, self.model.nu)
        y = _vector(y, self.model.nu)
        bundle = self.solve_bvp(t)
        A, B, _ = eval_coefficients(self.model, t)
        q_dot_end = (bundle.flat_d[-1] @ x + bundle.sharp_d[-1] @ y) / t

        # (i) ∂ₓ log p⁰ + B(t)x + ½A⁻¹(t) q̇♮ₜ(t) = 0
        hx = 1e-4 * (1.0 + float(np.linalg.norm(x)))
        field = lambda xs: self.p0_field(t, xs, y)  # noqa: E731
        grad = gradient(field, x, hx)
        gradient_identity = float(np.linalg.norm(
            grad / field(x) + B @ x + 0.5 * np.linalg.solve(A, q_dot_end)
        ))

        # (ii) transporte (∂ₜ + q̇♮ₜ(t)·∂ₓ) q♮ₜ(σ) = 0 con σ fijo
        s = np.linspace(0.1, 0.9, samples)
        sigma = t * s
        h = T_STEP_FACTOR * t
        neighbours = self.solve_bvp_many([t + offset * h for offset, _ in FIRST_CENTRAL])
        dq = sum(
            c * unscaled_trajectory(b, x, y, sigma)[0]
            for (_, c), b in zip(FIRST_CENTRAL, neighbours)
        ) / h
        transport = dq + bundle.q_flat(s) @ q_dot_end
        transport_identity = float(np.max(np.linalg.norm(transport, axis=-1)))

        report = IdentityReport(
            gradient_identity=gradient_identity,
            transport_identity=transport_identity,
            symplectic_invariant=symplectic_defect(self.model, bundle),
        )
        logger.info(f"🔄 Identidades clásicas en t={t}: peor residuo {report.worst():.3e}")
        return report

    def evaluate(self, t: complex, x, y) -> ClassicalEvaluation:
        """Trayectorias, acción, p⁰ y residuos de identidades en un punto"""
        t = complex(t)
        x = _vector(x, self.model.nu)
        y = _vector(y, self.model.nu)
        bundle = self.solve_bvp(t)
        action = self.action_phi(bundle, x, y)
        return ClassicalEvaluation(
            t=t,
            x=x,
            y=y,
            bundle=bundle,
            action=action,
            p0=self.p0_eval(bundle, action, t, x, y),
            eikonal_residual=self.eikonal_residual(t, x, y),
            identities=self.classical_identity_residuals(t, x, y),
        )

    def trajectory_rows(self, bundle: TrajectoryBundle, samples: int = 11) -> List[Tuple]:
        """Filas (Re t, Im t, s, Re/Im q̃♭_jk …, Re/Im q̃♯_jk …) para el volcado CSV"""
        s = np.linspace(0.0, 1.0, samples)
        flat, sharp = bundle.q_flat(s), bundle.q_sharp(s)
        rows = []
        for k in range(samples):
            row = [bundle.t.real, bundle.t.imag, float(s[k])]
            for z in np.concatenate([flat[k].ravel(), sharp[k].ravel()]):
                row.extend([float(z.real), float(z.imag)])
            rows.append(tuple(row))
        return rows

    def trajectory_header(self) -> List[str]:
        header = ["t_re", "t_im", "s"]
        for label in ("flat", "sharp"):
            for j in range(self.model.nu):
                for k in range(self.model.nu):
                    header.extend([f"re_{label}_{j}{k}", f"im_{label}_{j}{k}"])
        return header
