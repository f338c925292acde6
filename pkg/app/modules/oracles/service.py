import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.integrate import quad, solve_ivp
from scipy.sparse.linalg import splu

from app.config.settings import settings
from app.core.errors import (
    DivergenceError, FocalPointError, OracleToleranceError, OutOfRadiusError,
    ProblemDefinitionError, UndefinedAtZeroError
)
from app.modules.operator_model.models import CoefficientModel, FourierPotential
from app.modules.operator_model.service import check_real_axis, eval_coefficients, eval_potential
from app.modules.oracles.models import Grid1D
from app.shared.numerics.linalg import matrix_function

logger = logging.getLogger(__name__)

SMALL_ARGUMENT = 1e-8
ODE_RTOL = 1e-12
ODE_ATOL = 1e-14
QUAD_TOL = 1e-11
QUAD_LIMIT = 200
QUAD_SLACK = 10.0
DIVERGENCE_GROWTH = math.exp(10.0)


# ===== FUNCIONES AUXILIARES =====

def _sinhc(z) -> np.ndarray:
    """sinh(z)/z, igual a 1 en z = 0"""
    z = np.asarray(z, dtype=complex)
    safe = np.where(np.abs(z) < SMALL_ARGUMENT, 1.0, z)
    return np.where(np.abs(z) < SMALL_ARGUMENT, 1.0 + z * z / 6.0, np.sinh(safe) / safe)


def _sinc(z) -> np.ndarray:
    """sin(z)/z, igual a 1 en z = 0"""
    z = np.asarray(z, dtype=complex)
    safe = np.where(np.abs(z) < SMALL_ARGUMENT, 1.0, z)
    return np.where(np.abs(z) < SMALL_ARGUMENT, 1.0 - z * z / 6.0, np.sin(safe) / safe)


def _expc(z) -> np.ndarray:
    """(e^z − 1)/z, igual a 1 en z = 0"""
    z = np.asarray(z, dtype=complex)
    safe = np.where(np.abs(z) < SMALL_ARGUMENT, 1.0, z)
    return np.where(np.abs(z) < SMALL_ARGUMENT, 1.0 + z / 2.0, np.expm1(safe) / safe)


def _times_identity(values, nu: int) -> np.ndarray:
    return np.asarray(values, dtype=complex)[..., None, None] * np.eye(nu)


# ===== NÚCLEOS EN FORMA CERRADA =====

def free_kernel(t: complex, x, y, a0=None):
    """(4πt)^{−ν/2} det(A₀)^{−1/2} exp(−(x−y)·A₀⁻¹(x−y)/4t) con raíz principal"""
    t = complex(t)
    if t == 0:
        raise UndefinedAtZeroError("El núcleo libre no está definido en t = 0")
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    nu = x.shape[-1]
    a0 = np.eye(nu) if a0 is None else np.asarray(a0, dtype=float)
    diff = x - y
    exponent = np.einsum("...i,ij,...j->...", diff, np.linalg.inv(a0), diff) / (4.0 * t)
    prefactor = np.power(4.0 * np.pi * t, -nu / 2.0) / np.sqrt(np.linalg.det(a0))
    return prefactor * np.exp(-exponent)


def mehler_kernel(omega: float, t: float, x, y):
    """
    Núcleo de Mehler de ∂ₜu = ∂ₓ²u − ω²x²u.

    Se evalúa en la forma equivalente
    √(2ωt/sinh 2ωt / 4πt)·exp(−(x−y)²(2ωt/sinh 2ωt)/4t − (x²+y²)ω tanh(ωt)/2),
    que admite ω = 0 (núcleo libre).
    """
    if t <= 0:
        raise OutOfRadiusError(f"El núcleo de Mehler requiere t > 0, recibido t = {t}", t=t)
    if omega < 0:
        raise ValueError("ω debe ser ≥ 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ratio = 1.0 / _sinhc(2.0 * omega * t).real
    exponent = (x - y) ** 2 * ratio / (4.0 * t) + (x ** 2 + y ** 2) * omega * np.tanh(omega * t) / 2.0
    return np.sqrt(ratio / (4.0 * np.pi * t)) * np.exp(-exponent)


def harmonic_trajectories(lam: float, t: complex, s, nu: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """q̃♭ = sinh(2ωts)/sinh(2ωt), q̃♯ = sinh(2ωt(1−s))/sinh(2ωt) con ω = √λ"""
    z = 2.0 * np.sqrt(complex(lam)) * complex(t)
    s = np.asarray(s, dtype=float)
    flat = s * _sinhc(z * s) / _sinhc(z)
    sharp = (1.0 - s) * _sinhc(z * (1.0 - s)) / _sinhc(z)
    return _times_identity(flat, nu), _times_identity(sharp, nu)


def harmonic_kernel(lam: float, t: complex, s, s_prime, nu: int = 1) -> np.ndarray:
    """K̃ₜ(s, s′) = sinh(2ωt s∧s′) sinh(2ωt(1−s∨s′))/(2ωt sinh 2ωt)·𝟙"""
    z = 2.0 * np.sqrt(complex(lam)) * complex(t)
    s, s_prime = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(s_prime, dtype=float))
    low, high = np.minimum(s, s_prime), np.maximum(s, s_prime)
    value = low * (1.0 - high) * _sinhc(z * low) * _sinhc(z * (1.0 - high)) / _sinhc(z)
    return _times_identity(value, nu)


def harmonic_action(lam: float, t: complex, x, y) -> complex:
    """Φ = t·[ω|x−y|²/(2 sinh 2ωt) + (|x|²+|y|²) ω tanh(ωt)/2]"""
    t = complex(t)
    omega = np.sqrt(complex(lam))
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    diff = x - y
    ratio = 1.0 / _sinhc(2.0 * omega * t)
    tanh_term = np.tanh(omega * t) / omega if abs(omega) > SMALL_ARGUMENT else t
    return complex(diff @ diff * ratio / 4.0 + t * (x @ x + y @ y) * omega * omega * tanh_term / 2.0)


def harmonic_theta_integral(lam: float, t: complex, nu: int = 1) -> complex:
    """t²∫₀¹θ(ts)ds = (νt/2)·log(2ωt/sinh 2ωt)"""
    t = complex(t)
    z = 2.0 * np.sqrt(complex(lam)) * t
    return complex(-0.5 * nu * t * np.log(_sinhc(z)))


def magnetic_trajectories(beta, t: complex, s) -> Tuple[np.ndarray, np.ndarray]:
    """q̃♭ = (e^{2iβts} − 𝟙)(e^{2iβt} − 𝟙)⁻¹, q̃♯ = (e^{2iβt} − e^{2iβts})(e^{2iβt} − 𝟙)⁻¹"""
    t = complex(t)
    shape = np.shape(s) + np.shape(beta)
    s = np.asarray(s, dtype=float)[..., None]

    def flat(w):
        z = 2j * w * t
        return s * _expc(z * s) / _expc(z)

    def sharp(w):
        z = 2j * w * t
        return np.exp(z * s) * (1.0 - s) * _expc(z * (1.0 - s)) / _expc(z)

    return matrix_function(beta, flat).reshape(shape), matrix_function(beta, sharp).reshape(shape)


def magnetic_kernel(beta, t: complex, s, s_prime) -> np.ndarray:
    """K̃ₜ(s, s′) = e^{iβt(s−s′)} sin(βt s∧s′) sin(βt(1−s∨s′))/(βt sin βt)"""
    t = complex(t)
    s, s_prime = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(s_prime, dtype=float))
    low = np.minimum(s, s_prime)[..., None]
    high = np.maximum(s, s_prime)[..., None]
    shift = (s - s_prime)[..., None]

    def kernel(w):
        z = w * t
        return (np.exp(1j * z * shift) * low * (1.0 - high)
                * _sinc(z * low) * _sinc(z * (1.0 - high)) / _sinc(z))

    return matrix_function(beta, kernel).reshape(s.shape + np.shape(beta))


def has_closed_form(model: CoefficientModel) -> bool:
    return model.builtin_name in ("free", "harmonic", "magnetic")


def closed_form_trajectories(model: CoefficientModel, t: complex, s) -> Tuple[np.ndarray, np.ndarray]:
    """q̃♭, q̃♯ en forma cerrada para los modelos del registro"""
    name, params = model.builtin or (None, {})
    if name == "free":
        return harmonic_trajectories(0.0, t, s, model.nu)
    if name == "harmonic":
        return harmonic_trajectories(params["lam"], t, s, model.nu)
    if name == "magnetic":
        return magnetic_trajectories(np.asarray(params["beta"]), t, s)
    raise ValueError(f"El modelo '{model.name}' no tiene forma cerrada")


def closed_form_kernel(model: CoefficientModel, t: complex, s, s_prime) -> np.ndarray:
    name, params = model.builtin or (None, {})
    if name == "free":
        return harmonic_kernel(0.0, t, s, s_prime, model.nu)
    if name == "harmonic":
        return harmonic_kernel(params["lam"], t, s, s_prime, model.nu)
    if name == "magnetic":
        return magnetic_kernel(np.asarray(params["beta"]), t, s, s_prime)
    raise ValueError(f"El modelo '{model.name}' no tiene forma cerrada")


# ===== FUNCIÓN DE GREEN =====

class GreenKernelOracle:
    """
    K̃ₜ por variación de parámetros.

    Integra con DOP853 (salida densa) las soluciones homogéneas U (U(0) = 0,
    U̇(0) = 𝟙) y W (W(0) = 𝟙, Ẇ(0) = 0) de q̈ = tE(ts)q̇ + t²F(ts)q; de ahí
    φ = q̃♭, ψ = q̃♯ y, para cada s′, las matrices P, Q con
    φP = ψQ y φ′P − ψ′Q = A(ts′) en s = s′.
    """

    def __init__(self, model: CoefficientModel, t: complex, rtol: float = ODE_RTOL, atol: float = ODE_ATOL):
        self.model = model
        self.t = complex(t)
        if self.t == 0:
            raise UndefinedAtZeroError("La función de Green requiere t ≠ 0")
        if abs(self.t) >= model.validity_radius:
            raise OutOfRadiusError(f"|t| = {abs(self.t):.3g} fuera del radio de validez", t=str(self.t))
        self._dA = model.A.derivative()
        self._dB = model.B.derivative()
        nu = model.nu
        zero, eye = np.zeros((nu, nu)), np.eye(nu)
        y0 = np.stack([zero, eye, eye, zero]).astype(complex).ravel()
        solution = solve_ivp(self._rhs, (0.0, 1.0), y0, method="DOP853",
                             rtol=rtol, atol=atol, dense_output=True)
        if not solution.success:
            raise OracleToleranceError(f"solve_ivp falló: {solution.message}")
        self._solution = solution
        end = self._states(1.0)
        conditioning = float(np.linalg.cond(end[0]))
        if not np.isfinite(conditioning) or conditioning > settings.focal_condition_limit:
            raise FocalPointError(
                f"U(1) mal condicionada en t = {self.t}", conditioning=conditioning, t=str(self.t)
            )
        self._u1_inv = np.linalg.inv(end[0])
        self._w1 = end[2]

    def _coefficients(self, tau: complex) -> Tuple[np.ndarray, np.ndarray]:
        A = self.model.A(tau)
        B = self.model.B(tau)
        C = self.model.C(tau)
        E = self._dA(tau) @ np.linalg.inv(A) + 2.0 * A @ (B.T - B)
        F = 4.0 * A @ C - 2.0 * A @ self._dB(tau)
        return E, F

    def _rhs(self, s: float, y: np.ndarray) -> np.ndarray:
        nu = self.model.nu
        u, u_dot, w, w_dot = y.reshape(4, nu, nu)
        E, F = self._coefficients(self.t * s)
        t = self.t
        return np.stack([
            u_dot, t * E @ u_dot + t * t * F @ u,
            w_dot, t * E @ w_dot + t * t * F @ w,
        ]).ravel()

    def _states(self, s) -> np.ndarray:
        nu = self.model.nu
        s = np.asarray(s, dtype=float)
        values = self._solution.sol(s.ravel())
        return np.moveaxis(values, 0, -1).reshape(s.shape + (4, nu, nu))

    def trajectories(self, s) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(φ, φ′, ψ, ψ′) en s con forma s.shape + (ν, ν)"""
        states = self._states(s)
        u, u_dot, w, w_dot = (states[..., k, :, :] for k in range(4))
        flat = u @ self._u1_inv
        flat_d = u_dot @ self._u1_inv
        sharp = w - flat @ self._w1
        sharp_d = w_dot - flat_d @ self._w1
        return flat, flat_d, sharp, sharp_d

    def kernel(self, s, s_prime) -> np.ndarray:
        nu = self.model.nu
        s, s_prime = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(s_prime, dtype=float))
        phi_p, dphi_p, psi_p, dpsi_p = self.trajectories(s_prime)
        system = np.concatenate([
            np.concatenate([phi_p, -psi_p], axis=-1),
            np.concatenate([dphi_p, -dpsi_p], axis=-1),
        ], axis=-2)
        A = self.model.A(self.t * s_prime)
        rhs = np.concatenate([np.zeros_like(A), A], axis=-2)
        solved = np.linalg.solve(system, rhs)
        P, Q = solved[..., :nu, :], solved[..., nu:, :]
        phi_s, _, psi_s, _ = self.trajectories(s)
        return np.where((s <= s_prime)[..., None, None], phi_s @ P, psi_s @ Q)


# ===== CUADRATURA ADAPTATIVA DE BAJO ORDEN =====

def _adaptive(f, a: float, b: float, tol: float) -> Tuple[float, float]:
    value, error = quad(f, a, b, epsabs=tol, epsrel=0.0, limit=QUAD_LIMIT)
    return value, error


def brute_force_vn(pot: FourierPotential, model: CoefficientModel, n: int, t: complex, x, y,
                   tol: float = QUAD_TOL, oracle: Optional[GreenKernelOracle] = None) -> np.ndarray:
    """
    vₙ (n ∈ {1, 2}) por Gauss–Kronrod adaptativo anidado, con K̃ y q̃♮
    evaluados directamente desde la función de Green en cada punto.
    """
    if n not in (1, 2):
        raise ValueError("brute_force_vn solo admite n ∈ {1, 2}")
    t = complex(t)
    d = pot.d
    if pot.is_zero:
        return np.zeros((d, d), dtype=complex)
    green = oracle or GreenKernelOracle(model, t)
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    modes = pot.modes

    def point(s: float):
        flat, _, sharp, _ = green.trajectories(s)
        return flat @ x + sharp @ y

    def first_order(s: float) -> np.ndarray:
        q = point(s)
        K = green.kernel(s, s)
        total = np.zeros((d, d), dtype=complex)
        for mode in modes:
            weight = np.exp(1j * q @ mode.xi - t * mode.xi @ K @ mode.xi)
            total += weight * mode.amplitude(s * t)
        return total

    def second_order(s1: float, s2: float) -> np.ndarray:
        q1, q2 = point(s1), point(s2)
        K11, K12, K22 = green.kernel(s1, s1), green.kernel(s1, s2), green.kernel(s2, s2)
        total = np.zeros((d, d), dtype=complex)
        for m1 in modes:
            a1 = m1.amplitude(s1 * t)
            for m2 in modes:
                exponent = (m1.xi @ K11 @ m1.xi + m2.xi @ K22 @ m2.xi + 2.0 * m1.xi @ K12 @ m2.xi)
                weight = np.exp(1j * (q1 @ m1.xi + q2 @ m2.xi) - t * exponent)
                total += weight * m2.amplitude(s2 * t) @ a1
        return total

    result = np.zeros((d, d), dtype=complex)
    worst = 0.0
    for a in range(d):
        for b in range(d):
            for part, unit in ((np.real, 1.0), (np.imag, 1j)):
                if n == 1:
                    value, error = _adaptive(lambda s: part(first_order(s)[a, b]), 0.0, 1.0, tol)
                else:
                    inner_errors = [0.0]

                    def inner(s2: float) -> float:
                        v, e = _adaptive(lambda s1: part(second_order(s1, s2)[a, b]), 0.0, s2, tol)
                        inner_errors.append(e)
                        return v

                    value, error = _adaptive(inner, 0.0, 1.0, tol)
                    error += max(inner_errors)
                worst = max(worst, error)
                result[a, b] += unit * value
    if worst > QUAD_SLACK * tol:
        raise OracleToleranceError(
            f"La cuadratura adaptativa no alcanzó {tol:.1e} (estimación {worst:.2e})", estimate=worst
        )
    return t ** n * result


# ===== CRANK–NICOLSON =====

def _generator(model: CoefficientModel, pot: FourierPotential, grid: Grid1D, tau: float) -> sparse.csr_matrix:
    """A(u″ + 2Bxu′ + Bu + B²x²u) − Cx²u + c u con diferencias centradas"""
    x, dx, n = grid.x, grid.dx, grid.Nx
    A, B, C = eval_coefficients(model, tau)
    a, b, c = A[0, 0], B[0, 0], C[0, 0]
    lap = sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n)) / dx ** 2
    grad = sparse.diags([-1.0, 1.0], [-1, 1], shape=(n, n)) / (2.0 * dx)
    X = sparse.diags(x)
    potential = eval_potential(pot, tau, x[:, None])[:, 0, 0]
    diagonal = a * b + a * b * b * x ** 2 - c * x ** 2 + potential
    return (a * lap + 2.0 * a * b * (X @ grad) + sparse.diags(diagonal)).astype(complex).tocsr()


def cn_evolve(model: CoefficientModel, pot: FourierPotential, grid: Grid1D, u0, t0: float, t1: float) -> np.ndarray:
    """
    Esquema θ = ½ para ∂ₜu = A(t)(∂ₓ + B(t)x)²u − C(t)x²u + c(t, x)u, Dirichlet en ±L.

    Los coeficientes se evalúan en el punto medio de cada paso; si el
    problema es autónomo la factorización LU se calcula una sola vez.
    """
    if model.nu != 1 or pot.nu != 1 or pot.d != 1:
        raise ProblemDefinitionError("cn_evolve solo admite ν = 1 y d = 1")
    reality = check_real_axis(model)
    if not reality.real:
        raise ProblemDefinitionError(
            "cn_evolve requiere coeficientes reales para t real", offending=list(reality.offending)
        )
    t0, t1 = float(t0), float(t1)
    if not 0.0 <= t0 < t1:
        raise ValueError(f"Se requiere 0 ≤ t0 < t1, recibido ({t0}, {t1})")
    u = np.array(u0, dtype=complex)
    if u.shape != (grid.Nx,):
        raise ValueError(f"u0 debe tener {grid.Nx} componentes")
    steps = max(1, int(math.ceil((t1 - t0) / grid.dt - 1e-9)))
    dt = (t1 - t0) / steps
    autonomous = model.is_autonomous() and all(m.amplitude.is_constant() for m in pot.modes)
    identity = sparse.identity(grid.Nx, dtype=complex, format="csr")
    initial_norm = float(np.linalg.norm(u)) or 1.0

    solver, explicit = None, None
    for k in range(steps):
        if solver is None or not autonomous:
            L = _generator(model, pot, grid, t0 + (k + 0.5) * dt)
            solver = splu((identity - 0.5 * dt * L).tocsc())
            explicit = identity + 0.5 * dt * L
        u = solver.solve(explicit @ u)
        growth = float(np.linalg.norm(u)) / initial_norm
        if not np.isfinite(growth) or growth > DIVERGENCE_GROWTH:
            raise DivergenceError(
                f"Crank–Nicolson divergió en el paso {k + 1}/{steps}", growth=growth, step=k + 1
            )
    logger.info(f"✅ Crank–Nicolson: {steps} pasos de {dt:.2e} en [{t0}, {t1}], Nx={grid.Nx}, L={grid.L}")
    return u


def snapshot_rows(x, *columns) -> List[Tuple[float, ...]]:
    """Filas (x, Re u, Im u, …) para el volcado CSV de uno o varios perfiles"""
    profiles = [np.asarray(c, dtype=complex) for c in columns]
    rows = []
    for k, xk in enumerate(np.asarray(x, dtype=float)):
        row = [float(xk)]
        for profile in profiles:
            row.extend([float(profile[k].real), float(profile[k].imag)])
        rows.append(tuple(row))
    return rows
