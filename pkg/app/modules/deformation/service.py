import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.config.settings import settings
from app.core.errors import BoundaryMassError
from app.modules.classical.models import TrajectoryBundle
from app.modules.classical.service import ClassicalService
from app.modules.deformation.models import (
    DeformationKernel, Mass, PositivityReport, PropagatorReport
)
from app.modules.deformation.repository import KernelRepository, kernel_cache
from app.modules.operator_model.models import CoefficientModel
from app.modules.operator_model.service import eval_coefficients
from app.shared.numerics.finite_difference import (
    FIRST_CENTRAL, FIRST_FORWARD, SECOND_CENTRAL, backward
)
from app.shared.numerics.interpolation import ChebyshevTable2D, lobatto_nodes
from app.shared.numerics.linalg import op_norm
from app.shared.numerics.quadrature import log_gauss_legendre

logger = logging.getLogger(__name__)

DIRECT_CHUNK = 16
FD_STEP = 1e-3


def _integrand_sum(model: CoefficientModel, t: complex, s: np.ndarray, s_prime: float,
                   taus: np.ndarray, weights: np.ndarray,
                   bundles: Sequence[TrajectoryBundle]) -> np.ndarray:
    """Σ_k w_k q̃♭_{tτ_k}(s/τ_k) A(tτ_k) ᵀq̃♭_{tτ_k}(s′/τ_k) para un vector de s ≤ s′"""
    nu = model.nu
    out = np.zeros(s.shape + (nu, nu), dtype=complex)
    if taus.size == 0:
        return out
    A = model.A(t * taus)
    for k, (tau, w, bundle) in enumerate(zip(taus, weights, bundles)):
        left = bundle.q_flat(s / tau)
        right = bundle.q_flat(s_prime / tau)
        out += w * left @ A[k] @ right.T
    return out


def build_kernel(model: CoefficientModel, t: complex, quadrature_order: Optional[int] = None,
                 grid_nodes: Optional[int] = None, classical: Optional[ClassicalService] = None,
                 workers: Optional[int] = None) -> DeformationKernel:
    """
    K̃ₜ(s, s′) = ∫_{s∨s′}^1 q̃♭_{tτ}(s/τ) A(tτ) ᵀq̃♭_{tτ}(s′/τ) dτ sobre la malla triangular.

    La cuadratura en τ es Gauss–Legendre en log τ; primero se resuelven (y
    memoizan) todos los problemas de contorno en t·τ y luego las columnas de
    la tabla se calculan en paralelo.
    """
    t = complex(t)
    classical = classical or ClassicalService(model)
    order = quadrature_order or settings.kernel_quadrature_order
    n = grid_nodes or settings.kernel_grid_nodes
    nodes = lobatto_nodes(n)

    rules = [log_gauss_legendre(v, order) if v > 0 else (np.ones(0), np.zeros(0)) for v in nodes]
    all_taus = np.concatenate([taus for taus, _ in rules])
    bundles = classical.solve_bvp_many(t * all_taus)
    offsets = np.cumsum([0] + [len(taus) for taus, _ in rules])

    def column(j: int) -> np.ndarray:
        taus, weights = rules[j]
        v = nodes[j]
        return _integrand_sum(model, t, nodes * v, v, taus, weights,
                              bundles[offsets[j]:offsets[j + 1]])

    with ThreadPoolExecutor(max_workers=workers or settings.workers) as pool:
        columns = list(pool.map(column, range(n)))
    values = np.stack(columns, axis=1)
    kernel = DeformationKernel(
        t=t,
        nu=model.nu,
        quadrature_order=order,
        u_nodes=nodes,
        v_nodes=nodes,
        nodal_values=values,
        table=ChebyshevTable2D.fit(nodes, nodes, values),
        tau_nodes=all_taus,
        model_key=model.key,
    )
    logger.info(f"✅ Matriz de deformación construida: t={t}, M={order}, malla {n}×{n}, {all_taus.size} PCs")
    return kernel


def direct_values(model: CoefficientModel, t: complex, s, s_prime,
                  quadrature_order: Optional[int] = None,
                  classical: Optional[ClassicalService] = None) -> np.ndarray:
    """K̃ₜ(s, s′) por cuadratura directa en τ, sin interpolación"""
    t = complex(t)
    classical = classical or ClassicalService(model)
    order = quadrature_order or settings.kernel_quadrature_order
    s, s_prime = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(s_prime, dtype=float))
    flat_s, flat_sp = s.ravel(), s_prime.ravel()
    out = np.zeros((flat_s.size, model.nu, model.nu), dtype=complex)
    for start in range(0, flat_s.size, DIRECT_CHUNK):
        idx = range(start, min(start + DIRECT_CHUNK, flat_s.size))
        rules = []
        for i in idx:
            upper = max(flat_s[i], flat_sp[i])
            rules.append(log_gauss_legendre(upper, order) if upper > 0 else (np.ones(0), np.zeros(0)))
        taus = np.concatenate([r[0] for r in rules])
        bundles = classical.solve_bvp_many(t * taus) if taus.size else []
        offset = 0
        for i, (r_taus, r_weights) in zip(idx, rules):
            chunk = bundles[offset:offset + r_taus.size]
            offset += r_taus.size
            a, b = flat_s[i], flat_sp[i]
            if a <= b:
                out[i] = _integrand_sum(model, t, np.array(a), b, r_taus, r_weights, chunk)
            else:
                out[i] = _integrand_sum(model, t, np.array(b), a, r_taus, r_weights, chunk).T
    return out.reshape(s.shape + (model.nu, model.nu))


def unscaled_kernel(kernel: DeformationKernel, s, s_prime) -> np.ndarray:
    """K_t(s, s′) = t·K̃ₜ(s/t, s′/t) para t real positivo y s, s′ ∈ [0, t]"""
    t = kernel.t
    if t.imag != 0 or t.real <= 0:
        raise ValueError("unscaled_kernel requiere t real positivo")
    return t.real * kernel(np.asarray(s) / t.real, np.asarray(s_prime) / t.real)


# ===== FORMA CUADRÁTICA =====

def _as_masses(masses: Iterable) -> List[Mass]:
    out = []
    for item in masses:
        if isinstance(item, Mass):
            out.append(item)
        else:
            s, xi = item
            out.append(Mass(float(s), np.atleast_1d(np.asarray(xi, dtype=float))))
    return out


def _validate_masses(masses: List[Mass]) -> None:
    for mass in masses:
        if not 0.0 < mass.s < 1.0:
            raise BoundaryMassError(
                f"Las masas deben estar en (0, 1); recibido s = {mass.s}", s=mass.s
            )


def quadratic_form(kernel: DeformationKernel, masses: Iterable) -> complex:
    """Σ_{j,k} ξ_j·K̃ₜ(s_j, s_k)ξ_k leído de la malla de interpolación"""
    masses = _as_masses(masses)
    _validate_masses(masses)
    if not masses:
        return 0j
    s = np.array([m.s for m in masses])
    xi = np.stack([m.xi for m in masses])
    K = kernel(s[:, None], s[None, :])
    return complex(np.einsum("ja,jkab,kb->", xi, K, xi))


def reference_form(model: CoefficientModel, masses: Iterable) -> float:
    """(μ, μ)₀ = Σ s_{j∧k}(1 − s_{j∨k}) ξ_j·A(0)ξ_k"""
    masses = _as_masses(masses)
    _validate_masses(masses)
    a0 = model.A.coefficients[0].real
    total = 0.0
    for mj in masses:
        for mk in masses:
            total += min(mj.s, mk.s) * (1.0 - max(mj.s, mk.s)) * float(mj.xi @ a0 @ mk.xi)
    return total


# ===== ECUACIÓN DEL PROPAGADOR =====

def propagator_residual(kernel: DeformationKernel, model: CoefficientModel, s_prime: float,
                        probe_grid: Optional[Sequence[float]] = None, h: float = FD_STEP,
                        classical: Optional[ClassicalService] = None) -> PropagatorReport:
    """
    Comprueba A⁻¹(ts)(−∂ₛ² + tE(ts)∂ₛ + t²F(ts)) K̃ₜ(·, s′) = δ_{s=s′}.

    (i) residuo homogéneo fuera de la diagonal con plantillas de 5 puntos,
    (ii) valores de Dirichlet en s ∈ {0, 1}, (iii) salto de ∂ₛK̃ en s′ frente a −A(ts′).
    """
    t = kernel.t
    classical = classical or ClassicalService(model)
    if probe_grid is None:
        probe_grid = np.linspace(0.05, 0.95, 19)
    sample_s = np.array([
        s for s in probe_grid
        if abs(s - s_prime) >= 5 * h and 2 * h <= s <= 1 - 2 * h
    ])
    central_offsets = np.array([offset for offset, _ in SECOND_CENTRAL])
    jump_offsets = np.array([offset for offset, _ in FIRST_FORWARD])
    stencil_s = (sample_s[:, None] + h * central_offsets[None, :]).ravel()
    jump_s = np.concatenate([s_prime + h * jump_offsets, s_prime - h * jump_offsets])
    values = direct_values(model, t, np.concatenate([stencil_s, jump_s]), s_prime,
                           kernel.quadrature_order, classical)
    stencil_values = values[: stencil_s.size].reshape(sample_s.size, len(central_offsets), model.nu, model.nu)
    right_values = values[stencil_s.size: stencil_s.size + len(jump_offsets)]
    left_values = values[stencil_s.size + len(jump_offsets):]

    homogeneous = 0.0
    if sample_s.size:
        first = {offset: coeff for offset, coeff in FIRST_CENTRAL}
        second = {offset: coeff for offset, coeff in SECOND_CENTRAL}
        K = stencil_values[:, list(central_offsets).index(0)]
        dK = sum(first.get(o, 0.0) * stencil_values[:, i] for i, o in enumerate(central_offsets)) / h
        d2K = sum(second[o] * stencil_values[:, i] for i, o in enumerate(central_offsets)) / h ** 2
        E, F = classical.coeffs.evaluate(t * sample_s)
        A, _, _ = eval_coefficients(model, t * sample_s)
        residual = np.linalg.solve(A, -d2K + t * E @ dK + t ** 2 * F @ K)
        homogeneous = float(np.max(op_norm(residual)))

    forward = sum(c * right_values[i] for i, (_, c) in enumerate(FIRST_FORWARD)) / h
    backward_stencil = backward(FIRST_FORWARD)
    # left_values[i] = K̃(s′ − h·offset_i); backward() refleja offsets y signos
    back = sum(c * left_values[i] for i, (_, c) in enumerate(backward_stencil)) / h
    jump = forward - back
    A_sp, _, _ = eval_coefficients(model, t * s_prime)
    jump_defect = float(np.max(np.abs(jump + A_sp)))

    dirichlet = float(np.max(np.abs(kernel(np.array([0.0, 1.0]), s_prime))))
    report = PropagatorReport(
        s_prime=float(s_prime),
        homogeneous_residual=homogeneous,
        dirichlet=dirichlet,
        jump=jump,
        jump_defect=jump_defect,
    )
    logger.info(
        f"🔄 Propagador en s′={s_prime}: residuo {homogeneous:.2e}, salto {jump_defect:.2e}, Dirichlet {dirichlet:.2e}"
    )
    return report


# ===== POSITIVIDAD Y COTAS =====

def positivity_and_bounds(kernel: DeformationKernel, model: CoefficientModel,
                          masses: Iterable) -> PositivityReport:
    """Re(t(μ,μ)ₜ) ≥ 0, |(μ,μ)ₜ| ≤ 2(μ,μ)₀ y |K̃·ξ⊗ξ| ≤ 2n|A(0)|Σξ_j²"""
    masses = _as_masses(masses)
    t = kernel.t
    form_t = quadratic_form(kernel, masses)
    form_0 = reference_form(model, masses)
    xi_sq = sum(float(m.xi @ m.xi) for m in masses)
    a0_norm = float(op_norm(model.A.coefficients[0]))
    degenerate = xi_sq > 0 and form_0 <= 0
    if degenerate:
        logger.warning(f"⚠️ (μ,μ)₀ = {form_0:.3e} con masas no nulas: forma no definida positiva")
    bound = 2 * len(masses) * a0_norm * xi_sq
    return PositivityReport(
        t=t,
        form_t=form_t,
        form_0=form_0,
        real_part=float((t * form_t).real),
        form_ratio=abs(form_t) / form_0 if form_0 > 0 else (0.0 if abs(form_t) == 0 else float("inf")),
        size_ratio=abs(form_t) / bound if bound > 0 else 0.0,
        degenerate=degenerate,
    )


class DeformationService:
    """Acceso cacheado a matrices de deformación de un modelo"""

    def __init__(self, model: CoefficientModel, classical: Optional[ClassicalService] = None,
                 quadrature_order: Optional[int] = None, grid_nodes: Optional[int] = None,
                 repository: Optional[KernelRepository] = None):
        self.model = model
        self.classical = classical or ClassicalService(model)
        self.quadrature_order = quadrature_order or settings.kernel_quadrature_order
        self.grid_nodes = grid_nodes or settings.kernel_grid_nodes
        self.repository = repository if repository is not None else kernel_cache

    def kernel(self, t: complex) -> DeformationKernel:
        key = self.repository.key(self.model.key, t, self.quadrature_order, self.grid_nodes,
                                  self.classical.steps)
        kernel = self.repository.get(key)
        if kernel is None:
            kernel = build_kernel(self.model, t, self.quadrature_order, self.grid_nodes, self.classical)
            self.repository.put(key, kernel)
        return kernel

    def direct(self, t: complex, s, s_prime) -> np.ndarray:
        return direct_values(self.model, t, s, s_prime, self.quadrature_order, self.classical)

    def grid_rows(self, kernel: DeformationKernel, points: int = 25) -> List[Tuple]:
        """Filas (s, s′, Re K̃_jk, Im K̃_jk …) para el volcado CSV"""
        grid = np.linspace(0.0, 1.0, points)
        S, SP = np.meshgrid(grid, grid, indexing="ij")
        values = kernel(S, SP)
        rows = []
        for i in range(points):
            for j in range(points):
                entries = values[i, j].ravel()
                row = [float(S[i, j]), float(SP[i, j])]
                for z in entries:
                    row.extend([float(z.real), float(z.imag)])
                rows.append(tuple(row))
        return rows

    def grid_header(self) -> List[str]:
        header = ["s", "s_prime"]
        for j in range(self.model.nu):
            for k in range(self.model.nu):
                header.extend([f"re_K_{j}{k}", f"im_K_{j}{k}"])
        return header
