import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import gammaln, logsumexp

from app.config.settings import settings
from app.core.errors import OutOfRadiusError, SeriesBudgetError, UndefinedAtZeroError
from app.modules.classical.models import TrajectoryBundle
from app.modules.classical.service import ClassicalService
from app.modules.deformation.models import DeformationKernel
from app.modules.deformation.service import DeformationService
from app.modules.operator_model.models import CoefficientModel, FourierPotential, TaylorMatrix
from app.modules.operator_model.service import eval_coefficients, eval_potential, moment_bound
from app.modules.series.models import KernelResult, SchrodingerBounds, SeriesTerm
from app.shared.numerics.finite_difference import FIRST_CENTRAL, SECOND_CENTRAL
from app.shared.numerics.linalg import matrix_function, op_norm
from app.shared.numerics.quadrature import simplex_rule

logger = logging.getLogger(__name__)

CHUNK_ELEMENTS = 1 << 15
HERMITE_NODES = 16
RESIDUAL_EPS = 1e-300
TINY_RADIUS = 1e-12
LOG_OVERFLOW = 700.0
DERIVATIVE_STEP = 1e-3
GROWTH_FLOOR = 1e-14

FOURIER_FORM = "fourier"
OPERATOR_FORM = "operator"


def _batch(v, nu: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim == 1:
        v = v[None, :]
    if v.shape[-1] != nu:
        raise ValueError(f"Se esperaban puntos de dimensión {nu}")
    return v


# ===== COTAS =====

def majorant_constant(pot: FourierPotential, R: float, t: complex) -> float:
    """Â = 2·Σ e^{2R|ξ|} sup_{|τ|≤|t|} |a_m(τ)|"""
    return 2.0 * moment_bound(pot, 2.0 * R, abs(complex(t)))


def majorant(pot: FourierPotential, R: float, t: complex, n: int) -> float:
    """(Â|t|)ⁿ/n!"""
    a = majorant_constant(pot, R, t) * abs(complex(t))
    if a == 0:
        return 0.0
    return float(np.exp(n * np.log(a) - gammaln(n + 1)))


def truncation_bound(pot: FourierPotential, R: float, t: complex, n_max: int) -> float:
    """Σ_{n>n_max} (Â|t|)ⁿ/n! en aritmética logarítmica"""
    a = majorant_constant(pot, R, t) * abs(complex(t))
    if a == 0:
        return 0.0
    if a > LOG_OVERFLOW:
        return float("inf")
    span = max(60, int(4 * a) + 60)
    n = np.arange(n_max + 1, n_max + 1 + span)
    log_terms = n * np.log(a) - gammaln(n + 1)
    return float(np.exp(logsumexp(log_terms)))


# ===== TÉRMINOS vₙ =====

def _dyson_constant(pot: FourierPotential, n: int, t: complex) -> np.ndarray:
    """
    Potencial sin dependencia espacial: vₙ = tⁿ Iₙ(1) con
    I_k(σ) = ∫₀^σ a(st) I_{k−1}(s) ds, exacto en aritmética polinomial.
    """
    amplitude = pot.modes[0].amplitude
    for mode in pot.modes[1:]:
        amplitude = amplitude + mode.amplitude
    rescaled = amplitude.substitute(t)
    integral = TaylorMatrix.identity(pot.d)
    for _ in range(n):
        integral = (rescaled @ integral).integral()
    return t ** n * integral(1.0)


def eval_vn_operator(kernel: Optional[DeformationKernel], bundle: TrajectoryBundle, pot: FourierPotential,
                     n: int, t: complex, x, y, Q: Optional[int] = None,
                     hermite_nodes: int = HERMITE_NODES) -> np.ndarray:
    """
    vₙ en forma operador: tⁿ ∫_símplex e^{tK̃·∂⊗∂}[c(sₙt, zₙ)···c(s₁t, z₁)] en z = q̃♮(s).

    El operador gaussiano actúa como un promedio, e^{tK̃·∂⊗∂}F(z₀) = E[F(z₀ + W)]
    con Cov(W) = 2tK̃ (matriz de bloques K̃(s_j, s_k)), integrado con Gauss–Hermite
    sobre W = (2tK̃)^{1/2}·g. El potencial se evalúa en los puntos desplazados,
    sin pasar por sus frecuencias. Solo d = 1 y n ≤ 2 (coste H^{nν}).
    """
    if n < 1 or n > 2 or pot.d != 1:
        raise ValueError("La forma operador solo está disponible para d = 1 y n ≤ 2")
    t = complex(t)
    nu = pot.nu
    x = _batch(x, nu)[0]
    y = _batch(y, nu)[0]
    Q = Q or settings.series_nodes
    if pot.is_zero:
        return np.zeros((1, 1), dtype=complex)
    if kernel is None:
        raise ValueError("Se necesita la matriz de deformación para la forma operador")

    points, weights = simplex_rule(n, Q)
    P, k = len(weights), n * nu
    z0 = (np.einsum("pjab,b->pja", bundle.q_flat(points), x)
          + np.einsum("pjab,b->pja", bundle.q_sharp(points), y)).reshape(P, k)
    cov = np.zeros((P, k, k), dtype=complex)
    for j in range(n):
        for l in range(n):
            cov[:, j * nu:(j + 1) * nu, l * nu:(l + 1) * nu] = 2.0 * t * kernel(points[:, j], points[:, l])
    root = matrix_function(cov, np.sqrt)

    nodes, node_weights = hermegauss(hermite_nodes)
    node_weights = node_weights / np.sqrt(2.0 * np.pi)
    gauss = np.stack(np.meshgrid(*([nodes] * k), indexing="ij"), axis=-1).reshape(-1, k)
    gauss_weights = np.prod(
        np.stack(np.meshgrid(*([node_weights] * k), indexing="ij"), axis=-1).reshape(-1, k), axis=-1
    )
    shifted = (z0[:, None, :] + np.einsum("pab,hb->pha", root, gauss)).reshape(P, len(gauss_weights), n, nu)
    times = np.broadcast_to(t * points[:, None, :], shifted.shape[:-1])
    values = eval_potential(pot, times, shifted)
    # c(sₙt)···c(s₁t): índice descendente
    product = values[:, :, n - 1]
    for j in range(n - 2, -1, -1):
        product = product @ values[:, :, j]
    averaged = np.einsum("h,phab->pab", gauss_weights, product)
    return t ** n * np.einsum("p,pab->ab", weights, averaged)


def eval_vn_batch(kernel: Optional[DeformationKernel], bundle: TrajectoryBundle, pot: FourierPotential,
                  n: int, t: complex, xs, ys, Q: Optional[int] = None, budget: Optional[int] = None,
                  workers: Optional[int] = None) -> Tuple[np.ndarray, int, int]:
    """
    vₙ para un lote de puntos (x, y) que comparten t.

    Devuelve (valores (B, d, d), número de tuplas de modos, nodos por dimensión).
    """
    if n < 1:
        raise ValueError("n debe ser ≥ 1")
    t = complex(t)
    xs = _batch(xs, pot.nu)
    ys = _batch(ys, pot.nu)
    xs, ys = np.broadcast_arrays(xs, ys)
    B, d = xs.shape[0], pot.d
    Q = Q or settings.series_nodes
    budget = budget or settings.series_budget
    modes = pot.modes
    M = len(modes)
    if M == 0:
        return np.zeros((B, d, d), dtype=complex), 0, Q
    tuple_count = M ** n
    if pot.is_spatially_constant:
        value = _dyson_constant(pot, n, t)
        return np.broadcast_to(value, (B, d, d)).copy(), tuple_count, 0

    evaluations = tuple_count * Q ** n
    if evaluations > budget:
        raise SeriesBudgetError(
            f"v_{n} requiere {evaluations:.3e} evaluaciones (presupuesto {budget:.3e})",
            n=n, evaluations=int(evaluations), budget=int(budget),
        )
    if kernel is None:
        raise ValueError("Se necesita la matriz de deformación para potenciales con ξ ≠ 0")

    points, weights = simplex_rule(n, Q)
    xi = pot.frequencies
    mode_tuples = list(itertools.product(range(M), repeat=n))
    chunk = max(64, CHUNK_ELEMENTS // B)

    def partial(start: int) -> np.ndarray:
        pts = points[start:start + chunk]
        w = weights[start:start + chunk]
        qnat = (np.einsum("cjab,Bb->Bcja", bundle.q_flat(pts), xs)
                + np.einsum("cjab,Bb->Bcja", bundle.q_sharp(pts), ys))
        phases = np.einsum("Bcja,ma->Bcjm", qnat, xi)
        pair = {}
        for j in range(n):
            for k in range(j, n):
                K = kernel(pts[:, j], pts[:, k])
                pair[j, k] = np.einsum("ma,cab,lb->cml", xi, K, xi)
        amps = [np.stack([m.amplitude(t * pts[:, j]) for m in modes], axis=1) for j in range(n)]
        acc = np.zeros((B, d, d), dtype=complex)
        for tup in mode_tuples:
            exponent = np.zeros(len(w), dtype=complex)
            phase = np.zeros((B, len(w)), dtype=complex)
            for j in range(n):
                exponent += pair[j, j][:, tup[j], tup[j]]
                for k in range(j + 1, n):
                    exponent += 2.0 * pair[j, k][:, tup[j], tup[k]]
                phase += phases[:, :, j, tup[j]]
            integrand = np.exp(1j * phase) * (w * np.exp(-t * exponent))
            # c(sₙt)···c(s₁t): índice descendente
            product = amps[n - 1][:, tup[n - 1]]
            for j in range(n - 2, -1, -1):
                product = product @ amps[j][:, tup[j]]
            acc += np.einsum("Bc,cab->Bab", integrand, product)
        return acc

    starts = list(range(0, len(weights), chunk))
    with ThreadPoolExecutor(max_workers=workers or settings.workers) as pool:
        partials = list(pool.map(partial, starts))
    total = np.zeros((B, d, d), dtype=complex)
    for part in partials:
        total += part
    return t ** n * total, tuple_count, Q


def eval_vn(kernel: Optional[DeformationKernel], bundle: TrajectoryBundle, pot: FourierPotential, n: int,
            t: complex, x, y, Q: Optional[int] = None, budget: Optional[int] = None,
            form: str = FOURIER_FORM) -> SeriesTerm:
    if form == OPERATOR_FORM:
        value = eval_vn_operator(kernel, bundle, pot, n, t, x, y, Q)
        nodes = Q or settings.series_nodes
        return SeriesTerm(n=n, value=value, quadrature_order=nodes, mode_tuple_count=len(pot.modes) ** n)
    if form != FOURIER_FORM:
        raise ValueError(f"Forma desconocida: {form!r}")
    values, tuples, nodes = eval_vn_batch(kernel, bundle, pot, n, t, x, y, Q, budget)
    return SeriesTerm(n=n, value=values[0], quadrature_order=nodes, mode_tuple_count=tuples)


class SeriesService:
    """Serie de deformación p = p⁰·(𝟙 + Σ vₙ) para un problema"""

    def __init__(self, model: CoefficientModel, potential: FourierPotential,
                 classical: Optional[ClassicalService] = None,
                 deformation: Optional[DeformationService] = None,
                 nodes: Optional[int] = None, budget: Optional[int] = None):
        if potential.nu != model.nu:
            raise ValueError("El potencial y el modelo tienen dimensiones distintas")
        self.model = model
        self.potential = potential
        self.classical = classical or ClassicalService(model)
        self.deformation = deformation or DeformationService(model, self.classical)
        self.nodes = nodes or settings.series_nodes
        self.budget = budget or settings.series_budget

    def eval_kernel(self, t: complex, x, y, n_max: Optional[int] = None,
                    tol: Optional[float] = None) -> KernelResult:
        return self.eval_kernel_batch(t, [x], [y], n_max, tol)[0]

    def eval_kernel_batch(self, t: complex, xs, ys, n_max: Optional[int] = None,
                          tol: Optional[float] = None) -> List[KernelResult]:
        """
        Suma 𝟙 + Σ_{n≤n_max} vₙ con parada temprana cuando la cota de cola < tol.

        Todos los puntos comparten la resolución clásica y la matriz de deformación;
        la parada usa el mayor R = |x| + |y| del lote.
        """
        t = complex(t)
        if t == 0:
            raise UndefinedAtZeroError("El núcleo no está definido en t = 0")
        if t.real < 0:
            raise OutOfRadiusError(f"Se requiere Re t ≥ 0, recibido t = {t}", t=str(t))
        n_max = settings.series_n_max if n_max is None else n_max
        tol = settings.series_tol if tol is None else tol
        pot = self.potential
        xs = _batch(xs, self.model.nu)
        ys = _batch(ys, self.model.nu)
        xs, ys = np.broadcast_arrays(xs, ys)
        radii = np.maximum(np.linalg.norm(xs, axis=-1) + np.linalg.norm(ys, axis=-1), TINY_RADIUS)
        R = float(radii.max())

        p0 = self.classical.p0_field(t, xs, ys)
        pconj = np.broadcast_to(np.eye(pot.d, dtype=complex), (len(xs), pot.d, pot.d)).copy()
        term_values: List[np.ndarray] = []
        tuple_counts: List[Tuple[int, int]] = []
        if not pot.is_zero and n_max >= 1 and truncation_bound(pot, R, t, 0) >= tol:
            bundle = self.classical.solve_bvp(t)
            kernel = None if pot.is_spatially_constant else self.deformation.kernel(t)
            for n in range(1, n_max + 1):
                values, tuples, nodes = eval_vn_batch(kernel, bundle, pot, n, t, xs, ys, self.nodes, self.budget)
                term_values.append(values)
                tuple_counts.append((tuples, nodes))
                pconj += values
                bound = truncation_bound(pot, R, t, n)
                logger.info(f"🔄 v_{n} en t={t}: max|v_n| = {np.max(np.abs(values)):.3e}, cola ≤ {bound:.3e}")
                if bound < tol:
                    break

        results = []
        for b in range(len(xs)):
            terms = [
                SeriesTerm(n=k + 1, value=vals[b], quadrature_order=nodes, mode_tuple_count=tuples)
                for k, (vals, (tuples, nodes)) in enumerate(zip(term_values, tuple_counts))
            ]
            results.append(KernelResult(
                t=t,
                x=xs[b],
                y=ys[b],
                p0=complex(p0[b]),
                terms=terms,
                pconj=pconj[b],
                tail_bound=truncation_bound(pot, float(radii[b]), t, len(terms)),
                p=p0[b] * pconj[b],
            ))
        return results

    def kernel_field(self, t: complex, xs, ys, n_max: int) -> np.ndarray:
        """p en un lote de puntos con orden fijo (sin parada temprana)"""
        results = self.eval_kernel_batch(t, xs, ys, n_max=n_max, tol=0.0)
        return np.stack([r.p for r in results])

    def pde_residual(self, t: complex, x, y, n_max: Optional[int] = None) -> float:
        """
        |∂ₜp − P₀p − c·p| / (|P₀p| + |c·p| + ε) con diferencias finitas de cuarto orden.

        P₀p = A·∇²p + 2(Bx)·A∇p + (Tr(AB) + Bx·ABx − x·Cx) p.
        """
        t = complex(t)
        n_max = settings.series_n_max if n_max is None else n_max
        nu = self.model.nu
        x = _batch(x, nu)[0]
        y = _batch(y, nu)[0]
        h_t = 1e-4 * t
        h_x = 1e-4 * (1.0 + float(np.linalg.norm(x)))

        dt = sum(
            c * self.kernel_field(t + offset * h_t, x, y, n_max)[0] for offset, c in FIRST_CENTRAL
        ) / h_t

        basis = np.eye(nu)
        stencil = [x]
        for j in range(nu):
            stencil.extend(x + offset * h_x * basis[j] for offset in (-2, -1, 1, 2))
        for j in range(nu):
            for k in range(j + 1, nu):
                stencil.extend(x + h_x * (sj * basis[j] + sk * basis[k]) for sj in (1, -1) for sk in (1, -1))
        values = self.kernel_field(t, np.array(stencil), y, n_max)
        p = values[0]
        along = {}
        for j in range(nu):
            block = values[1 + 4 * j: 5 + 4 * j]
            along[j] = dict(zip((-2, -1, 1, 2), block))
        grad = [sum(c * along[j][o] for o, c in FIRST_CENTRAL) / h_x for j in range(nu)]
        hess = [[None] * nu for _ in range(nu)]
        for j in range(nu):
            samples = dict(along[j])
            samples[0] = p
            hess[j][j] = sum(c * samples[o] for o, c in SECOND_CENTRAL) / h_x ** 2
        cursor = 1 + 4 * nu
        for j in range(nu):
            for k in range(j + 1, nu):
                pp, pm, mp, mm = values[cursor:cursor + 4]
                cursor += 4
                hess[j][k] = hess[k][j] = (pp - pm - mp + mm) / (4 * h_x ** 2)

        A, B, C = eval_coefficients(self.model, t)
        Bx = B @ x
        ABx = A @ Bx
        p0_p = sum(A[j, k] * hess[j][k] for j in range(nu) for k in range(nu))
        p0_p = p0_p + 2.0 * sum(ABx[j] * grad[j] for j in range(nu))
        p0_p = p0_p + (np.trace(A @ B) + Bx @ ABx - x @ C @ x) * p
        c_p = eval_potential(self.potential, t, x) @ p
        residual = np.linalg.norm(dt - p0_p - c_p) / (np.linalg.norm(p0_p) + np.linalg.norm(c_p) + RESIDUAL_EPS)
        logger.info(f"🔄 Residuo EDP en t={t}, x={x}: {residual:.3e}")
        return float(residual)

    def schrodinger_bounds(self, taus: Sequence[float], radii: Sequence[float], n_max: int = 4) -> SchrodingerBounds:
        """
        Serie en t = iτ sobre puntos reales x = (R/2)u, y = −(R/2)u.

        Con coeficientes reales en el eje imaginario el integrando tiene módulo
        |a|, así que |vₙ| ≤ (Σ_m sup|a_m|·|t|)ⁿ/n! para todo (x, y). La derivada
        ∂ₜp^conj se toma a lo largo de iℝ con diferencias de cuarto orden.
        """
        nu = self.model.nu
        radii = np.asarray(radii, dtype=float)
        direction = np.ones(nu) / np.sqrt(nu)
        xs = 0.5 * radii[:, None] * direction
        ys = -xs
        pot = self.potential
        ratio = 0.0
        growth = np.zeros((len(taus), len(radii)))
        for i, tau in enumerate(taus):
            t = complex(0.0, tau)
            amplitude = moment_bound(pot, 0.0, abs(t)) * abs(t)
            for result in self.eval_kernel_batch(t, xs, ys, n_max=n_max, tol=0.0):
                for term in result.terms:
                    bound = float(np.exp(term.n * np.log(amplitude) - gammaln(term.n + 1))) if amplitude > 0 else 0.0
                    if bound > 0:
                        ratio = max(ratio, term.norm / bound)
                    elif term.norm > 0:
                        ratio = float("inf")
            h = DERIVATIVE_STEP * tau
            derivative = sum(
                c * np.stack([r.pconj for r in self.eval_kernel_batch(
                    complex(0.0, tau + offset * h), xs, ys, n_max=n_max, tol=0.0)])
                for offset, c in FIRST_CENTRAL
            ) / (1j * h)
            growth[i] = op_norm(derivative) / (1.0 + radii)

        envelope = growth.max(axis=0)
        floor = GROWTH_FLOOR * (1.0 + float(envelope.max(initial=0.0)))
        slope = float(np.polyfit(np.log1p(radii), np.log(envelope + floor), 1)[0]) if len(radii) > 1 else 0.0
        logger.info(f"🔄 Eje imaginario: max |vₙ|/cota = {ratio:.3e}, pendiente de crecimiento = {slope:.3f}")
        return SchrodingerBounds(
            taus=np.asarray(taus, dtype=float),
            radii=radii,
            majorant_ratio=ratio,
            growth=growth,
            growth_slope=slope,
        )

    def term_rows(self, result: KernelResult, R: Optional[float] = None) -> List[Tuple]:
        """Filas (n, |vₙ|, cota de cola) para la tabla CSV por orden"""
        if R is None:
            R = max(float(np.linalg.norm(result.x) + np.linalg.norm(result.y)), TINY_RADIUS)
        return [
            (term.n, term.norm, truncation_bound(self.potential, R, result.t, term.n))
            for term in result.terms
        ]
