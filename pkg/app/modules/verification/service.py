import logging
from typing import Callable, List, Optional, Tuple

import numpy as np

from app.config.settings import settings
from app.core.errors import DeformationError
from app.modules.classical.service import ClassicalService, symplectic_defect
from app.modules.deformation.service import (
    DeformationService, positivity_and_bounds, propagator_residual
)
from app.modules.operator_model.models import Problem
from app.modules.operator_model.service import check_reality
from app.modules.oracles.models import Grid1D
from app.modules.oracles.service import (
    GreenKernelOracle, brute_force_vn, closed_form_kernel, closed_form_trajectories,
    cn_evolve, free_kernel, has_closed_form, mehler_kernel
)
from app.modules.series.service import SeriesService, eval_vn_batch, majorant
from app.modules.verification.models import CheckResult, CheckStatus, VerificationReport

logger = logging.getLogger(__name__)

# ===== UMBRALES =====
BOUNDARY_TOL = 1e-10
TRAJECTORY_BOUND = 2.0
SYMPLECTIC_TOL = 1e-9
IDENTITY_TOL = 1e-6
CLOSED_FORM_TOL = 1e-7
REALITY_TOL = 1e-9
SYMMETRY_TOL = 1e-10
PROPAGATOR_TOL = 1e-5
GREEN_TOL = 1e-7
PDE_TOL = 1e-4
ORACLE_TOL = 1e-8
P0_TOL = 1e-7
SEMIGROUP_TOL = 1e-3
MAJORANT_SLACK = 1.0 + 1e-9
SCHRODINGER_SLACK = 1.0 + 1e-6
GROWTH_SLOPE_LIMIT = 0.5

PROPAGATOR_POINTS = (0.3, 0.5, 0.8)
REALITY_TIMES = (0.05j, -0.05j, 0.15j, -0.15j)
CLOSED_FORM_TIMES = (0.2, 0.3j)
SCHRODINGER_TAUS = (-0.2, -0.1, 0.1, 0.2)
SCHRODINGER_RADII = (0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
P0_TIMES = (0.1, 0.2)
NEGLIGIBLE = 1e-300


def _max_abs(value) -> float:
    return float(np.max(np.abs(value), initial=0.0))


def semigroup_crosscheck(problem: Problem, grid: Optional[Grid1D] = None, y: float = 0.0,
                         t0: float = 0.05, t1: float = 0.2, window: float = 3.0,
                         start_order: int = 3, end_order: int = 5,
                         nodes: int = 8) -> Tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """
    Evoluciona con Crank–Nicolson la columna p(t0, ·, y) de la serie hasta t1 y
    la compara con la serie evaluada directamente en t1 sobre |x| ≤ window.

    Devuelve (error relativo al supremo, x, evolucionado, directo) en la ventana.
    """
    grid = grid or Grid1D(L=12.0, Nx=2000, dt=1e-4)
    series = SeriesService(problem.model, problem.potential, nodes=nodes)
    x = grid.x
    u0 = series.kernel_field(t0, x[:, None], [y], start_order)[:, 0, 0]
    u0 = np.where(np.abs(u0) > NEGLIGIBLE, u0, 0.0)
    evolved = cn_evolve(problem.model, problem.potential, grid, u0, t0, t1)
    inside = np.abs(x) <= window
    direct = series.kernel_field(t1, x[inside][:, None], [y], end_order)[:, 0, 0]
    error = _max_abs(evolved[inside] - direct) / _max_abs(direct)
    logger.info(f"🔄 Semigrupo t={t0}→{t1}: error relativo {error:.3e}")
    return error, x[inside], evolved[inside], direct


class VerificationService:
    """
    Suite de invariantes sobre un problema.

    Cada comprobación produce un CheckResult con valor medido y umbral; los
    DeformationError dentro de una comprobación se registran como FAIL.
    """

    def __init__(self, problem: Problem, seed: int = 0, t: float = 0.2, n_max: int = 4,
                 nodes: int = 10, identity_samples: int = 20, positivity_times: int = 5,
                 positivity_configs: int = 100, include_slow: bool = False):
        self.problem = problem
        self.model = problem.model
        self.potential = problem.potential
        self.seed = seed
        self.t = t
        self.n_max = n_max
        self.nodes = nodes
        self.identity_samples = identity_samples
        self.positivity_times = positivity_times
        self.positivity_configs = positivity_configs
        self.include_slow = include_slow
        self.semigroup_snapshot: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None
        self.max_conditioning = 0.0
        self.classical = ClassicalService(self.model)
        self.deformation = DeformationService(self.model, self.classical)
        self.series = SeriesService(self.model, self.potential, self.classical, self.deformation, nodes=nodes)
        nu = self.model.nu
        self.x = 0.5 * np.ones(nu)
        self.y = -0.5 * np.ones(nu)

    # ===== EJECUCIÓN =====

    def run(self) -> VerificationReport:
        report = VerificationReport(problem=self.problem.name, seed=self.seed)
        rng = np.random.default_rng(self.seed)
        steps: List[Tuple[str, Callable[[], List[CheckResult]]]] = [
            ("trajectories", self.check_trajectories),
            ("identities", lambda: self.check_identities(rng)),
            ("closed_forms", self.check_closed_forms),
            ("reality", self.check_reality),
            ("kernel_structure", self.check_kernel_structure),
            ("propagator", self.check_propagator),
            ("green", self.check_green),
            ("positivity", lambda: self.check_positivity(rng, report)),
            ("p0_oracle", self.check_p0_oracle),
            ("series", self.check_series),
            ("schrodinger_bounds", lambda: self.check_schrodinger_bounds(report)),
            ("semigroup", self.check_semigroup),
        ]
        for group, step in steps:
            try:
                report.checks.extend(step())
            except DeformationError as exc:
                logger.error(f"❌ Comprobación '{group}' abortada: {exc.detail}")
                report.checks.append(CheckResult(group, CheckStatus.failed, detail=f"{type(exc).__name__}: {exc.detail}"))
        report.max_conditioning = self.max_conditioning
        if not report.passed and self.max_conditioning > settings.focal_warning_limit:
            logger.warning(
                f"⚠️ Fallos con κ(V(1)) = {self.max_conditioning:.3e}: posible cercanía a un punto focal"
            )
        counts = report.counts()
        icon = "✅" if report.passed else "❌"
        logger.info(f"{icon} Verificación de '{report.problem}': {counts}")
        return report

    def _solve(self, t: complex):
        bundle = self.classical.solve_bvp(t)
        self.max_conditioning = max(self.max_conditioning, bundle.conditioning)
        return bundle

    @staticmethod
    def _bounded(name: str, measured: float, threshold: float, detail: str = "",
                 samples: Optional[int] = None) -> CheckResult:
        status = CheckStatus.passed if measured <= threshold else CheckStatus.failed
        return CheckResult(name, status, float(measured), threshold, detail, samples)

    # ===== DINÁMICA CLÁSICA =====

    def check_trajectories(self) -> List[CheckResult]:
        bundle = self._solve(self.t)
        return [
            self._bounded("boundary_conditions", bundle.boundary_defect(), BOUNDARY_TOL),
            self._bounded("trajectory_bound", max(bundle.sup_norms()), TRAJECTORY_BOUND),
            self._bounded("symplectic_invariant", symplectic_defect(self.model, bundle), SYMPLECTIC_TOL),
        ]

    def check_identities(self, rng: np.random.Generator) -> List[CheckResult]:
        nu = self.model.nu
        worst, where = 0.0, ""
        for _ in range(self.identity_samples):
            t = float(rng.uniform(0.05, 0.3)) * self.model.validity_radius
            x = rng.uniform(-1.0, 1.0, nu)
            y = rng.uniform(-1.0, 1.0, nu)
            self._solve(t)
            eikonal = self.classical.eikonal_residual(t, x, y)
            identities = self.classical.classical_identity_residuals(t, x, y).worst()
            value = max(eikonal, identities)
            if value >= worst:
                worst, where = value, f"t={t:.4f}"
        return [self._bounded("eikonal_and_identities", worst, IDENTITY_TOL, f"peor muestra en {where}",
                              self.identity_samples)]

    def check_closed_forms(self) -> List[CheckResult]:
        if not has_closed_form(self.model):
            reason = "sin forma cerrada para modelos polinomiales"
            return [
                CheckResult("closed_form_trajectories", CheckStatus.skipped, detail=reason),
                CheckResult("closed_form_kernel", CheckStatus.skipped, detail=reason),
            ]
        s = np.linspace(0.0, 1.0, 21)
        S, SP = np.meshgrid(s, s, indexing="ij")
        trajectory_error, kernel_error = 0.0, 0.0
        for t in CLOSED_FORM_TIMES:
            bundle = self._solve(t)
            flat, sharp = closed_form_trajectories(self.model, t, s)
            trajectory_error = max(trajectory_error, _max_abs(bundle.q_flat(s) - flat), _max_abs(bundle.q_sharp(s) - sharp))
            kernel = self.deformation.kernel(t)
            kernel_error = max(kernel_error, _max_abs(kernel(S, SP) - closed_form_kernel(self.model, t, S, SP)))
        return [
            self._bounded("closed_form_trajectories", trajectory_error, CLOSED_FORM_TOL),
            self._bounded("closed_form_kernel", kernel_error, CLOSED_FORM_TOL),
        ]

    # ===== REALIDAD =====

    def check_reality(self) -> List[CheckResult]:
        report = check_reality(self.model)
        if not report.real:
            return [CheckResult(
                "reality", CheckStatus.failed,
                detail="coeficientes no reales en el eje imaginario: " + ", ".join(report.offending),
            )]
        s = np.linspace(0.0, 1.0, 9)
        S, SP = np.meshgrid(s, s, indexing="ij")
        x, y = self.x.real, self.y.real
        worst = 0.0
        for t in REALITY_TIMES:
            t = t * self.model.validity_radius
            bundle = self._solve(t)
            kernel = self.deformation.kernel(t)
            action = self.classical.action_phi(bundle, x, y)
            worst = max(
                worst,
                _max_abs(bundle.q_flat(s).imag),
                _max_abs(bundle.q_sharp(s).imag),
                _max_abs(kernel(S, SP).imag),
                abs(action.phi1.imag),
            )
        return [self._bounded("reality", worst, REALITY_TOL, "partes imaginarias en t = iτ")]

    # ===== MATRIZ DE DEFORMACIÓN =====

    def check_kernel_structure(self) -> List[CheckResult]:
        kernel = self.deformation.kernel(self.t)
        s = np.linspace(0.0, 1.0, 11)
        dirichlet = max(_max_abs(kernel(0.0, s)), _max_abs(kernel(1.0, s)))
        return [
            self._bounded("diagonal_symmetry", kernel.diagonal_mismatch(), SYMMETRY_TOL),
            self._bounded("kernel_dirichlet", dirichlet, SYMMETRY_TOL),
        ]

    def check_propagator(self) -> List[CheckResult]:
        t = 0.25 * self.model.validity_radius
        kernel = self.deformation.kernel(t)
        results = []
        for s_prime in PROPAGATOR_POINTS:
            report = propagator_residual(kernel, self.model, s_prime, classical=self.classical)
            measured = max(report.homogeneous_residual, report.jump_defect)
            ok = measured <= PROPAGATOR_TOL and report.dirichlet <= BOUNDARY_TOL
            results.append(CheckResult(
                f"propagator_s{s_prime}",
                CheckStatus.passed if ok else CheckStatus.failed,
                measured,
                PROPAGATOR_TOL,
                f"homogéneo {report.homogeneous_residual:.2e}, salto {report.jump_defect:.2e}, "
                f"Dirichlet {report.dirichlet:.2e}",
            ))
        return results

    def check_green(self) -> List[CheckResult]:
        t = 0.25 * self.model.validity_radius
        kernel = self.deformation.kernel(t)
        s = np.linspace(0.05, 0.95, 10)
        S, SP = np.meshgrid(s, s, indexing="ij")
        green = GreenKernelOracle(self.model, t)
        error = _max_abs(kernel(S, SP) - green.kernel(S, SP))
        return [self._bounded("green_crosscheck", error, GREEN_TOL)]

    def check_positivity(self, rng: np.random.Generator, report: VerificationReport) -> List[CheckResult]:
        reality = report.find("reality")
        if reality is not None and reality.status == CheckStatus.failed:
            return [CheckResult("positivity", CheckStatus.skipped,
                                detail="requiere la hipótesis de realidad, que no se cumple")]
        nu = self.model.nu
        worst_ratio, worst_real, failures = 0.0, np.inf, 0
        radius = 0.3 * self.model.validity_radius
        for _ in range(self.positivity_times):
            r = radius * np.sqrt(rng.uniform(0.05, 1.0))
            angle = rng.uniform(-np.pi / 2, np.pi / 2)
            kernel = self.deformation.kernel(r * np.exp(1j * angle))
            for _ in range(self.positivity_configs):
                count = int(rng.integers(1, 6))
                masses = [(float(rng.uniform(0.02, 0.98)), rng.normal(size=nu)) for _ in range(count)]
                result = positivity_and_bounds(kernel, self.model, masses)
                worst_ratio = max(worst_ratio, result.form_ratio / 2.0, result.size_ratio)
                worst_real = min(worst_real, result.real_part)
                failures += 0 if result.passed else 1
        status = CheckStatus.passed if failures == 0 else CheckStatus.failed
        return [CheckResult(
            "positivity", status, worst_ratio, 1.0,
            f"{failures} configuraciones fallidas; min Re(t(μ,μ)ₜ) = {worst_real:.3e}",
            self.positivity_times * self.positivity_configs,
        )]

    # ===== NÚCLEO =====

    def _p0_reference(self, t: float, x, y) -> Optional[complex]:
        name, params = self.model.builtin or (None, {})
        if name == "free":
            return complex(free_kernel(t, x, y))
        if name == "harmonic" and params["lam"] >= 0:
            omega = float(np.sqrt(params["lam"]))
            return complex(np.prod([mehler_kernel(omega, t, xi, yi) for xi, yi in zip(x, y)]))
        return None

    def check_p0_oracle(self) -> List[CheckResult]:
        if self._p0_reference(0.1, self.x.real, self.y.real) is None:
            return [CheckResult("p0_oracle", CheckStatus.skipped, detail="sin núcleo de referencia para este modelo")]
        worst = 0.0
        for t in P0_TIMES:
            t = t * self.model.validity_radius
            reference = self._p0_reference(t, self.x.real, self.y.real)
            value = self.classical.p0(t, self.x.real, self.y.real)
            worst = max(worst, abs(value - reference) / abs(reference))
        return [self._bounded("p0_oracle", worst, P0_TOL)]

    def check_series(self) -> List[CheckResult]:
        results = []
        t = self.t * self.model.validity_radius
        R = float(np.linalg.norm(self.x) + np.linalg.norm(self.y))
        kernel_result = self.series.eval_kernel(t, self.x, self.y, n_max=self.n_max, tol=0.0)
        excess = 0.0
        for term in kernel_result.terms:
            bound = majorant(self.potential, R, t, term.n)
            excess = max(excess, term.norm / bound if bound > 0 else (0.0 if term.norm == 0 else np.inf))
        results.append(self._bounded("series_majorant", excess, MAJORANT_SLACK, "max |vₙ|/(Â|t|)ⁿ/n!"))

        residual = self.series.pde_residual(t, self.x, self.y, n_max=self.n_max)
        results.append(self._bounded("pde_residual", residual, PDE_TOL))

        if self.potential.is_zero:
            results.append(CheckResult("low_order_oracle", CheckStatus.skipped, detail="potencial nulo"))
            return results
        bundle = self.classical.solve_bvp(t)
        kernel = None if self.potential.is_spatially_constant else self.deformation.kernel(t)
        oracle = GreenKernelOracle(self.model, t)
        difference = 0.0
        for n in (1, 2):
            values, _, _ = eval_vn_batch(kernel, bundle, self.potential, n, t, self.x, self.y, self.nodes)
            reference = brute_force_vn(self.potential, self.model, n, t, self.x, self.y, oracle=oracle)
            difference = max(difference, _max_abs(values[0] - reference))
        results.append(self._bounded("low_order_oracle", difference, ORACLE_TOL))
        return results

    def check_schrodinger_bounds(self, report: VerificationReport) -> List[CheckResult]:
        """|vₙ| y |∂ₜp^conj| sobre t = iτ con (x, y) reales hasta |x| + |y| = 50"""
        names = ("schrodinger_uniform_majorant", "schrodinger_growth")
        reality = report.find("reality")
        if reality is not None and reality.status == CheckStatus.failed:
            return [CheckResult(name, CheckStatus.skipped, detail="requiere la hipótesis de realidad, que no se cumple")
                    for name in names]
        if self.potential.is_zero:
            return [CheckResult(name, CheckStatus.skipped, detail="potencial nulo") for name in names]
        taus = [tau * self.model.validity_radius for tau in SCHRODINGER_TAUS]
        bounds = self.series.schrodinger_bounds(taus, SCHRODINGER_RADII, n_max=self.n_max)
        samples = len(taus) * len(SCHRODINGER_RADII)
        return [
            self._bounded(names[0], bounds.majorant_ratio, SCHRODINGER_SLACK,
                          "max |vₙ|/((Σ sup|a_m|)·|t|)ⁿ/n! en t = iτ", samples),
            self._bounded(names[1], bounds.growth_slope, GROWTH_SLOPE_LIMIT,
                          "pendiente log-log de |∂ₜp^conj|/(1+R) frente a 1+R", samples),
        ]

    def check_semigroup(self) -> List[CheckResult]:
        if not self.include_slow:
            return [CheckResult("semigroup_crosscheck", CheckStatus.skipped, detail="comprobación lenta no solicitada")]
        if self.model.nu != 1 or self.potential.d != 1:
            return [CheckResult("semigroup_crosscheck", CheckStatus.skipped, detail="solo ν = 1 y d = 1")]
        error, x, evolved, direct = semigroup_crosscheck(self.problem)
        self.semigroup_snapshot = (x, evolved, direct)
        return [self._bounded("semigroup_crosscheck", error, SEMIGROUP_TOL)]
