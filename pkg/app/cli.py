"""
Interfaz de línea de comandos.

    python -m app.cli classical --problem problems/harmonic.json --t 0.2,0.3i
    python -m app.cli kernel --problem problems/cos_potential.json --xy "0.5|-0.5;0|0"
    python -m app.cli verify --problem problems/free.json --seed 7

Códigos de salida: 0 éxito, 2 error de configuración, 3 radio matemático
excedido (punto focal, fuera del radio, presupuesto), 4 verificación fallida.
"""
import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.config.settings import settings
from app.core.errors import DeformationError, ProblemDefinitionError
from app.modules.classical.schemas import ClassicalRecord
from app.modules.classical.service import ClassicalService
from app.modules.deformation.service import DeformationService
from app.modules.operator_model.models import Problem
from app.modules.operator_model.repository import ProblemRepository
from app.modules.operator_model.schemas import parse_complex
from app.modules.oracles.service import closed_form_trajectories, has_closed_form, snapshot_rows
from app.modules.series.schemas import KernelRecord
from app.modules.series.service import SeriesService
from app.modules.verification.schemas import VerificationResponse
from app.modules.verification.service import VerificationService
from app.shared.services.artifact_writer import ArtifactWriter

logger = logging.getLogger("app.cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFICATION = 4

CLASSICAL_CONTRACTS = {
    "boundary_defect": 1e-10,
    "eikonal": 1e-6,
    "gradient_identity": 1e-6,
    "transport_identity": 1e-6,
    "symplectic_invariant": 1e-9,
}
CLOSED_FORM_CONTRACT = 1e-7
VERIFY_N_MAX = 4
VERIFY_NODES = 10
VERIFY_IDENTITY_SAMPLES = 20
VERIFY_POSITIVITY_TIMES = 5
VERIFY_POSITIVITY_CONFIGS = 100


@dataclass
class RunConfig:
    command: str
    problem_path: Path
    problem: Problem
    times: List[complex]
    xs: np.ndarray
    ys: np.ndarray
    n_max: Optional[int]
    tol: Optional[float]
    quad: Optional[int]
    order: Optional[int]
    steps: Optional[int]
    out: Path
    seed: int
    workers: int
    include_slow: bool = False


# ===== PARSEO =====

def parse_times(text: str) -> List[complex]:
    try:
        times = [parse_complex(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise ProblemDefinitionError(f"--t inválido: {exc}")
    if not times:
        raise ProblemDefinitionError("--t no contiene ningún tiempo")
    return times


def parse_points(text: Optional[str], nu: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    "x|y;x|y" con componentes separadas por comas, o "grid:a:b:n" para los n²
    pares de una malla uniforme sobre el primer eje (resto de componentes en 0).
    """
    if text is None:
        return 0.5 * np.ones((1, nu)), -0.5 * np.ones((1, nu))
    text = text.strip()
    if text.startswith("grid:"):
        try:
            _, a, b, n = text.split(":")
            values = np.linspace(float(a), float(b), int(n))
        except ValueError:
            raise ProblemDefinitionError(f"Malla inválida: {text!r} (formato grid:a:b:n)")
        X, Y = np.meshgrid(values, values, indexing="ij")
        xs = np.zeros((X.size, nu))
        ys = np.zeros((Y.size, nu))
        xs[:, 0], ys[:, 0] = X.ravel(), Y.ravel()
        return xs, ys
    xs, ys = [], []
    for pair in filter(None, (p.strip() for p in text.split(";"))):
        try:
            left, right = pair.split("|")
            x = [float(v) for v in left.split(",")]
            y = [float(v) for v in right.split(",")]
        except ValueError:
            raise ProblemDefinitionError(f"Par (x, y) inválido: {pair!r} (formato x|y)")
        if len(x) != nu or len(y) != nu:
            raise ProblemDefinitionError(f"El par {pair!r} no tiene dimensión ν={nu}")
        xs.append(x)
        ys.append(y)
    if not xs:
        raise ProblemDefinitionError("--xy no contiene ningún par")
    return np.array(xs), np.array(ys)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deformation", description="Núcleos de calor por fórmula de deformación")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("classical", "Trayectorias, acción, p⁰ y residuos de identidades"),
        ("kernel", "Evaluación de p = p⁰·p^conj con cota de cola"),
        ("verify", "Suite completa de invariantes"),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--problem", required=True, help="Archivo de problema JSON")
        sub.add_argument("--t", default="0.2", help="Lista de tiempos complejos, p. ej. '0.2,0.3i'")
        sub.add_argument("--xy", default=None, help="'x|y;x|y' o 'grid:a:b:n'")
        sub.add_argument("--nmax", type=int, default=None)
        sub.add_argument("--tol", type=float, default=None)
        sub.add_argument("--quad", type=int, default=None, help="Nodos Q por dimensión del símplice")
        sub.add_argument("--order", type=int, default=None, help="Orden M de la cuadratura en τ")
        sub.add_argument("--steps", type=int, default=None, help="Pasos RK4 del problema de contorno")
        sub.add_argument("--out", default=settings.output_dir)
        sub.add_argument("--seed", type=int, default=settings.default_seed)
        sub.add_argument("--workers", type=int, default=settings.workers)
        if name == "verify":
            sub.add_argument("--slow", action="store_true", help="Incluir el contraste Crank–Nicolson")
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    for label in ("nmax", "quad", "order", "steps", "workers"):
        value = getattr(args, label)
        if value is not None and value <= (0 if label != "nmax" else -1):
            raise ProblemDefinitionError(f"--{label} debe ser positivo")
    if args.tol is not None and args.tol < 0:
        raise ProblemDefinitionError("--tol debe ser ≥ 0")
    path = Path(args.problem)
    problem = ProblemRepository().load(path)
    xs, ys = parse_points(args.xy, problem.model.nu)
    return RunConfig(
        command=args.command,
        problem_path=path,
        problem=problem,
        times=parse_times(args.t),
        xs=xs,
        ys=ys,
        n_max=args.nmax,
        tol=args.tol,
        quad=args.quad,
        order=args.order,
        steps=args.steps,
        out=Path(args.out),
        seed=args.seed,
        workers=args.workers,
        include_slow=getattr(args, "slow", False),
    )


# ===== COMANDOS =====

def cmd_classical(config: RunConfig) -> int:
    """Trayectorias, tablas Φ/Φ₀/θ/p⁰ e informe de residuos; 0 si se cumplen los contratos"""
    model = config.problem.model
    service = ClassicalService(model, config.steps)
    s = np.linspace(0.0, 1.0, 21)

    def process(t: complex):
        bundle = service.solve_bvp(t)
        closed_error = None
        if has_closed_form(model):
            flat, sharp = closed_form_trajectories(model, t, s)
            closed_error = float(max(np.max(np.abs(bundle.q_flat(s) - flat)),
                                     np.max(np.abs(bundle.q_sharp(s) - sharp))))
        evaluations = [service.evaluate(t, x, y) for x, y in zip(config.xs, config.ys)]
        return bundle, evaluations, closed_error, service.gamma_theta(t)

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        outcomes = list(pool.map(process, config.times))

    writer = ArtifactWriter(config.out)
    records, trajectory_rows, action_rows = [], [], []
    passed = True
    for bundle, evaluations, closed_error, (gamma, theta) in outcomes:
        trajectory_rows.extend(service.trajectory_rows(bundle, samples=21))
        if closed_error is not None and closed_error > CLOSED_FORM_CONTRACT:
            passed = False
        for evaluation in evaluations:
            record = ClassicalRecord.from_evaluation(evaluation, closed_form_error=closed_error)
            records.append(record)
            passed &= all(record.residuals[k] <= v for k, v in CLASSICAL_CONTRACTS.items())
            action = evaluation.action
            action_rows.append((
                evaluation.t.real, evaluation.t.imag,
                ",".join(repr(float(v.real)) for v in evaluation.x),
                ",".join(repr(float(v.real)) for v in evaluation.y),
                action.phi.real, action.phi.imag, action.phi0.real, action.phi0.imag,
                gamma.real, gamma.imag, theta.real, theta.imag,
                action.theta_integral.real, action.theta_integral.imag,
                evaluation.p0.real, evaluation.p0.imag,
            ))
    writer.write_csv("trajectories.csv", service.trajectory_header(), trajectory_rows)
    writer.write_csv(
        "action.csv",
        ["t_re", "t_im", "x", "y", "phi_re", "phi_im", "phi0_re", "phi0_im",
         "gamma_re", "gamma_im", "theta_re", "theta_im",
         "theta_integral_re", "theta_integral_im", "p0_re", "p0_im"],
        action_rows,
    )
    max_conditioning = max(bundle.conditioning for bundle, *_ in outcomes)
    near_focal = max_conditioning > settings.focal_warning_limit
    if near_focal and not passed:
        logger.warning(
            f"⚠️ Contratos incumplidos con κ(V(1)) = {max_conditioning:.3e}: posible cercanía a un punto focal"
        )
    writer.write_json("classical_report.json", {
        "problem": config.problem.name,
        "max_conditioning": max_conditioning,
        "near_focal": near_focal,
        "contracts": {**CLASSICAL_CONTRACTS, "closed_form": CLOSED_FORM_CONTRACT},
        "passed": passed,
        "records": records,
    })
    return EXIT_OK if passed else EXIT_VERIFICATION


def cmd_kernel(config: RunConfig) -> int:
    """Registros JSON por punto, tabla de términos por orden y volcado de K̃ₜ"""
    problem = config.problem
    classical = ClassicalService(problem.model, config.steps)
    deformation = DeformationService(problem.model, classical, quadrature_order=config.order)
    series = SeriesService(problem.model, problem.potential, classical, deformation, nodes=config.quad)

    def process(t: complex):
        results = series.eval_kernel_batch(t, config.xs, config.ys, config.n_max, config.tol)
        kernel = deformation.kernel(t) if not problem.potential.is_spatially_constant else None
        return results, kernel

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        outcomes = list(pool.map(process, config.times))

    writer = ArtifactWriter(config.out)
    records, term_rows, grid_rows = [], [], []
    tol = settings.series_tol if config.tol is None else config.tol
    for t, (results, kernel) in zip(config.times, outcomes):
        for index, result in enumerate(results):
            records.append(KernelRecord.from_result(result))
            if result.tail_bound >= tol:
                logger.warning(f"⚠️ Cota de cola {result.tail_bound:.2e} ≥ tol en t={t}, punto {index}")
            for n, norm, bound in series.term_rows(result):
                term_rows.append((t.real, t.imag, index, n, norm, bound))
        if kernel is not None:
            grid_rows.extend((t.real, t.imag) + row for row in deformation.grid_rows(kernel))
    writer.write_json("kernel_records.json", {"problem": problem.name, "records": records})
    writer.write_csv("series_terms.csv", ["t_re", "t_im", "point", "n", "norm_vn", "tail_bound"], term_rows)
    if grid_rows:
        writer.write_csv("deformation_grid.csv", ["t_re", "t_im"] + deformation.grid_header(), grid_rows)
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    """Informe PASS/FAIL/SKIPPED por invariante; 0 solo si nada falla"""
    service = VerificationService(
        config.problem,
        seed=config.seed,
        n_max=config.n_max if config.n_max is not None else VERIFY_N_MAX,
        nodes=config.quad or VERIFY_NODES,
        identity_samples=VERIFY_IDENTITY_SAMPLES,
        positivity_times=VERIFY_POSITIVITY_TIMES,
        positivity_configs=VERIFY_POSITIVITY_CONFIGS,
        include_slow=config.include_slow,
    )
    report = service.run()
    writer = ArtifactWriter(config.out)
    writer.write_json("verification_report.json", VerificationResponse.from_report(report))
    if service.semigroup_snapshot is not None:
        writer.write_csv(
            "semigroup_snapshot.csv",
            ["x", "re_evolved", "im_evolved", "re_direct", "im_direct"],
            snapshot_rows(*service.semigroup_snapshot),
        )
    return EXIT_OK if report.passed else EXIT_VERIFICATION


COMMANDS = {"classical": cmd_classical, "kernel": cmd_kernel, "verify": cmd_verify}


def _write_error(out: Path, exc: DeformationError) -> None:
    payload = {**exc.to_dict(), "exit_code": exc.exit_code}
    try:
        ArtifactWriter(out).write_json("error.json", payload)
    except OSError as io_error:
        logger.error(f"❌ No se pudo escribir error.json: {io_error}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        config = build_config(args)
        logger.info(f"🚀 {config.command}: problema '{config.problem.name}', {len(config.times)} tiempos, "
                    f"{len(config.xs)} pares (x, y)")
        code = COMMANDS[config.command](config)
    except DeformationError as exc:
        logger.error(f"❌ {type(exc).__name__}: {exc.detail}")
        _write_error(out, exc)
        return exc.exit_code
    icon = "✅" if code == EXIT_OK else "❌"
    logger.info(f"{icon} {args.command} terminó con código {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
