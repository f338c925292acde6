import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import ValidationError

from app.core.errors import ProblemDefinitionError
from app.modules.operator_model.models import (
    CoefficientModel, FourierMode, FourierPotential, Problem, TaylorMatrix
)
from app.modules.operator_model.schemas import (
    CoefficientSpec, MatrixEntry, ProblemSpec, parse_complex
)

logger = logging.getLogger(__name__)

BUILTIN_RADIUS = 1.0


class ProblemRepository:
    """Carga de archivos de problema y registro de modelos incorporados"""

    # ===== REGISTRO INCORPORADO =====

    @staticmethod
    def free(nu: int = 1) -> CoefficientModel:
        return CoefficientModel(
            nu=nu,
            A=TaylorMatrix.identity(nu),
            B=TaylorMatrix.zeros(nu),
            C=TaylorMatrix.zeros(nu),
            validity_radius=BUILTIN_RADIUS,
            name="free",
            builtin=("free", {}),
        )

    @staticmethod
    def harmonic(lam: float = 1.0, nu: int = 1) -> CoefficientModel:
        return CoefficientModel(
            nu=nu,
            A=TaylorMatrix.identity(nu),
            B=TaylorMatrix.zeros(nu),
            C=TaylorMatrix.constant(lam * np.eye(nu)),
            validity_radius=BUILTIN_RADIUS,
            name=f"harmonic(lam={lam:g})",
            builtin=("harmonic", {"lam": float(lam)}),
        )

    @staticmethod
    def magnetic(beta=None) -> CoefficientModel:
        beta = np.array([[0.0, 1.0], [-1.0, 0.0]] if beta is None else beta, dtype=float)
        if beta.ndim != 2 or beta.shape[0] != beta.shape[1]:
            raise ProblemDefinitionError("β debe ser una matriz cuadrada")
        if not np.allclose(beta, -beta.T, atol=1e-14):
            raise ProblemDefinitionError("β debe ser antisimétrica", beta=beta.tolist())
        nu = beta.shape[0]
        return CoefficientModel(
            nu=nu,
            A=TaylorMatrix.identity(nu),
            B=TaylorMatrix.constant(-0.5j * beta),
            C=TaylorMatrix.zeros(nu),
            validity_radius=BUILTIN_RADIUS,
            name="magnetic",
            builtin=("magnetic", {"beta": beta.tolist()}),
        )

    def builtin(self, name: str, nu: int = 1, lam: Optional[float] = None, beta=None) -> CoefficientModel:
        if name == "free":
            return self.free(nu)
        if name == "harmonic":
            return self.harmonic(1.0 if lam is None else lam, nu)
        if name == "magnetic":
            return self.magnetic(beta)
        raise ProblemDefinitionError(f"Modelo incorporado desconocido: {name}")

    # ===== CARGA DE ARCHIVOS =====

    def load(self, path: Union[str, Path]) -> Problem:
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ProblemDefinitionError(f"Archivo de problema no encontrado: {path}")
        except json.JSONDecodeError as exc:
            raise ProblemDefinitionError(f"JSON inválido en {path}: {exc}")
        problem = self.from_dict(data, default_name=path.stem)
        logger.info(f"✅ Problema '{problem.name}' cargado desde {path}")
        return problem

    def from_dict(self, data: Dict[str, Any], default_name: str = "problem") -> Problem:
        try:
            spec = ProblemSpec.model_validate(data)
        except ValidationError as exc:
            raise ProblemDefinitionError("Archivo de problema inválido", errors=exc.errors(include_url=False))
        return self.from_spec(spec, default_name)

    def from_spec(self, spec: ProblemSpec, default_name: str = "problem") -> Problem:
        nu = spec.nu
        try:
            if spec.builtin is not None:
                base = self.builtin(spec.builtin.name, nu, spec.builtin.lam, spec.builtin.beta)
                if base.nu != nu:
                    raise ProblemDefinitionError(f"β define ν={base.nu} pero el archivo declara ν={nu}")
                coefficients = {"A": base.A, "B": base.B, "C": base.C}
            else:
                coefficients = {"A": None, "B": TaylorMatrix.zeros(nu), "C": TaylorMatrix.zeros(nu)}
            for label in ("A", "B", "C"):
                entry = getattr(spec, label)
                if entry is not None:
                    coefficients[label] = self._coefficient(label, entry, nu)
            radius = spec.validity_radius or BUILTIN_RADIUS
            is_builtin = spec.builtin is not None and all(getattr(spec, k) is None for k in "ABC")
            if not is_builtin and spec.validity_radius is None:
                logger.warning(
                    f"⚠️ Problema polinomial sin validity_radius: se asume {BUILTIN_RADIUS:g}; "
                    f"fíjalo al radio de convergencia de A, B, C"
                )
            model = CoefficientModel(
                nu=nu,
                A=coefficients["A"],
                B=coefficients["B"],
                C=coefficients["C"],
                validity_radius=radius,
                name=(spec.builtin.name if is_builtin else "custom-polynomial"),
                builtin=(base.builtin if is_builtin else None),
            )
            potential = self._potential(spec, nu)
        except ValueError as exc:
            raise ProblemDefinitionError(str(exc))

        # evita import circular: la validación vive en el servicio
        from app.modules.operator_model.service import validate_hypotheses
        validate_hypotheses(model)
        return Problem(model=model, potential=potential, name=spec.name or default_name)

    # ===== AUXILIARES =====

    def _coefficient(self, label: str, entry: CoefficientSpec, nu: int) -> TaylorMatrix:
        if entry.builtin is not None:
            base = self.builtin(entry.builtin, nu, entry.lam, entry.beta)
            return getattr(base, label)
        return TaylorMatrix(np.stack([self._matrix(m, nu) for m in entry.taylor]))

    def _potential(self, spec: ProblemSpec, nu: int) -> FourierPotential:
        if spec.potential is None:
            return FourierPotential.zero(nu)
        d = spec.potential.d
        modes: List[FourierMode] = []
        for mode in spec.potential.modes:
            if len(mode.xi) != nu:
                raise ProblemDefinitionError(f"ξ={mode.xi} no tiene dimensión ν={nu}")
            amplitude = TaylorMatrix(np.stack([self._matrix(m, d) for m in mode.amplitude_taylor]))
            modes.append(FourierMode(np.asarray(mode.xi), amplitude))
        return FourierPotential(nu=nu, d=d, modes=tuple(modes))

    @staticmethod
    def _matrix(entry: MatrixEntry, size: int) -> np.ndarray:
        if isinstance(entry, list):
            matrix = np.array([[parse_complex(v) for v in row] for row in entry], dtype=complex)
            if matrix.shape != (size, size):
                raise ProblemDefinitionError(f"Se esperaba una matriz {size}×{size}, recibida {matrix.shape}")
            return matrix
        return parse_complex(entry) * np.eye(size, dtype=complex)
