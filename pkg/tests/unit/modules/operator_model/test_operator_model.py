import numpy as np
import pytest

from app.core.errors import OutOfRadiusError, ProblemDefinitionError
from app.modules.operator_model.models import FourierMode, FourierPotential, TaylorMatrix
from app.modules.operator_model.schemas import parse_complex
from app.modules.operator_model.service import (
    a0_eigenvalues, amplitude_sup, analyticity_residual, check_real_axis, check_reality,
    eval_coefficients, eval_potential, moment_bound
)

SAMPLE_PROBLEMS = [
    "free", "harmonic", "harmonic_stiff", "magnetic", "cos_potential",
    "constant_potential", "time_dependent", "reality_violating",
]


def scalar_poly(*coefficients) -> TaylorMatrix:
    return TaylorMatrix(np.array(coefficients, dtype=complex)[:, None, None])


# ===== TAYLOR MATRIX =====

def test_horner_evaluation():
    g = scalar_poly(1.0, 2.0, 3.0)
    assert g(2.0)[0, 0] == pytest.approx(17.0)
    values = g(np.array([0.0, 1.0, 1j]))
    np.testing.assert_allclose(values[:, 0, 0], [1.0, 6.0, 1.0 + 2j - 3.0])


def test_integral_then_derivative_roundtrip():
    g = scalar_poly(1.0, -0.5, 0.25, 2.0)
    np.testing.assert_allclose(g.integral().derivative().coefficients, g.coefficients)
    assert g.integral()(0.0)[0, 0] == 0


def test_polynomial_product_and_substitution():
    product = scalar_poly(1.0, 1.0) @ scalar_poly(1.0, -1.0)
    np.testing.assert_allclose(product.coefficients[:, 0, 0], [1.0, 0.0, -1.0])
    g = scalar_poly(0.0, 1.0, 1.0)
    assert g.substitute(2.0)(0.5)[0, 0] == pytest.approx(g(1.0)[0, 0])


def test_matrix_valued_product_respects_order():
    left = TaylorMatrix.constant([[0.0, 1.0], [0.0, 0.0]])
    right = TaylorMatrix.constant([[0.0, 0.0], [1.0, 0.0]])
    np.testing.assert_allclose((left @ right)(0.0), [[1.0, 0.0], [0.0, 0.0]])
    np.testing.assert_allclose((right @ left)(0.0), [[0.0, 0.0], [0.0, 1.0]])


def test_constant_and_zero_detection():
    assert TaylorMatrix.identity(2).is_constant()
    assert TaylorMatrix.zeros(2).is_zero()
    assert not scalar_poly(1.0, 1e-3).is_constant()


def test_taylor_matrix_rejects_bad_shape():
    with pytest.raises(ValueError):
        TaylorMatrix(np.ones((2, 2)))


def test_parse_complex_accepts_i_suffix():
    assert parse_complex("0.3i") == 0.3j
    assert parse_complex("1-2i") == 1 - 2j
    assert parse_complex(0.5) == 0.5
    with pytest.raises(ValueError):
        parse_complex("abc")


# ===== HIPÓTESIS =====

def test_reality_holds_for_builtins(free_model, harmonic_model, magnetic_model):
    for model in (free_model, harmonic_model, magnetic_model):
        assert check_reality(model).real


def test_reality_reports_offending_coefficients(load_problem):
    report = check_reality(load_problem("reality_violating").model)
    assert not report.real
    assert report.offending == ("A[1]",)


def test_real_axis_check(load_problem, repository):
    assert check_real_axis(load_problem("reality_violating").model).real
    model = repository.from_dict({"nu": 1, "A": {"taylor": [1.0, "0.2i"]}, "validity_radius": 1.0}).model
    report = check_real_axis(model)
    assert not report.real
    assert report.offending == ("A[1]",)


def test_even_time_dependence_keeps_reality(load_problem):
    assert check_reality(load_problem("time_dependent").model).real


def test_non_symmetric_a_rejected(repository):
    spec = {"nu": 2, "A": {"taylor": [[[1.0, 0.5], [0.0, 1.0]]]}}
    with pytest.raises(ProblemDefinitionError):
        repository.from_dict(spec)


def test_non_positive_a0_rejected(repository):
    with pytest.raises(ProblemDefinitionError) as exc:
        repository.from_dict({"nu": 1, "A": {"taylor": [-1.0]}})
    assert exc.value.exit_code == 2


def test_polynomial_without_radius_warns(repository, caplog):
    with caplog.at_level("WARNING", logger="app.modules.operator_model.repository"):
        problem = repository.from_dict({"nu": 1, "A": {"taylor": [1.0, 0.1]}})
    assert problem.model.validity_radius == 1.0
    assert any("validity_radius" in record.getMessage() for record in caplog.records)


def test_builtin_without_radius_is_silent(repository, caplog):
    with caplog.at_level("WARNING", logger="app.modules.operator_model.repository"):
        repository.from_dict({"nu": 1, "builtin": {"name": "harmonic", "lam": 1.0}})
    assert not any("validity_radius" in record.getMessage() for record in caplog.records)


def test_complex_a0_rejected(repository):
    with pytest.raises(ProblemDefinitionError):
        repository.from_dict({"nu": 1, "A": {"taylor": ["1+0.5i"]}})


def test_a0_eigenvalues(magnetic_model):
    np.testing.assert_allclose(a0_eigenvalues(magnetic_model), [1.0, 1.0])


def test_analyticity_residual_small_for_polynomials(load_problem):
    assert analyticity_residual(load_problem("time_dependent").model) < 1e-8


def test_coefficients_outside_radius(free_model):
    with pytest.raises(OutOfRadiusError) as exc:
        eval_coefficients(free_model, 1.5)
    assert exc.value.exit_code == 3


def test_magnetic_coefficients(magnetic_model):
    A, B, C = eval_coefficients(magnetic_model, 0.3)
    np.testing.assert_allclose(A, np.eye(2))
    np.testing.assert_allclose(B, -0.5j * np.array([[0.0, 1.0], [-1.0, 0.0]]))
    np.testing.assert_allclose(C, np.zeros((2, 2)))


# ===== REPOSITORIO =====

@pytest.mark.parametrize("name", SAMPLE_PROBLEMS)
def test_sample_problems_load(load_problem, name):
    problem = load_problem(name)
    assert problem.name == name
    assert problem.model.nu == problem.potential.nu


def test_builtin_registry_flags(load_problem):
    assert load_problem("harmonic_stiff").model.builtin == ("harmonic", {"lam": 9.0})
    assert load_problem("time_dependent").model.builtin is None
    assert load_problem("time_dependent").model.name == "custom-polynomial"
    assert not load_problem("time_dependent").model.is_autonomous()


def test_model_key_is_stable(repository):
    first = repository.from_dict({"nu": 1, "builtin": {"name": "harmonic", "lam": 2.0}})
    second = repository.from_dict({"nu": 1, "builtin": {"name": "harmonic", "lam": 2.0}})
    other = repository.from_dict({"nu": 1, "builtin": {"name": "harmonic", "lam": 3.0}})
    assert first.model.key == second.model.key
    assert first.model.key != other.model.key


def test_missing_file_is_a_configuration_error(repository, tmp_path):
    with pytest.raises(ProblemDefinitionError):
        repository.load(tmp_path / "missing.json")


def test_invalid_json_is_a_configuration_error(repository, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{nu: 1", encoding="utf-8")
    with pytest.raises(ProblemDefinitionError):
        repository.load(path)


def test_schema_errors_are_reported(repository):
    with pytest.raises(ProblemDefinitionError) as exc:
        repository.from_dict({"builtin": {"name": "free"}})
    assert "errors" in exc.value.context


def test_magnetic_dimension_mismatch(repository):
    with pytest.raises(ProblemDefinitionError):
        repository.from_dict({"nu": 1, "builtin": {"name": "magnetic"}})


def test_non_antisymmetric_beta_rejected(repository):
    with pytest.raises(ProblemDefinitionError):
        repository.from_dict({"nu": 2, "builtin": {"name": "magnetic", "beta": [[0.0, 1.0], [1.0, 0.0]]}})


def test_potential_frequency_dimension_checked(repository):
    spec = {
        "nu": 1,
        "builtin": {"name": "free"},
        "potential": {"modes": [{"xi": [1.0, 0.0], "amplitude_taylor": [1.0]}]},
    }
    with pytest.raises(ProblemDefinitionError):
        repository.from_dict(spec)


# ===== POTENCIAL =====

def test_cosine_potential_values(cos_potential):
    x = np.array([[0.0], [0.3], [np.pi]])
    values = eval_potential(cos_potential, 0.1, x)
    assert values.shape == (3, 1, 1)
    np.testing.assert_allclose(values[:, 0, 0], 0.5 * np.cos(x[:, 0]), atol=1e-15)


def test_potential_flags(load_problem, cos_potential):
    assert load_problem("constant_potential").potential.is_spatially_constant
    assert not cos_potential.is_spatially_constant
    assert FourierPotential.zero(2).is_zero
    assert cos_potential.frequencies.shape == (2, 1)


def test_matrix_valued_potential():
    amplitude = TaylorMatrix.constant([[0.0, 1.0], [1.0, 0.0]])
    pot = FourierPotential(nu=1, d=2, modes=(FourierMode(np.array([0.0]), amplitude),))
    np.testing.assert_allclose(eval_potential(pot, 0.0, np.array([0.4])), [[0.0, 1.0], [1.0, 0.0]])


def test_mode_shape_validation():
    with pytest.raises(ValueError):
        FourierPotential(nu=2, d=1, modes=(FourierMode(np.array([1.0]), TaylorMatrix.identity(1)),))


def test_moment_bound_for_cosine(cos_potential):
    R = 0.7
    assert moment_bound(cos_potential, R, 0.5) == pytest.approx(0.5 * np.exp(R))


def test_amplitude_sup_bounds_samples():
    g = scalar_poly(0.2, 0.0, 0.5)
    T = 0.8
    samples = np.abs(g(T * np.exp(1j * np.linspace(0, 2 * np.pi, 200)))[:, 0, 0])
    assert amplitude_sup(g, T) >= samples.max() - 1e-12
    assert amplitude_sup(g, T) <= 0.2 + 0.5 * T ** 2 + 1e-12
