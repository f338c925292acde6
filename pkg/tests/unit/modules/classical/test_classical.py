import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from app.core.errors import FocalPointError, OutOfRadiusError, UndefinedAtZeroError
from app.modules.classical.repository import TrajectoryRepository
from app.modules.classical.service import (
    ClassicalService, assemble_qnat, euler_lagrange_coeffs, solve_bvp_many, symplectic_defect
)
from app.modules.oracles.service import (
    free_kernel, harmonic_action, harmonic_theta_integral, harmonic_trajectories,
    magnetic_trajectories, mehler_kernel
)

S = np.linspace(0.0, 1.0, 41)


# ===== TRAYECTORIAS =====

def test_free_trajectories_are_linear(free_model):
    bundle = ClassicalService(free_model).solve_bvp(0.2)
    np.testing.assert_allclose(bundle.q_flat(S)[:, 0, 0], S, atol=1e-12)
    np.testing.assert_allclose(bundle.q_sharp(S)[:, 0, 0], 1.0 - S, atol=1e-12)
    assert bundle.conditioning == pytest.approx(1.0)


@pytest.mark.parametrize("t", [0.3, 0.4j, 0.25 * np.exp(0.6j)])
def test_harmonic_trajectories_match_closed_form(harmonic_model, t):
    bundle = ClassicalService(harmonic_model).solve_bvp(t)
    flat, sharp = harmonic_trajectories(1.0, t, S)
    np.testing.assert_allclose(bundle.q_flat(S), flat, atol=1e-8)
    np.testing.assert_allclose(bundle.q_sharp(S), sharp, atol=1e-8)
    assert bundle.boundary_defect() < 1e-10


def test_magnetic_trajectories_match_closed_form(magnetic_model):
    t = 0.2
    bundle = ClassicalService(magnetic_model).solve_bvp(t)
    flat, sharp = magnetic_trajectories(np.array([[0.0, 1.0], [-1.0, 0.0]]), t, S)
    np.testing.assert_allclose(bundle.q_flat(S), flat, atol=1e-8)
    np.testing.assert_allclose(bundle.q_sharp(S), sharp, atol=1e-8)


def test_rk4_error_drops_with_step_halving(stiff_harmonic_model):
    # ω = 3, t = 0.9: t²ω² ≈ 7.3, lejos del redondeo con 16 y 32 pasos
    t = 0.9
    nodes = np.linspace(0.0, 1.0, 17)
    flat, sharp = harmonic_trajectories(3.0, t, nodes)
    errors = []
    for steps in (16, 32):
        bundle = ClassicalService(stiff_harmonic_model, steps).solve_bvp(t)
        errors.append(max(np.max(np.abs(bundle.q_flat(nodes) - flat)), np.max(np.abs(bundle.q_sharp(nodes) - sharp))))
    assert errors[1] > 0
    assert errors[0] / errors[1] >= 12.0


def test_trajectory_derivative_interpolation(harmonic_model):
    bundle = ClassicalService(harmonic_model).solve_bvp(0.3)
    h = 1e-5
    s = np.array([0.2, 0.5, 0.8])
    numeric = (bundle.q_flat(s + h) - bundle.q_flat(s - h)) / (2 * h)
    np.testing.assert_allclose(bundle.q_flat(s, 1), numeric, atol=1e-6)
    with pytest.raises(ValueError):
        bundle.q_flat(s, 2)


def test_assembled_trajectory_hits_endpoints(harmonic_model):
    bundle = ClassicalService(harmonic_model).solve_bvp(0.3)
    x, y = np.array([0.7]), np.array([-0.4])
    np.testing.assert_allclose(assemble_qnat(bundle, x, y, 0.0), y, atol=1e-12)
    np.testing.assert_allclose(assemble_qnat(bundle, x, y, 1.0), x, atol=1e-12)


def test_symplectic_invariant_vanishes(harmonic_model, magnetic_model, load_problem):
    for model in (harmonic_model, magnetic_model, load_problem("time_dependent").model):
        bundle = ClassicalService(model).solve_bvp(0.2)
        assert symplectic_defect(model, bundle) < 1e-9


def test_trajectories_stay_bounded_near_zero(load_problem):
    bundle = ClassicalService(load_problem("time_dependent").model).solve_bvp(0.05)
    flat_sup, sharp_sup = bundle.sup_norms()
    assert flat_sup <= 2.0 and sharp_sup <= 2.0


def test_focal_point_detected(stiff_harmonic_model):
    # ω = 3, t = 0.52i: V(1) = sin(3.12)/3.12, κ ≈ 46
    coeffs = euler_lagrange_coeffs(stiff_harmonic_model)
    bundles = solve_bvp_many(coeffs, [0.52j], focal_limit=1e3)
    assert 40.0 < bundles[0].conditioning < 50.0
    with pytest.raises(FocalPointError) as exc:
        solve_bvp_many(coeffs, [0.52j], focal_limit=10.0)
    assert exc.value.exit_code == 3
    assert exc.value.conditioning > 10.0


def test_out_of_radius_rejected(free_model):
    with pytest.raises(OutOfRadiusError):
        ClassicalService(free_model).solve_bvp(1.2)


def test_too_few_steps_rejected(free_model):
    with pytest.raises(ValueError):
        solve_bvp_many(euler_lagrange_coeffs(free_model), [0.1], steps=8)


# ===== MEMOIZACIÓN =====

def test_bundles_are_memoized(harmonic_model):
    repository = TrajectoryRepository(max_size=8)
    service = ClassicalService(harmonic_model, repository=repository)
    first = service.solve_bvp(0.123)
    second = service.solve_bvp(0.123)
    assert first is second
    assert repository.stats()["hits"] >= 1


def test_repository_evicts_least_recent(harmonic_model):
    repository = TrajectoryRepository(max_size=2)
    service = ClassicalService(harmonic_model, repository=repository)
    service.solve_bvp_many([0.11, 0.12, 0.13])
    assert len(repository) == 2
    assert repository.get(repository.key(harmonic_model.key, 0.11, service.steps)) is None


def test_batch_deduplicates_times(harmonic_model):
    repository = TrajectoryRepository(max_size=8)
    service = ClassicalService(harmonic_model, repository=repository)
    bundles = service.solve_bvp_many([0.21, 0.21, 0.22])
    assert bundles[0] is bundles[1]
    assert len(repository) == 2


# ===== ACCIÓN Y p⁰ =====

@given(
    st.floats(min_value=-2.0, max_value=2.0, allow_nan=False),
    st.floats(min_value=-2.0, max_value=2.0, allow_nan=False),
)
@settings(max_examples=25, deadline=None)
def test_free_action_is_quarter_square_distance(free_model, x, y):
    form = ClassicalService(free_model).action_form(0.3)
    assert complex(form.value([x], [y])) == pytest.approx((x - y) ** 2 / 4.0, abs=1e-12)


@pytest.mark.parametrize("t", [0.2, 0.3j])
def test_harmonic_action_matches_closed_form(harmonic_model, t):
    service = ClassicalService(harmonic_model)
    x, y = np.array([0.5]), np.array([-0.3])
    result = service.action_phi(service.solve_bvp(t), x, y)
    assert result.phi == pytest.approx(harmonic_action(1.0, t, x, y), abs=1e-10)
    assert result.theta_integral == pytest.approx(harmonic_theta_integral(1.0, t), abs=1e-9)
    assert result.phi0 == pytest.approx(result.phi - result.theta_integral)


def test_free_p0_matches_heat_kernel(free_model):
    service = ClassicalService(free_model)
    value = service.p0(0.2, [0.5], [-0.5])
    assert value == pytest.approx(complex(free_kernel(0.2, [0.5], [-0.5])), rel=1e-9)


@pytest.mark.parametrize("t", [0.1, 0.2])
def test_harmonic_p0_matches_mehler(harmonic_model, t):
    value = ClassicalService(harmonic_model).p0(t, [0.5], [-0.5])
    reference = mehler_kernel(1.0, t, 0.5, -0.5)
    assert abs(value - reference) / abs(reference) < 1e-7


def test_p0_field_matches_pointwise(harmonic_model):
    service = ClassicalService(harmonic_model)
    xs = np.array([[0.1], [0.4], [-0.8]])
    field = service.p0_field(0.2, xs, [0.3])
    for value, x in zip(field, xs):
        assert value == pytest.approx(service.p0(0.2, x, [0.3]), rel=1e-12)


def test_p0_undefined_at_zero(free_model):
    with pytest.raises(UndefinedAtZeroError):
        ClassicalService(free_model).prefactor(0.0)


def test_theta_vanishes_for_free_model(free_model):
    service = ClassicalService(free_model)
    np.testing.assert_allclose(service.theta_many([0.2, 1e-5, 0.3j]), 0.0, atol=1e-9)


def test_psi_extrapolates_near_zero(harmonic_model):
    service = ClassicalService(harmonic_model)
    x, y = np.array([0.5]), np.array([-0.5])
    near = service.psi(1e-7, x, y)
    direct = service.psi(1e-3, x, y)
    assert near == pytest.approx(direct, abs=1e-3)


# ===== IDENTIDADES =====

@pytest.mark.parametrize("t", [0.2, 0.15 + 0.1j])
def test_eikonal_and_classical_identities(harmonic_model, t):
    service = ClassicalService(harmonic_model)
    x, y = np.array([0.3]), np.array([-0.4])
    assert service.eikonal_residual(t, x, y) < 1e-6
    assert service.classical_identity_residuals(t, x, y).worst() < 1e-6


def test_identities_in_two_dimensions(magnetic_model):
    service = ClassicalService(magnetic_model)
    evaluation = service.evaluate(0.2, [0.3, -0.1], [-0.2, 0.4])
    residuals = evaluation.residuals()
    assert residuals["boundary_defect"] < 1e-10
    assert residuals["eikonal"] < 1e-6
    assert residuals["gradient_identity"] < 1e-6
    assert residuals["transport_identity"] < 1e-6
    assert residuals["symplectic_invariant"] < 1e-9


def test_identities_need_nonzero_time(free_model):
    with pytest.raises(UndefinedAtZeroError):
        ClassicalService(free_model).classical_identity_residuals(0.0, [0.1], [0.2])


def test_trajectory_rows_layout(magnetic_model):
    service = ClassicalService(magnetic_model)
    rows = service.trajectory_rows(service.solve_bvp(0.2), samples=5)
    header = service.trajectory_header()
    assert len(rows) == 5
    assert all(len(row) == len(header) for row in rows)
    assert header[:3] == ["t_re", "t_im", "s"]
