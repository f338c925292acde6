import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from app.core.errors import BoundaryMassError
from app.modules.classical.service import ClassicalService
from app.modules.deformation.repository import KernelRepository
from app.modules.deformation.service import (
    DeformationService, build_kernel, direct_values, positivity_and_bounds, propagator_residual,
    quadratic_form, reference_form, unscaled_kernel
)
from app.modules.oracles.service import harmonic_kernel, magnetic_kernel

GRID = np.linspace(0.0, 1.0, 15)
S, SP = np.meshgrid(GRID, GRID, indexing="ij")
MASS_POSITIONS = tuple(np.round(np.linspace(0.1, 0.9, 9), 2))


@pytest.fixture(scope="module")
def harmonic_kernel_table(harmonic_model):
    return DeformationService(harmonic_model).kernel(0.25 * np.exp(0.5j))


# ===== CONSTRUCCIÓN =====

def test_free_kernel_is_brownian_bridge_covariance(free_model):
    kernel = build_kernel(free_model, 0.2)
    expected = np.minimum(S, SP) * (1.0 - np.maximum(S, SP))
    np.testing.assert_allclose(kernel(S, SP)[..., 0, 0], expected, atol=1e-10)


@pytest.mark.parametrize("t", [0.3, 0.3j])
def test_harmonic_kernel_matches_closed_form(harmonic_model, t):
    kernel = DeformationService(harmonic_model).kernel(t)
    np.testing.assert_allclose(kernel(S, SP), harmonic_kernel(1.0, t, S, SP), atol=1e-7)


def test_magnetic_kernel_matches_closed_form(magnetic_model):
    kernel = DeformationService(magnetic_model).kernel(0.2)
    beta = np.array([[0.0, 1.0], [-1.0, 0.0]])
    np.testing.assert_allclose(kernel(S, SP), magnetic_kernel(beta, 0.2, S, SP), atol=1e-7)


def test_direct_values_agree_with_table(harmonic_model):
    service = DeformationService(harmonic_model)
    kernel = service.kernel(0.2)
    s = np.array([0.15, 0.6, 0.9])
    sp = np.array([0.7, 0.3, 0.9])
    np.testing.assert_allclose(service.direct(0.2, s, sp), kernel(s, sp), atol=1e-8)


def test_doubling_tau_quadrature_is_stable(harmonic_model):
    classical = ClassicalService(harmonic_model)
    coarse = build_kernel(harmonic_model, 0.3j, quadrature_order=32, classical=classical)
    fine = build_kernel(harmonic_model, 0.3j, quadrature_order=64, classical=classical)
    assert np.max(np.abs(fine.nodal_values - coarse.nodal_values)) < 1e-10


def test_interpolation_at_random_points(harmonic_model):
    rng = np.random.default_rng(11)
    s, sp = rng.uniform(0.0, 1.0, (2, 200))
    service = DeformationService(harmonic_model)
    t = 0.25 * np.exp(0.4j)
    np.testing.assert_allclose(service.kernel(t)(s, sp), service.direct(t, s, sp), atol=1e-8)


def test_kernel_transpose_symmetry(magnetic_model):
    kernel = DeformationService(magnetic_model).kernel(0.2)
    values = kernel(S, SP)
    np.testing.assert_allclose(values, np.swapaxes(kernel(SP, S), -1, -2), atol=1e-9)
    assert kernel.diagonal_mismatch() < 1e-8


def test_kernel_dirichlet_boundary(harmonic_model):
    kernel = DeformationService(harmonic_model).kernel(0.2)
    assert np.max(np.abs(kernel(0.0, GRID))) < 1e-12
    assert np.max(np.abs(kernel(GRID, 1.0))) < 1e-12


def test_kernels_are_cached(harmonic_model):
    repository = KernelRepository(max_size=2)
    service = DeformationService(harmonic_model, repository=repository)
    assert service.kernel(0.17) is service.kernel(0.17)


def test_unscaled_kernel_requires_positive_real_time(harmonic_model):
    kernel = DeformationService(harmonic_model).kernel(0.3j)
    with pytest.raises(ValueError):
        unscaled_kernel(kernel, 0.1, 0.1)


def test_unscaled_kernel_rescales(free_model):
    kernel = build_kernel(free_model, 0.5)
    value = unscaled_kernel(kernel, 0.1, 0.3)[0, 0]
    # t·(σ∧σ′/t)(1 − σ∨σ′/t)
    assert value == pytest.approx(0.5 * 0.2 * (1.0 - 0.6), abs=1e-10)


# ===== ECUACIÓN DEL PROPAGADOR =====

@pytest.mark.parametrize("s_prime", [0.3, 0.5, 0.8])
def test_propagator_equation(harmonic_model, s_prime):
    classical = ClassicalService(harmonic_model)
    kernel = DeformationService(harmonic_model, classical).kernel(0.25)
    report = propagator_residual(kernel, harmonic_model, s_prime, classical=classical)
    assert report.homogeneous_residual < 1e-5
    assert report.jump_defect < 1e-5
    assert report.dirichlet < 1e-10
    np.testing.assert_allclose(report.jump, -np.eye(1), atol=1e-5)


def test_propagator_equation_time_dependent(load_problem):
    model = load_problem("time_dependent").model
    classical = ClassicalService(model)
    kernel = DeformationService(model, classical).kernel(0.25)
    report = propagator_residual(kernel, model, 0.5, classical=classical)
    assert report.homogeneous_residual < 1e-5
    assert report.jump_defect < 1e-5


# ===== FORMA CUADRÁTICA =====

def test_reference_form_single_mass(free_model):
    assert reference_form(free_model, [(0.5, [1.0])]) == pytest.approx(0.25)


def test_free_form_equals_reference(free_model):
    kernel = build_kernel(free_model, 0.2)
    masses = [(0.2, [1.0]), (0.7, [-0.5])]
    assert quadratic_form(kernel, masses) == pytest.approx(reference_form(free_model, masses), abs=1e-10)


@pytest.mark.parametrize("s", [0.0, 1.0])
def test_boundary_masses_rejected(free_model, s):
    kernel = build_kernel(free_model, 0.2)
    with pytest.raises(BoundaryMassError) as exc:
        quadratic_form(kernel, [(s, [1.0])])
    assert exc.value.exit_code == 2


def test_empty_measure_has_zero_form(free_model):
    kernel = build_kernel(free_model, 0.2)
    assert quadratic_form(kernel, []) == 0
    report = positivity_and_bounds(kernel, free_model, [])
    assert report.passed


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_positivity_and_size_bounds(harmonic_model, harmonic_kernel_table, data):
    positions = data.draw(st.lists(st.sampled_from(MASS_POSITIONS), min_size=1, max_size=5, unique=True))
    weights = data.draw(st.lists(
        st.floats(min_value=0.1, max_value=2.0).flatmap(lambda v: st.sampled_from([v, -v])),
        min_size=len(positions), max_size=len(positions),
    ))
    masses = [(s, [w]) for s, w in zip(positions, weights)]
    report = positivity_and_bounds(harmonic_kernel_table, harmonic_model, masses)
    assert report.real_part >= -1e-12
    assert report.form_ratio <= 2.0
    assert report.size_ratio <= 1.0
    assert report.passed


def test_positivity_two_dimensional(magnetic_model):
    kernel = DeformationService(magnetic_model).kernel(0.2 * np.exp(-0.4j))
    masses = [(0.25, [1.0, -0.5]), (0.6, [0.3, 0.8]), (0.85, [-1.2, 0.1])]
    report = positivity_and_bounds(kernel, magnetic_model, masses)
    assert report.passed
    assert report.form_0 > 0


def test_grid_rows_layout(magnetic_model):
    service = DeformationService(magnetic_model)
    rows = service.grid_rows(service.kernel(0.2), points=5)
    assert len(rows) == 25
    assert all(len(row) == len(service.grid_header()) for row in rows)


def test_direct_values_shape(harmonic_model):
    values = direct_values(harmonic_model, 0.2, np.array([[0.1, 0.2]]), 0.5, quadrature_order=16)
    assert values.shape == (1, 2, 1, 1)
