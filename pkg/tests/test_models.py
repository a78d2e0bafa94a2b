import numpy as np
import pytest

from satlab.errors import DomainError, HypothesisViolationError, InvalidInputError
from satlab.models import (LinearModel, SourcePrior, add_noise, default_ground_truth,
                           estimate_lipschitz, make_composition_model,
                           make_diagonal_linear, sample_in_ball, synthesize_instance,
                           unit_direction)


def test_diagonal_model_spectrum_and_norm():
    model = make_diagonal_linear(5, s=2.0)
    want = np.diag([float(i) ** -2.0 for i in range(1, 6)])
    assert model.matrix == pytest.approx(want, rel=0, abs=0)
    assert model.operator_norm == pytest.approx(1.0, rel=1e-14)
    assert model.gram == pytest.approx(want @ want, rel=0, abs=1e-15)
    assert model.lipschitz_bound == 0.0
    assert model.has_constant_derivative


def test_diagonal_model_scale():
    model = make_diagonal_linear(4, s=1.0, scale=3.0)
    assert model.matrix[0, 0] == pytest.approx(3.0)
    assert model.operator_norm == pytest.approx(3.0, rel=1e-14)


def test_diagonal_model_rejects_bad_sizes():
    with pytest.raises(InvalidInputError):
        make_diagonal_linear(0, s=2.0)
    with pytest.raises(InvalidInputError):
        make_diagonal_linear(4, s=-1.0)


def test_linear_apply_and_adjoint():
    model = LinearModel(np.array([[1.0, 2.0], [0.0, 1.0], [3.0, -1.0]]))
    x = np.array([0.5, -1.0])
    g = np.array([1.0, 2.0, 3.0])
    assert model.apply(x) == pytest.approx(model.matrix @ x, rel=0, abs=0)
    assert model.derivative_adjoint_apply(x, g) == pytest.approx(model.matrix.T @ g, rel=0, abs=0)
    with pytest.raises(InvalidInputError):
        model.apply(np.ones(3))
    with pytest.raises(InvalidInputError):
        model.derivative_adjoint_apply(x, np.ones(2))


def test_default_ground_truth_is_normalized_harmonic():
    x = default_ground_truth(4)
    ref = 1.0 / np.arange(1, 5, dtype=float)
    ref /= np.linalg.norm(ref)
    assert x == pytest.approx(ref, rel=0, abs=0)
    assert np.linalg.norm(default_ground_truth(200)) == pytest.approx(1.0, rel=1e-14)


def test_composition_model_hand_values():
    matrix = np.diag([1.0, 0.5])
    model = make_composition_model(matrix, beta=0.25, rho=2.0)
    x = np.array([0.3, -0.2])
    want = matrix @ (x + 0.25 * np.sin(x))
    assert model.apply(x) == pytest.approx(want, rel=1e-15)
    jac = matrix @ np.diag(1.0 + 0.25 * np.cos(x))
    assert model.derivative(x) == pytest.approx(jac, rel=1e-15)
    h = np.array([1.0, 1.0])
    assert model.derivative_apply(x, h) == pytest.approx(jac @ h, rel=1e-14)
    assert model.derivative_adjoint_apply(x, h) == pytest.approx(jac.T @ h, rel=1e-14)
    assert not model.has_constant_derivative


def test_composition_constants():
    model = make_composition_model(np.diag([1.0, 0.5]), beta=0.2)
    assert model.lipschitz_bound == pytest.approx(0.2, rel=1e-14)          # beta * ||A||
    assert model.kappa0_bound == pytest.approx(0.25, rel=1e-14)            # beta / (1 - beta)
    assert model.derivative_sup_bound == pytest.approx(1.2, rel=1e-14)     # (1 + beta) * ||A||
    with pytest.raises(InvalidInputError):
        make_composition_model(np.diag([1.0, 0.5]), beta=1.0)
    with pytest.raises(InvalidInputError):
        make_composition_model(np.diag([1.0, 0.5]), beta=-0.1)


def test_in_domain_uses_center_and_radius():
    model = LinearModel(np.eye(2), rho=1.0, center=np.zeros(2))
    assert model.in_domain(np.array([0.5, 0.5]))
    assert not model.in_domain(np.array([1.5, 0.0]))
    shifted = model.with_center(np.array([10.0, 0.0]))
    assert shifted.in_domain(np.array([10.5, 0.0]))
    assert not shifted.in_domain(np.array([0.5, 0.5]))


def test_source_prior_validation():
    with pytest.raises(InvalidInputError):
        SourcePrior(nu=0.3, element=np.ones(3))
    with pytest.raises(InvalidInputError):
        SourcePrior(nu=0.75, element=np.ones(3))
    with pytest.raises(InvalidInputError):
        SourcePrior(nu=-1.0, element=np.ones(3))
    # allowed: the half-order case and integer-like orders >= 1
    SourcePrior(nu=0.5, element=np.ones(3))
    SourcePrior(nu=1.0, element=np.ones(3))
    SourcePrior(nu=2.0, element=np.ones(3))


def test_synthesize_half_order_offset_is_adjoint_image():
    model = make_diagonal_linear(4, s=2.0)
    x_true = default_ground_truth(4)
    u = np.array([0.4, 0.2, 0.1, 0.05])
    inst = synthesize_instance(model, x_true, SourcePrior(nu=0.5, element=u))
    sigma = np.array([float(i) ** -2.0 for i in range(1, 5)])
    assert inst.x_true - inst.x_prior == pytest.approx(sigma * u, rel=1e-13)
    assert inst.source_norm == pytest.approx(float(np.linalg.norm(u)), rel=1e-15)
    assert inst.y_exact == pytest.approx(model.apply(x_true), rel=0, abs=0)


def test_synthesize_first_order_offset():
    model = LinearModel(np.diag([1.0, 0.5]), rho=2.0)
    w = np.array([1.0, 1.0])
    inst = synthesize_instance(model, np.array([1.0, 1.0]), SourcePrior(nu=1.0, element=w))
    # offset = (A*A)^1 w, so the second component picks up sigma^2 = 1/4
    assert inst.x_true - inst.x_prior == pytest.approx([1.0, 0.25], rel=1e-14)


def test_synthesize_rejects_prior_outside_ball():
    model = make_diagonal_linear(4, s=2.0)
    with pytest.raises(DomainError):
        synthesize_instance(model, default_ground_truth(4),
                            SourcePrior(nu=0.5, element=np.ones(4) * 3.0))


def test_require_small_source_guard():
    matrix = np.diag([1.0, 0.5])
    model = make_composition_model(matrix, beta=0.5, rho=10.0)
    big = np.array([3.0, 1.0])  # L * ||u|| = 0.5 * sqrt(10) > 1
    with pytest.raises(HypothesisViolationError):
        synthesize_instance(model, np.array([0.1, 0.1]), SourcePrior(nu=0.5, element=big),
                            require_small_source=True)
    # same data passes without the guard
    synthesize_instance(model, np.array([0.1, 0.1]), SourcePrior(nu=0.5, element=big))


def test_add_noise_has_exact_level(small_instance):
    obs = add_noise(small_instance, 1e-3, unit_direction(40, (0, 0)))
    assert obs.delta == 1e-3
    assert np.linalg.norm(obs.y_noisy - small_instance.y_exact) == pytest.approx(1e-3, rel=1e-12)
    with pytest.raises(InvalidInputError):
        add_noise(small_instance, -1.0, unit_direction(40, (0, 0)))


def test_unit_direction_deterministic_unit_norm():
    d1 = unit_direction(17, (4, 2))
    d2 = unit_direction(17, (4, 2))
    d3 = unit_direction(17, (4, 3))
    assert np.array_equal(d1, d2)
    assert not np.array_equal(d1, d3)
    assert np.linalg.norm(d1) == pytest.approx(1.0, rel=1e-14)


def test_sample_in_ball_stays_inside():
    rng = np.random.default_rng(0)
    center = np.array([1.0, -2.0, 0.5])
    for _ in range(50):
        p = sample_in_ball(rng, center, 0.7)
        assert np.linalg.norm(p - center) <= 0.7 + 1e-12


def test_estimate_lipschitz_linear_is_zero_and_composition_positive():
    linear = make_diagonal_linear(6, s=2.0)
    assert estimate_lipschitz(linear, n_samples=20, seed=1) == 0.0
    comp = make_composition_model(np.diag([1.0, 0.5, 0.25]), beta=0.3, rho=1.0,)
    est = estimate_lipschitz(comp, n_samples=50, seed=1)
    assert 0.0 < est <= comp.lipschitz_bound * (1.0 + 1e-9)
