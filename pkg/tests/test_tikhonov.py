import dataclasses

import numpy as np
import pytest

from satlab.errors import DomainError, InvalidInputError
from satlab.hilbert import decompose, norm
from satlab.models import (LinearModel, add_noise, make_composition_model,
                           make_diagonal_linear, unit_direction)
from satlab.tikhonov import (continuation_solve, euler_residual, solve_linearized,
                             solve_nonlinear, stationarity_tolerance,
                             tikhonov_functional)


@pytest.fixture
def two_by_two():
    model = LinearModel(np.diag([1.0, 0.5]), rho=10.0, center=np.zeros(2))
    x_true = np.array([1.0, -1.0])
    x_prior = np.zeros(2)
    return model, x_true, x_prior


def test_functional_hand_value(two_by_two):
    model, x_true, x_prior = two_by_two
    y = model.apply(x_true)
    x = np.array([0.5, 0.5])
    misfit = model.apply(x) - y
    want = float(misfit @ misfit) + 0.1 * float(x @ x)
    assert tikhonov_functional(model, x, 0.1, y, x_prior) == pytest.approx(want, rel=1e-15)


def test_solve_linearized_closed_form(two_by_two):
    model, x_true, x_prior = two_by_two
    dec = decompose(model.matrix)
    noise = np.array([0.01, -0.02])
    x_hat = solve_linearized(dec, 0.1, x_true, x_prior, noise)
    # componentwise: x_true_i + (alpha (x*_i - x_true_i) + sigma_i n_i) / (alpha + sigma_i^2)
    assert x_hat == pytest.approx([101.0 / 110.0, -26.0 / 35.0], rel=1e-14)


def test_euler_residual_vanishes_at_linearized_minimizer(two_by_two):
    model, x_true, x_prior = two_by_two
    dec = decompose(model.matrix)
    y = model.apply(x_true)
    noise = np.array([0.01, -0.02])
    x_hat = solve_linearized(dec, 0.1, x_true, x_prior, noise)
    assert euler_residual(model, x_hat, 0.1, y + noise, x_prior) <= 1e-14
    # and is genuinely nonzero away from it
    assert euler_residual(model, x_prior, 0.1, y + noise, x_prior) > 1e-3


def test_alpha_validation(two_by_two):
    model, x_true, x_prior = two_by_two
    dec = decompose(model.matrix)
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(InvalidInputError):
            solve_linearized(dec, bad, x_true, x_prior, np.zeros(2))
        with pytest.raises(InvalidInputError):
            solve_nonlinear(model, bad, model.apply(x_true), x_prior)


def test_stationarity_tolerance_keeps_absolute_floor():
    # the floor must survive even when both scale terms vanish
    assert stationarity_tolerance(1e-12, 0.0, 0.0, 1.0) == pytest.approx(1e-14, rel=1e-12)
    want = 1e-10 * (3.0 * 1e-3 + 1e-2 * 2.0) + 1e-14
    assert stationarity_tolerance(1e-2, 1e-3, 2.0, 3.0) == pytest.approx(want, rel=1e-13)


def test_nonlinear_solver_matches_closed_form_on_linear_model(two_by_two):
    model, x_true, x_prior = two_by_two
    dec = decompose(model.matrix)
    noise = np.array([0.01, -0.02])
    y_noisy = model.apply(x_true) + noise
    res = solve_nonlinear(model, 0.1, y_noisy, x_prior)
    x_hat = solve_linearized(dec, 0.1, x_true, x_prior, noise)
    assert res.converged
    assert res.x == pytest.approx(x_hat, rel=0, abs=1e-12)
    assert res.euler_residual <= stationarity_tolerance(
        0.1, res.data_residual, norm(res.x - x_prior), model.derivative_sup_bound)


def test_result_functional_never_beats_prior(small_instance, sel_cfg):
    inst = small_instance
    obs = add_noise(inst, 1e-3, unit_direction(40, (0, 0)))
    for alpha in (1.0, 1e-2, 1e-4):
        res = solve_nonlinear(inst.model, alpha, obs.y_noisy, inst.x_prior)
        at_prior = tikhonov_functional(inst.model, inst.x_prior, alpha, obs.y_noisy, inst.x_prior)
        assert res.functional_value <= at_prior * (1.0 + 1e-12)
        assert res.converged


def test_exact_data_prior_at_truth_recovers_truth(tiny_composition):
    inst = tiny_composition
    model = inst.model.with_center(inst.x_true)
    y = model.apply(inst.x_true)
    for alpha in (1.0, 1e-3):
        res = solve_nonlinear(model, alpha, y, inst.x_true)
        assert res.converged
        assert np.linalg.norm(res.x - inst.x_true) <= 1e-8
        assert res.functional_value <= 1e-16


def test_composition_solve_is_stationary(tiny_composition):
    inst = tiny_composition
    obs = add_noise(inst, 1e-3, unit_direction(12, (1, 1)))
    res = solve_nonlinear(inst.model, 1e-2, obs.y_noisy, inst.x_prior)
    assert res.converged
    tol = stationarity_tolerance(1e-2, res.data_residual,
                                 norm(res.x - inst.x_prior),
                                 inst.model.derivative_sup_bound)
    assert res.euler_residual <= tol
    direct = euler_residual(inst.model, res.x, 1e-2, obs.y_noisy, inst.x_prior)
    assert direct == pytest.approx(res.euler_residual, rel=1e-9, abs=1e-15)


def test_out_of_ball_start_rejected(two_by_two):
    model, x_true, x_prior = two_by_two
    with pytest.raises(DomainError):
        solve_nonlinear(model, 0.1, model.apply(x_true), x_prior,
                        x_init=np.array([100.0, 0.0]))
    with pytest.raises(InvalidInputError):
        solve_nonlinear(model, 0.1, model.apply(x_true), x_prior, multistart=-1)


def test_multistart_deterministic(tiny_composition):
    inst = tiny_composition
    obs = add_noise(inst, 1e-3, unit_direction(12, (1, 2)))
    a = solve_nonlinear(inst.model, 1e-2, obs.y_noisy, inst.x_prior, multistart=3, seed=11)
    b = solve_nonlinear(inst.model, 1e-2, obs.y_noisy, inst.x_prior, multistart=3, seed=11)
    assert np.array_equal(a.x, b.x)
    assert a.functional_value == b.functional_value


def test_continuation_residual_monotone(small_instance):
    inst = small_instance
    obs = add_noise(inst, 1e-3, unit_direction(40, (2, 0)))
    grid = np.geomspace(1.0, 1e-6, 13)
    results = continuation_solve(inst.model, grid, obs.y_noisy, inst.x_prior)
    assert len(results) == 13
    assert all(r.converged for r in results)
    residuals = [r.data_residual for r in results]
    # data residual shrinks as the parameter decreases along the path
    assert all(residuals[i + 1] <= residuals[i] * (1.0 + 1e-10) for i in range(12))


def test_continuation_rejects_bad_grids(small_instance):
    inst = small_instance
    y = inst.y_exact
    with pytest.raises(InvalidInputError):
        continuation_solve(inst.model, [1e-3, 1e-2], y, inst.x_prior)
    with pytest.raises(InvalidInputError):
        continuation_solve(inst.model, [1e-2, -1e-3], y, inst.x_prior)


def test_result_is_frozen(two_by_two):
    model, x_true, x_prior = two_by_two
    res = solve_nonlinear(model, 0.1, model.apply(x_true), x_prior)
    with pytest.raises(dataclasses.FrozenInstanceError):
        res.alpha = 2.0
