"""Worst-case data construction along spectral bands.

For a band at level lam_k the noise level is tied to the band location,
delta_k = lam_k, and the perturbation is removed from the exact data in
the direction that a band projector picks out of the prior misfit. Pushed
through the closed-form linearized solver, the resulting error splits
into an exact-data part, a noise-propagation part, and a cross term with
a known nonnegative value, which yields a computable lower bound on the
noisy-data error at the matched parameter. The checks here recompute
every piece independently and compare.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .hilbert import (
    SpectralProjector,
    band_projector,
    inner,
    norm,
    resolvent_apply_y,
)
from .models import NoisyObservation, ProblemInstance
from .tikhonov import solve_linearized

__all__ = [
    "AdversarialDatum",
    "AdversarialChecks",
    "band_eigenvalue",
    "adversarial_lower_bound",
    "make_adversarial_datum",
    "verify_adversarial_inequalities",
]

# directions in the band are considered lost below this relative size
_PROJECTION_CUTOFF = 1e-12


def band_eigenvalue(decomposition, k: int) -> float:
    """k-th largest eigenvalue of the normal operator, 1-based."""
    k = int(k)
    if k < 1 or k > decomposition.rank:
        raise InvalidInputError(
            f"band index {k} outside the spectrum (rank {decomposition.rank})"
        )
    return float(decomposition.eigenvalues[k - 1])


def adversarial_lower_bound(delta_k: float, lam_k: float, alpha_k: float) -> float:
    """(delta_k**2 / lam_k) / (2 * (alpha_k / lam_k + 3/2)**2).

    Lower bound on the squared noisy-data error of the linearized
    minimizer under the banded perturbation, valid for any alpha_k > 0.
    """
    if delta_k <= 0 or lam_k <= 0 or alpha_k <= 0:
        raise InvalidInputError("delta_k, lam_k, and alpha_k must all be positive")
    return (delta_k**2 / lam_k) / (2.0 * (alpha_k / lam_k + 1.5) ** 2)


@dataclass(frozen=True, eq=False)
class AdversarialDatum:
    """One constructed worst-case observation."""

    lam_k: float
    delta_k: float
    z_direction: np.ndarray
    y_noisy: np.ndarray
    projector: SpectralProjector

    def as_observation(self) -> NoisyObservation:
        return NoisyObservation(y_noisy=self.y_noisy, delta=self.delta_k)


def make_adversarial_datum(instance: ProblemInstance, lam_k: float) -> AdversarialDatum:
    """Build the banded perturbation at level lam_k for this instance.

    lam_k must coincide with an eigenvalue of the normal operator of the
    linearization; the band around it is then guaranteed nonempty. The
    perturbation direction is the prior misfit in data space scaled by
    the inverse of its banded norm, so the projected noise is exactly a
    unit vector even though the direction itself may be longer. When the
    misfit has no component in the band the first banded singular vector
    is used instead.
    """
    lam_k = float(lam_k)
    decomposition = instance.linearization
    eigenvalues = decomposition.eigenvalues
    nearest = int(np.argmin(np.abs(eigenvalues - lam_k)))
    if abs(eigenvalues[nearest] - lam_k) > 1e-9 * lam_k:
        raise InvalidInputError(
            f"lam_k={lam_k:.6g} does not match any eigenvalue of the normal operator"
        )
    lam_k = float(eigenvalues[nearest])

    projector = band_projector(decomposition, lam_k)
    misfit = decomposition.apply(instance.prior_gap)
    banded = projector.apply(misfit)
    banded_norm = norm(banded)
    if banded_norm > _PROJECTION_CUTOFF * max(1.0, norm(misfit)):
        z = misfit / banded_norm
    else:
        z = projector.basis[:, 0].copy()

    delta_k = lam_k
    noise = projector.apply(z)
    y_noisy = instance.y_exact - delta_k * noise

    # construction invariants: unit banded noise, noise norm exactly delta_k
    if abs(norm(noise) - 1.0) > 1e-12:
        raise InvalidInputError("banded perturbation failed to normalize")
    if abs(norm(y_noisy - instance.y_exact) - delta_k) > 1e-12 * delta_k:
        raise InvalidInputError("perturbed data is not at the advertised noise level")

    return AdversarialDatum(
        lam_k=lam_k,
        delta_k=delta_k,
        z_direction=z,
        y_noisy=y_noisy,
        projector=projector,
    )


@dataclass(frozen=True)
class AdversarialChecks:
    """Recomputed error split and the inequalities it must satisfy."""

    lam_k: float
    delta_k: float
    alpha_k: float
    sq_error_noisy: float
    sq_error_exact: float
    sq_shift: float
    inner_product: float
    lower_bound: float
    pythagoras_residual: float
    sign_ok: bool
    pythagoras_ok: bool
    inner_identity_ok: bool
    chain_ok: bool

    @property
    def all_passed(self) -> bool:
        return self.sign_ok and self.pythagoras_ok and self.inner_identity_ok and self.chain_ok


def verify_adversarial_inequalities(
    instance: ProblemInstance,
    datum: AdversarialDatum,
    alpha_k: float,
) -> AdversarialChecks:
    """Check the error split at alpha_k against its closed forms.

    Recomputes the linearized minimizers for exact and perturbed data,
    splits the squared noisy-data error by the law of cosines, and then
    verifies four facts: the cross term is nonnegative, the split is
    exact, the cross term matches its closed form built from the banded
    resolvent, and both the noise-propagation part and the full error
    dominate the band lower bound.
    """
    alpha_k = float(alpha_k)
    if not np.isfinite(alpha_k) or alpha_k <= 0:
        raise InvalidInputError("alpha_k must be positive")
    decomposition = instance.linearization
    x_true = instance.x_true
    zero_noise = np.zeros(decomposition.dim_y)
    noise_vec = datum.y_noisy - instance.y_exact

    x_exact_hat = solve_linearized(decomposition, alpha_k, x_true, instance.x_prior, zero_noise)
    x_noisy_hat = solve_linearized(decomposition, alpha_k, x_true, instance.x_prior, noise_vec)

    err_exact = x_exact_hat - x_true
    err_noisy = x_noisy_hat - x_true
    shift = x_noisy_hat - x_exact_hat

    sq_error_noisy = norm(err_noisy) ** 2
    sq_error_exact = norm(err_exact) ** 2
    sq_shift = norm(shift) ** 2
    inner_product = 2.0 * inner(err_exact, shift)

    misfit = decomposition.apply(instance.prior_gap)
    banded_misfit_norm = norm(datum.projector.apply(misfit))
    resolved = resolvent_apply_y(
        decomposition, alpha_k, datum.projector.apply(datum.z_direction)
    )
    identity_target = (
        2.0 * alpha_k * datum.delta_k * banded_misfit_norm * norm(resolved) ** 2
    )

    lower_bound = adversarial_lower_bound(datum.delta_k, datum.lam_k, alpha_k)

    scale = max(1.0, sq_error_noisy)
    pythagoras_residual = abs(
        sq_error_noisy - (sq_error_exact + sq_shift + inner_product)
    )

    sign_ok = inner_product >= -1e-12 * scale
    pythagoras_ok = pythagoras_residual <= 1e-12 * scale
    inner_identity_ok = abs(inner_product - identity_target) <= max(
        1e-10 * identity_target, 1e-12 * scale
    )
    chain_ok = (
        sq_shift >= lower_bound * (1.0 - 1e-10)
        and sq_error_noisy >= lower_bound * (1.0 - 1e-10)
    )

    return AdversarialChecks(
        lam_k=datum.lam_k,
        delta_k=datum.delta_k,
        alpha_k=alpha_k,
        sq_error_noisy=sq_error_noisy,
        sq_error_exact=sq_error_exact,
        sq_shift=sq_shift,
        inner_product=inner_product,
        lower_bound=lower_bound,
        pythagoras_residual=pythagoras_residual,
        sign_ok=sign_ok,
        pythagoras_ok=pythagoras_ok,
        inner_identity_ok=inner_identity_ok,
        chain_ok=chain_ok,
    )
