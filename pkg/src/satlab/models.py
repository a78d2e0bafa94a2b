"""Forward maps with known structure and synthetic problem instances.

Two model families are provided. ``LinearModel`` wraps a dense matrix.
``CompositionModel`` composes the same matrix with the componentwise map
g(t) = t + beta*sin(t), whose derivative is diagonal and everywhere
invertible for beta < 1. Because the derivative factors through that
diagonal, the structural constants used by the error analysis (the
Lipschitz bound of the derivative, the defect of the factor linking
derivatives at two points) come out in closed form instead of only by
sampling.

An instance bundles a model with a ground truth, exact data, and a prior
guess manufactured from a smoothness element, so experiments downstream
can assume every stated consistency property holds by construction.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError, HypothesisViolationError, InvalidInputError
from .hilbert import SpectralDecomposition, as_vector, decompose, norm

__all__ = [
    "ForwardModel",
    "LinearModel",
    "CompositionModel",
    "SourcePrior",
    "NoisyObservation",
    "ProblemInstance",
    "make_diagonal_linear",
    "make_composition_model",
    "default_ground_truth",
    "synthesize_instance",
    "estimate_lipschitz",
    "add_noise",
    "unit_direction",
    "sample_in_ball",
]


class ForwardModel:
    """Behavior shared by the concrete model families.

    Concrete models are frozen dataclasses carrying ``matrix`` (the dense
    linear part), ``rho`` (radius of the certified ball), and ``center``
    (the ball center, normally the ground truth; None disables the check).
    """

    kind = "abstract"

    matrix: np.ndarray
    rho: float
    center: np.ndarray | None

    @property
    def dim_x(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def dim_y(self) -> int:
        return int(self.matrix.shape[0])

    @cached_property
    def operator_norm(self) -> float:
        """Spectral norm of the dense linear part."""
        return float(np.linalg.norm(self.matrix, 2))

    @cached_property
    def gram(self) -> np.ndarray:
        """Gram matrix of the dense linear part, cached for solver reuse."""
        return self.matrix.T @ self.matrix

    def in_domain(self, x) -> bool:
        """Whether ``x`` lies in the certified ball (always true if uncentered)."""
        if self.center is None:
            return True
        x = np.asarray(x, dtype=float)
        # tiny slack so boundary points produced by rounding still count
        return float(np.linalg.norm(x - self.center)) <= self.rho * (1.0 + 1e-12)

    def with_center(self, center) -> "ForwardModel":
        center = as_vector(center, "ball center")
        if center.size != self.dim_x:
            raise InvalidInputError(f"ball center has dimension {center.size}, expected {self.dim_x}")
        return dataclasses.replace(self, center=center)

    # concrete models implement: apply, derivative, derivative_apply,
    # derivative_adjoint_apply, and the four constant properties below.

    def _check_point(self, x) -> np.ndarray:
        x = as_vector(x, "domain point")
        if x.size != self.dim_x:
            raise InvalidInputError(f"domain point has dimension {x.size}, expected {self.dim_x}")
        return x

    def _check_data(self, v) -> np.ndarray:
        v = as_vector(v, "data vector")
        if v.size != self.dim_y:
            raise InvalidInputError(f"data vector has dimension {v.size}, expected {self.dim_y}")
        return v

    def _validate_common(self) -> None:
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.size == 0:
            raise InvalidInputError("model matrix must be a nonempty 2-D array")
        if not np.all(np.isfinite(matrix)):
            raise InvalidInputError("model matrix contains non-finite entries")
        if not np.any(matrix):
            raise InvalidInputError("model matrix has no nonzero entries")
        object.__setattr__(self, "matrix", matrix)
        rho = float(self.rho)
        if not np.isfinite(rho) or rho <= 0:
            raise InvalidInputError("ball radius must be a positive number")
        object.__setattr__(self, "rho", rho)
        if self.center is not None:
            center = as_vector(self.center, "ball center")
            if center.size != matrix.shape[1]:
                raise InvalidInputError("ball center dimension does not match the matrix")
            object.__setattr__(self, "center", center)


@dataclass(frozen=True, eq=False)
class LinearModel(ForwardModel):
    """F(x) = A x for a dense matrix A."""

    matrix: np.ndarray
    rho: float = 1.0
    center: np.ndarray | None = None

    kind = "linear"

    def __post_init__(self):
        self._validate_common()

    def apply(self, x) -> np.ndarray:
        return self.matrix @ self._check_point(x)

    def derivative(self, x) -> np.ndarray:
        """Jacobian at ``x``; constant, so the stored matrix itself."""
        self._check_point(x)
        return self.matrix

    def derivative_apply(self, x, h) -> np.ndarray:
        return self.matrix @ self._check_point(h)

    def derivative_adjoint_apply(self, x, g) -> np.ndarray:
        return self.matrix.T @ self._check_data(g)

    @property
    def has_constant_derivative(self) -> bool:
        return True

    @property
    def lipschitz_bound(self) -> float:
        return 0.0

    @property
    def kappa0_bound(self) -> float:
        return 0.0

    @property
    def derivative_sup_bound(self) -> float:
        return self.operator_norm


@dataclass(frozen=True, eq=False)
class CompositionModel(ForwardModel):
    """F(x) = A g(x) with g(x) = x + beta*sin(x) applied componentwise.

    g'(x) is diagonal with entries 1 + beta*cos(x_i), so for beta < 1 the
    derivative at any two points x, z satisfies F'(x) = F'(z) R(x, z) with
    R diagonal and invertible. Closed-form constants:

      derivative Lipschitz bound  L  <= beta * ||A||
      factor defect               ||I - R(x, z)|| <= beta/(1-beta) * ||x-z||
      derivative sup bound        C1 <= (1+beta) * ||A||
    """

    matrix: np.ndarray
    beta: float = 0.1
    rho: float = 1.0
    center: np.ndarray | None = None

    kind = "composition"

    def __post_init__(self):
        self._validate_common()
        beta = float(self.beta)
        # beta < 1 keeps g' positive, hence the factor R well-defined
        if not np.isfinite(beta) or beta < 0 or beta >= 1:
            raise InvalidInputError(f"nonlinearity strength must lie in [0, 1), got {beta}")
        object.__setattr__(self, "beta", beta)

    def _gprime(self, x: np.ndarray) -> np.ndarray:
        return 1.0 + self.beta * np.cos(x)

    def apply(self, x) -> np.ndarray:
        x = self._check_point(x)
        return self.matrix @ (x + self.beta * np.sin(x))

    def derivative(self, x) -> np.ndarray:
        x = self._check_point(x)
        return self.matrix * self._gprime(x)[np.newaxis, :]

    def derivative_apply(self, x, h) -> np.ndarray:
        x = self._check_point(x)
        return self.matrix @ (self._gprime(x) * self._check_point(h))

    def derivative_adjoint_apply(self, x, g) -> np.ndarray:
        x = self._check_point(x)
        return self._gprime(x) * (self.matrix.T @ self._check_data(g))

    def range_factor(self, x, z) -> np.ndarray:
        """Diagonal of R(x, z), the factor with F'(x) = F'(z) R(x, z)."""
        x = self._check_point(x)
        z = self._check_point(z)
        return self._gprime(x) / self._gprime(z)

    @property
    def has_constant_derivative(self) -> bool:
        return self.beta == 0.0

    @property
    def lipschitz_bound(self) -> float:
        return self.beta * self.operator_norm

    @property
    def kappa0_bound(self) -> float:
        return self.beta / (1.0 - self.beta)

    @property
    def derivative_sup_bound(self) -> float:
        return (1.0 + self.beta) * self.operator_norm


def make_diagonal_linear(n: int, s: float, scale: float = 1.0, rho: float = 1.0) -> LinearModel:
    """Diagonal model with singular values scale * i**(-s), i = 1..n.

    Polynomial decay makes the problem ill-conditioned at any fixed n and
    steadily worse as n grows, which is the regime the experiments need.
    """
    n = int(n)
    if n < 2:
        raise InvalidInputError("diagonal model needs n >= 2")
    s = float(s)
    if not np.isfinite(s) or s <= 0:
        raise InvalidInputError("decay exponent must be positive")
    scale = float(scale)
    if not np.isfinite(scale) or scale <= 0:
        raise InvalidInputError("scale must be positive")
    diag = scale * np.arange(1, n + 1, dtype=float) ** (-s)
    return LinearModel(matrix=np.diag(diag), rho=rho)


def make_composition_model(matrix, beta: float, rho: float = 1.0) -> CompositionModel:
    """Wrap a dense matrix with the componentwise sine nonlinearity."""
    return CompositionModel(matrix=np.asarray(matrix, dtype=float), beta=beta, rho=rho)


def default_ground_truth(n: int) -> np.ndarray:
    """Coordinates 1/i, scaled to unit norm. Smooth and nonzero in every mode."""
    n = int(n)
    if n < 1:
        raise InvalidInputError("ground truth needs n >= 1")
    v = 1.0 / np.arange(1, n + 1, dtype=float)
    return v / np.linalg.norm(v)


@dataclass(frozen=True, eq=False)
class SourcePrior:
    """Smoothness element that generates the prior guess.

    For nu = 1/2 the element lives in data space and the prior offset is
    the adjoint image A* element. For nu >= 1 it lives in domain space
    and the offset is (A*A)**nu applied to it. ``norm`` always stores the
    Euclidean norm of the element actually used.
    """

    nu: float
    element: np.ndarray = field(repr=False)
    norm: float = None

    def __post_init__(self):
        nu = float(self.nu)
        if nu != 0.5 and nu < 1.0:
            raise InvalidInputError(f"source exponent must be 1/2 or at least 1, got {nu}")
        object.__setattr__(self, "nu", nu)
        element = as_vector(self.element, "source element") if np.asarray(self.element).size else None
        if element is None:
            raise InvalidInputError("source element must not be empty")
        object.__setattr__(self, "element", element)
        object.__setattr__(self, "norm", float(np.linalg.norm(element)))


@dataclass(frozen=True, eq=False)
class NoisyObservation:
    """Measured data together with its certified noise level."""

    y_noisy: np.ndarray = field(repr=False)
    delta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "y_noisy", as_vector(self.y_noisy, "noisy data"))
        delta = float(self.delta)
        if not np.isfinite(delta) or delta < 0:
            raise InvalidInputError("noise level must be a finite nonnegative number")
        object.__setattr__(self, "delta", delta)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """A model with ground truth, prior, exact data, and optional source."""

    model: ForwardModel
    x_true: np.ndarray = field(repr=False)
    x_prior: np.ndarray = field(repr=False)
    y_exact: np.ndarray = field(repr=False)
    source: SourcePrior | None = None

    @cached_property
    def linearization(self) -> SpectralDecomposition:
        """Singular system of the derivative at the ground truth."""
        return decompose(self.model.derivative(self.x_true))

    @property
    def prior_gap(self) -> np.ndarray:
        """Ground truth minus prior guess."""
        return self.x_true - self.x_prior

    @property
    def source_norm(self) -> float:
        return self.source.norm if self.source is not None else 0.0


def _source_offset(decomposition: SpectralDecomposition, source: SourcePrior):
    """Prior offset generated by the source element, plus the element kept.

    The nu = 1/2 element is projected onto the span of the left singular
    vectors first: components in the null space of the adjoint do not
    move the prior but would silently inflate the stored norm.
    """
    element = source.element
    if source.nu == 0.5:
        if element.size != decomposition.dim_y:
            raise InvalidInputError("half-order source element must live in data space")
        if not np.any(element):
            return np.zeros(decomposition.dim_x), SourcePrior(0.5, np.zeros(decomposition.dim_y))
        coeff = decomposition.left_vectors.T @ element
        projected = decomposition.left_vectors @ coeff
        if np.linalg.norm(projected) <= 1e-12 * np.linalg.norm(element):
            raise InvalidInputError("source element is orthogonal to the operator range")
        offset = decomposition.right_vectors @ (decomposition.singular_values * coeff)
        return offset, SourcePrior(0.5, projected)
    if element.size != decomposition.dim_x:
        raise InvalidInputError("source element must live in domain space for nu >= 1")
    coeff = decomposition.right_vectors.T @ element
    offset = decomposition.right_vectors @ (decomposition.eigenvalues**source.nu * coeff)
    return offset, source


def synthesize_instance(
    model: ForwardModel,
    x_true,
    source: SourcePrior | None = None,
    *,
    require_small_source: bool = False,
) -> ProblemInstance:
    """Build a consistent instance around a ground truth.

    The model is re-centered at the ground truth so domain checks refer to
    the ball the analysis certifies. With a source, the prior becomes
    x_true minus the source offset and must stay strictly inside that
    ball. ``require_small_source`` additionally enforces the smallness
    condition L * ||u|| < 1 needed by the half-order error bounds, using
    the model's analytic Lipschitz bound.
    """
    x_true = as_vector(x_true, "ground truth")
    if x_true.size != model.dim_x:
        raise InvalidInputError(f"ground truth has dimension {x_true.size}, expected {model.dim_x}")
    model = model.with_center(x_true)
    y_exact = model.apply(x_true)
    if source is None:
        x_prior = x_true.copy()
        final_source = None
    else:
        decomposition = decompose(model.derivative(x_true))
        offset, final_source = _source_offset(decomposition, source)
        x_prior = x_true - offset
        if norm(offset) >= model.rho:
            raise DomainError(
                f"prior lies outside the certified ball: offset {norm(offset):.6g} >= radius {model.rho:.6g}"
            )
        if require_small_source:
            if final_source.nu != 0.5:
                raise InvalidInputError("the smallness condition applies to the half-order source only")
            lu = model.lipschitz_bound * final_source.norm
            if lu >= 1.0:
                raise HypothesisViolationError(
                    f"smallness condition fails: L*|u| = {lu:.6g} must be below 1"
                )
    return ProblemInstance(model=model, x_true=x_true, x_prior=x_prior, y_exact=y_exact, source=final_source)


def sample_in_ball(rng: np.random.Generator, center: np.ndarray, radius: float) -> np.ndarray:
    """Uniform draw from the closed ball around ``center``."""
    dim = center.size
    while True:
        g = rng.standard_normal(dim)
        g_norm = np.linalg.norm(g)
        if g_norm > 1e-12:
            break
    r = radius * rng.uniform() ** (1.0 / dim)
    return center + (r / g_norm) * g


def estimate_lipschitz(model: ForwardModel, n_samples: int = 100, seed=0) -> float:
    """Sampled lower bound on the Lipschitz constant of the derivative.

    Pairs are drawn inside the certified ball (around the origin when the
    model is uncentered) and the largest ratio of operator-norm derivative
    difference to point distance is returned. Constant-derivative models
    report exactly zero.
    """
    n_samples = int(n_samples)
    if n_samples < 1:
        raise InvalidInputError("need at least one sample pair")
    if model.has_constant_derivative:
        return 0.0
    rng = np.random.default_rng(seed)
    center = model.center if model.center is not None else np.zeros(model.dim_x)
    best = 0.0
    for _ in range(n_samples):
        x = sample_in_ball(rng, center, model.rho)
        z = sample_in_ball(rng, center, model.rho)
        gap = norm(x - z)
        if gap <= 1e-12:
            continue
        diff = model.derivative(x) - model.derivative(z)
        best = max(best, float(np.linalg.norm(diff, 2)) / gap)
    return best


def unit_direction(dim: int, seed=0) -> np.ndarray:
    """Seeded uniformly random unit vector."""
    dim = int(dim)
    if dim < 1:
        raise InvalidInputError("direction needs dim >= 1")
    rng = np.random.default_rng(seed)
    while True:
        v = rng.standard_normal(dim)
        v_norm = np.linalg.norm(v)
        if v_norm > 1e-12:
            return v / v_norm


def add_noise(instance: ProblemInstance, delta: float, direction=None) -> NoisyObservation:
    """Perturb the exact data by ``delta`` along a unit direction.

    The stored noise level equals ``delta`` exactly. A zero noise level
    returns the exact data and ignores ``direction``.
    """
    delta = float(delta)
    if not np.isfinite(delta) or delta < 0:
        raise InvalidInputError("noise level must be a finite nonnegative number")
    if delta == 0.0:
        return NoisyObservation(y_noisy=instance.y_exact.copy(), delta=0.0)
    if direction is None:
        raise InvalidInputError("a unit direction is required for positive noise levels")
    direction = as_vector(direction, "noise direction")
    if direction.size != instance.y_exact.size:
        raise InvalidInputError("noise direction dimension does not match the data")
    if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
        raise InvalidInputError("noise direction must have unit norm (to 1e-12)")
    return NoisyObservation(y_noisy=instance.y_exact + delta * direction, delta=delta)
