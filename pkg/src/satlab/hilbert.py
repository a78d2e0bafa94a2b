"""Finite-dimensional Hilbert space primitives.

Vectors are plain 1-D float arrays in an orthonormal coordinate basis;
dense operators are 2-D arrays acting by matrix multiplication, with the
transpose as adjoint. The singular system of an operator supplies the
spectral family of ``A A*``; spectral band projectors and resolvent
solves are evaluated in that eigenbasis, which keeps projector and
resolvent commutation exact up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "RANK_CUTOFF",
    "as_vector",
    "inner",
    "norm",
    "SpectralDecomposition",
    "SpectralProjector",
    "decompose",
    "band_projector",
    "resolvent_apply",
    "resolvent_apply_y",
]

#: Relative singular value cutoff; anything below RANK_CUTOFF * sigma_1
#: is treated as rank noise and dropped by :func:`decompose`.
RANK_CUTOFF = 1e-12


def as_vector(values, name: str = "vector") -> np.ndarray:
    """Validate and return ``values`` as a finite 1-D float array."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def inner(u, v) -> float:
    """Euclidean inner product, erroring on dimension mismatch."""
    ua = np.asarray(u, dtype=float)
    va = np.asarray(v, dtype=float)
    if ua.shape != va.shape:
        raise InvalidInputError(f"inner product needs matching shapes, got {ua.shape} and {va.shape}")
    return float(np.dot(ua, va))


def norm(v) -> float:
    """Euclidean norm."""
    return float(np.linalg.norm(np.asarray(v, dtype=float)))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Truncated singular system ``A = U diag(s) V^T``.

    ``singular_values`` is nonincreasing and strictly positive after the
    rank cutoff. ``eigenvalues`` is the squared sequence, the nonzero
    spectrum of ``A A*`` and of ``A* A``. Columns of ``left_vectors``
    and ``right_vectors`` are orthonormal.
    """

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.singular_values.size)

    @property
    def dim_y(self) -> int:
        return int(self.left_vectors.shape[0])

    @property
    def dim_x(self) -> int:
        return int(self.right_vectors.shape[0])

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return self.singular_values**2

    def apply(self, x) -> np.ndarray:
        """Action of the (truncated) operator on a domain vector."""
        x = as_vector(x, "domain vector")
        if x.size != self.dim_x:
            raise InvalidInputError(f"expected dimension {self.dim_x}, got {x.size}")
        return self.left_vectors @ (self.singular_values * (self.right_vectors.T @ x))

    def apply_adjoint(self, y) -> np.ndarray:
        """Action of the (truncated) adjoint on a data-space vector."""
        y = as_vector(y, "data vector")
        if y.size != self.dim_y:
            raise InvalidInputError(f"expected dimension {self.dim_y}, got {y.size}")
        return self.right_vectors @ (self.singular_values * (self.left_vectors.T @ y))


@dataclass(frozen=True, eq=False)
class SpectralProjector:
    """Orthogonal projector onto selected left singular directions."""

    selected_indices: np.ndarray
    basis: np.ndarray
    dim: int

    @property
    def is_empty(self) -> bool:
        return self.selected_indices.size == 0

    def apply(self, v) -> np.ndarray:
        v = as_vector(v, "vector")
        if v.size != self.dim:
            raise InvalidInputError(f"expected dimension {self.dim}, got {v.size}")
        if self.is_empty:
            return np.zeros_like(v)
        return self.basis @ (self.basis.T @ v)


def decompose(operator) -> SpectralDecomposition:
    """Singular value decomposition with a relative rank cutoff.

    Singular values below ``RANK_CUTOFF`` times the largest one are
    discarded together with their vectors.
    """
    a = np.asarray(operator, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise InvalidInputError("operator must be a nonempty 2-D matrix")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("operator contains non-finite entries")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        raise InvalidInputError("operator has no nonzero entries")
    keep = s > RANK_CUTOFF * s[0]
    return SpectralDecomposition(
        singular_values=s[keep].copy(),
        left_vectors=u[:, keep].copy(),
        right_vectors=vt[keep].T.copy(),
    )


def band_projector(decomposition: SpectralDecomposition, lam_k: float) -> SpectralProjector:
    """Projector onto eigenvalues of ``A A*`` in ``(lam_k/2, 3*lam_k/2]``.

    The half-open interval fixes the tie-breaking convention when an
    eigenvalue lands exactly on a band edge. An empty band yields the
    zero projector.
    """
    if not np.isfinite(lam_k) or lam_k <= 0:
        raise InvalidInputError("band center must be a positive number")
    lam = decomposition.eigenvalues
    selected = np.nonzero((lam > 0.5 * lam_k) & (lam <= 1.5 * lam_k))[0]
    return SpectralProjector(
        selected_indices=selected,
        basis=decomposition.left_vectors[:, selected].copy(),
        dim=decomposition.dim_y,
    )


def _resolvent(basis: np.ndarray, eigenvalues: np.ndarray, alpha: float, v: np.ndarray) -> np.ndarray:
    # Components along the basis get 1/(alpha + lambda_i); the orthogonal
    # complement (null space of the self-adjoint operator) gets 1/alpha.
    coeff = basis.T @ v
    return v / alpha + basis @ (coeff / (alpha + eigenvalues) - coeff / alpha)


def resolvent_apply(decomposition: SpectralDecomposition, alpha: float, v) -> np.ndarray:
    """Apply ``(alpha I + A* A)^{-1}`` to a domain vector in the eigenbasis."""
    if not np.isfinite(alpha) or alpha <= 0:
        raise InvalidInputError("resolvent shift must be a positive number")
    v = as_vector(v, "domain vector")
    if v.size != decomposition.dim_x:
        raise InvalidInputError(f"expected dimension {decomposition.dim_x}, got {v.size}")
    return _resolvent(decomposition.right_vectors, decomposition.eigenvalues, float(alpha), v)


def resolvent_apply_y(decomposition: SpectralDecomposition, alpha: float, v) -> np.ndarray:
    """Apply ``(alpha I + A A*)^{-1}`` to a data-space vector in the eigenbasis."""
    if not np.isfinite(alpha) or alpha <= 0:
        raise InvalidInputError("resolvent shift must be a positive number")
    v = as_vector(v, "data vector")
    if v.size != decomposition.dim_y:
        raise InvalidInputError(f"expected dimension {decomposition.dim_y}, got {v.size}")
    return _resolvent(decomposition.left_vectors, decomposition.eigenvalues, float(alpha), v)
