"""Minimal finite-dimensional Hilbert-space core.

Pure states (kets), tensor products, orthonormal measurement bases and
Born-rule probabilities, everything in double precision.  Dimensions stay
small (<= 8) so no sparse machinery is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Centralized tolerances: zero amplitudes produced by exact cancellation
# must be distinguishable from round-off.
EPS_ORTHO = 1e-10
EPS_NORM = 1e-12


class DimensionMismatchError(ValueError):
    """Raised when two states (or a basis and a state) live in different spaces."""


@dataclass(frozen=True)
class Ket:
    """Normalized pure state in a dim-dimensional complex Hilbert space."""

    amplitudes: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(complex(a) for a in self.amplitudes))
        if len(self.amplitudes) == 0:
            raise ValueError("ket must have at least one amplitude")

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.amplitudes, dtype=complex)

    @staticmethod
    def from_array(arr) -> "Ket":
        return Ket(tuple(complex(a) for a in np.asarray(arr).ravel()))

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


def ket(*amplitudes) -> Ket:
    """Shorthand constructor, normalizing the given amplitudes."""
    return normalize(Ket(tuple(amplitudes)))


def basis_ket(dim: int, index: int) -> Ket:
    """Computational basis vector |index> in dimension dim."""
    amps = [0.0] * dim
    amps[index] = 1.0
    return Ket(tuple(amps))


def normalize(k: Ket) -> Ket:
    """Rescale to unit norm; direction is unchanged."""
    n = k.norm()
    if n <= 0.0:
        raise ValueError("cannot normalize the zero vector")
    return Ket.from_array(k.as_array() / n)


def inner(a: Ket, b: Ket) -> complex:
    """Hermitian inner product <a|b> = sum conj(a_i) b_i."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dims differ: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.as_array(), b.as_array()))


def tensor(a: Ket, b: Ket) -> Ket:
    """Tensor product with row-major index convention: index = i*b.dim + j."""
    return Ket.from_array(np.kron(a.as_array(), b.as_array()))


@dataclass(frozen=True)
class MeasurementBasis:
    """Orthonormal basis defining a projective measurement setting."""

    vectors: tuple[Ket, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(self.vectors))
        dim = self.dim
        for v in self.vectors:
            if v.dim != dim:
                raise DimensionMismatchError("all basis vectors must share one dimension")
        if len(self.vectors) != dim:
            raise ValueError("basis must contain exactly dim vectors")
        g = self.gram()
        if np.max(np.abs(g - np.eye(dim))) >= EPS_ORTHO:
            raise ValueError(f"basis {self.label!r} is not orthonormal within {EPS_ORTHO}")

    @property
    def dim(self) -> int:
        return self.vectors[0].dim

    def gram(self) -> np.ndarray:
        m = np.array([v.as_array() for v in self.vectors])
        return m.conj() @ m.T

    def matrix(self) -> np.ndarray:
        """Rows are the basis vectors."""
        return np.array([v.as_array() for v in self.vectors])


def born_probabilities(basis: MeasurementBasis, state: Ket) -> np.ndarray:
    """Outcome probabilities p_i = |<v_i|state>|^2 for a projective measurement."""
    if basis.dim != state.dim:
        raise DimensionMismatchError(f"dims differ: basis {basis.dim} vs state {state.dim}")
    amps = basis.matrix().conj() @ state.as_array()
    return np.abs(amps) ** 2


def computational_basis(dim: int, label: str = "computational") -> MeasurementBasis:
    return MeasurementBasis(tuple(basis_ket(dim, i) for i in range(dim)), label=label)
