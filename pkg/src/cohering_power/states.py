"""Density matrices in the fixed computational reference basis."""

import logging
from typing import Any, List

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, field_serializer, field_validator, model_validator

from cohering_power.exceptions import InvalidStateError, NotHermitianError
from cohering_power.matcore import (
    HERMITIAN_TOL,
    PSD_TOL,
    TRACE_TOL,
    ComplexMatrix,
    as_complex_matrix,
    dagger,
    encode_matrix,
    hermitian_eigenvalues,
    hermiticity_defect,
    is_square,
    tensor,
)

logger = logging.getLogger(__name__)


def _freeze(m: ComplexMatrix) -> ComplexMatrix:
    m = np.array(m, dtype=np.complex128, copy=True)
    m.flags.writeable = False
    return m


class DensityMatrix(BaseModel):
    """Hermitian, positive-semidefinite, unit-trace matrix.

    Example:
        >>> rho = DensityMatrix(mat=[[0.5, 0.5], [0.5, 0.5]])
        >>> rho.dim
        2
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mat: np.ndarray

    @field_validator("mat", mode="before")
    @classmethod
    def _coerce_matrix(cls, value: Any) -> ComplexMatrix:
        return _freeze(as_complex_matrix(value))

    @model_validator(mode="after")
    def _check_density(self) -> "DensityMatrix":
        m = self.mat
        if not is_square(m):
            raise InvalidStateError(f"Density matrix must be square, got shape {m.shape}")
        try:
            evals = hermitian_eigenvalues(m, tol=HERMITIAN_TOL)
        except NotHermitianError as e:
            raise InvalidStateError(e.message) from e
        if evals[-1] < -PSD_TOL:
            raise InvalidStateError(
                f"Density matrix has negative eigenvalue {evals[-1]:.3e}"
            )
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"Density matrix trace is {trace.real:.12g}, expected 1")
        return self

    @field_serializer("mat")
    def _serialize_matrix(self, mat: ComplexMatrix) -> List[List[List[float]]]:
        return encode_matrix(mat)

    @property
    def dim(self) -> int:
        return int(self.mat.shape[0])

    @classmethod
    def trusted(cls, mat: ComplexMatrix) -> "DensityMatrix":
        """Wrap a matrix that is a density matrix by construction, skipping validation."""
        return cls.model_construct(mat=_freeze(mat))

    @classmethod
    def from_approximate(cls, m: npt.ArrayLike) -> "DensityMatrix":
        """Sanitize a rounded density matrix.

        The input is symmetrized, negative eigenvalues are clipped to zero and the trace
        is renormalized to one.
        """
        m = as_complex_matrix(m)
        hermitian = 0.5 * (m + dagger(m))
        evals, evecs = np.linalg.eigh(hermitian)
        clipped = np.clip(evals, 0.0, None)
        if clipped.sum() <= 0.0:
            raise InvalidStateError("Matrix has no positive part to normalize")
        rebuilt = (evecs * clipped) @ dagger(evecs)
        rebuilt = rebuilt / np.trace(rebuilt).real
        logger.debug(
            "from_approximate: hermiticity defect %.3e, clipped %d eigenvalue(s)",
            hermiticity_defect(m),
            int(np.count_nonzero(evals < 0)),
        )
        return cls(mat=0.5 * (rebuilt + dagger(rebuilt)))

    def eigenvalues(self) -> npt.NDArray[np.float64]:
        """Descending spectrum with rounding-level negatives clipped to zero."""
        evals = hermitian_eigenvalues(self.mat)
        if evals[-1] < -PSD_TOL:
            raise InvalidStateError(f"Negative eigenvalue {evals[-1]:.3e}")
        return np.clip(evals, 0.0, None)

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix.trusted(tensor(self.mat, other.mat))


def basis_state(k: int, dim: int) -> DensityMatrix:
    """Incoherent basis state ``|k><k|``."""
    if not 0 <= k < dim:
        raise InvalidStateError(f"Basis index {k} out of range for dimension {dim}")
    mat = np.zeros((dim, dim), dtype=np.complex128)
    mat[k, k] = 1.0
    return DensityMatrix.trusted(mat)


def pure_state(vector: npt.ArrayLike) -> DensityMatrix:
    """Projector onto the normalized ``vector``."""
    vec = np.asarray(vector, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(vec)
    if norm == 0.0 or not np.isfinite(norm):
        raise InvalidStateError("Pure state vector must be finite and nonzero")
    vec = vec / norm
    return DensityMatrix.trusted(np.outer(vec, vec.conj()))


def maximally_coherent_state(dim: int) -> DensityMatrix:
    """Uniform superposition projector; every entry equals ``1/dim``."""
    return pure_state(np.ones(dim))


def plus_state() -> DensityMatrix:
    return maximally_coherent_state(2)


def maximally_mixed_state(dim: int) -> DensityMatrix:
    return DensityMatrix.trusted(np.eye(dim, dtype=np.complex128) / dim)
