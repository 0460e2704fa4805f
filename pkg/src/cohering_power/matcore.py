"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of ``complex128``. Tensor products use big-endian
subsystem ordering: the first factor is the most significant index, so the basis label
``|k1 k2>`` sits at row ``k1 * d2 + k2``.
"""

import logging
import math
import string
from functools import reduce
from typing import Iterable, List, Sequence, Union

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, PositiveInt

from cohering_power.exceptions import (
    DimensionMismatchError,
    InvalidMatrixError,
    NotHermitianError,
    SingularMatrixError,
)

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]

HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-9
PSD_TOL = 1e-9
UNITARY_TOL = 1e-9

_SUBSCRIPTS = string.ascii_letters


class SubsystemShape(BaseModel):
    """Local dimensions ``d_1..d_N`` of a multipartite space."""

    model_config = ConfigDict(frozen=True)

    dims: List[PositiveInt] = Field(..., min_length=1)

    @property
    def total(self) -> int:
        """Dimension of the full tensor product space."""
        return math.prod(self.dims)

    def __len__(self) -> int:
        return len(self.dims)

    def dimension_of(self, indices: Iterable[int]) -> int:
        """Dimension of the tensor product of the selected factors."""
        return math.prod(self.dims[i] for i in indices)

    def check_indices(self, indices: Iterable[int]) -> List[int]:
        """Return the indices sorted and deduplicated, rejecting out-of-range entries."""
        selected = sorted(set(indices))
        for index in selected:
            if not 0 <= index < len(self.dims):
                raise DimensionMismatchError(
                    f"Subsystem index {index} out of range for {len(self.dims)} factors"
                )
        return selected


def as_complex_matrix(m: npt.ArrayLike) -> ComplexMatrix:
    """Convert ``m`` to a 2-D ``complex128`` array with finite entries."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidMatrixError(f"Expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrixError("Matrix entries must be finite")
    return arr


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    """Conjugate transpose."""
    return np.conj(m).T


def is_square(m: ComplexMatrix) -> bool:
    return m.ndim == 2 and m.shape[0] == m.shape[1]


def require_square(m: ComplexMatrix, what: str = "matrix") -> None:
    if not is_square(m):
        raise DimensionMismatchError(f"{what} must be square, got shape {m.shape}")


def tensor(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product ``a ⊗ b`` with ``a`` as the most significant factor."""
    return np.kron(a, b)


def tensor_all(factors: Sequence[ComplexMatrix]) -> ComplexMatrix:
    """Kronecker product of a non-empty sequence of matrices, left to right."""
    if not factors:
        raise DimensionMismatchError("tensor_all needs at least one factor")
    return reduce(np.kron, factors)


def basis_vector(k: int, dim: int) -> ComplexMatrix:
    """Column vector ``|k>`` of the computational basis."""
    vec = np.zeros((dim, 1), dtype=np.complex128)
    vec[k, 0] = 1.0
    return vec


def matrix_unit(i: int, j: int, dim: int) -> ComplexMatrix:
    """Matrix unit ``|i><j|``."""
    unit = np.zeros((dim, dim), dtype=np.complex128)
    unit[i, j] = 1.0
    return unit


def max_abs(m: npt.ArrayLike) -> float:
    """Largest entrywise magnitude (0 for an empty array)."""
    arr = np.asarray(m)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def hermiticity_defect(m: ComplexMatrix) -> float:
    return max_abs(m - dagger(m))


def partial_trace(m: ComplexMatrix, shape: SubsystemShape, keep: Iterable[int]) -> ComplexMatrix:
    """Reduce ``m`` onto the factors listed in ``keep``.

    Kept factors stay in their original relative order. The result has dimension equal to
    the product of the kept local dimensions.
    """
    require_square(m)
    if m.shape[0] != shape.total:
        raise DimensionMismatchError(
            f"Shape {shape.dims} (total {shape.total}) does not match matrix dimension "
            f"{m.shape[0]}"
        )
    kept = shape.check_indices(keep)
    if not kept:
        raise DimensionMismatchError("partial_trace needs a non-empty set of kept subsystems")

    n = len(shape)
    if 2 * n > len(_SUBSCRIPTS):
        raise DimensionMismatchError(f"Too many subsystems for partial_trace: {n}")
    rows = list(_SUBSCRIPTS[:n])
    cols = [(_SUBSCRIPTS[n + i] if i in kept else rows[i]) for i in range(n)]
    out = [rows[i] for i in kept] + [cols[i] for i in kept]
    subscripts = f"{''.join(rows)}{''.join(cols)}->{''.join(out)}"

    reduced = np.einsum(subscripts, m.reshape(shape.dims * 2))
    kept_dim = shape.dimension_of(kept)
    return np.ascontiguousarray(reduced.reshape(kept_dim, kept_dim))


def trace_out(m: ComplexMatrix, shape: SubsystemShape, traced: Iterable[int]) -> ComplexMatrix:
    """Trace over the factors in ``traced``; tracing every factor gives ``[[Tr m]]``."""
    removed = shape.check_indices(traced)
    kept = [i for i in range(len(shape)) if i not in removed]
    if not kept:
        require_square(m)
        if m.shape[0] != shape.total:
            raise DimensionMismatchError(
                f"Shape {shape.dims} does not match matrix dimension {m.shape[0]}"
            )
        return np.array([[np.trace(m)]], dtype=np.complex128)
    return partial_trace(m, shape, kept)


def hermitian_eigenvalues(m: ComplexMatrix, tol: float = HERMITIAN_TOL) -> npt.NDArray[np.float64]:
    """Real spectrum of a Hermitian matrix, sorted in descending order."""
    require_square(m)
    defect = hermiticity_defect(m)
    if defect > tol:
        raise NotHermitianError(f"Matrix is not Hermitian: max |m - m†| = {defect:.3e}")
    hermitian = 0.5 * (m + dagger(m))
    return np.linalg.eigvalsh(hermitian)[::-1].copy()


def one_to_one_norm(m: ComplexMatrix) -> float:
    """Induced 1→1 norm: the largest absolute column sum."""
    return float(np.max(np.sum(np.abs(m), axis=0)))


def unitarity_defect(u: ComplexMatrix) -> float:
    """Max entrywise deviation of ``u†u`` from the identity."""
    if not is_square(u):
        return math.inf
    return max_abs(dagger(u) @ u - np.eye(u.shape[0]))


def is_unitary(u: ComplexMatrix, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(u) <= tol


def nearest_unitary(m: ComplexMatrix, rcond: float = 1e-12) -> ComplexMatrix:
    """Unitary factor of the polar decomposition ``m = W P``.

    Computed from the eigendecomposition of ``m†m``: ``W = m (m†m)^{-1/2}``.
    """
    m = as_complex_matrix(m)
    require_square(m)
    gram = dagger(m) @ m
    evals, evecs = np.linalg.eigh(0.5 * (gram + dagger(gram)))
    top = float(np.max(evals))
    if top <= 0.0 or float(np.min(evals)) <= rcond * top:
        raise SingularMatrixError("nearest_unitary needs a nonsingular matrix")
    inv_sqrt = (evecs / np.sqrt(evals)) @ dagger(evecs)
    w = m @ inv_sqrt
    logger.debug("nearest_unitary: unitarity defect %.3e", unitarity_defect(w))
    return w


def encode_matrix(m: npt.ArrayLike) -> List[List[List[float]]]:
    """Encode a matrix as row arrays of ``[re, im]`` pairs."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def _decode_entry(entry: Union[float, Sequence[float]]) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry)
    if len(entry) != 2:
        raise InvalidMatrixError(f"Complex entries must be [re, im] pairs, got {list(entry)}")
    return complex(entry[0], entry[1])


def decode_matrix(rows: Sequence[Sequence[Union[float, Sequence[float]]]]) -> ComplexMatrix:
    """Inverse of :func:`encode_matrix`; bare real entries are accepted too."""
    if not rows:
        raise InvalidMatrixError("Matrix has no rows")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise InvalidMatrixError("Matrix rows have different lengths")
    try:
        data = [[_decode_entry(entry) for entry in row] for row in rows]
    except TypeError as e:
        raise InvalidMatrixError(f"Complex entries must be [re, im] pairs: {e}") from e
    return as_complex_matrix(data)
