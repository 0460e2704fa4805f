"""Quantum operations: construction, validation, application and dilation.

Every operation is an immutable pydantic model. Six variants exist:

- :class:`Unitary` ``ρ ↦ UρU†``
- :class:`Kraus` ``ρ ↦ Σ K ρ K†``
- :class:`Append` ``ρ ↦ ρ ⊗ σ`` (appended factor last)
- :class:`Dismiss` ``ρ ↦ Tr_traced ρ``
- :class:`Compose` steps applied first to last
- :class:`Tensor` ``Φ_1 ⊗ Φ_2 ⊗ ...``

Application, Kraus conversion and validation work on all of them through
:func:`apply`, :func:`to_kraus` and :func:`validate`.
"""

import itertools
import logging
import math
from typing import Any, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_serializer, field_validator, model_validator

from cohering_power.exceptions import (
    ChannelValidationError,
    DilationError,
    DimensionMismatchError,
    InvalidMatrixError,
    NumericalError,
)
from cohering_power.matcore import (
    ComplexMatrix,
    SubsystemShape,
    as_complex_matrix,
    basis_vector,
    dagger,
    encode_matrix,
    matrix_unit,
    max_abs,
    require_square,
    tensor,
    tensor_all,
    trace_out,
    unitarity_defect,
)
from cohering_power.models import DilationResult, ValidationReport
from cohering_power.states import DensityMatrix

logger = logging.getLogger(__name__)

CHANNEL_TOL = 1e-9
INCOHERENT_OP_TOL = 1e-9
DILATION_TOL = 1e-8
CROSS_CHECK_MAX_DIM = 16
_ZERO_KRAUS = 1e-15


def _frozen(m: Any) -> ComplexMatrix:
    arr = np.array(as_complex_matrix(m), copy=True)
    arr.flags.writeable = False
    return arr


class QuantumOperation(BaseModel):
    """Base class of all operation variants."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @property
    def in_dim(self) -> int:
        raise NotImplementedError

    @property
    def out_dim(self) -> int:
        raise NotImplementedError

    def kraus_operators(self) -> List[ComplexMatrix]:
        """Kraus operators of shape ``out_dim × in_dim``."""
        raise NotImplementedError

    def apply_to_matrix(self, m: ComplexMatrix) -> ComplexMatrix:
        """Apply the (linear) map to any ``in_dim × in_dim`` matrix without validation."""
        return _apply_kraus(self.kraus_operators(), m)


def _apply_kraus(ops: Sequence[ComplexMatrix], m: ComplexMatrix) -> ComplexMatrix:
    out = np.zeros((ops[0].shape[0], ops[0].shape[0]), dtype=np.complex128)
    for op in ops:
        out += op @ m @ dagger(op)
    return out


def _prune(ops: List[ComplexMatrix]) -> List[ComplexMatrix]:
    kept = [op for op in ops if max_abs(op) > _ZERO_KRAUS]
    return kept or ops[:1]


class Unitary(QuantumOperation):
    """Unitary operation ``ρ ↦ UρU†``."""

    u: np.ndarray

    @field_validator("u", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> ComplexMatrix:
        m = _frozen(value)
        require_square(m, "Unitary matrix")
        return m

    @field_serializer("u")
    def _serialize(self, u: ComplexMatrix) -> List[List[List[float]]]:
        return encode_matrix(u)

    @property
    def in_dim(self) -> int:
        return int(self.u.shape[0])

    @property
    def out_dim(self) -> int:
        return self.in_dim

    def kraus_operators(self) -> List[ComplexMatrix]:
        return [self.u]

    def apply_to_matrix(self, m: ComplexMatrix) -> ComplexMatrix:
        return self.u @ m @ dagger(self.u)


class Kraus(QuantumOperation):
    """Operation given by an explicit Kraus list."""

    ops: Tuple[np.ndarray, ...]

    @field_validator("ops", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> Tuple[ComplexMatrix, ...]:
        ops = tuple(_frozen(op) for op in value)
        if not ops:
            raise DimensionMismatchError("Kraus list must not be empty")
        shape = ops[0].shape
        for index, op in enumerate(ops):
            if op.shape != shape:
                raise DimensionMismatchError(
                    f"Kraus operator {index} has shape {op.shape}, expected {shape}"
                )
        return ops

    @field_serializer("ops")
    def _serialize(self, ops: Tuple[ComplexMatrix, ...]) -> List[List[List[List[float]]]]:
        return [encode_matrix(op) for op in ops]

    @property
    def in_dim(self) -> int:
        return int(self.ops[0].shape[1])

    @property
    def out_dim(self) -> int:
        return int(self.ops[0].shape[0])

    def kraus_operators(self) -> List[ComplexMatrix]:
        return list(self.ops)


class Append(QuantumOperation):
    """Appending operation ``ρ ↦ ρ ⊗ σ`` on a ``system_dim``-dimensional input."""

    system_dim: int
    sigma: DensityMatrix

    @field_validator("system_dim")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise DimensionMismatchError("Append system_dim must be positive")
        return value

    @property
    def in_dim(self) -> int:
        return self.system_dim

    @property
    def out_dim(self) -> int:
        return self.system_dim * self.sigma.dim

    @property
    def output_shape(self) -> SubsystemShape:
        return SubsystemShape(dims=[self.system_dim, self.sigma.dim])

    def kraus_operators(self) -> List[ComplexMatrix]:
        evals, evecs = np.linalg.eigh(self.sigma.mat)
        identity = np.eye(self.system_dim, dtype=np.complex128)
        ops = [
            math.sqrt(p) * np.kron(identity, evecs[:, [i]])
            for i, p in enumerate(evals)
            if p > _ZERO_KRAUS
        ]
        return ops

    def apply_to_matrix(self, m: ComplexMatrix) -> ComplexMatrix:
        return tensor(m, self.sigma.mat)


class Dismiss(QuantumOperation):
    """Dismissal operation: partial trace over the ``traced`` factors of ``shape``."""

    shape: SubsystemShape
    traced: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_traced(self) -> "Dismiss":
        if not self.traced:
            raise DimensionMismatchError("Dismiss needs at least one traced subsystem")
        checked = self.shape.check_indices(self.traced)
        if len(checked) != len(self.traced):
            raise DimensionMismatchError(f"Dismiss traced indices repeat: {self.traced}")
        return self

    @property
    def kept(self) -> List[int]:
        return [i for i in range(len(self.shape)) if i not in self.traced]

    @property
    def in_dim(self) -> int:
        return self.shape.total

    @property
    def out_dim(self) -> int:
        return self.shape.dimension_of(self.kept)

    def kraus_operators(self) -> List[ComplexMatrix]:
        ranges = [range(self.shape.dims[i]) for i in sorted(self.traced)]
        ops = []
        for labels in itertools.product(*ranges):
            picked = dict(zip(sorted(self.traced), labels))
            factors = [
                dagger(basis_vector(picked[i], d)) if i in picked else np.eye(d)
                for i, d in enumerate(self.shape.dims)
            ]
            ops.append(tensor_all(factors).astype(np.complex128))
        return ops

    def apply_to_matrix(self, m: ComplexMatrix) -> ComplexMatrix:
        return trace_out(m, self.shape, self.traced)


class Compose(QuantumOperation):
    """Sequential composition; ``steps[0]`` acts first."""

    steps: Tuple[QuantumOperation, ...]

    @field_validator("steps")
    @classmethod
    def _nonempty(cls, value: Tuple[QuantumOperation, ...]) -> Tuple[QuantumOperation, ...]:
        if not value:
            raise DimensionMismatchError("Compose needs at least one step")
        return value

    @property
    def in_dim(self) -> int:
        return self.steps[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.steps[-1].out_dim

    def kraus_operators(self) -> List[ComplexMatrix]:
        ops = [np.eye(self.in_dim, dtype=np.complex128)]
        for step in self.steps:
            ops = _prune([k @ a for k in step.kraus_operators() for a in ops])
        return ops

    def apply_to_matrix(self, m: ComplexMatrix) -> ComplexMatrix:
        for step in self.steps:
            m = step.apply_to_matrix(m)
        return m


class Tensor(QuantumOperation):
    """Tensor product of operations; ``factors[0]`` is the most significant factor."""

    factors: Tuple[QuantumOperation, ...]

    @field_validator("factors")
    @classmethod
    def _nonempty(cls, value: Tuple[QuantumOperation, ...]) -> Tuple[QuantumOperation, ...]:
        if not value:
            raise DimensionMismatchError("Tensor needs at least one factor")
        return value

    @property
    def in_dim(self) -> int:
        return math.prod(f.in_dim for f in self.factors)

    @property
    def out_dim(self) -> int:
        return math.prod(f.out_dim for f in self.factors)

    def kraus_operators(self) -> List[ComplexMatrix]:
        lists = [f.kraus_operators() for f in self.factors]
        return _prune([tensor_all(combo) for combo in itertools.product(*lists)])


def compose(ops: Sequence[QuantumOperation]) -> Compose:
    """Compose ``ops`` first to last, checking that dimensions chain."""
    ops = list(ops)
    if not ops:
        raise DimensionMismatchError("compose needs at least one operation")
    for position, (first, second) in enumerate(zip(ops, ops[1:])):
        if first.out_dim != second.in_dim:
            raise DimensionMismatchError(
                f"Step {position} outputs dimension {first.out_dim} but step {position + 1} "
                f"expects {second.in_dim}"
            )
    return Compose(steps=tuple(ops))


def tensor_ops(ops: Sequence[QuantumOperation]) -> Tensor:
    """Tensor product of ``ops`` in order."""
    ops = list(ops)
    if not ops:
        raise DimensionMismatchError("tensor_ops needs at least one operation")
    return Tensor(factors=tuple(ops))


def identity_channel(dim: int) -> Unitary:
    return Unitary(u=np.eye(dim))


def dephasing_channel(dim: int) -> Kraus:
    """Completely dephasing channel with Kraus operators ``|k><k|``."""
    return Kraus(ops=[matrix_unit(k, k, dim) for k in range(dim)])


def phase_flip_channel(p: float = 0.5) -> Kraus:
    """Qubit phase flip: ``Z`` applied with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise InvalidMatrixError(f"Phase-flip probability must lie in [0, 1], got {p}")
    z = np.diag([1.0, -1.0])
    return Kraus(ops=[math.sqrt(1.0 - p) * np.eye(2), math.sqrt(p) * z])


def _inspect(op: QuantumOperation, failures: List[str], path: str) -> Tuple[float, float, bool]:
    completeness = 0.0
    defect = 0.0
    chain_ok = True
    if isinstance(op, Unitary):
        defect = unitarity_defect(op.u)
        if defect > CHANNEL_TOL:
            failures.append(f"{path}: unitarity defect {defect:.3e}")
    elif isinstance(op, Kraus):
        total = sum(dagger(k) @ k for k in op.ops)
        completeness = max_abs(total - np.eye(op.in_dim))
        if completeness > CHANNEL_TOL:
            failures.append(f"{path}: completeness deviation {completeness:.3e}")
    elif isinstance(op, (Compose, Tensor)):
        children = op.steps if isinstance(op, Compose) else op.factors
        label = "steps" if isinstance(op, Compose) else "factors"
        for index, child in enumerate(children):
            c, d, ok = _inspect(child, failures, f"{path}.{label}[{index}]")
            completeness = max(completeness, c)
            defect = max(defect, d)
            chain_ok = chain_ok and ok
        if isinstance(op, Compose):
            for index, (first, second) in enumerate(zip(op.steps, op.steps[1:])):
                if first.out_dim != second.in_dim:
                    chain_ok = False
                    failures.append(
                        f"{path}.steps[{index}]: output dimension {first.out_dim} does not "
                        f"match next input dimension {second.in_dim}"
                    )
    return completeness, defect, chain_ok


def validate(op: QuantumOperation) -> ValidationReport:
    """Check completeness, unitarity and dimension chaining of ``op``.

    Failures are reported, never raised.
    """
    failures: List[str] = []
    completeness, defect, chain_ok = _inspect(op, failures, "op")
    return ValidationReport(
        passed=not failures,
        completeness_deviation=completeness,
        unitarity_defect=defect,
        dimension_chain_ok=chain_ok,
        failures=failures,
    )


def ensure_valid(op: QuantumOperation) -> None:
    """Raise :class:`ChannelValidationError` unless ``op`` validates."""
    report = validate(op)
    if not report.passed:
        raise ChannelValidationError("Invalid quantum operation: " + "; ".join(report.failures),
                                     report=report)


def apply(op: QuantumOperation, rho: DensityMatrix) -> DensityMatrix:
    """Apply ``op`` to ``rho`` and return the validated output state."""
    if rho.dim != op.in_dim:
        raise DimensionMismatchError(
            f"State dimension {rho.dim} does not match operation input dimension {op.in_dim}"
        )
    ensure_valid(op)
    out = op.apply_to_matrix(rho.mat)
    return DensityMatrix(mat=0.5 * (out + dagger(out)))


def to_kraus(op: QuantumOperation) -> Kraus:
    """Kraus normal form of any variant."""
    if isinstance(op, Kraus):
        return op
    return Kraus(ops=op.kraus_operators())


def choi_matrix(op: QuantumOperation) -> ComplexMatrix:
    """Choi matrix ``Σ_ij |i><j| ⊗ Φ(|i><j|)``."""
    d = op.in_dim
    blocks = [[op.apply_to_matrix(matrix_unit(i, j, d)) for j in range(d)] for i in range(d)]
    return np.block(blocks)


def canonical_kraus(op: QuantumOperation, rtol: float = 1e-12) -> Kraus:
    """Minimal Kraus set from the eigendecomposition of the Choi matrix."""
    choi = choi_matrix(op)
    evals, evecs = np.linalg.eigh(0.5 * (choi + dagger(choi)))
    cutoff = rtol * max(float(np.max(evals)), 0.0)
    d_in, d_out = op.in_dim, op.out_dim
    ops = [
        math.sqrt(lam) * evecs[:, a].reshape(d_in, d_out).T
        for a, lam in sorted(enumerate(evals), key=lambda item: -item[1])
        if lam > cutoff
    ]
    if not ops:
        raise NumericalError("Choi matrix has no positive eigenvalue")
    return Kraus(ops=ops)


def is_incoherent_operation(op: QuantumOperation, tol: float = INCOHERENT_OP_TOL) -> bool:
    """True iff every Kraus operator has at most one entry above ``tol`` per column.

    For input dimension up to 16 the answer is cross-checked by applying ``op`` to every
    basis state.
    """
    ops = op.kraus_operators()
    incoherent = all(
        int(np.max(np.sum(np.abs(k) > tol, axis=0))) <= 1 for k in ops
    )
    if incoherent and op.in_dim <= CROSS_CHECK_MAX_DIM:
        for k in range(op.in_dim):
            out = op.apply_to_matrix(matrix_unit(k, k, op.in_dim))
            off = out - np.diag(np.diag(out))
            if max_abs(off) > tol * len(ops):
                raise NumericalError(
                    f"Kraus column test says incoherent but basis state {k} maps to a "
                    f"coherent output (off-diagonal {max_abs(off):.3e})"
                )
    return incoherent


def stinespring_dilate(
    op: QuantumOperation,
    check_states: int = 20,
    seed: int = 0,
    minimal_ancilla: bool = False,
) -> DilationResult:
    """Unitary dilation ``Φ(ρ) = Tr_K(U (ρ ⊗ |0><0|) U†)``.

    Args:
        op: Operation with equal input and output dimension ``d``.
        check_states: Number of seeded random states used to measure the reconstruction
            error.
        seed: Seed for those states.
        minimal_ancilla: Use an ancilla as large as the Kraus rank instead of ``d²``.

    Returns:
        DilationResult with the ancilla dimension, ``|ψ> = |0>``, the unitary on
        ``H ⊗ K`` and the measured reconstruction error.

    Example:
        >>> result = stinespring_dilate(phase_flip_channel(0.5))
        >>> result.ancilla_dim
        4
    """
    from cohering_power.optimize import random_density

    if op.in_dim != op.out_dim:
        raise DimensionMismatchError(
            f"Dilation needs equal input and output dimension, got {op.in_dim} → {op.out_dim}"
        )
    ensure_valid(op)
    d = op.in_dim
    ops = op.kraus_operators()
    if minimal_ancilla or len(ops) > d * d:
        ops = canonical_kraus(op).kraus_operators()
    m = len(ops) if minimal_ancilla else d * d
    n = d * m

    isometry = np.zeros((n, d), dtype=np.complex128)
    for mu, k in enumerate(ops):
        isometry[mu::m, :] = k

    big = _complete_unitary(isometry, m)
    defect = unitarity_defect(big)
    if defect > CHANNEL_TOL:
        raise DilationError(f"Completed dilation is not unitary: defect {defect:.3e}")

    ancilla = basis_vector(0, m)
    projector = ancilla @ dagger(ancilla)
    shape = SubsystemShape(dims=[d, m])
    error = 0.0
    for index in range(check_states):
        rho = random_density(np.random.SeedSequence([seed, index]), d).mat
        direct = op.apply_to_matrix(rho)
        dilated = trace_out(big @ np.kron(rho, projector) @ dagger(big), shape, [1])
        error = max(error, max_abs(direct - dilated))
    if error > DILATION_TOL:
        raise DilationError(f"Dilation reconstruction error {error:.3e} exceeds {DILATION_TOL}")

    logger.debug("stinespring_dilate: d=%d ancilla=%d error=%.3e", d, m, error)
    return DilationResult(
        system_dim=d,
        ancilla_dim=m,
        ancilla_state=ancilla.reshape(-1),
        big_unitary=big,
        reconstruction_error=error,
        unitarity_defect=defect,
        check_states=check_states,
    )


def _complete_unitary(isometry: ComplexMatrix, m: int, threshold: float = 1e-6) -> ComplexMatrix:
    """Place the isometry columns at ``|j, 0>`` and fill the rest with an orthonormal basis.

    Completion vectors come from the canonical basis, orthogonalized and then
    re-orthogonalized once, so the result is deterministic.
    """
    n, d = isometry.shape
    basis = isometry.copy()
    extra: List[np.ndarray] = []
    needed = n - d
    for k in range(n):
        if len(extra) == needed:
            break
        v = np.zeros(n, dtype=np.complex128)
        v[k] = 1.0
        for _ in range(2):
            v = v - basis @ (dagger(basis) @ v)
        norm = float(np.linalg.norm(v))
        if norm > threshold:
            v = v / norm
            extra.append(v)
            basis = np.column_stack([basis, v])
    if len(extra) < needed:
        raise DilationError(
            f"Isometry completion found {len(extra)} of {needed} orthonormal columns"
        )

    big = np.zeros((n, n), dtype=np.complex128)
    fill = iter(extra)
    for j in range(d):
        big[:, j * m] = isometry[:, j]
        for mu in range(1, m):
            big[:, j * m + mu] = next(fill)
    return big


def basis_matrix_units(dim: int) -> List[ComplexMatrix]:
    """All ``dim²`` matrix units ``|i><j|``, row-major."""
    return [matrix_unit(i, j, dim) for i in range(dim) for j in range(dim)]


def process_distance(first: QuantumOperation, second: QuantumOperation) -> float:
    """Max entrywise difference of the two maps over every basis matrix unit."""
    if first.in_dim != second.in_dim or first.out_dim != second.out_dim:
        raise DimensionMismatchError("Operations act between different spaces")
    return max(
        max_abs(first.apply_to_matrix(unit) - second.apply_to_matrix(unit))
        for unit in basis_matrix_units(first.in_dim)
    )

