"""Cohering power ``S_C`` and generalized cohering power ``Ŝ_C`` of quantum operations.

``S_C(Φ) = max_k C(Φ(|k><k|))`` is computed exactly by enumerating the input basis and,
for unitary, appending and dismissal operations, cross-checked against closed forms.
``Ŝ_C(Φ) = max_ρ C(Φ(ρ)) - C(ρ)`` is a nonconvex problem; the optimizer's best value is
reported as a lower bound together with its witness state.
"""

import logging
import math
from functools import reduce
from typing import Callable, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from cohering_power.channels import (
    Append,
    Dismiss,
    QuantumOperation,
    Unitary,
    compose,
    ensure_valid,
    stinespring_dilate,
    tensor_ops,
)
from cohering_power.coherence import c_l1, coherence, shannon_entropy
from cohering_power.exceptions import (
    DimensionMismatchError,
    NonUnitaryError,
    NumericalError,
    UnsupportedOperationError,
)
from cohering_power.matcore import (
    UNITARY_TOL,
    ComplexMatrix,
    as_complex_matrix,
    dagger,
    is_square,
    matrix_unit,
    nearest_unitary,
    one_to_one_norm,
    unitarity_defect,
)
from cohering_power.models import (
    BoundComparison,
    CircuitBound,
    CircuitSpec,
    CoherenceMeasure,
    GateName,
    OptimizerConfig,
    PowerMethod,
    PowerReport,
)
from cohering_power.optimize import Observer, maximize_over_states
from cohering_power.states import DensityMatrix, basis_state

logger = logging.getLogger(__name__)

CLOSED_FORM_TOL = 1e-9
RATIO_TOL = 1e-6
EXACT_CIRCUIT_MAX_QUBITS = 6

MeasureLike = Union[CoherenceMeasure, str]

# Printed to four decimals; sanitize with nearest_unitary / DensityMatrix.from_approximate.
COUNTEREXAMPLE_UNITARY = np.array(
    [
        [0.5828 - 0.8125j, -0.0148 + 0.0007j],
        [-0.0125 - 0.0080j, -0.1021 - 0.9947j],
    ]
)
COUNTEREXAMPLE_STATE = np.array(
    [
        [0.8706, 0.3078 + 0.0527j],
        [0.3078 - 0.0527j, 0.1294],
    ]
)


class ContinuityGap(NamedTuple):
    """``lhs = |S(u) - S(v)|`` against ``rhs = 2√d ‖u - v‖₁→₁``."""

    lhs: float
    rhs: float

    def holds(self, tol: float = 1e-9) -> bool:
        return self.lhs <= self.rhs + tol


class Counterexample(NamedTuple):
    """Relative-entropy power of a unitary and its coherence gain at one state."""

    power: float
    gain: float
    unitary: ComplexMatrix
    state: DensityMatrix


def require_unitary(u: ComplexMatrix, tol: float = UNITARY_TOL) -> ComplexMatrix:
    u = as_complex_matrix(u)
    if not is_square(u):
        raise NonUnitaryError(f"Unitary must be square, got shape {u.shape}")
    defect = unitarity_defect(u)
    if defect > tol:
        raise NonUnitaryError(f"Matrix is not unitary: max |u†u - I| = {defect:.3e}")
    return u


def unitary_power_l1(u: ComplexMatrix) -> float:
    """``S_ℓ1(Φ_U) = ‖U‖₁→₁² - 1``."""
    u = require_unitary(u)
    return max(one_to_one_norm(u) ** 2 - 1.0, 0.0)


def unitary_power_relent(u: ComplexMatrix) -> float:
    """``S_r(Φ_U)``: the largest Shannon entropy of a column's squared magnitudes."""
    u = require_unitary(u)
    weights = np.abs(u) ** 2
    return max(shannon_entropy(weights[:, i]) for i in range(u.shape[1]))


def _require_qubit(u: ComplexMatrix) -> ComplexMatrix:
    u = require_unitary(u)
    if u.shape != (2, 2):
        raise DimensionMismatchError(f"Expected a qubit unitary, got shape {u.shape}")
    return u


def qubit_power_l1(u: ComplexMatrix) -> float:
    """``2|a||b|`` for ``U = e^{iφ}[[a, b], [-b*, a*]]``."""
    u = _require_qubit(u)
    return 2.0 * abs(u[0, 0]) * abs(u[0, 1])


def qubit_power_relent(u: ComplexMatrix) -> float:
    """``S(|a|², |b|²)`` for ``U = e^{iφ}[[a, b], [-b*, a*]]``."""
    u = _require_qubit(u)
    return shannon_entropy([abs(u[0, 0]) ** 2, abs(u[0, 1]) ** 2])


def _output_state(op: QuantumOperation, m: ComplexMatrix) -> DensityMatrix:
    out = op.apply_to_matrix(m)
    return DensityMatrix.trusted(0.5 * (out + dagger(out)))


def _enumerate_basis(op: QuantumOperation, measure: CoherenceMeasure) -> Tuple[float, int]:
    best_value, best_index = -math.inf, 0
    for k in range(op.in_dim):
        value = coherence(_output_state(op, matrix_unit(k, k, op.in_dim)), measure)
        if value > best_value:
            best_value, best_index = value, k
    return max(best_value, 0.0), best_index


def _closed_form(
    op: QuantumOperation, measure: CoherenceMeasure
) -> Optional[Tuple[float, PowerMethod]]:
    if isinstance(op, Unitary):
        if measure is CoherenceMeasure.L1:
            return unitary_power_l1(op.u), PowerMethod.CLOSED_FORM_L1_UNITARY
        return unitary_power_relent(op.u), PowerMethod.CLOSED_FORM_RENT_UNITARY
    if isinstance(op, Append):
        return coherence(op.sigma, measure), PowerMethod.APPEND_CLOSED_FORM
    if isinstance(op, Dismiss):
        return 0.0, PowerMethod.DISMISS_ZERO
    return None


def cohering_power(
    op: QuantumOperation, measure: MeasureLike = CoherenceMeasure.L1
) -> PowerReport:
    """Cohering power by enumeration over the input basis.

    Args:
        op: A valid quantum operation.
        measure: ``"l1"`` or ``"relent"``.

    Returns:
        PowerReport with ``s_value``, the lowest maximizing basis index and, for unitary,
        appending and dismissal operations, the agreeing closed-form value.

    Example:
        >>> from cohering_power.channels import Unitary
        >>> H = [[1, 1], [1, -1]]
        >>> round(cohering_power(Unitary(u=np.array(H) / np.sqrt(2))).s_value, 12)
        1.0
    """
    measure = CoherenceMeasure(measure)
    ensure_valid(op)
    value, argmax = _enumerate_basis(op, measure)
    method = PowerMethod.BASIS_ENUMERATION
    closed_value: Optional[float] = None

    closed = _closed_form(op, measure)
    if closed is not None:
        closed_value, method = closed
        if abs(closed_value - value) > CLOSED_FORM_TOL:
            raise NumericalError(
                f"{method.value} gives {closed_value:.12g} but basis enumeration gives "
                f"{value:.12g}"
            )
    return PowerReport(
        measure=measure,
        s_value=value,
        argmax_basis_index=argmax,
        method=method,
        closed_form_value=closed_value,
    )


def power_value(op: QuantumOperation, measure: MeasureLike = CoherenceMeasure.L1) -> float:
    """Shorthand for ``cohering_power(op, measure).s_value``."""
    return cohering_power(op, measure).s_value


def gain_objective(
    op: QuantumOperation, measure: MeasureLike
) -> Callable[[DensityMatrix], float]:
    """``ρ ↦ C(Φ(ρ)) - C(ρ)``."""
    measure = CoherenceMeasure(measure)

    def objective(rho: DensityMatrix) -> float:
        return coherence(_output_state(op, rho.mat), measure) - coherence(rho, measure)

    return objective


def generalized_cohering_power(
    op: QuantumOperation,
    measure: MeasureLike = CoherenceMeasure.L1,
    cfg: Optional[OptimizerConfig] = None,
    observer: Optional[Observer] = None,
) -> PowerReport:
    """Best-found generalized cohering power, a certified lower bound on ``Ŝ``.

    Args:
        op: A valid quantum operation.
        measure: ``"l1"`` or ``"relent"``.
        cfg: Optimizer settings.
        observer: Passed to the optimizer; sees every evaluated state.

    Returns:
        PowerReport with ``s_value``, ``s_hat_value``, the witness state and optimizer
        diagnostics. ``s_hat_is_lower_bound`` is always set.
    """
    measure = CoherenceMeasure(measure)
    cfg = cfg or OptimizerConfig()
    base = cohering_power(op, measure)
    objective = gain_objective(op, measure)
    diagnostics = {"seed": cfg.seed, "basis_fallback": False}

    if op.in_dim < 2:
        witness = basis_state(0, op.in_dim)
        value = objective(witness)
        diagnostics.update({"restarts": 0, "total_iterations": 0, "converged": True})
    else:
        result = maximize_over_states(objective, op.in_dim, cfg, observer=observer)
        witness, value = result.best_state, result.best_value
        diagnostics.update(
            {
                "restarts": len(result.restarts),
                "total_iterations": result.total_iterations,
                "aborted_restarts": result.aborted_restarts,
                "best_restart": result.best_restart,
                "converged": result.converged,
            }
        )
        if base.s_value - value > cfg.objective_tolerance:
            logger.warning(
                "Optimizer best %.12g is below the basis value %.12g; using the basis witness",
                value,
                base.s_value,
            )
            witness = basis_state(base.argmax_basis_index, op.in_dim)
            value = max(objective(witness), base.s_value)
            diagnostics["basis_fallback"] = True
        else:
            value = max(value, base.s_value)

    return base.model_copy(
        update={
            "s_hat_value": value,
            "s_hat_witness": witness,
            "s_hat_is_lower_bound": True,
            "method": PowerMethod.OPTIMIZER,
            "diagnostics": diagnostics,
        }
    )


def ratio_objective(u: ComplexMatrix) -> Callable[[DensityMatrix], float]:
    """``ρ ↦ [C_ℓ1(UρU†) - C_ℓ1(ρ)] / [C_ℓ1(ρ) + 1]``."""
    op = Unitary(u=require_unitary(u))

    def objective(rho: DensityMatrix) -> float:
        before = c_l1(rho)
        return (c_l1(_output_state(op, rho.mat)) - before) / (before + 1.0)

    return objective


def ratio_power_l1(
    u: ComplexMatrix,
    cfg: Optional[OptimizerConfig] = None,
    observer: Optional[Observer] = None,
) -> float:
    """Best-found maximum of the ℓ1 coherence gain ratio; equals ``S_ℓ1(Φ_U)``."""
    u = require_unitary(u)
    closed = unitary_power_l1(u)
    if u.shape[0] < 2:
        return 0.0
    result = maximize_over_states(ratio_objective(u), u.shape[0], cfg, observer=observer)
    if result.best_value > closed + RATIO_TOL:
        raise NumericalError(
            f"Gain ratio {result.best_value:.12g} exceeds S_l1 = {closed:.12g}"
        )
    return result.best_value


def composition_bound_l1(op2: QuantumOperation, op1: QuantumOperation) -> BoundComparison:
    """``S(Φ₂∘Φ₁) + 1 ≤ (S(Φ₂) + 1)(S(Φ₁) + 1)`` for unitary, appending or dismissal ``Φ₂``.

    Returns the right-hand side minus one as ``bound`` and ``S(Φ₂∘Φ₁)`` as ``actual``.
    """
    if not isinstance(op2, (Unitary, Append, Dismiss)):
        raise UnsupportedOperationError(
            f"composition bound needs a unitary, appending or dismissal outer operation, "
            f"got {type(op2).__name__}"
        )
    combined = compose([op1, op2])
    s2 = power_value(op2, CoherenceMeasure.L1)
    s1 = power_value(op1, CoherenceMeasure.L1)
    actual = power_value(combined, CoherenceMeasure.L1)
    return BoundComparison(bound=(s2 + 1.0) * (s1 + 1.0) - 1.0, actual=actual)


def unitary_product_bound_l1(us: Sequence[ComplexMatrix]) -> BoundComparison:
    """``S(∏U_j) + 1 ≤ ∏(S(U_j) + 1)``; product taken left to right."""
    if not us:
        raise DimensionMismatchError("unitary_product_bound_l1 needs at least one unitary")
    checked = [require_unitary(u) for u in us]
    dims = {u.shape[0] for u in checked}
    if len(dims) != 1:
        raise DimensionMismatchError(f"Unitaries have different dimensions: {sorted(dims)}")
    product = reduce(np.matmul, checked)
    bound = math.prod(unitary_power_l1(u) + 1.0 for u in checked) - 1.0
    return BoundComparison(bound=bound, actual=unitary_power_l1(require_unitary(product)))


def tensor_power_check(
    op1: QuantumOperation, op2: QuantumOperation, measure: MeasureLike
) -> BoundComparison:
    """Predicted tensor-product power against basis enumeration on the product space.

    ℓ1 is multiplicative in ``S + 1``; relative entropy is additive.
    """
    measure = CoherenceMeasure(measure)
    s1 = power_value(op1, measure)
    s2 = power_value(op2, measure)
    if measure is CoherenceMeasure.L1:
        predicted = (s1 + 1.0) * (s2 + 1.0) - 1.0
    else:
        predicted = s1 + s2
    return BoundComparison(bound=predicted, actual=power_value(tensor_ops([op1, op2]), measure))


def tensor_power(op1: QuantumOperation, op2: QuantumOperation, measure: MeasureLike) -> float:
    """Cohering power of ``op1 ⊗ op2``; raises if the tensor law fails."""
    check = tensor_power_check(op1, op2, measure)
    if abs(check.slack) > CLOSED_FORM_TOL:
        logger.warning(
            "Tensor law counterexample (%s): predicted %.12g, enumerated %.12g",
            CoherenceMeasure(measure).value,
            check.bound,
            check.actual,
        )
        raise NumericalError(
            f"Tensor law fails: predicted {check.bound:.12g}, enumerated {check.actual:.12g}"
        )
    return check.actual


def continuity_gap(u: ComplexMatrix, v: ComplexMatrix) -> ContinuityGap:
    """``|S_ℓ1(u) - S_ℓ1(v)|`` against ``2√d ‖u - v‖₁→₁``."""
    u = require_unitary(u)
    v = require_unitary(v)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"Unitaries differ in shape: {u.shape} vs {v.shape}")
    lhs = abs(unitary_power_l1(u) - unitary_power_l1(v))
    rhs = 2.0 * math.sqrt(u.shape[0]) * one_to_one_norm(u - v)
    return ContinuityGap(lhs=lhs, rhs=rhs)


def ancilla_coherence_bound(
    op: QuantumOperation,
    measure: MeasureLike = CoherenceMeasure.L1,
    cfg: Optional[OptimizerConfig] = None,
) -> float:
    """Least coherence an ancilla needs to implement ``op`` with incoherent operations.

    ``S_C`` for ℓ1. Relative entropy is subadditive, so there the best-found ``Ŝ_C`` also
    bounds it and the larger of the two is returned.
    """
    measure = CoherenceMeasure(measure)
    if measure is CoherenceMeasure.L1:
        return power_value(op, measure)
    report = generalized_cohering_power(op, measure, cfg)
    return max(report.s_value, report.s_hat_value or 0.0)


def dilation_power_bound(op: QuantumOperation) -> BoundComparison:
    """``S_ℓ1(Φ) ≤ S_ℓ1(U)`` for the Stinespring unitary ``U`` of ``Φ``.

    ``Φ`` is dismissal after ``U`` after appending ``|0><0|``; both outer steps have zero
    power, so the composition bound collapses to the unitary's power.
    """
    dilation = stinespring_dilate(op)
    return BoundComparison(
        bound=unitary_power_l1(dilation.big_unitary),
        actual=power_value(op, CoherenceMeasure.L1),
    )


def lifted_gain(
    u: ComplexMatrix,
    rho: DensityMatrix,
    sigma: DensityMatrix,
    measure: MeasureLike,
) -> BoundComparison:
    """Power of ``u ⊗ I`` (``bound``) against the gain at ``rho ⊗ sigma`` (``actual``)."""
    measure = CoherenceMeasure(measure)
    u = require_unitary(u)
    if rho.dim != u.shape[0]:
        raise DimensionMismatchError("rho must live on the space u acts on")
    lifted = Unitary(u=np.kron(u, np.eye(sigma.dim)))
    joint = rho.tensor(sigma)
    gain = gain_objective(lifted, measure)(joint)
    return BoundComparison(bound=power_value(lifted, measure), actual=gain)


def relent_counterexample() -> Counterexample:
    """Sanitized printed qubit example where ``S_r`` is smaller than one gain."""
    u = nearest_unitary(COUNTEREXAMPLE_UNITARY)
    rho = DensityMatrix.from_approximate(COUNTEREXAMPLE_STATE)
    gain = gain_objective(Unitary(u=u), CoherenceMeasure.RELATIVE_ENTROPY)(rho)
    return Counterexample(power=unitary_power_relent(u), gain=gain, unitary=u, state=rho)


_SQRT_HALF = 1.0 / math.sqrt(2.0)


def gate_matrix(gate: GateName) -> ComplexMatrix:
    """Matrix of a basis gate; controlled gates list controls first."""
    gate = GateName(gate)
    if gate is GateName.H:
        return _SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=np.complex128)
    if gate is GateName.K:
        return np.diag([1.0, 1.0j])
    if gate is GateName.KINV:
        return np.diag([1.0, -1.0j])
    size = 2**gate.arity
    m = np.eye(size, dtype=np.complex128)
    m[[size - 2, size - 1]] = m[[size - 1, size - 2]]
    return m


def embed_gate(g: ComplexMatrix, targets: Sequence[int], qubit_count: int) -> ComplexMatrix:
    """Act with ``g`` on ``targets`` of a ``qubit_count``-qubit register (qubit 0 first)."""
    k = len(targets)
    dim = 2**qubit_count
    if g.shape != (2**k, 2**k):
        raise DimensionMismatchError(f"Gate of shape {g.shape} cannot act on {k} qubit(s)")
    axes = list(range(k))
    columns = np.eye(dim, dtype=np.complex128).reshape([2] * qubit_count + [dim])
    moved = np.moveaxis(columns, list(targets), axes)
    shape = moved.shape
    moved = (g @ moved.reshape(2**k, -1)).reshape(shape)
    return np.moveaxis(moved, axes, list(targets)).reshape(dim, dim)


def circuit_unitary(circuit: CircuitSpec) -> ComplexMatrix:
    """Full ``2^N`` unitary; the first gate acts first."""
    u = np.eye(2**circuit.qubit_count, dtype=np.complex128)
    for gate in circuit.gates:
        u = embed_gate(gate_matrix(gate.gate), gate.targets, circuit.qubit_count) @ u
    return u


def circuit_hadamard_bound(
    circuit: CircuitSpec, exact_max_qubits: int = EXACT_CIRCUIT_MAX_QUBITS
) -> CircuitBound:
    """``S_ℓ1 ≤ 2^{#H} - 1``; every basis gate except ``H`` has zero power.

    For at most ``exact_max_qubits`` qubits the exact power of the circuit unitary is
    computed as well.
    """
    count = circuit.hadamard_count
    bound = 2.0**count - 1.0
    exact: Optional[float] = None
    if circuit.qubit_count <= exact_max_qubits:
        exact = unitary_power_l1(circuit_unitary(circuit))
        if exact > bound + CLOSED_FORM_TOL:
            raise NumericalError(f"Circuit power {exact:.12g} exceeds Hadamard bound {bound}")
    return CircuitBound(
        qubit_count=circuit.qubit_count, hadamard_count=count, bound=bound, exact=exact
    )


def hadamard_power_l1(qubit_count: int) -> float:
    """ℓ1 power of ``H^{⊗N}``, which attains the maximum ``2^N - 1``."""
    u = reduce(np.kron, [gate_matrix(GateName.H)] * qubit_count)
    return unitary_power_l1(u)


__all__ = [
    "COUNTEREXAMPLE_STATE",
    "COUNTEREXAMPLE_UNITARY",
    "ContinuityGap",
    "Counterexample",
    "ancilla_coherence_bound",
    "circuit_hadamard_bound",
    "circuit_unitary",
    "cohering_power",
    "composition_bound_l1",
    "continuity_gap",
    "dilation_power_bound",
    "embed_gate",
    "gain_objective",
    "gate_matrix",
    "generalized_cohering_power",
    "hadamard_power_l1",
    "lifted_gain",
    "power_value",
    "qubit_power_l1",
    "qubit_power_relent",
    "ratio_objective",
    "ratio_power_l1",
    "relent_counterexample",
    "require_unitary",
    "tensor_power",
    "tensor_power_check",
    "unitary_power_l1",
    "unitary_power_relent",
    "unitary_product_bound_l1",
]
