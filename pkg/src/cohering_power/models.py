"""Data models for cohering-power."""

from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeInt,
    PositiveInt,
    computed_field,
    field_serializer,
    model_validator,
)

from cohering_power.matcore import ComplexMatrix, encode_matrix
from cohering_power.states import DensityMatrix

SEED_LIMIT = 2**64


class CoherenceMeasure(str, Enum):
    """Coherence measure in the computational reference basis."""

    L1 = "l1"
    RELATIVE_ENTROPY = "relent"


class PowerMethod(str, Enum):
    """How a cohering-power value was obtained or cross-checked."""

    BASIS_ENUMERATION = "BasisEnumeration"
    CLOSED_FORM_L1_UNITARY = "ClosedFormL1Unitary"
    CLOSED_FORM_RENT_UNITARY = "ClosedFormREntUnitary"
    APPEND_CLOSED_FORM = "AppendClosedForm"
    DISMISS_ZERO = "DismissZero"
    OPTIMIZER = "Optimizer"


class Parameterization(str, Enum):
    """State parameterization used by the optimizer."""

    FULL_FACTOR = "FullFactor"


class OptimizerConfig(BaseModel):
    """Settings for seeded multistart maximization over density matrices."""

    model_config = ConfigDict(frozen=True)

    restarts: PositiveInt = Field(default=32, description="Number of local searches")
    max_iterations: PositiveInt = Field(default=2000, description="Iterations per restart")
    step_tolerance: float = Field(default=1e-8, gt=0, description="Simplex size tolerance")
    objective_tolerance: float = Field(default=1e-9, gt=0, description="Objective tolerance")
    seed: int = Field(default=0, ge=0, lt=SEED_LIMIT, description="64-bit unsigned seed")
    parameterization: Parameterization = Parameterization.FULL_FACTOR
    include_basis_starts: bool = Field(default=True, description="Start once from each |k><k|")
    workers: PositiveInt = Field(default=1, description="Threads running restarts")

    @classmethod
    def recommended(cls, dim: int, **overrides: Any) -> "OptimizerConfig":
        """Config following the ``8·d`` restart advice, never below the default."""
        settings: Dict[str, Any] = {"restarts": max(32, 8 * dim)}
        settings.update(overrides)
        return cls(**settings)


class RestartTrace(BaseModel):
    """Outcome of one local search."""

    index: NonNegativeInt
    start: str = Field(..., description="'basis:<k>' or 'random'")
    iterations: NonNegativeInt = 0
    evaluations: NonNegativeInt = 0
    start_value: Optional[float] = None
    final_value: Optional[float] = None
    converged: bool = False
    aborted: bool = False
    reason: Optional[str] = None


class OptResult(BaseModel):
    """Best point found by :func:`cohering_power.optimize.maximize_over_states`."""

    best_value: float
    best_state: DensityMatrix
    best_restart: NonNegativeInt
    restarts: List[RestartTrace]
    converged: bool = Field(..., description="Whether the best restart converged")

    @property
    def total_iterations(self) -> int:
        return sum(trace.iterations for trace in self.restarts)

    @property
    def aborted_restarts(self) -> int:
        return sum(1 for trace in self.restarts if trace.aborted)


class PowerReport(BaseModel):
    """Cohering power ``S`` and, optionally, generalized cohering power ``Ŝ``."""

    measure: CoherenceMeasure
    s_value: float = Field(..., ge=0)
    argmax_basis_index: NonNegativeInt
    s_hat_value: Optional[float] = None
    s_hat_witness: Optional[DensityMatrix] = None
    s_hat_is_lower_bound: bool = False
    method: PowerMethod
    closed_form_value: Optional[float] = None
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_feasibility(self) -> "PowerReport":
        if self.s_hat_value is not None and self.s_hat_value < self.s_value - 1e-6:
            raise ValueError(
                f"s_hat_value {self.s_hat_value} is below s_value {self.s_value}; basis "
                "states are feasible points"
            )
        return self


class ValidationReport(BaseModel):
    """Result of checking a quantum operation."""

    passed: bool
    completeness_deviation: float = 0.0
    unitarity_defect: float = 0.0
    dimension_chain_ok: bool = True
    failures: List[str] = Field(default_factory=list)


class DilationResult(BaseModel):
    """Stinespring dilation ``Φ(ρ) = Tr_K(U (ρ ⊗ |ψ><ψ|) U†)``."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    system_dim: PositiveInt
    ancilla_dim: PositiveInt
    ancilla_state: np.ndarray
    big_unitary: np.ndarray
    reconstruction_error: float = Field(..., ge=0)
    unitarity_defect: float = Field(..., ge=0)
    check_states: NonNegativeInt = 0

    @field_serializer("ancilla_state", "big_unitary")
    def _serialize_matrix(self, m: ComplexMatrix) -> List[List[List[float]]]:
        return encode_matrix(m)


class GateName(str, Enum):
    """Gates of the universal basis {H, K, K⁻¹, CNOT, Toffoli}."""

    H = "H"
    K = "K"
    KINV = "Kinv"
    CNOT = "CNOT"
    TOFFOLI = "Toffoli"

    @property
    def arity(self) -> int:
        return {GateName.CNOT: 2, GateName.TOFFOLI: 3}.get(self, 1)


class Gate(BaseModel):
    """One gate of a circuit; for controlled gates the target is the last index."""

    model_config = ConfigDict(frozen=True)

    gate: GateName
    targets: List[NonNegativeInt]


class CircuitSpec(BaseModel):
    """Qubit circuit over the gate basis, gates applied first to last."""

    model_config = ConfigDict(frozen=True)

    qubit_count: PositiveInt
    gates: List[Gate] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_gates(self) -> "CircuitSpec":
        for position, gate in enumerate(self.gates):
            if len(gate.targets) != gate.gate.arity:
                raise ValueError(
                    f"Gate {position} ({gate.gate.value}) needs {gate.gate.arity} "
                    f"index(es), got {len(gate.targets)}"
                )
            if len(set(gate.targets)) != len(gate.targets):
                raise ValueError(f"Gate {position} ({gate.gate.value}) repeats an index")
            for target in gate.targets:
                if target >= self.qubit_count:
                    raise ValueError(
                        f"Gate {position} index {target} outside [0, {self.qubit_count})"
                    )
        return self

    @property
    def hadamard_count(self) -> int:
        return sum(1 for gate in self.gates if gate.gate is GateName.H)


class CircuitBound(BaseModel):
    """Hadamard-count bound on a circuit's ℓ1 cohering power."""

    qubit_count: PositiveInt
    hadamard_count: NonNegativeInt
    bound: float
    exact: Optional[float] = None


class BoundComparison(NamedTuple):
    """A bound paired with the value it bounds."""

    bound: float
    actual: float

    @property
    def slack(self) -> float:
        return self.bound - self.actual

    def holds(self, tol: float = 1e-9) -> bool:
        return self.actual <= self.bound + tol


class PropertyId(str, Enum):
    """Executable properties registered in :mod:`cohering_power.verify`."""

    EQ3_L1_TENSOR = "EQ3_L1_TENSOR"
    EQ4_RENT_TENSOR = "EQ4_RENT_TENSOR"
    P2_PRODUCT_BOUND = "P2_PRODUCT_BOUND"
    P2_TENSOR_EQUALITY = "P2_TENSOR_EQUALITY"
    CONTINUITY = "CONTINUITY"
    P3_COMPOSE_BOUND = "P3_COMPOSE_BOUND"
    P4_TENSOR_L1 = "P4_TENSOR_L1"
    P5_TENSOR_RENT = "P5_TENSOR_RENT"
    P6_QUBIT_EQUALITY = "P6_QUBIT_EQUALITY"
    P7_COUNTEREXAMPLE = "P7_COUNTEREXAMPLE"
    P8_RATIO_EQUALITY = "P8_RATIO_EQUALITY"
    HADAMARD_MAXIMALITY = "HADAMARD_MAXIMALITY"
    DILATION_BOUND = "DILATION_BOUND"


class Profile(str, Enum):
    QUICK = "quick"
    FULL = "full"


class PropertyCase(BaseModel):
    """One property to check over seeded random trials."""

    model_config = ConfigDict(frozen=True)

    id: PropertyId
    trials: PositiveInt = 100
    seed: int = Field(default=0, ge=0, lt=SEED_LIMIT)
    tolerance: float = Field(default=1e-9, gt=0)


class CaseReport(BaseModel):
    """Outcome of one property case."""

    id: PropertyId
    trials: NonNegativeInt
    failures: NonNegativeInt
    worst_margin: float
    tolerance: float
    passed: bool
    witness: Dict[str, Any] = Field(default_factory=dict)
    details: Dict[str, Any] = Field(default_factory=dict)


class VerifyReport(BaseModel):
    """Aggregate of property case reports."""

    seed: int
    profile: Optional[Profile] = None
    cases: List[CaseReport]

    @computed_field  # type: ignore[misc]
    @property
    def passed(self) -> bool:
        return all(case.passed for case in self.cases)

    def case(self, case_id: PropertyId) -> CaseReport:
        for report in self.cases:
            if report.id is case_id:
                return report
        raise KeyError(case_id.value)
