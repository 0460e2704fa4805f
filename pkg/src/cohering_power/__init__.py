"""cohering-power - coherence measures and the cohering power of quantum operations."""

__version__ = "0.1.0"

from cohering_power.analyzer import CoheringPowerAnalyzer
from cohering_power.channels import (
    Append,
    Compose,
    Dismiss,
    Kraus,
    QuantumOperation,
    Tensor,
    Unitary,
    apply,
    compose,
    is_incoherent_operation,
    stinespring_dilate,
    tensor_ops,
    validate,
)
from cohering_power.coherence import c_l1, c_r, coherence, dephase, is_incoherent_state
from cohering_power.exceptions import (
    CoheringPowerError,
    DocumentParseError,
    NumericalError,
    ValidationError,
)
from cohering_power.models import (
    CoherenceMeasure,
    OptimizerConfig,
    PowerReport,
    PropertyCase,
    PropertyId,
    VerifyReport,
)
from cohering_power.power import (
    cohering_power,
    generalized_cohering_power,
    unitary_power_l1,
    unitary_power_relent,
)
from cohering_power.states import DensityMatrix

__all__ = [
    "Append",
    "CoherenceMeasure",
    "CoheringPowerAnalyzer",
    "CoheringPowerError",
    "Compose",
    "DensityMatrix",
    "Dismiss",
    "DocumentParseError",
    "Kraus",
    "NumericalError",
    "OptimizerConfig",
    "PowerReport",
    "PropertyCase",
    "PropertyId",
    "QuantumOperation",
    "Tensor",
    "Unitary",
    "ValidationError",
    "VerifyReport",
    "apply",
    "c_l1",
    "c_r",
    "coherence",
    "cohering_power",
    "compose",
    "dephase",
    "generalized_cohering_power",
    "is_incoherent_operation",
    "is_incoherent_state",
    "stinespring_dilate",
    "tensor_ops",
    "unitary_power_l1",
    "unitary_power_relent",
    "validate",
]
