"""Channel and circuit documents: JSON trees parsed into operations and back.

A channel document is a tree keyed by ``"type"``::

    {"type": "unitary", "matrix": [[[re, im], ...], ...]}
    {"type": "kraus", "ops": [matrix, ...]}
    {"type": "append", "dim": 2, "sigma": matrix}
    {"type": "dismiss", "dims": [2, 2], "traced": [1]}
    {"type": "compose", "steps": [channel, ...]}     # steps[0] acts first
    {"type": "tensor", "factors": [channel, ...]}

Complex entries are ``[re, im]`` pairs; a bare real number is accepted on input. A circuit
document is ``{"qubits": N, "gates": [{"g": "H", "on": [0]}, ...]}``.

Malformed JSON and schema errors raise :class:`DocumentParseError`; documents that parse
but describe an invalid operation raise a :class:`ValidationError` subclass.
"""

import json
import logging
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Tuple, Union

import pydantic
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, TypeAdapter

from cohering_power.channels import (
    Append,
    Compose,
    Dismiss,
    Kraus,
    QuantumOperation,
    Tensor,
    Unitary,
    compose,
    ensure_valid,
    tensor_ops,
)
from cohering_power.exceptions import (
    DocumentParseError,
    InvalidMatrixError,
    UnsupportedOperationError,
    ValidationError,
)
from cohering_power.matcore import ComplexMatrix, SubsystemShape, decode_matrix, encode_matrix
from cohering_power.models import CircuitSpec, Gate, GateName
from cohering_power.states import DensityMatrix

logger = logging.getLogger(__name__)

ComplexEntry = Union[Tuple[float, float], float]
MatrixDocument = List[List[ComplexEntry]]


def _to_matrix(rows: MatrixDocument) -> ComplexMatrix:
    try:
        return decode_matrix(rows)
    except InvalidMatrixError as e:
        raise DocumentParseError(e.message) from e


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid")


class UnitaryDocument(_Document):
    type: Literal["unitary"]
    matrix: MatrixDocument = Field(..., min_length=1)

    def to_operation(self) -> QuantumOperation:
        return Unitary(u=_to_matrix(self.matrix))


class KrausDocument(_Document):
    type: Literal["kraus"]
    ops: List[MatrixDocument] = Field(..., min_length=1)

    def to_operation(self) -> QuantumOperation:
        return Kraus(ops=[_to_matrix(op) for op in self.ops])


class AppendDocument(_Document):
    type: Literal["append"]
    dim: PositiveInt = Field(..., description="Dimension of the system the ancilla joins")
    sigma: MatrixDocument = Field(..., min_length=1)

    def to_operation(self) -> QuantumOperation:
        return Append(system_dim=self.dim, sigma=DensityMatrix(mat=_to_matrix(self.sigma)))


class DismissDocument(_Document):
    type: Literal["dismiss"]
    dims: List[PositiveInt] = Field(..., min_length=1)
    traced: List[NonNegativeInt] = Field(..., min_length=1)

    def to_operation(self) -> QuantumOperation:
        return Dismiss(shape=SubsystemShape(dims=self.dims), traced=tuple(self.traced))


class ComposeDocument(_Document):
    type: Literal["compose"]
    steps: List["ChannelDocument"] = Field(..., min_length=1)

    def to_operation(self) -> QuantumOperation:
        return compose([step.to_operation() for step in self.steps])


class TensorDocument(_Document):
    type: Literal["tensor"]
    factors: List["ChannelDocument"] = Field(..., min_length=1)

    def to_operation(self) -> QuantumOperation:
        return tensor_ops([factor.to_operation() for factor in self.factors])


ChannelDocument = Annotated[
    Union[
        UnitaryDocument,
        KrausDocument,
        AppendDocument,
        DismissDocument,
        ComposeDocument,
        TensorDocument,
    ],
    Field(discriminator="type"),
]

ComposeDocument.model_rebuild()
TensorDocument.model_rebuild()

_CHANNEL_ADAPTER: TypeAdapter[Any] = TypeAdapter(ChannelDocument)

_GATE_ALIASES = {"CCNOT": GateName.TOFFOLI}


class GateDocument(_Document):
    g: Literal["H", "K", "Kinv", "CNOT", "CCNOT", "Toffoli"]
    on: List[NonNegativeInt] = Field(..., min_length=1)


class CircuitDocument(_Document):
    qubits: PositiveInt
    gates: List[GateDocument] = Field(default_factory=list)

    def to_circuit(self) -> CircuitSpec:
        gates = [
            Gate(gate=_GATE_ALIASES.get(g.g) or GateName(g.g), targets=g.on) for g in self.gates
        ]
        try:
            return CircuitSpec(qubit_count=self.qubits, gates=gates)
        except pydantic.ValidationError as e:
            raise ValidationError(f"Invalid circuit: {_first_error(e)}") from e


def _first_error(error: pydantic.ValidationError) -> str:
    details = error.errors()
    if not details:
        return str(error)
    first = details[0]
    location = ".".join(str(part) for part in first.get("loc", ()))
    return f"{location}: {first.get('msg', '')}" if location else str(first.get("msg", ""))


def _decode_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentParseError(f"Malformed JSON at line {e.lineno}: {e.msg}") from e


def parse_channel(document: Union[str, Dict[str, Any]]) -> QuantumOperation:
    """Parse and validate a channel document.

    Args:
        document: JSON text or an already decoded mapping.

    Returns:
        A QuantumOperation that passes :func:`cohering_power.channels.validate`.

    Raises:
        DocumentParseError: Malformed JSON or a document that does not match the schema.
        ValidationError: The document describes an invalid operation.
    """
    data = _decode_json(document) if isinstance(document, str) else document
    try:
        parsed = _CHANNEL_ADAPTER.validate_python(data)
    except pydantic.ValidationError as e:
        raise DocumentParseError(f"Invalid channel document: {_first_error(e)}") from e
    op = parsed.to_operation()
    ensure_valid(op)
    logger.debug("Parsed %s channel %d -> %d", type(op).__name__, op.in_dim, op.out_dim)
    return op


def parse_circuit(document: Union[str, Dict[str, Any]]) -> CircuitSpec:
    """Parse a circuit document into a validated :class:`CircuitSpec`."""
    data = _decode_json(document) if isinstance(document, str) else document
    try:
        parsed = CircuitDocument.model_validate(data)
    except pydantic.ValidationError as e:
        raise DocumentParseError(f"Invalid circuit document: {_first_error(e)}") from e
    return parsed.to_circuit()


def serialize_channel(op: QuantumOperation) -> Dict[str, Any]:
    """Channel document for ``op``; :func:`parse_channel` reads it back."""
    if isinstance(op, Unitary):
        return {"type": "unitary", "matrix": encode_matrix(op.u)}
    if isinstance(op, Kraus):
        return {"type": "kraus", "ops": [encode_matrix(k) for k in op.ops]}
    if isinstance(op, Append):
        return {"type": "append", "dim": op.system_dim, "sigma": encode_matrix(op.sigma.mat)}
    if isinstance(op, Dismiss):
        return {"type": "dismiss", "dims": list(op.shape.dims), "traced": list(op.traced)}
    if isinstance(op, Compose):
        return {"type": "compose", "steps": [serialize_channel(s) for s in op.steps]}
    if isinstance(op, Tensor):
        return {"type": "tensor", "factors": [serialize_channel(f) for f in op.factors]}
    raise UnsupportedOperationError(f"Cannot serialize {type(op).__name__}")


def serialize_circuit(circuit: CircuitSpec) -> Dict[str, Any]:
    return {
        "qubits": circuit.qubit_count,
        "gates": [{"g": g.gate.value, "on": list(g.targets)} for g in circuit.gates],
    }


def read_document(path: Union[str, Path]) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise DocumentParseError(f"Cannot read {path}: {e}") from e


def write_document(path: Union[str, Path], data: Dict[str, Any]) -> None:
    Path(path).write_text(dumps(data) + "\n", encoding="utf-8")


def load_channel(path: Union[str, Path]) -> QuantumOperation:
    return parse_channel(read_document(path))


def load_circuit(path: Union[str, Path]) -> CircuitSpec:
    return parse_circuit(read_document(path))


def dumps(data: Any) -> str:
    """JSON with shortest round-trip floats."""
    return json.dumps(data, indent=2)
