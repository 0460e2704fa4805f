"""Tests for CoheringPowerAnalyzer."""

from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from cohering_power import CoheringPowerAnalyzer
from cohering_power.channels import Unitary, phase_flip_channel
from cohering_power.documents import serialize_channel, serialize_circuit, write_document
from cohering_power.exceptions import DocumentParseError
from cohering_power.models import (
    CircuitSpec,
    CoherenceMeasure,
    Gate,
    GateName,
    OptimizerConfig,
    PowerMethod,
    Profile,
    PropertyId,
    VerifyReport,
)

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


@pytest.fixture
def hadamard_path(tmp_path: Path) -> Path:
    path = tmp_path / "hadamard.json"
    write_document(path, serialize_channel(Unitary(u=H)))
    return path


class TestCoheringPowerAnalyzer:
    """Tests for CoheringPowerAnalyzer."""

    def test_init_defaults(self) -> None:
        """Test default measure and optimizer settings."""
        analyzer = CoheringPowerAnalyzer()
        assert analyzer.measure is CoherenceMeasure.L1
        assert analyzer.config == OptimizerConfig()

    def test_init_with_string_measure(self) -> None:
        """Test that the measure may be given by value."""
        assert CoheringPowerAnalyzer(measure="relent").measure is CoherenceMeasure.RELATIVE_ENTROPY

    def test_init_with_unknown_measure_raises(self) -> None:
        """Test that an unknown measure name is rejected."""
        with pytest.raises(ValueError):
            CoheringPowerAnalyzer(measure="l2")

    def test_power_from_path(self, hadamard_path: Path) -> None:
        """Test S_l1 of a Hadamard document."""
        report = CoheringPowerAnalyzer().power(hadamard_path)
        assert report.s_value == pytest.approx(1.0)
        assert report.method is PowerMethod.CLOSED_FORM_L1_UNITARY

    def test_power_measure_override(self, hadamard_path: Path) -> None:
        """Test that the per-call measure wins over the default."""
        report = CoheringPowerAnalyzer().power(str(hadamard_path), measure="relent")
        assert report.measure is CoherenceMeasure.RELATIVE_ENTROPY

    def test_power_from_operation(self) -> None:
        """Test that operations are used without a document."""
        report = CoheringPowerAnalyzer().power(phase_flip_channel(0.1))
        assert report.s_value == 0.0

    def test_missing_document_raises(self, tmp_path: Path) -> None:
        """Test that a missing file raises DocumentParseError."""
        with pytest.raises(DocumentParseError):
            CoheringPowerAnalyzer().power(tmp_path / "nope.json")

    def test_generalized_power_overrides(self, hadamard_path: Path) -> None:
        """Test that per-call overrides reach the optimizer and None is ignored."""
        analyzer = CoheringPowerAnalyzer(config=OptimizerConfig(seed=1))
        report = analyzer.generalized_power(hadamard_path, restarts=3, seed=None)
        assert report.diagnostics["restarts"] == 3
        assert report.diagnostics["seed"] == 1
        assert report.s_hat_value == pytest.approx(1.0, abs=1e-4)
        assert analyzer.config.restarts == 32

    def test_dilate(self, hadamard_path: Path) -> None:
        """Test the dilation of a unitary document."""
        result = CoheringPowerAnalyzer().dilate(hadamard_path, check_states=5)
        assert result.ancilla_dim == 4
        assert result.check_states == 5
        assert result.reconstruction_error <= 1e-12

    def test_circuit_bound_from_path(self, tmp_path: Path) -> None:
        """Test the bound of a circuit document with two Hadamards."""
        circuit = CircuitSpec(
            qubit_count=2,
            gates=[Gate(gate=GateName.H, targets=[0]), Gate(gate=GateName.H, targets=[1])],
        )
        path = tmp_path / "circuit.json"
        write_document(path, serialize_circuit(circuit))
        bound = CoheringPowerAnalyzer().circuit_bound(path)
        assert bound.bound == 3.0
        assert bound.exact == pytest.approx(3.0)

    def test_verify_uses_config_seed(self) -> None:
        """Test that verify falls back to the optimizer seed."""
        analyzer = CoheringPowerAnalyzer(config=OptimizerConfig(seed=17))
        with patch("cohering_power.analyzer.run_all") as run_all:
            run_all.return_value = VerifyReport(seed=17, cases=[])
            analyzer.verify(profile="full", cases=[PropertyId.P7_COUNTEREXAMPLE])
        run_all.assert_called_once_with(
            seed=17, profile="full", cases=[PropertyId.P7_COUNTEREXAMPLE], workers=1
        )

    def test_verify_runs_selected_case(self) -> None:
        """Test a real single-case verification."""
        report = CoheringPowerAnalyzer().verify(
            profile=Profile.QUICK, seed=0, cases=["P7_COUNTEREXAMPLE"]
        )
        assert report.passed
        assert [c.id for c in report.cases] == [PropertyId.P7_COUNTEREXAMPLE]
