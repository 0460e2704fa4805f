"""Tests for quantum operations, validation and Stinespring dilation."""

import numpy as np
import pytest

from cohering_power.channels import (
    Append,
    Dismiss,
    Kraus,
    Unitary,
    apply,
    canonical_kraus,
    choi_matrix,
    compose,
    dephasing_channel,
    ensure_valid,
    identity_channel,
    is_incoherent_operation,
    phase_flip_channel,
    process_distance,
    stinespring_dilate,
    tensor_ops,
    to_kraus,
    validate,
)
from cohering_power.exceptions import (
    ChannelValidationError,
    DimensionMismatchError,
    DilationError,
    InvalidMatrixError,
)
from cohering_power.matcore import SubsystemShape, is_unitary, trace_out
from cohering_power.optimize import random_density, random_kraus_operators, random_unitary
from cohering_power.states import DensityMatrix, basis_state, plus_state

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]])


class TestConstruction:
    """Tests for operation variants and their dimensions."""

    def test_unitary_dimensions(self) -> None:
        """Test in and out dimension of a unitary."""
        op = Unitary(u=H)
        assert (op.in_dim, op.out_dim) == (2, 2)

    def test_kraus_shape_mismatch_raises(self) -> None:
        """Test that Kraus operators of different shapes are rejected."""
        with pytest.raises(DimensionMismatchError):
            Kraus(ops=[np.eye(2), np.eye(3)])

    def test_kraus_empty_raises(self) -> None:
        """Test that an empty Kraus list is rejected."""
        with pytest.raises(DimensionMismatchError):
            Kraus(ops=[])

    def test_append_dimensions(self) -> None:
        """Test that appending a qubit to a qutrit gives dimension 6."""
        op = Append(system_dim=3, sigma=plus_state())
        assert (op.in_dim, op.out_dim) == (3, 6)

    def test_dismiss_requires_traced_factor(self) -> None:
        """Test that an empty traced set is rejected."""
        with pytest.raises(DimensionMismatchError):
            Dismiss(shape=SubsystemShape(dims=[2, 2]), traced=())

    def test_dismiss_out_of_range(self) -> None:
        """Test that tracing a missing factor is rejected."""
        with pytest.raises(DimensionMismatchError):
            Dismiss(shape=SubsystemShape(dims=[2, 2]), traced=(2,))

    def test_compose_dimension_chain(self) -> None:
        """Test that compose rejects mismatched dimensions."""
        with pytest.raises(DimensionMismatchError):
            compose([Unitary(u=H), Unitary(u=np.eye(3))])

    def test_phase_flip_probability_range(self) -> None:
        """Test that a probability above one is rejected."""
        with pytest.raises(InvalidMatrixError):
            phase_flip_channel(1.5)


class TestValidation:
    """Tests for validate, ensure_valid and apply."""

    def test_valid_operations_pass(self) -> None:
        """Test that built-in channels validate."""
        for op in (Unitary(u=H), phase_flip_channel(0.3), dephasing_channel(3)):
            report = validate(op)
            assert report.passed
            assert report.failures == []

    def test_incomplete_kraus_fails(self) -> None:
        """Test that a non-trace-preserving Kraus list is reported and raised."""
        op = Kraus(ops=[0.5 * np.eye(2)])
        report = validate(op)
        assert not report.passed
        assert report.completeness_deviation == pytest.approx(0.75)
        with pytest.raises(ChannelValidationError) as exc_info:
            ensure_valid(op)
        assert exc_info.value.report is not None
        assert exc_info.value.exit_code == 2

    def test_non_unitary_fails(self) -> None:
        """Test that a non-unitary matrix fails validation."""
        report = validate(Unitary(u=[[1, 0], [0, 2]]))
        assert not report.passed
        assert report.unitarity_defect == pytest.approx(3.0)

    def test_nested_failure_path(self) -> None:
        """Test that failures inside a composition name their position."""
        op = compose([Unitary(u=H), Kraus(ops=[0.5 * np.eye(2)])])
        report = validate(op)
        assert not report.passed
        assert "steps[1]" in report.failures[0]

    def test_apply_checks_dimension(self) -> None:
        """Test that a state of the wrong size is rejected."""
        with pytest.raises(DimensionMismatchError):
            apply(Unitary(u=H), random_density(0, 3))

    def test_apply_hadamard(self) -> None:
        """Test H|0><0|H = |+><+|."""
        out = apply(Unitary(u=H), basis_state(0, 2))
        assert np.allclose(out.mat, plus_state().mat)


class TestKrausForms:
    """Tests for Kraus representations of the basic operations."""

    def test_append_kraus_matches_tensor(self) -> None:
        """Test that the appending Kraus operators produce rho ⊗ sigma."""
        sigma = random_density(1, 2)
        op = Append(system_dim=3, sigma=sigma)
        kraus = to_kraus(op)
        assert validate(kraus).passed
        rho = random_density(2, 3)
        assert np.allclose(kraus.apply_to_matrix(rho.mat), np.kron(rho.mat, sigma.mat))

    def test_dismiss_kraus_matches_trace(self) -> None:
        """Test that the dismissal Kraus operators agree with the partial trace."""
        shape = SubsystemShape(dims=[2, 3, 2])
        op = Dismiss(shape=shape, traced=(0, 2))
        assert validate(to_kraus(op)).passed
        assert op.out_dim == 3
        rho = random_density(3, 12)
        expected = trace_out(rho.mat, shape, [0, 2])
        assert np.allclose(to_kraus(op).apply_to_matrix(rho.mat), expected)

    def test_dismiss_all_factors(self) -> None:
        """Test that dismissing every factor leaves the trivial one-dimensional state."""
        op = Dismiss(shape=SubsystemShape(dims=[2, 2]), traced=(0, 1))
        out = apply(op, random_density(4, 4))
        assert out.dim == 1
        assert out.mat[0, 0] == pytest.approx(1.0)

    def test_append_then_dismiss_is_identity(self) -> None:
        """Test that appending and discarding an ancilla does nothing."""
        append = Append(system_dim=2, sigma=plus_state())
        dismiss = Dismiss(shape=SubsystemShape(dims=[2, 2]), traced=(1,))
        op = compose([append, dismiss])
        assert process_distance(op, identity_channel(2)) < 1e-12
        assert validate(to_kraus(op)).passed

    def test_tensor_apply(self) -> None:
        """Test that a tensor product acts factorwise."""
        op = tensor_ops([Unitary(u=H), Unitary(u=X)])
        out = op.apply_to_matrix(np.kron(basis_state(0, 2).mat, basis_state(0, 2).mat))
        assert np.allclose(out, np.kron(plus_state().mat, basis_state(1, 2).mat))

    def test_choi_of_identity(self) -> None:
        """Test that the identity channel's Choi matrix is the unnormalized Bell projector."""
        choi = choi_matrix(identity_channel(2))
        omega = np.array([1, 0, 0, 1])
        assert np.allclose(choi, np.outer(omega, omega))

    def test_canonical_kraus_reduces_rank(self) -> None:
        """Test that duplicated Kraus operators collapse to one."""
        op = Kraus(ops=[np.eye(2) / np.sqrt(2), np.eye(2) / np.sqrt(2)])
        canonical = canonical_kraus(op)
        assert len(canonical.ops) == 1
        assert process_distance(canonical, op) < 1e-12

    def test_canonical_kraus_of_dephasing(self) -> None:
        """Test that complete dephasing on a qutrit has Kraus rank 3."""
        canonical = canonical_kraus(dephasing_channel(3))
        assert len(canonical.ops) == 3
        assert process_distance(canonical, dephasing_channel(3)) < 1e-12


class TestIncoherentOperations:
    """Tests for is_incoherent_operation."""

    def test_dephasing_is_incoherent(self) -> None:
        """Test that complete dephasing is incoherent."""
        assert is_incoherent_operation(dephasing_channel(3))

    def test_permutation_is_incoherent(self) -> None:
        """Test that a permutation unitary is incoherent."""
        assert is_incoherent_operation(Unitary(u=X))

    def test_hadamard_is_coherent(self) -> None:
        """Test that H is not incoherent."""
        assert not is_incoherent_operation(Unitary(u=H))


class TestStinespring:
    """Tests for unitary dilation."""

    def test_unitary_dilation_is_exact(self) -> None:
        """Test that dilating a unitary reconstructs it to machine precision."""
        result = stinespring_dilate(Unitary(u=H))
        assert result.ancilla_dim == 4
        assert result.reconstruction_error <= 1e-12
        assert is_unitary(result.big_unitary)

    @pytest.mark.parametrize("op", [phase_flip_channel(0.5), dephasing_channel(2)])
    def test_qubit_channels(self, op: Kraus) -> None:
        """Test phase flip and dephasing dilations."""
        result = stinespring_dilate(op)
        assert result.ancilla_dim == 4
        assert result.big_unitary.shape == (8, 8)
        assert result.reconstruction_error <= 1e-8
        assert np.array_equal(result.ancilla_state, np.eye(4)[0])

    def test_random_qutrit_channel(self) -> None:
        """Test a random rank-4 qutrit channel."""
        op = Kraus(ops=random_kraus_operators(5, 3, 3, 4))
        result = stinespring_dilate(op, check_states=10, seed=3)
        assert result.ancilla_dim == 9
        assert result.reconstruction_error <= 1e-8

    def test_minimal_ancilla(self) -> None:
        """Test that the minimal ancilla has the Kraus rank as dimension."""
        result = stinespring_dilate(phase_flip_channel(0.5), minimal_ancilla=True)
        assert result.ancilla_dim == 2
        assert result.reconstruction_error <= 1e-8

    def test_more_kraus_operators_than_d_squared(self) -> None:
        """Test that a redundant Kraus list is reduced before dilation."""
        u = random_unitary(9, 2)
        op = Kraus(ops=[u / np.sqrt(5)] * 5)
        result = stinespring_dilate(op)
        assert result.ancilla_dim == 4
        assert result.reconstruction_error <= 1e-8

    def test_unequal_dimensions_raise(self) -> None:
        """Test that an appending operation cannot be dilated this way."""
        with pytest.raises(DimensionMismatchError):
            stinespring_dilate(Append(system_dim=2, sigma=plus_state()))

    def test_invalid_channel_raises(self) -> None:
        """Test that an invalid channel is rejected before dilation."""
        with pytest.raises(ChannelValidationError):
            stinespring_dilate(Kraus(ops=[0.5 * np.eye(2)]))

    def test_dilation_error_is_numerical(self) -> None:
        """Test the exit code carried by DilationError."""
        assert DilationError("x").exit_code == 3

    def test_dilation_state_matches_channel(self) -> None:
        """Test one reconstruction by hand."""
        op = phase_flip_channel(0.25)
        result = stinespring_dilate(op)
        rho = DensityMatrix(mat=plus_state().mat)
        psi = np.outer(result.ancilla_state, result.ancilla_state.conj())
        big = result.big_unitary
        joint = big @ np.kron(rho.mat, psi) @ big.conj().T
        reduced = trace_out(joint, SubsystemShape(dims=[2, 4]), [1])
        assert np.allclose(reduced, op.apply_to_matrix(rho.mat), atol=1e-10)


class TestChannelIdentities:
    """Tests for composition and tensor identities of operations."""

    def test_unitary_then_inverse_is_identity(self) -> None:
        """Test that U followed by U† is the identity channel."""
        for seed in range(5):
            u = random_unitary(seed, 3)
            op = compose([Unitary(u=u), Unitary(u=u.conj().T)])
            assert process_distance(op, identity_channel(3)) < 1e-12

    def test_tensor_of_hadamards(self) -> None:
        """Test that tensor_ops([H, H]) acts as the unitary H ⊗ H."""
        op = tensor_ops([Unitary(u=H), Unitary(u=H)])
        assert process_distance(op, Unitary(u=np.kron(H, H))) < 1e-12

    def test_dismiss_is_incoherent(self) -> None:
        """Test that tracing out a factor is an incoherent operation."""
        op = Dismiss(shape=SubsystemShape(dims=[2, 3]), traced=(0,))
        assert is_incoherent_operation(op)


class TestSeededDilations:
    """Tests for dilations over seeded random channels."""

    def test_fifty_qubit_and_qutrit_channels(self) -> None:
        """Test ancilla dimension d² and reconstruction on 50 seeded channels."""
        for seed in range(50):
            dim = 2 if seed % 2 == 0 else 3
            rank = 1 + seed % (dim * dim)
            op = Kraus(ops=random_kraus_operators(seed, dim, dim, rank))
            result = stinespring_dilate(op, check_states=5, seed=seed)
            assert result.ancilla_dim == dim * dim
            assert result.reconstruction_error <= 1e-8
            assert is_unitary(result.big_unitary)
