"""Tests for dense linear algebra helpers."""

import numpy as np
import pytest

from cohering_power.exceptions import (
    DimensionMismatchError,
    InvalidMatrixError,
    NotHermitianError,
    SingularMatrixError,
)
from cohering_power.matcore import (
    SubsystemShape,
    as_complex_matrix,
    basis_vector,
    decode_matrix,
    encode_matrix,
    hermitian_eigenvalues,
    is_unitary,
    nearest_unitary,
    one_to_one_norm,
    partial_trace,
    tensor,
    tensor_all,
    trace_out,
)
from cohering_power.optimize import ginibre, make_rng, random_density, random_unitary

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


class TestSubsystemShape:
    """Tests for SubsystemShape."""

    def test_total_and_dimension_of(self) -> None:
        """Test total dimension and dimension of a selection."""
        shape = SubsystemShape(dims=[2, 3, 4])
        assert shape.total == 24
        assert shape.dimension_of([0, 2]) == 8
        assert len(shape) == 3

    def test_check_indices_sorts_and_deduplicates(self) -> None:
        """Test that indices come back sorted without repeats."""
        assert SubsystemShape(dims=[2, 2, 2]).check_indices([2, 0, 2]) == [0, 2]

    def test_check_indices_out_of_range(self) -> None:
        """Test that an out-of-range index raises DimensionMismatchError."""
        with pytest.raises(DimensionMismatchError):
            SubsystemShape(dims=[2, 2]).check_indices([2])


class TestTensorAndTrace:
    """Tests for tensor products and partial traces."""

    def test_tensor_is_big_endian(self) -> None:
        """Test that the first factor is the most significant index."""
        vec = tensor_all([basis_vector(1, 2), basis_vector(0, 3)])
        assert vec[3, 0] == 1
        assert np.count_nonzero(vec) == 1

    def test_partial_trace_recovers_factors(self) -> None:
        """Test that tracing out one factor of a product state returns the other."""
        rho = random_density(1, 2).mat
        sigma = random_density(2, 3).mat
        shape = SubsystemShape(dims=[2, 3])
        joint = np.kron(rho, sigma)
        assert np.allclose(partial_trace(joint, shape, [0]), rho, atol=1e-12)
        assert np.allclose(partial_trace(joint, shape, [1]), sigma, atol=1e-12)

    def test_partial_trace_keeps_middle_factor(self) -> None:
        """Test keeping a middle factor of three."""
        states = [random_density(seed, 2).mat for seed in (3, 4, 5)]
        joint = tensor_all(states)
        reduced = partial_trace(joint, SubsystemShape(dims=[2, 2, 2]), [1])
        assert np.allclose(reduced, states[1], atol=1e-12)

    def test_partial_trace_empty_keep_raises(self) -> None:
        """Test that keeping nothing is rejected."""
        with pytest.raises(DimensionMismatchError):
            partial_trace(np.eye(4) / 4, SubsystemShape(dims=[2, 2]), [])

    def test_partial_trace_shape_mismatch(self) -> None:
        """Test that a shape that does not match the matrix is rejected."""
        with pytest.raises(DimensionMismatchError):
            partial_trace(np.eye(4) / 4, SubsystemShape(dims=[2, 3]), [0])

    def test_trace_out_everything(self) -> None:
        """Test that tracing every factor gives the 1x1 trace."""
        joint = np.kron(random_density(6, 2).mat, random_density(7, 2).mat)
        out = trace_out(joint, SubsystemShape(dims=[2, 2]), [0, 1])
        assert out.shape == (1, 1)
        assert abs(out[0, 0] - 1.0) < 1e-12


class TestMatrixChecks:
    """Tests for validation and norms."""

    def test_non_finite_entries_raise(self) -> None:
        """Test that NaN entries are rejected."""
        with pytest.raises(InvalidMatrixError):
            as_complex_matrix([[1.0, np.nan], [0.0, 1.0]])

    def test_vector_is_not_a_matrix(self) -> None:
        """Test that 1-D input is rejected."""
        with pytest.raises(InvalidMatrixError):
            as_complex_matrix([1.0, 2.0])

    def test_eigenvalues_descending(self) -> None:
        """Test the spectrum of a diagonal matrix."""
        evals = hermitian_eigenvalues(np.diag([0.2, 0.7, 0.1]))
        assert np.allclose(evals, [0.7, 0.2, 0.1])

    def test_eigenvalues_non_hermitian_raises(self) -> None:
        """Test that a non-Hermitian matrix raises NotHermitianError."""
        with pytest.raises(NotHermitianError):
            hermitian_eigenvalues(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_one_to_one_norm(self) -> None:
        """Test the largest absolute column sum."""
        assert one_to_one_norm(H) == pytest.approx(np.sqrt(2))
        assert one_to_one_norm(np.array([[1, -3], [2, 0]])) == pytest.approx(3.0)


class TestNearestUnitary:
    """Tests for polar projection."""

    def test_rounded_unitary_becomes_unitary(self) -> None:
        """Test that a unitary printed to four decimals is projected back."""
        rounded = np.round(H, 4)
        assert not is_unitary(rounded)
        w = nearest_unitary(rounded)
        assert is_unitary(w)
        assert np.allclose(w, H, atol=1e-4)

    def test_singular_matrix_raises(self) -> None:
        """Test that a singular matrix raises SingularMatrixError."""
        with pytest.raises(SingularMatrixError):
            nearest_unitary(np.array([[1.0, 1.0], [1.0, 1.0]]))


class TestMatrixCodec:
    """Tests for the [re, im] matrix format."""

    def test_encode_then_decode(self) -> None:
        """Test that a complex matrix survives the wire format."""
        m = np.array([[0.5, 0.25 - 1j], [1e-17j, -2.0]])
        encoded = encode_matrix(m)
        assert encoded[0][1] == [0.25, -1.0]
        assert np.array_equal(decode_matrix(encoded), m)

    def test_decode_ragged_rows(self) -> None:
        """Test that ragged rows are rejected."""
        with pytest.raises(InvalidMatrixError):
            decode_matrix([[[1, 0], [0, 0]], [[1, 0]]])


class TestTensorLaws:
    """Tests for Kronecker product identities and the induced norm."""

    def test_tensor_matches_kron_order(self) -> None:
        """Test that tensor puts the first argument in the most significant position."""
        a = np.array([[1, 2], [3, 4]])
        b = np.eye(2)
        out = tensor(a, b)
        assert out[2, 0] == 3
        assert out[3, 1] == 3
        assert np.array_equal(out, tensor_all([a, b]))

    def test_mixed_product(self) -> None:
        """Test (A ⊗ B)(C ⊗ D) = AC ⊗ BD."""
        rng = make_rng(0)
        a, c = ginibre(rng, 2, 2), ginibre(rng, 2, 2)
        b, d = ginibre(rng, 3, 3), ginibre(rng, 3, 3)
        assert np.allclose(tensor(a, b) @ tensor(c, d), tensor(a @ c, b @ d), atol=1e-12)

    def test_associativity(self) -> None:
        """Test (A ⊗ B) ⊗ C = A ⊗ (B ⊗ C)."""
        rng = make_rng(1)
        a, b, c = ginibre(rng, 2, 2), ginibre(rng, 3, 3), ginibre(rng, 2, 2)
        assert np.allclose(tensor(tensor(a, b), c), tensor(a, tensor(b, c)), atol=1e-12)

    def test_norm_submultiplicative(self) -> None:
        """Test ‖AB‖₁→₁ ≤ ‖A‖₁→₁ ‖B‖₁→₁ on seeded Ginibre matrices."""
        rng = make_rng(2)
        for _ in range(200):
            dim = int(rng.integers(2, 5))
            a, b = ginibre(rng, dim, dim), ginibre(rng, dim, dim)
            assert one_to_one_norm(a @ b) <= one_to_one_norm(a) * one_to_one_norm(b) + 1e-12

    def test_norm_multiplicative_under_tensor(self) -> None:
        """Test ‖A ⊗ B‖₁→₁ = ‖A‖₁→₁ ‖B‖₁→₁ on seeded Ginibre matrices."""
        rng = make_rng(3)
        for _ in range(200):
            a = ginibre(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            b = ginibre(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            expected = one_to_one_norm(a) * one_to_one_norm(b)
            assert one_to_one_norm(tensor(a, b)) == pytest.approx(expected, rel=1e-12)


class TestPartialTraceLaws:
    """Tests for partial trace consistency."""

    def test_one_at_a_time_equals_joint(self) -> None:
        """Test that tracing factors one by one matches tracing them together."""
        rho = random_density(8, 12).mat
        shape = SubsystemShape(dims=[2, 3, 2])
        joint = trace_out(rho, shape, [0, 2])
        first = trace_out(rho, shape, [2])
        stepwise = trace_out(first, SubsystemShape(dims=[2, 3]), [0])
        assert np.allclose(joint, stepwise, atol=1e-12)

    def test_bell_state_marginal(self) -> None:
        """Test that either half of Φ⁺ is I/2."""
        phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        bell = np.outer(phi, phi.conj())
        shape = SubsystemShape(dims=[2, 2])
        assert np.allclose(partial_trace(bell, shape, [0]), np.eye(2) / 2)
        assert np.allclose(partial_trace(bell, shape, [1]), np.eye(2) / 2)


class TestSpectra:
    """Tests for eigenvalues and polar projection."""

    def test_eigenvalues_of_rotated_diagonal(self) -> None:
        """Test that UDU† has the diagonal of D as its spectrum."""
        for seed in range(20):
            u = random_unitary(seed, 4)
            diagonal = np.array([0.4, 0.3, 0.2, 0.1])
            evals = hermitian_eigenvalues(u @ np.diag(diagonal) @ u.conj().T)
            assert np.allclose(evals, diagonal, atol=1e-12)

    def test_nearest_unitary_of_scaled_unitary(self) -> None:
        """Test that 1.1·H projects back to H."""
        assert np.allclose(nearest_unitary(1.1 * H), H, atol=1e-12)


class TestDecodeMatrix:
    """Tests for decoding document matrices."""

    def test_bare_real_entries(self) -> None:
        """Test that bare reals and pairs may be mixed."""
        m = decode_matrix([[1, [0.0, -1.0]], [(0.0, 1.0), 2.5]])
        assert np.array_equal(m, np.array([[1, -1j], [1j, 2.5]]))

    def test_wrong_pair_length(self) -> None:
        """Test that a triple is not a complex entry."""
        with pytest.raises(InvalidMatrixError):
            decode_matrix([[[1.0, 0.0, 0.0]]])
