"""Coherence measures in the computational reference basis.

Entropies are in bits. Another reference basis is analyzed by conjugating the state with
the basis-change unitary before calling these functions.
"""

import logging
from typing import Union

import numpy as np
import numpy.typing as npt
from scipy.special import entr

from cohering_power.exceptions import NumericalError
from cohering_power.matcore import ComplexMatrix, PSD_TOL
from cohering_power.models import CoherenceMeasure
from cohering_power.states import DensityMatrix

logger = logging.getLogger(__name__)

INCOHERENCE_TOL = 1e-9
_LN2 = np.log(2.0)


def shannon_entropy(probabilities: npt.ArrayLike) -> float:
    """Shannon entropy in bits, with ``0·log 0 = 0``."""
    p = np.asarray(probabilities, dtype=np.float64)
    return float(np.sum(entr(np.clip(p, 0.0, None))) / _LN2)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """``S(ρ) = -Tr ρ log2 ρ``."""
    return shannon_entropy(rho.eigenvalues())


def dephase(rho: DensityMatrix) -> DensityMatrix:
    """Delete every off-diagonal entry."""
    return DensityMatrix.trusted(np.diag(np.diag(rho.mat).real).astype(np.complex128))


def _off_diagonal_l1(m: ComplexMatrix) -> float:
    off_diagonal = ~np.eye(m.shape[0], dtype=bool)
    return float(np.abs(m[off_diagonal]).sum())


def c_l1(rho: DensityMatrix) -> float:
    """ℓ1-norm of coherence: sum of off-diagonal magnitudes."""
    return _off_diagonal_l1(rho.mat)


def c_r(rho: DensityMatrix) -> float:
    """Relative entropy of coherence ``S(ρ_diag) - S(ρ)`` in bits."""
    diagonal = np.diag(rho.mat).real
    value = shannon_entropy(diagonal) - von_neumann_entropy(rho)
    if value < -PSD_TOL:
        raise NumericalError(f"Relative entropy of coherence came out negative: {value:.3e}")
    return max(value, 0.0)


def coherence(rho: DensityMatrix, measure: Union[CoherenceMeasure, str]) -> float:
    """Evaluate ``measure`` on ``rho``."""
    measure = CoherenceMeasure(measure)
    if measure is CoherenceMeasure.L1:
        return c_l1(rho)
    return c_r(rho)


def is_incoherent_state(rho: DensityMatrix, tol: float = INCOHERENCE_TOL) -> bool:
    """True when every off-diagonal magnitude is at most ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    off_diagonal = rho.mat - np.diag(np.diag(rho.mat))
    return bool(np.all(np.abs(off_diagonal) <= tol))
