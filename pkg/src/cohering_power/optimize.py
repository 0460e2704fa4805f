"""Seeded nonconvex maximization over density matrices and random ensembles.

States are parameterized as ``ρ(x) = G G† / Tr(G G†)`` with ``G`` read from ``2d²`` real
parameters, so every evaluated point is a valid density matrix. Local searches use
Nelder–Mead because the ℓ1 objective is not smooth. Every restart draws from its own
Philox stream split off the configured seed, so results do not depend on execution order.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt
from scipy.optimize import OptimizeResult, minimize

from cohering_power.exceptions import InvalidMatrixError, NumericalError
from cohering_power.matcore import ComplexMatrix, dagger
from cohering_power.models import OptimizerConfig, OptResult, RestartTrace
from cohering_power.states import DensityMatrix

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]
Objective = Callable[[DensityMatrix], float]
Observer = Callable[[DensityMatrix, float], None]

BASIS_START_REGULARIZATION = 1e-6


class _NonFiniteObjective(Exception):
    pass


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Philox-backed generator; a ``Generator`` is passed through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def split_streams(seed: int, count: int) -> List[np.random.Generator]:
    """Independent generators, one per task."""
    return [make_rng(child) for child in np.random.SeedSequence(seed).spawn(count)]


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> ComplexMatrix:
    """Matrix of i.i.d. standard complex Gaussian entries."""
    real = rng.standard_normal((rows, cols))
    imag = rng.standard_normal((rows, cols))
    return (real + 1j * imag) / math.sqrt(2.0)


def random_density(seed: SeedLike, dim: int) -> DensityMatrix:
    """Ginibre-ensemble state ``G G† / Tr(G G†)``."""
    if dim < 1:
        raise InvalidMatrixError("dim must be positive")
    g = ginibre(make_rng(seed), dim, dim)
    return _factor_state(g)


def random_unitary(seed: SeedLike, dim: int) -> ComplexMatrix:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix.

    The phases of ``R``'s diagonal are moved into ``Q`` so the distribution is Haar.
    """
    if dim < 1:
        raise InvalidMatrixError("dim must be positive")
    z = ginibre(make_rng(seed), dim, dim)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_kraus_operators(
    seed: SeedLike, in_dim: int, out_dim: int, rank: int
) -> List[ComplexMatrix]:
    """Kraus operators cut from a random isometry ``C^in → C^(out·rank)``."""
    if min(in_dim, out_dim, rank) < 1:
        raise InvalidMatrixError("Dimensions and rank must be positive")
    if out_dim * rank < in_dim:
        raise InvalidMatrixError("out_dim · rank must be at least in_dim for an isometry")
    q, r = np.linalg.qr(ginibre(make_rng(seed), out_dim * rank, in_dim))
    d = np.diagonal(r)
    isometry = q * (d / np.abs(d))
    return [isometry[mu * out_dim : (mu + 1) * out_dim, :] for mu in range(rank)]


def _factor_state(g: ComplexMatrix) -> DensityMatrix:
    gram = g @ dagger(g)
    gram = 0.5 * (gram + dagger(gram))
    return DensityMatrix.trusted(gram / np.trace(gram).real)


def _state_from_params(x: npt.NDArray[np.float64], dim: int) -> Optional[DensityMatrix]:
    half = dim * dim
    g = (x[:half] + 1j * x[half:]).reshape(dim, dim)
    if float(np.sum(np.abs(g) ** 2)) < 1e-300:
        return None
    return _factor_state(g)


def _params_from_factor(g: ComplexMatrix) -> npt.NDArray[np.float64]:
    flat = np.asarray(g, dtype=np.complex128).reshape(-1)
    return np.concatenate([flat.real, flat.imag])


def _starts(dim: int, cfg: OptimizerConfig) -> List[Tuple[str, Optional[ComplexMatrix]]]:
    starts: List[Tuple[str, Optional[ComplexMatrix]]] = []
    if cfg.include_basis_starts:
        for k in range(dim):
            g = BASIS_START_REGULARIZATION * np.eye(dim, dtype=np.complex128)
            g[k, k] += 1.0
            starts.append((f"basis:{k}", g))
    while len(starts) < cfg.restarts:
        starts.append(("random", None))
    return starts


def _stagnated(result: OptimizeResult, cfg: OptimizerConfig) -> bool:
    # G -> cG and G -> GV leave ρ unchanged, so the simplex need not shrink in x.
    values = np.asarray(result.final_simplex[1], dtype=np.float64)
    return bool(np.all(np.isfinite(values)) and np.ptp(values) <= cfg.objective_tolerance)


def _run_restart(
    index: int,
    label: str,
    g0: Optional[ComplexMatrix],
    rng: np.random.Generator,
    objective: Objective,
    dim: int,
    cfg: OptimizerConfig,
    observer: Optional[Observer],
) -> Tuple[RestartTrace, Optional[DensityMatrix], float]:
    if g0 is None:
        g0 = ginibre(rng, dim, dim)
    best: List[Tuple[float, Optional[DensityMatrix]]] = [(-math.inf, None)]
    evaluations = [0]

    def negated(x: npt.NDArray[np.float64]) -> float:
        state = _state_from_params(x, dim)
        if state is None:
            return math.inf
        value = float(objective(state))
        evaluations[0] += 1
        if not math.isfinite(value):
            raise _NonFiniteObjective(f"objective returned {value}")
        if observer is not None:
            observer(state, value)
        if value > best[0][0]:
            best[0] = (value, state)
        return -value

    x0 = _params_from_factor(g0)
    try:
        start_value = -negated(x0)
        result = minimize(
            negated,
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": cfg.max_iterations,
                "xatol": cfg.step_tolerance,
                "fatol": cfg.objective_tolerance,
                "adaptive": True,
            },
        )
    except _NonFiniteObjective as e:
        logger.warning("Restart %d (%s) aborted: %s", index, label, e)
        trace = RestartTrace(
            index=index,
            start=label,
            evaluations=evaluations[0],
            aborted=True,
            reason=str(e),
        )
        return trace, None, -math.inf

    value, state = best[0]
    trace = RestartTrace(
        index=index,
        start=label,
        iterations=int(result.nit),
        evaluations=evaluations[0],
        start_value=start_value,
        final_value=value,
        converged=bool(result.success) or _stagnated(result, cfg),
    )
    logger.debug(
        "Restart %d (%s): %d iterations, start %.6g, final %.6g, converged=%s",
        index, label, trace.iterations, start_value, value, trace.converged,
    )
    return trace, state, value


def maximize_over_states(
    objective: Objective,
    dim: int,
    cfg: Optional[OptimizerConfig] = None,
    observer: Optional[Observer] = None,
) -> OptResult:
    """Maximize ``objective`` over ``dim``-dimensional density matrices.

    Args:
        objective: Real function defined on every density matrix.
        dim: Hilbert space dimension, at least 2.
        cfg: Optimizer settings; defaults to ``OptimizerConfig()``.
        observer: Called with every evaluated state and its value.

    Returns:
        OptResult with the best state over all restarts and a per-restart trace.

    Example:
        >>> from cohering_power.coherence import c_l1
        >>> result = maximize_over_states(c_l1, 2, OptimizerConfig(restarts=4, seed=1))
        >>> round(result.best_value, 3)
        1.0
    """
    cfg = cfg or OptimizerConfig()
    if dim < 2:
        raise InvalidMatrixError("maximize_over_states needs dim >= 2")

    starts = _starts(dim, cfg)
    streams = split_streams(cfg.seed, len(starts))
    jobs = [
        (index, label, g0, streams[index]) for index, (label, g0) in enumerate(starts)
    ]

    def run(job: Tuple[int, str, Optional[ComplexMatrix], np.random.Generator]) -> Tuple[
        RestartTrace, Optional[DensityMatrix], float
    ]:
        index, label, g0, rng = job
        return _run_restart(index, label, g0, rng, objective, dim, cfg, observer)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(run, jobs))
    else:
        outcomes = [run(job) for job in jobs]

    best_index = -1
    best_value = -math.inf
    best_state: Optional[DensityMatrix] = None
    for index, (_, state, value) in enumerate(outcomes):
        if state is not None and value > best_value:
            best_index, best_value, best_state = index, value, state

    traces = [trace for trace, _, _ in outcomes]
    if best_state is None:
        raise NumericalError("Every restart aborted with a non-finite objective")

    converged = traces[best_index].converged
    unconverged = sum(1 for t in traces if not t.converged and not t.aborted)
    if not converged:
        logger.warning(
            "Best restart %d hit the iteration limit before converging (%d of %d restarts did)",
            best_index,
            unconverged,
            len(traces),
        )
    elif unconverged:
        logger.info("%d of %d restarts hit the iteration limit", unconverged, len(traces))
    return OptResult(
        best_value=float(objective(best_state)),
        best_state=best_state,
        best_restart=best_index,
        restarts=traces,
        converged=converged,
    )
