"""Executable, seeded property checks for cohering-power identities and bounds.

Each property is registered with :func:`register_case` and produces one :class:`Trial` per
random instance. A trial fails when its margin exceeds the case tolerance or when it flags
a hard failure (a violated inequality direction, or an exception raised by the library).
Failures are data: the worst trial's inputs are kept as a serializable witness.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, NamedTuple, Optional, Union

import numpy as np
from scipy.linalg import expm

from cohering_power.channels import Append, Dismiss, Kraus, QuantumOperation, Unitary
from cohering_power.coherence import c_l1, c_r
from cohering_power.exceptions import CoheringPowerError
from cohering_power.matcore import SubsystemShape, encode_matrix, one_to_one_norm
from cohering_power.models import (
    CaseReport,
    CoherenceMeasure,
    GateName,
    OptimizerConfig,
    Profile,
    PropertyCase,
    PropertyId,
    VerifyReport,
)
from cohering_power.optimize import (
    ginibre,
    make_rng,
    random_density,
    random_kraus_operators,
    random_unitary,
)
from cohering_power.power import (
    composition_bound_l1,
    continuity_gap,
    dilation_power_bound,
    gate_matrix,
    generalized_cohering_power,
    hadamard_power_l1,
    lifted_gain,
    qubit_power_l1,
    ratio_power_l1,
    relent_counterexample,
    tensor_power_check,
    unitary_power_l1,
    unitary_product_bound_l1,
)
from cohering_power.states import DensityMatrix, basis_state, plus_state

logger = logging.getLogger(__name__)

COUNTEREXAMPLE_POWER = 0.0030
COUNTEREXAMPLE_GAIN = 0.0190
COUNTEREXAMPLE_TOL = 2e-3
OPTIMIZER_EQUALITY_TOL = 1e-4
RATIO_ITERATE_TOL = 1e-9


class Trial(NamedTuple):
    """Outcome of one random instance; ``margin > tolerance`` counts as a failure."""

    margin: float
    witness: Dict[str, Any]
    hard_failure: bool = False


class TrialContext(NamedTuple):
    index: int
    seed: int
    rng: np.random.Generator


CaseFunction = Callable[[TrialContext], Trial]


class RegisteredCase(NamedTuple):
    function: CaseFunction
    tolerance: float
    quick_trials: int
    full_trials: int

    def trials_for(self, profile: Profile) -> int:
        return self.quick_trials if profile is Profile.QUICK else self.full_trials


_REGISTRY: Dict[PropertyId, RegisteredCase] = {}


def register_case(
    case_id: PropertyId,
    tolerance: float = 1e-9,
    quick: int = 100,
    full: int = 1000,
) -> Callable[[CaseFunction], CaseFunction]:
    """Register ``function`` as the trial generator of ``case_id``."""

    def decorator(function: CaseFunction) -> CaseFunction:
        _REGISTRY[case_id] = RegisteredCase(function, tolerance, quick, full)
        return function

    return decorator


def registered_cases() -> List[PropertyId]:
    """Registered ids in declaration order of :class:`PropertyId`."""
    return [case_id for case_id in PropertyId if case_id in _REGISTRY]


def default_case(
    case_id: PropertyId, seed: int = 0, profile: Union[Profile, str] = Profile.QUICK
) -> PropertyCase:
    """Case with the registered tolerance and the profile's trial count."""
    entry = _REGISTRY[case_id]
    return PropertyCase(
        id=case_id,
        trials=entry.trials_for(Profile(profile)),
        seed=seed,
        tolerance=entry.tolerance,
    )


def _optimizer_config(ctx: TrialContext) -> OptimizerConfig:
    return OptimizerConfig(restarts=8, max_iterations=1500, seed=ctx.seed)


def _pick(rng: np.random.Generator, options: Iterable[int]) -> int:
    values = list(options)
    return int(values[int(rng.integers(len(values)))])


def _random_channel(rng: np.random.Generator, in_dim: int, out_dim: int) -> Kraus:
    minimum = math.ceil(in_dim / out_dim)
    rank = _pick(rng, range(minimum, minimum + 3))
    return Kraus(ops=random_kraus_operators(rng, in_dim, out_dim, rank))


def _channel_witness(op: QuantumOperation) -> List[List[List[List[float]]]]:
    return [encode_matrix(k) for k in op.kraus_operators()]


@register_case(PropertyId.EQ3_L1_TENSOR, tolerance=1e-10)
def _eq3_l1_tensor(ctx: TrialContext) -> Trial:
    rho = random_density(ctx.rng, _pick(ctx.rng, (2, 3)))
    sigma = random_density(ctx.rng, _pick(ctx.rng, (2, 3)))
    joint = c_l1(rho.tensor(sigma)) + 1.0
    margin = abs(joint - (c_l1(rho) + 1.0) * (c_l1(sigma) + 1.0))
    return Trial(margin, {"rho": encode_matrix(rho.mat), "sigma": encode_matrix(sigma.mat)})


@register_case(PropertyId.EQ4_RENT_TENSOR)
def _eq4_rent_tensor(ctx: TrialContext) -> Trial:
    rho = random_density(ctx.rng, _pick(ctx.rng, (2, 3)))
    sigma = random_density(ctx.rng, _pick(ctx.rng, (2, 3)))
    margin = abs(c_r(rho.tensor(sigma)) - c_r(rho) - c_r(sigma))
    return Trial(margin, {"rho": encode_matrix(rho.mat), "sigma": encode_matrix(sigma.mat)})


@register_case(PropertyId.P2_PRODUCT_BOUND)
def _p2_product_bound(ctx: TrialContext) -> Trial:
    dim = _pick(ctx.rng, (2, 3, 4))
    count = _pick(ctx.rng, (1, 2, 3, 4))
    us = [random_unitary(ctx.rng, dim) for _ in range(count)]
    check = unitary_product_bound_l1(us)
    margin = check.actual - check.bound
    return Trial(margin, {"unitaries": [encode_matrix(u) for u in us]})


@register_case(PropertyId.P2_TENSOR_EQUALITY)
def _p2_tensor_equality(ctx: TrialContext) -> Trial:
    if ctx.index == 0:
        us = [gate_matrix(GateName.H)] * 3
    else:
        count = _pick(ctx.rng, (2, 3))
        us = [random_unitary(ctx.rng, _pick(ctx.rng, (2, 3))) for _ in range(count)]
    joint = unitary_power_l1(_kron_all(us)) + 1.0
    predicted = math.prod(unitary_power_l1(u) + 1.0 for u in us)
    return Trial(abs(joint - predicted), {"unitaries": [encode_matrix(u) for u in us]})


def _kron_all(us: List[np.ndarray]) -> np.ndarray:
    out = us[0]
    for u in us[1:]:
        out = np.kron(out, u)
    return out


@register_case(PropertyId.CONTINUITY)
def _continuity(ctx: TrialContext) -> Trial:
    dim = _pick(ctx.rng, (2, 4, 8))
    u = random_unitary(ctx.rng, dim)
    g = ginibre(ctx.rng, dim, dim)
    hermitian = 0.5 * (g + g.conj().T)
    epsilon = 10.0 ** ctx.rng.uniform(-3.0, 0.0)
    v = u @ expm(1j * epsilon * hermitian)
    gap = continuity_gap(u, v)
    return Trial(
        gap.lhs - gap.rhs,
        {"u": encode_matrix(u), "v": encode_matrix(v), "distance": one_to_one_norm(u - v)},
    )


@register_case(PropertyId.P3_COMPOSE_BOUND)
def _p3_compose_bound(ctx: TrialContext) -> Trial:
    in_dim = _pick(ctx.rng, (2, 3))
    kind = ctx.index % 3
    if kind == 0:
        mid = _pick(ctx.rng, (2, 3))
        outer: QuantumOperation = Unitary(u=random_unitary(ctx.rng, mid))
    elif kind == 1:
        mid = _pick(ctx.rng, (2, 3))
        outer = Append(system_dim=mid, sigma=random_density(ctx.rng, 2))
    else:
        mid = 4
        outer = Dismiss(shape=SubsystemShape(dims=[2, 2]), traced=(_pick(ctx.rng, (0, 1)),))
    inner = _random_channel(ctx.rng, in_dim, mid)
    check = composition_bound_l1(outer, inner)
    return Trial(
        check.actual - check.bound,
        {"outer": type(outer).__name__, "inner_kraus": _channel_witness(inner)},
    )


def _tensor_law(ctx: TrialContext, measure: CoherenceMeasure) -> Trial:
    first = _random_channel(ctx.rng, _pick(ctx.rng, (2, 3)), _pick(ctx.rng, (2, 3)))
    second = _random_channel(ctx.rng, _pick(ctx.rng, (2, 3)), _pick(ctx.rng, (2, 3)))
    check = tensor_power_check(first, second, measure)
    return Trial(
        abs(check.slack),
        {"first_kraus": _channel_witness(first), "second_kraus": _channel_witness(second)},
    )


@register_case(PropertyId.P4_TENSOR_L1)
def _p4_tensor_l1(ctx: TrialContext) -> Trial:
    return _tensor_law(ctx, CoherenceMeasure.L1)


@register_case(PropertyId.P5_TENSOR_RENT)
def _p5_tensor_rent(ctx: TrialContext) -> Trial:
    return _tensor_law(ctx, CoherenceMeasure.RELATIVE_ENTROPY)


@register_case(PropertyId.P6_QUBIT_EQUALITY, tolerance=OPTIMIZER_EQUALITY_TOL, quick=10, full=100)
def _p6_qubit_equality(ctx: TrialContext) -> Trial:
    u = random_unitary(ctx.rng, 2)
    s = qubit_power_l1(u)
    closed_gap = abs(s - unitary_power_l1(u))
    report = generalized_cohering_power(Unitary(u=u), CoherenceMeasure.L1, _optimizer_config(ctx))
    s_hat = report.s_hat_value or 0.0
    witness = report.s_hat_witness or basis_state(0, 2)
    # Adding a coherent qubit doubles the gain but leaves the power unchanged.
    lift = lifted_gain(u, witness, plus_state(), CoherenceMeasure.L1)
    separated = s <= 1e-3 or lift.actual > lift.bound
    hard = bool(s - s_hat > 1e-9 or closed_gap > 1e-10 or not separated)
    return Trial(
        s_hat - s,
        {
            "u": encode_matrix(u),
            "s": s,
            "s_hat": s_hat,
            "witness": encode_matrix(witness.mat),
            "lifted_power": lift.bound,
            "lifted_gain": lift.actual,
        },
        hard_failure=hard,
    )


@register_case(PropertyId.P7_COUNTEREXAMPLE, tolerance=COUNTEREXAMPLE_TOL, quick=1, full=1)
def _p7_counterexample(ctx: TrialContext) -> Trial:
    example = relent_counterexample()
    margin = max(
        abs(example.power - COUNTEREXAMPLE_POWER), abs(example.gain - COUNTEREXAMPLE_GAIN)
    )
    lift = lifted_gain(
        example.unitary, example.state, basis_state(0, 2), CoherenceMeasure.RELATIVE_ENTROPY
    )
    hard = bool(not example.gain > example.power or not lift.actual > lift.bound)
    return Trial(
        margin,
        {
            "u": encode_matrix(example.unitary),
            "rho": encode_matrix(example.state.mat),
            "power": example.power,
            "gain": example.gain,
            "lifted_power": lift.bound,
            "lifted_gain": lift.actual,
        },
        hard_failure=hard,
    )


@register_case(PropertyId.P8_RATIO_EQUALITY, tolerance=OPTIMIZER_EQUALITY_TOL, quick=10, full=50)
def _p8_ratio_equality(ctx: TrialContext) -> Trial:
    u = random_unitary(ctx.rng, _pick(ctx.rng, (2, 3)))
    s = unitary_power_l1(u)
    visited = [-math.inf]

    def observe(_: DensityMatrix, value: float) -> None:
        visited[0] = max(visited[0], value)

    ratio = ratio_power_l1(u, _optimizer_config(ctx), observer=observe)
    hard = bool(visited[0] > s + RATIO_ITERATE_TOL)
    return Trial(
        s - ratio,
        {"u": encode_matrix(u), "s": s, "ratio": ratio, "max_iterate": visited[0]},
        hard_failure=hard,
    )


@register_case(PropertyId.HADAMARD_MAXIMALITY)
def _hadamard_maximality(ctx: TrialContext) -> Trial:
    qubits = _pick(ctx.rng, (1, 2, 3))
    maximum = 2.0**qubits - 1.0
    if ctx.index == 0:
        margin = abs(hadamard_power_l1(qubits) - maximum)
        return Trial(margin, {"qubits": qubits, "unitary": "H"})
    u = random_unitary(ctx.rng, 2**qubits)
    return Trial(unitary_power_l1(u) - maximum, {"qubits": qubits, "u": encode_matrix(u)})


@register_case(PropertyId.DILATION_BOUND, quick=20, full=50)
def _dilation_bound(ctx: TrialContext) -> Trial:
    dim = _pick(ctx.rng, (2, 3))
    op = _random_channel(ctx.rng, dim, dim)
    check = dilation_power_bound(op)
    return Trial(check.actual - check.bound, {"kraus": _channel_witness(op)})


def _trial_seeds(case: PropertyCase) -> List[np.random.SeedSequence]:
    position = list(PropertyId).index(case.id)
    return np.random.SeedSequence([case.seed, position]).spawn(case.trials)


def _run_trial(
    function: CaseFunction, index: int, seq: np.random.SeedSequence
) -> Trial:
    seed = int(seq.generate_state(1, dtype=np.uint64)[0])
    ctx = TrialContext(index=index, seed=seed, rng=make_rng(seq))
    try:
        raw = function(ctx)
        trial = Trial(float(raw.margin), raw.witness, bool(raw.hard_failure))
    except CoheringPowerError as e:
        trial = Trial(math.inf, {"error": type(e).__name__, "message": e.message}, True)
    trial.witness.setdefault("trial", index)
    return trial


def run_property(case: PropertyCase) -> VerifyReport:
    """Run one property over ``case.trials`` seeded instances.

    Args:
        case: Property id, trial count, seed and tolerance.

    Returns:
        VerifyReport holding a single CaseReport. The witness replays the worst trial:
        it records the trial index alongside the matrices involved.
    """
    entry = _REGISTRY[case.id]
    failures = 0
    worst: Optional[Trial] = None
    hard_failures = 0
    for index, seq in enumerate(_trial_seeds(case)):
        trial = _run_trial(entry.function, index, seq)
        failed = trial.hard_failure or trial.margin > case.tolerance
        failures += int(failed)
        hard_failures += int(trial.hard_failure)
        if worst is None or _ranks_above(trial, worst):
            worst = trial

    assert worst is not None
    passed = failures == 0
    report = CaseReport(
        id=case.id,
        trials=case.trials,
        failures=failures,
        worst_margin=worst.margin,
        tolerance=case.tolerance,
        passed=passed,
        witness=worst.witness,
        details={"hard_failures": hard_failures, "seed": case.seed},
    )
    if passed:
        logger.info(
            "%s: %d trials passed, worst margin %.3e", case.id.value, case.trials, worst.margin
        )
    else:
        logger.warning(
            "%s: %d of %d trials failed, worst margin %.3e",
            case.id.value,
            failures,
            case.trials,
            worst.margin,
        )
    return VerifyReport(seed=case.seed, cases=[report])


def _ranks_above(trial: Trial, other: Trial) -> bool:
    if trial.hard_failure != other.hard_failure:
        return trial.hard_failure
    return trial.margin > other.margin


def run_all(
    seed: int = 0,
    profile: Union[Profile, str] = Profile.QUICK,
    cases: Optional[Iterable[Union[PropertyId, str]]] = None,
    workers: int = 1,
) -> VerifyReport:
    """Run the selected (default: all) registered properties with profile trial counts.

    Cases are independent, so ``workers > 1`` runs them on a thread pool; the report keeps
    the order of the selection either way.
    """
    profile = Profile(profile)
    selected = [PropertyId(c) for c in cases] if cases else registered_cases()
    jobs = [default_case(case_id, seed, profile) for case_id in selected]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_property, jobs))
    else:
        reports = [run_property(job) for job in jobs]
    return VerifyReport(
        seed=seed,
        profile=profile,
        cases=[case for report in reports for case in report.cases],
    )
