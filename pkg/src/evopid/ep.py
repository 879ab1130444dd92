"""Evolutionary-programming core: gain individuals, Gaussian mutation, elitist selection.

The optimizer tunes two PID controllers at once (linear and angular velocity,
six gains total). Each generation every member is evaluated, the per-channel
winners are spliced into a composite parent, and the next population is that
parent plus Gaussian mutants of it.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

FLAT_GAIN_FIELDS = ("kpv", "kiv", "kdv", "kpa", "kia", "kda")


class EvaluationError(RuntimeError):
    """Fitness evaluation failed or produced no finite values."""

    def __init__(self, message: str, generation: int | None = None, member: int | None = None):
        super().__init__(message)
        self.generation = generation
        self.member = member


@dataclass(frozen=True)
class Gains:
    """One controller's PID gains. All three are nonnegative and finite."""

    kp: float
    ki: float
    kd: float

    def __post_init__(self):
        for name in ("kp", "ki", "kd"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.kp, self.ki, self.kd)


@dataclass(frozen=True)
class Individual:
    """One candidate solution: a linear-velocity gain triple paired with an angular one."""

    linear: Gains
    angular: Gains

    def as_flat(self) -> tuple[float, ...]:
        """Six gains in the fixed order kpv, kiv, kdv, kpa, kia, kda."""
        return self.linear.as_tuple() + self.angular.as_tuple()

    @classmethod
    def from_flat(cls, values: Sequence[float]) -> Individual:
        if len(values) != 6:
            raise ValueError(f"expected 6 gains, got {len(values)}")
        return cls(Gains(*values[:3]), Gains(*values[3:]))


@dataclass(frozen=True)
class Population:
    generation_index: int
    members: tuple[Individual, ...]

    def __post_init__(self):
        if self.generation_index < 0:
            raise ValueError("generation_index must be >= 0")
        if len(self.members) < 1:
            raise ValueError("population must have at least one member")


class MutationKind(enum.Enum):
    ABSOLUTE = "absolute"
    SCALED = "scaled"


@dataclass(frozen=True)
class MutationSpec:
    """Which mutation operator to use and the Gaussian width for each."""

    kind: MutationKind
    sigma_absolute: float = 0.05
    sigma_scaled: float = 0.5

    def __post_init__(self):
        if self.sigma_absolute <= 0 or self.sigma_scaled <= 0:
            raise ValueError("mutation sigmas must be > 0")


@dataclass(frozen=True)
class InitSpec:
    """Uniform sampling bounds for the initial population, shared by both channels."""

    kp_bounds: tuple[float, float] = (0.0, 1.0)
    ki_bounds: tuple[float, float] = (0.0, 0.1)
    kd_bounds: tuple[float, float] = (0.0, 0.01)

    def __post_init__(self):
        for name in ("kp_bounds", "ki_bounds", "kd_bounds"):
            low, high = getattr(self, name)
            if not (0.0 <= low <= high):
                raise ValueError(f"{name} must satisfy 0 <= low <= high, got ({low}, {high})")


@dataclass(frozen=True)
class EPConfig:
    population_size: int
    max_generations: int = 100
    ae_target: float = 0.01
    mutation: MutationSpec = MutationSpec(MutationKind.SCALED)
    init: InitSpec = InitSpec()
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if self.max_generations < 1:
            raise ValueError("max_generations must be >= 1")
        if not self.ae_target > 0:
            raise ValueError("ae_target must be > 0")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class MemberRecord:
    """One evaluated member: its gains and the per-channel average errors."""

    individual: Individual
    ae_linear: float
    ae_angular: float


@dataclass(frozen=True)
class GenerationRecord:
    """Everything logged for one generation, plus the per-channel winner indices."""

    generation_index: int
    members: tuple[MemberRecord, ...]
    fittest_linear_index: int
    fittest_angular_index: int

    @classmethod
    def from_evaluations(cls, generation_index: int, members: tuple[MemberRecord, ...]) -> GenerationRecord:
        li = _argmin_finite(m.ae_linear for m in members)
        ai = _argmin_finite(m.ae_angular for m in members)
        if li is None or ai is None:
            raise EvaluationError(
                f"generation {generation_index}: no member has a finite average error on "
                f"{'the linear' if li is None else 'the angular'} channel",
                generation=generation_index,
            )
        return cls(generation_index, members, li, ai)


class StopReason(enum.Enum):
    TARGET_REACHED = "target_reached"
    GENERATION_LIMIT = "generation_limit"


class EPResult(NamedTuple):
    best: Individual
    history: tuple[GenerationRecord, ...]
    stop_reason: StopReason


Evaluator = Callable[[Individual], tuple[float, float]]


def _argmin_finite(values) -> int | None:
    best_i = None
    best_v = math.inf
    for i, v in enumerate(values):
        # strict < keeps the lowest index on ties
        if math.isfinite(v) and v < best_v:
            best_i, best_v = i, v
    return best_i


def _check_mutation_args(value: float, sigma: float) -> None:
    if not (math.isfinite(value) and value >= 0.0):
        raise ValueError(f"value must be finite and >= 0, got {value!r}")
    if not sigma > 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma!r}")


def _clamp_additive(value: float, add: float) -> float:
    # Halve the perturbation until the result is nonnegative. With value == 0 and
    # add < 0 the loop would never exit, so return its limit (0) directly.
    if value == 0.0 and add < 0.0:
        return 0.0
    while value + add < 0.0:
        add *= 0.5
    return value + add


def mutate_absolute(value: float, sigma: float, rng: random.Random) -> float:
    """Additive Gaussian mutation: value + N(0, sigma), perturbation halved until nonnegative."""
    _check_mutation_args(value, sigma)
    return _clamp_additive(value, rng.gauss(0.0, sigma))


def mutate_scaled(value: float, sigma: float, rng: random.Random) -> float:
    """Value-proportional mutation: value + value * N(0, sigma).

    The perturbation scales with the value being mutated, so parameters of very
    different magnitudes all see proportionate steps. A value of exactly 0 is
    absorbing: the perturbation is 0 for every draw, and the result is 0.
    The Gaussian draw is consumed even then, keeping the stream position fixed.
    """
    _check_mutation_args(value, sigma)
    return _clamp_additive(value, value * rng.gauss(0.0, sigma))


def mutate_individual(parent: Individual, spec: MutationSpec, rng: random.Random) -> Individual:
    """Mutate all six gains independently, in the fixed order kpv, kiv, kdv, kpa, kia, kda."""
    if spec.kind is MutationKind.ABSOLUTE:
        op, sigma = mutate_absolute, spec.sigma_absolute
    else:
        op, sigma = mutate_scaled, spec.sigma_scaled
    return Individual.from_flat([op(v, sigma, rng) for v in parent.as_flat()])


def init_population(config: EPConfig, rng: random.Random) -> Population:
    """Draw generation 0 uniformly from the init bounds.

    Draw order is fixed (member 0..n-1; within a member kpv, kiv, kdv, kpa,
    kia, kda) so a given seed always yields the same population.
    """
    b = config.init
    members = []
    for _ in range(config.population_size):
        lin = Gains(rng.uniform(*b.kp_bounds), rng.uniform(*b.ki_bounds), rng.uniform(*b.kd_bounds))
        ang = Gains(rng.uniform(*b.kp_bounds), rng.uniform(*b.ki_bounds), rng.uniform(*b.kd_bounds))
        members.append(Individual(lin, ang))
    return Population(0, tuple(members))


def select_fittest(record: GenerationRecord) -> tuple[int, int]:
    """Indices of the lowest finite ae_linear and ae_angular (independently; ties -> lowest index)."""
    li = _argmin_finite(m.ae_linear for m in record.members)
    ai = _argmin_finite(m.ae_angular for m in record.members)
    if li is None or ai is None:
        raise EvaluationError(
            f"generation {record.generation_index}: no member has a finite average error",
            generation=record.generation_index,
        )
    return li, ai


def composite_parent(prev: Population, record: GenerationRecord) -> Individual:
    """Splice the best linear gains and the best angular gains into one parent."""
    return Individual(
        linear=prev.members[record.fittest_linear_index].linear,
        angular=prev.members[record.fittest_angular_index].angular,
    )


def next_generation(prev: Population, record: GenerationRecord, config: EPConfig, rng: random.Random) -> Population:
    """Build the successor population: the composite parent (member 0, unmutated) plus mutants of it."""
    parent = composite_parent(prev, record)
    members = [parent]
    for _ in range(config.population_size - 1):
        members.append(mutate_individual(parent, config.mutation, rng))
    return Population(prev.generation_index + 1, tuple(members))


def _best_composite(history: Sequence[GenerationRecord]) -> Individual:
    best_lin_ae = math.inf
    best_ang_ae = math.inf
    best_lin = None
    best_ang = None
    for record in history:
        for m in record.members:
            if math.isfinite(m.ae_linear) and m.ae_linear < best_lin_ae:
                best_lin_ae, best_lin = m.ae_linear, m.individual.linear
            if math.isfinite(m.ae_angular) and m.ae_angular < best_ang_ae:
                best_ang_ae, best_ang = m.ae_angular, m.individual.angular
    assert best_lin is not None and best_ang is not None
    return Individual(linear=best_lin, angular=best_ang)


def run_ep(config: EPConfig, evaluator: Evaluator) -> EPResult:
    """Run the full tuning loop: evaluate, select, stop-check, mutate.

    The evaluator maps an Individual to (ae_linear, ae_angular) and must be
    deterministic. The loop stops once the fittest members of a generation have
    both channel errors strictly below ``ae_target``, or after evaluating
    ``max_generations`` full populations. Returns the composite best individual
    over the entire history together with the per-generation records.
    """
    rng = random.Random(config.rng_seed)
    population = init_population(config, rng)
    history: list[GenerationRecord] = []
    while True:
        members = []
        for i, individual in enumerate(population.members):
            try:
                ae_linear, ae_angular = evaluator(individual)
            except Exception as exc:
                raise EvaluationError(
                    f"evaluator failed at generation {population.generation_index}, member {i}: {exc}",
                    generation=population.generation_index,
                    member=i,
                ) from exc
            members.append(MemberRecord(individual, float(ae_linear), float(ae_angular)))
        record = GenerationRecord.from_evaluations(population.generation_index, tuple(members))
        history.append(record)

        best_lin = record.members[record.fittest_linear_index].ae_linear
        best_ang = record.members[record.fittest_angular_index].ae_angular
        if best_lin < config.ae_target and best_ang < config.ae_target:
            stop_reason = StopReason.TARGET_REACHED
            break
        if len(history) >= config.max_generations:
            stop_reason = StopReason.GENERATION_LIMIT
            break
        population = next_generation(population, record, config, rng)

    return EPResult(_best_composite(history), tuple(history), stop_reason)
