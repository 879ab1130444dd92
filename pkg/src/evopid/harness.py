"""Experiment runner and persistence: preset experiments, CSV/JSON logging, grid-search baseline."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .ep import (
    EPConfig,
    GenerationRecord,
    Gains,
    Individual,
    InitSpec,
    MemberRecord,
    MutationKind,
    MutationSpec,
    StopReason,
    run_ep,
)
from .metrics import StepMetrics, fitness_of, step_metrics
from .plant import ChannelParams, PlantParams, RouteSpec, SimConfig, simulate_route

DEFAULT_TRAIN_ROUTE = RouteSpec(start=-0.3, end=0.3)
DEFAULT_TEST_ROUTE = RouteSpec(start=0.1, end=0.7)

# experiment id -> (mutation kind, population size)
EXPERIMENT_TABLE = {
    1: (MutationKind.ABSOLUTE, 10),
    2: (MutationKind.SCALED, 10),
    3: (MutationKind.SCALED, 20),
}

GENERATIONS_HEADER = (
    "generation",
    "member",
    "kpv",
    "kiv",
    "kdv",
    "kpa",
    "kia",
    "kda",
    "ae_linear",
    "ae_angular",
)

TRACE_HEADER = ("t", "desired_linear", "actual_linear", "desired_angular", "actual_angular")

# every key accepted in a flat `key = value` config file, with its parsed type
CONFIG_KEYS: dict[str, type] = {
    "plant.linear.dc_gain": float,
    "plant.linear.time_constant": float,
    "plant.linear.actuator_limit": float,
    "plant.linear.initial_velocity": float,
    "plant.angular.dc_gain": float,
    "plant.angular.time_constant": float,
    "plant.angular.actuator_limit": float,
    "plant.angular.initial_velocity": float,
    "route.train.start": float,
    "route.train.end": float,
    "route.train.phase_duration": float,
    "route.test.start": float,
    "route.test.end": float,
    "route.test.phase_duration": float,
    "sim.sample_rate": float,
    "ep.population_size": int,
    "ep.max_generations": int,
    "ep.ae_target": float,
    "mutation.sigma_absolute": float,
    "mutation.sigma_scaled": float,
    "init.kp.low": float,
    "init.kp.high": float,
    "init.ki.low": float,
    "init.ki.high": float,
    "init.kd.low": float,
    "init.kd.high": float,
}


class ConfigError(ValueError):
    """A config or grid file could not be parsed or used an unknown key."""


@dataclass(frozen=True)
class ExperimentSpec:
    """One preset tuning run: EP settings, plant, routes, and where to write outputs."""

    experiment_id: int
    ep: EPConfig
    plant: PlantParams
    sim: SimConfig
    train_route: RouteSpec
    test_route: RouteSpec
    output_dir: Path

    def __post_init__(self):
        if self.experiment_id not in EXPERIMENT_TABLE:
            raise ValueError(f"experiment id must be one of {sorted(EXPERIMENT_TABLE)}")
        kind, _ = EXPERIMENT_TABLE[self.experiment_id]
        if self.ep.mutation.kind is not kind:
            raise ValueError(
                f"experiment {self.experiment_id} uses the {kind.value} mutation, "
                f"got {self.ep.mutation.kind.value}"
            )

    @property
    def mutation_kind(self) -> MutationKind:
        return self.ep.mutation.kind

    @property
    def population_size(self) -> int:
        return self.ep.population_size


@dataclass(frozen=True)
class ChannelResult:
    kp: float
    ki: float
    kd: float
    ae_train: float
    ae_test: float


@dataclass(frozen=True)
class ResultRecord:
    """Best gains per channel with their train/test errors and step metrics."""

    experiment_id: int
    linear: ChannelResult
    angular: ChannelResult
    step_train_linear: StepMetrics
    step_train_angular: StepMetrics
    step_test_linear: StepMetrics
    step_test_angular: StepMetrics
    stop_reason: StopReason
    generations_run: int


@dataclass(frozen=True)
class GainGrid:
    """Candidate values per gain for the exhaustive baseline."""

    kp_values: tuple[float, ...]
    ki_values: tuple[float, ...]
    kd_values: tuple[float, ...]

    def __post_init__(self):
        for name in ("kp_values", "ki_values", "kd_values"):
            values = getattr(self, name)
            if len(values) == 0:
                raise ValueError(f"{name} must be nonempty")
            if any(v < 0 for v in values):
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class GridOracleResult:
    linear_gains: Gains
    angular_gains: Gains
    ae_linear: float
    ae_angular: float


def parse_config_file(path: Path) -> dict[str, float]:
    """Read a flat `key = value` override file (# comments and blank lines allowed)."""
    overrides: dict[str, float] = {}
    for lineno, raw in enumerate(_read_lines(path), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected `key = value`, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r} (valid keys: {', '.join(sorted(CONFIG_KEYS))})")
        try:
            overrides[key] = CONFIG_KEYS[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return overrides


def parse_grid_file(path: Path) -> GainGrid:
    """Read per-gain value lists: lines `kp = v1, v2, ...`; a missing gain defaults to 0."""
    axes: dict[str, tuple[float, ...]] = {}
    for lineno, raw in enumerate(_read_lines(path), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key = key.strip()
        if not eq or key not in ("kp", "ki", "kd"):
            raise ConfigError(f"{path}:{lineno}: expected `kp|ki|kd = values`, got {raw.strip()!r}")
        try:
            values = tuple(float(v) for v in value.replace(",", " ").split())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
        if not values:
            raise ConfigError(f"{path}:{lineno}: {key} lists no values")
        axes[key] = values
    if not axes:
        raise ConfigError(f"{path}: grid file defines no gain values")
    return GainGrid(
        kp_values=axes.get("kp", (0.0,)),
        ki_values=axes.get("ki", (0.0,)),
        kd_values=axes.get("kd", (0.0,)),
    )


def _read_lines(path: Path) -> list[str]:
    try:
        return Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def build_environment(
    overrides: Mapping[str, float] | None = None,
) -> tuple[PlantParams, SimConfig, dict[str, RouteSpec]]:
    """Plant, sim settings, and the train/test routes, with config overrides applied."""
    ov = dict(overrides or {})

    def channel(prefix: str, default: ChannelParams) -> ChannelParams:
        return ChannelParams(
            dc_gain=ov.get(f"{prefix}.dc_gain", default.dc_gain),
            time_constant=ov.get(f"{prefix}.time_constant", default.time_constant),
            actuator_limit=ov.get(f"{prefix}.actuator_limit", default.actuator_limit),
            initial_velocity=ov.get(f"{prefix}.initial_velocity", default.initial_velocity),
        )

    def route(prefix: str, default: RouteSpec) -> RouteSpec:
        return RouteSpec(
            start=ov.get(f"{prefix}.start", default.start),
            end=ov.get(f"{prefix}.end", default.end),
            phase_duration=ov.get(f"{prefix}.phase_duration", default.phase_duration),
        )

    defaults = PlantParams()
    plant = PlantParams(
        linear=channel("plant.linear", defaults.linear),
        angular=channel("plant.angular", defaults.angular),
    )
    sim = SimConfig(sample_rate=ov.get("sim.sample_rate", SimConfig().sample_rate))
    routes = {
        "train": route("route.train", DEFAULT_TRAIN_ROUTE),
        "test": route("route.test", DEFAULT_TEST_ROUTE),
    }
    return plant, sim, routes


def build_experiment_spec(
    experiment_id: int,
    seed: int = 0,
    output_dir: Path | str | None = None,
    overrides: Mapping[str, float] | None = None,
) -> ExperimentSpec:
    """Assemble a preset experiment; config overrides may adjust everything but the mutation kind."""
    if experiment_id not in EXPERIMENT_TABLE:
        raise ValueError(f"experiment id must be one of {sorted(EXPERIMENT_TABLE)}")
    ov = dict(overrides or {})
    kind, default_size = EXPERIMENT_TABLE[experiment_id]
    ep_defaults = EPConfig(population_size=default_size)
    mut_defaults = MutationSpec(kind)
    init_defaults = InitSpec()
    ep = EPConfig(
        population_size=int(ov.get("ep.population_size", default_size)),
        max_generations=int(ov.get("ep.max_generations", ep_defaults.max_generations)),
        ae_target=ov.get("ep.ae_target", ep_defaults.ae_target),
        mutation=MutationSpec(
            kind=kind,
            sigma_absolute=ov.get("mutation.sigma_absolute", mut_defaults.sigma_absolute),
            sigma_scaled=ov.get("mutation.sigma_scaled", mut_defaults.sigma_scaled),
        ),
        init=InitSpec(
            kp_bounds=(
                ov.get("init.kp.low", init_defaults.kp_bounds[0]),
                ov.get("init.kp.high", init_defaults.kp_bounds[1]),
            ),
            ki_bounds=(
                ov.get("init.ki.low", init_defaults.ki_bounds[0]),
                ov.get("init.ki.high", init_defaults.ki_bounds[1]),
            ),
            kd_bounds=(
                ov.get("init.kd.low", init_defaults.kd_bounds[0]),
                ov.get("init.kd.high", init_defaults.kd_bounds[1]),
            ),
        ),
        rng_seed=seed,
    )
    plant, sim, routes = build_environment(ov)
    if output_dir is None:
        output_dir = Path("results") / f"experiment_{experiment_id}"
    return ExperimentSpec(
        experiment_id=experiment_id,
        ep=ep,
        plant=plant,
        sim=sim,
        train_route=routes["train"],
        test_route=routes["test"],
        output_dir=Path(output_dir),
    )


def export_generations(history: Sequence[GenerationRecord], path: Path) -> None:
    """One CSV row per (generation, member), floats at full round-trip precision."""
    if len(history) == 0:
        raise ValueError("history is empty")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GENERATIONS_HEADER)
        for record in history:
            for member_index, m in enumerate(record.members):
                writer.writerow(
                    [record.generation_index, member_index]
                    + [repr(float(v)) for v in m.individual.as_flat()]
                    + [repr(float(m.ae_linear)), repr(float(m.ae_angular))]
                )


def load_generations(path: Path) -> list[GenerationRecord]:
    """Rebuild the generation history written by export_generations."""
    groups: dict[int, list[MemberRecord]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != GENERATIONS_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for row in reader:
            generation = int(row[0])
            gains = [float(v) for v in row[2:8]]
            member = MemberRecord(Individual.from_flat(gains), float(row[8]), float(row[9]))
            groups.setdefault(generation, []).append(member)
    return [
        GenerationRecord.from_evaluations(generation, tuple(members))
        for generation, members in sorted(groups.items())
    ]


def export_trace(trace, path: Path) -> None:
    """Both channels' sampled route run as CSV (columns: t, desired/actual per channel)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for i in range(len(trace.linear)):
            writer.writerow(
                [
                    repr(float(trace.linear.time[i])),
                    repr(float(trace.linear.desired[i])),
                    repr(float(trace.linear.actual[i])),
                    repr(float(trace.angular.desired[i])),
                    repr(float(trace.angular.actual[i])),
                ]
            )


def _spec_as_dict(spec: ExperimentSpec) -> dict:
    def route_dict(r: RouteSpec) -> dict:
        return {"start": r.start, "end": r.end, "phase_duration": r.phase_duration}

    def channel_dict(c: ChannelParams) -> dict:
        return {
            "dc_gain": c.dc_gain,
            "time_constant": c.time_constant,
            "actuator_limit": c.actuator_limit,
            "initial_velocity": c.initial_velocity,
        }

    return {
        "id": spec.experiment_id,
        "seed": spec.ep.rng_seed,
        "mutation": spec.ep.mutation.kind.value,
        "population_size": spec.ep.population_size,
        "max_generations": spec.ep.max_generations,
        "ae_target": spec.ep.ae_target,
        "sigma_absolute": spec.ep.mutation.sigma_absolute,
        "sigma_scaled": spec.ep.mutation.sigma_scaled,
        "init_bounds": {
            "kp": list(spec.ep.init.kp_bounds),
            "ki": list(spec.ep.init.ki_bounds),
            "kd": list(spec.ep.init.kd_bounds),
        },
        "sample_rate": spec.sim.sample_rate,
        "plant": {
            "linear": channel_dict(spec.plant.linear),
            "angular": channel_dict(spec.plant.angular),
        },
        "routes": {
            "train": route_dict(spec.train_route),
            "test": route_dict(spec.test_route),
        },
        "output_dir": str(spec.output_dir),
    }


def result_as_dict(record: ResultRecord, spec: ExperimentSpec) -> dict:
    def channel_dict(c: ChannelResult) -> dict:
        return {"kp": c.kp, "ki": c.ki, "kd": c.kd, "ae_train": c.ae_train, "ae_test": c.ae_test}

    return {
        "experiment": _spec_as_dict(spec),
        "result": {
            "linear": channel_dict(record.linear),
            "angular": channel_dict(record.angular),
        },
        "step_metrics": {
            "train": {
                "linear": record.step_train_linear.as_dict(),
                "angular": record.step_train_angular.as_dict(),
            },
            "test": {
                "linear": record.step_test_linear.as_dict(),
                "angular": record.step_test_angular.as_dict(),
            },
        },
        "stop_reason": record.stop_reason.value,
        "generations_run": record.generations_run,
    }


def render_result_table(records: Sequence[ResultRecord]) -> str:
    """Fixed-width summary, one Linear and one Angular row per experiment."""
    header = ("Experiment", "Type", "kp", "ki", "kd", "AE train", "AE test")
    rows = [header]
    for record in records:
        for label, channel in (("Linear", record.linear), ("Angular", record.angular)):
            rows.append(
                (
                    str(record.experiment_id),
                    label,
                    f"{channel.kp:.6g}",
                    f"{channel.ki:.6g}",
                    f"{channel.kd:.6g}",
                    f"{channel.ae_train:.6g}",
                    f"{channel.ae_test:.6g}",
                )
            )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows)


def run_experiment(spec: ExperimentSpec) -> ResultRecord:
    """Tune on the train route, re-evaluate the winner on the test route, log everything.

    Writes generations.csv, best_train_trace.csv, best_test_trace.csv, and
    result.json into the spec's output directory.
    """

    def evaluator(individual: Individual) -> tuple[float, float]:
        return fitness_of(individual, spec.train_route, spec.plant, spec.sim)

    best, history, stop_reason = run_ep(spec.ep, evaluator)

    ae_train_linear = min(m.ae_linear for record in history for m in record.members)
    ae_train_angular = min(m.ae_angular for record in history for m in record.members)
    test_fitness = fitness_of(best, spec.test_route, spec.plant, spec.sim)

    train_trace = simulate_route(best, spec.train_route, spec.plant, spec.sim)
    test_trace = simulate_route(best, spec.test_route, spec.plant, spec.sim)

    record = ResultRecord(
        experiment_id=spec.experiment_id,
        linear=ChannelResult(
            kp=best.linear.kp,
            ki=best.linear.ki,
            kd=best.linear.kd,
            ae_train=ae_train_linear,
            ae_test=test_fitness.ae_linear,
        ),
        angular=ChannelResult(
            kp=best.angular.kp,
            ki=best.angular.ki,
            kd=best.angular.kd,
            ae_train=ae_train_angular,
            ae_test=test_fitness.ae_angular,
        ),
        step_train_linear=step_metrics(train_trace.linear, spec.train_route),
        step_train_angular=step_metrics(train_trace.angular, spec.train_route),
        step_test_linear=step_metrics(test_trace.linear, spec.test_route),
        step_test_angular=step_metrics(test_trace.angular, spec.test_route),
        stop_reason=stop_reason,
        generations_run=len(history),
    )

    out = spec.output_dir
    out.mkdir(parents=True, exist_ok=True)
    export_generations(history, out / "generations.csv")
    export_trace(train_trace, out / "best_train_trace.csv")
    export_trace(test_trace, out / "best_test_trace.csv")
    with open(out / "result.json", "w") as fh:
        json.dump(result_as_dict(record, spec), fh, indent=2)
        fh.write("\n")
    return record


def grid_oracle(
    route: RouteSpec, params: PlantParams, sim: SimConfig, grid: GainGrid
) -> GridOracleResult:
    """Exhaustive per-channel argmin over the gain grid; ties go to the smallest gains.

    Every grid point is simulated with the same gains on both channels, which is
    enough because the channels never couple.
    """
    best: dict[str, tuple[float, Gains] | None] = {"linear": None, "angular": None}
    for kp in sorted(grid.kp_values):
        for ki in sorted(grid.ki_values):
            for kd in sorted(grid.kd_values):
                gains = Gains(kp, ki, kd)
                fitness = fitness_of(Individual(gains, gains), route, params, sim)
                for name, ae in (("linear", fitness.ae_linear), ("angular", fitness.ae_angular)):
                    # strict < keeps the first (lexicographically smallest) gains on ties
                    if best[name] is None or ae < best[name][0]:
                        best[name] = (ae, gains)
    assert best["linear"] is not None and best["angular"] is not None
    return GridOracleResult(
        linear_gains=best["linear"][1],
        angular_gains=best["angular"][1],
        ae_linear=best["linear"][0],
        ae_angular=best["angular"][0],
    )
