"""Evolutionary-programming auto-tuner for paired velocity PID controllers."""

from .ep import (
    EPConfig,
    EPResult,
    EvaluationError,
    FLAT_GAIN_FIELDS,
    Gains,
    GenerationRecord,
    Individual,
    InitSpec,
    MemberRecord,
    MutationKind,
    MutationSpec,
    Population,
    StopReason,
    init_population,
    mutate_absolute,
    mutate_individual,
    mutate_scaled,
    next_generation,
    run_ep,
    select_fittest,
)
from .harness import (
    ChannelResult,
    ConfigError,
    DEFAULT_TEST_ROUTE,
    DEFAULT_TRAIN_ROUTE,
    EXPERIMENT_TABLE,
    ExperimentSpec,
    GainGrid,
    GridOracleResult,
    ResultRecord,
    build_environment,
    build_experiment_spec,
    export_generations,
    export_trace,
    grid_oracle,
    load_generations,
    parse_config_file,
    parse_grid_file,
    render_result_table,
    run_experiment,
)
from .metrics import DIVERGENCE_AE, FitnessRecord, StepMetrics, average_error, fitness_of, step_metrics
from .pid import PidState, pid_reset, pid_step
from .plant import (
    ChannelParams,
    ChannelTrace,
    PlantParams,
    RouteSpec,
    SimConfig,
    SimTrace,
    SimulationDiverged,
    plant_step,
    route_setpoint,
    simulate_route,
)

__version__ = "0.1.0"
