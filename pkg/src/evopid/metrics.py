"""Average-error fitness and step-response metrics computed from simulation traces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .ep import Individual
from .plant import ChannelTrace, PlantParams, RouteSpec, SimConfig, SimulationDiverged, simulate_route

# Finite stand-in fitness for unstable gains; must lose every selection.
DIVERGENCE_AE = 1.0e6


class FitnessRecord(NamedTuple):
    """Per-channel average error of one route run. Both values finite and >= 0."""

    ae_linear: float
    ae_angular: float


@dataclass(frozen=True)
class StepMetrics:
    """Step-response summary of the route's second phase.

    rise_time is the 10%-to-90% crossing interval, or None when the 90% level
    is never reached. overshoot is the peak excursion beyond the target as a
    fraction of the step magnitude. steady_state_error is the target minus the
    mean of the final half second.
    """

    rise_time: float | None
    overshoot: float
    steady_state_error: float

    def as_dict(self) -> dict:
        return {
            "rise_time": self.rise_time,
            "overshoot": self.overshoot,
            "steady_state_error": self.steady_state_error,
        }


def average_error(channel: ChannelTrace) -> float:
    """Mean |desired - actual| over every sample of the run, streamed in order."""
    n = len(channel)
    if n == 0:
        raise ValueError("average_error needs at least one sample")
    total = 0.0
    for d, a in zip(channel.desired, channel.actual):
        total += abs(d - a)
    return float(total / n)


def fitness_of(
    individual: Individual,
    route: RouteSpec,
    params: PlantParams,
    sim: SimConfig,
    divergence_ae: float = DIVERGENCE_AE,
) -> FitnessRecord:
    """Simulate the route once and average the error per channel.

    A diverging simulation is absorbed into ``divergence_ae`` on both channels
    so unstable gains stay comparable and always rank last.
    """
    try:
        trace = simulate_route(individual, route, params, sim)
    except SimulationDiverged:
        return FitnessRecord(divergence_ae, divergence_ae)
    return FitnessRecord(average_error(trace.linear), average_error(trace.angular))


def step_metrics(channel: ChannelTrace, route: RouteSpec) -> StepMetrics:
    """Rise time, overshoot, and steady-state error of the start->end step."""
    step = route.end - route.start
    if step == 0.0:
        raise ValueError("step metrics undefined: route start equals end")
    in_phase = channel.time >= route.phase_duration
    if not in_phase.any():
        raise ValueError("trace does not cover the route's end phase")
    actual = channel.actual[in_phase]
    t = channel.time[in_phase]

    sign = 1.0 if step > 0 else -1.0
    progress = sign * actual
    level_10 = sign * (route.start + 0.1 * step)
    level_90 = sign * (route.start + 0.9 * step)
    reached_90 = np.nonzero(progress >= level_90)[0]
    if reached_90.size == 0:
        rise_time = None
    else:
        # crossing 90% implies 10% was crossed at or before the same sample
        i10 = int(np.nonzero(progress >= level_10)[0][0])
        rise_time = float(t[reached_90[0]] - t[i10])

    overshoot = max(0.0, float(np.max(sign * (actual - route.end)))) / abs(step)

    dt = float(channel.time[1] - channel.time[0]) if len(channel) > 1 else route.phase_duration
    n_tail = min(len(actual), max(1, int(round(0.5 / dt))))
    steady_state_error = route.end - float(np.mean(actual[-n_tail:]))

    return StepMetrics(rise_time=rise_time, overshoot=overshoot, steady_state_error=steady_state_error)
