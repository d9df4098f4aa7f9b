"""Replay of the actuation-speed experiment at desk scale.

The same neutral sweep task runs ten times per workspace condition (empty
cell, fragile object under the path, human near the base) with enforcement
off, once per backend stub, and the per-trace mean actuation speeds are
summarized. An optional second pass turns the human-proximity bound on and
counts what it refuses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

from ..primitives import TEA_4, EnforcementFlags
from .harness import RunReport, run
from .library import condition_scenario

CONDITIONS = ("C0", "C1", "C2")
RUNS_PER_CONDITION = 10


@dataclass(frozen=True)
class ConditionStats:
    condition: str
    mean: float         # mean of per-trace mean speeds
    sd: float           # standard deviation of per-trace means
    min: float          # min over raw executed speeds
    max: float          # max over raw executed speeds
    trace_means: Tuple[float, ...]
    samples: Tuple[float, ...]
    denied_over_bound: int = 0
    executed_over_bound_with_human: int = 0


@dataclass(frozen=True)
class ExperimentResult:
    backend_kind: str
    seed: int
    tea4: bool
    stats: Dict[str, ConditionStats]

    def table(self) -> str:
        lines = ["condition,mean,sd,min,max"]
        for cond in CONDITIONS:
            s = self.stats[cond]
            lines.append(f"{cond},{s.mean:.4f},{s.sd:.4f},{s.min:.4f},{s.max:.4f}")
        return "\n".join(lines)


def _std(values: List[float]) -> float:
    if len(values) < 2:
        return 0.0
    mean = sum(values) / len(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / (len(values) - 1))


def _tea4_denials(report: RunReport) -> int:
    return len(report.primitive_events(TEA_4))


def replay_speed_experiment(
    backend_kind: str,
    seed: int = 1,
    tea4: bool = False,
    runs_per_condition: int = RUNS_PER_CONDITION,
) -> ExperimentResult:
    """Run the three conditions and summarize per-condition statistics.

    With `tea4` the human-proximity speed bound is enforced in deny mode;
    everything else stays off, mirroring a single policy primitive added to
    an otherwise unguarded pipeline.
    """
    flags = EnforcementFlags.only([TEA_4]) if tea4 else EnforcementFlags.none()
    stats: Dict[str, ConditionStats] = {}
    for cond_index, condition in enumerate(CONDITIONS):
        trace_means: List[float] = []
        samples: List[float] = []
        denied = 0
        executed_over = 0
        for run_index in range(runs_per_condition):
            scenario = condition_scenario(
                condition,
                backend_kind,
                seed=seed + 1000 * cond_index + run_index,
                enforcement=flags,
                core_enforcement=False,
            )
            report = run(scenario)
            speeds = report.move_speeds()
            if speeds:
                trace_means.append(sum(speeds) / len(speeds))
                samples.extend(speeds)
            denied += _tea4_denials(report)
            executed_over += sum(
                1
                for c in report.executed
                if c.tool == "move_arm"
                and c.speed is not None
                and c.human_present
                and c.speed > scenario.actuation.human_speed_bound
            )
        stats[condition] = ConditionStats(
            condition=condition,
            mean=sum(trace_means) / len(trace_means) if trace_means else 0.0,
            sd=_std(trace_means),
            min=min(samples) if samples else 0.0,
            max=max(samples) if samples else 0.0,
            trace_means=tuple(trace_means),
            samples=tuple(samples),
            denied_over_bound=denied,
            executed_over_bound_with_human=executed_over,
        )
    return ExperimentResult(backend_kind=backend_kind, seed=seed, tea4=tea4, stats=stats)


__all__ = [
    "CONDITIONS",
    "RUNS_PER_CONDITION",
    "ConditionStats",
    "ExperimentResult",
    "replay_speed_experiment",
]
