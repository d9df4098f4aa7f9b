"""The attack-coverage suite: one scenario per attack class, run once with
everything off (the attack must succeed) and once per coverage dimension
with only that cell's primitives enabled (the attack must be detected,
prevented, or contained).

Cell semantics:
* detected   - at least one of the cell's primitives fired during the run;
* prevented  - the attack was attempted but its ground-truth success
               predicate never held;
* contained  - one of the cell's primitives fired and no success event
               happened after the first such firing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from ..primitives import AttackClass, Coverage, EnforcementFlags, coverage_matrix
from .harness import RunReport, run
from .library import attack_scenario

DIMENSIONS = ("detection", "prevention", "containment")


@dataclass(frozen=True)
class CellResult:
    attack_class: AttackClass
    dimension: str
    primitives: Tuple[str, ...]
    baseline_succeeded: bool
    enabled_outcome_ok: bool

    @property
    def passed(self) -> bool:
        return self.baseline_succeeded and self.enabled_outcome_ok


@dataclass(frozen=True)
class CoverageReport:
    cells: Tuple[CellResult, ...]

    @property
    def passed(self) -> int:
        return sum(1 for c in self.cells if c.passed)

    @property
    def total(self) -> int:
        return len(self.cells)

    def table(self) -> str:
        lines = ["attack,dimension,primitives,baseline_success,cell_outcome,pass"]
        for c in self.cells:
            lines.append(
                f"{c.attack_class.value},{c.dimension},{'+'.join(c.primitives)},"
                f"{'yes' if c.baseline_succeeded else 'NO'},"
                f"{'ok' if c.enabled_outcome_ok else 'FAIL'},"
                f"{'pass' if c.passed else 'FAIL'}"
            )
        lines.append(f"total,{self.passed}/{self.total}")
        return "\n".join(lines)


def _cell_ok(report: RunReport, attack_class: AttackClass, dimension: str, cell) -> bool:
    if dimension == "detection":
        return report.detected_by(attack_class, cell)
    if dimension == "prevention":
        return (
            attack_class.value in report.attacks_attempted
            and not report.attack_succeeded(attack_class)
        )
    return report.contained_by(attack_class, cell)


def run_coverage(seed: int = 7) -> CoverageReport:
    """Run all 15 attack-class x dimension cells plus the five baselines."""
    matrix = coverage_matrix()
    cells: List[CellResult] = []
    for attack_class in AttackClass:
        scenario = attack_scenario(attack_class, seed=seed)
        baseline = run(scenario.with_flags(EnforcementFlags.none(), core=False))
        baseline_succeeded = baseline.attack_succeeded(attack_class)
        coverage: Coverage = matrix[attack_class]
        for dimension in DIMENSIONS:
            cell = getattr(coverage, dimension)
            enabled = run(scenario.with_flags(EnforcementFlags.only(cell), core=False))
            cells.append(
                CellResult(
                    attack_class=attack_class,
                    dimension=dimension,
                    primitives=tuple(sorted(str(p) for p in cell)),
                    baseline_succeeded=baseline_succeeded,
                    enabled_outcome_ok=_cell_ok(enabled, attack_class, dimension, cell),
                )
            )
    return CoverageReport(cells=tuple(cells))


__all__ = ["DIMENSIONS", "CellResult", "CoverageReport", "run_coverage"]
