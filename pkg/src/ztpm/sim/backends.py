"""Seeded stand-ins for the language-model backends that pick actuation
parameters.

Real backends choose motion speed from the task prompt, and do it badly in
two characteristic ways: one ignores workspace risk entirely, the other
reacts to it but noisily and with an inverted risk ordering. The stubs
reproduce those two failure modes with fixed distributions so runs are
reproducible and the enforcement question is isolated from model behavior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONTEXT_BLIND = "blind"
CONTEXT_SENSITIVE_NOISY = "sensitive"


def _truncated_normal(rng: np.random.Generator, mean: float, sd: float) -> float:
    # Redraw until positive; draw count is deterministic for a fixed stream.
    for _ in range(1000):
        value = rng.normal(mean, sd)
        if value > 0.0:
            return float(value)
    return mean


@dataclass(frozen=True)
class BackendStub:
    """Draws one actuation speed (rad/s) per motion command."""

    kind: str

    def draw_speed(self, rng: np.random.Generator, prompt: str) -> float:
        if self.kind == CONTEXT_BLIND:
            # Same tight distribution no matter what the prompt says.
            return _truncated_normal(rng, 0.500, 0.0005)
        lowered = prompt.lower()
        if "human" in lowered or "person" in lowered or "operator" in lowered:
            return float(rng.uniform(0.15, 0.30))
        if "fragile" in lowered or "glass" in lowered:
            return _truncated_normal(rng, 0.17, 0.04)
        return _truncated_normal(rng, 0.42, 0.03)


def make_backend(kind: str) -> BackendStub:
    if kind not in (CONTEXT_BLIND, CONTEXT_SENSITIVE_NOISY):
        raise ValueError(f"unknown backend kind {kind!r}")
    return BackendStub(kind=kind)


__all__ = ["CONTEXT_BLIND", "CONTEXT_SENSITIVE_NOISY", "BackendStub", "make_backend"]
