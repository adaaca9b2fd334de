"""Largest-residual-first benchmark allocator.

A demand-agnostic policy: each slice in turn takes the station with the
most residual left, draining it. Scoring is meets-or-exceeds: a grant that
covers the demand earns the full +1, shortfalls get quadratic partial
credit so totals stay comparable with the learned allocator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .network import SLICE_ORDER, SliceKind


@dataclass(frozen=True)
class BaselineDecision:
    slice_kind: SliceKind
    chosen_bs: int
    demand: float
    granted: float
    reward: float


def baseline_reward(granted: float, demand: float) -> float:
    if granted >= demand:
        return 1.0
    return 1.0 - (granted - demand) ** 2


def baseline_select(
    demands: Sequence[float], residuals: Sequence[float]
) -> tuple[list[BaselineDecision], float]:
    """One decision per slice in the fixed slice order; ties pick the lowest BS."""
    remaining = list(residuals)
    decisions = []
    total = 0.0
    for kind, demand in zip(SLICE_ORDER, demands):
        best = 0
        for i in range(1, len(remaining)):
            if remaining[i] > remaining[best]:
                best = i
        granted = remaining[best]
        remaining[best] = 0.0
        reward = baseline_reward(granted, demand)
        decisions.append(BaselineDecision(kind, best + 1, demand, granted, reward))
        total += reward
    return decisions, total
