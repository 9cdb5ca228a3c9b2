"""Evaluation quantities: reputation churn (delta R) and network utilisation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .trust import DomainError

Snapshot = Mapping[tuple[int, int], float]


@dataclass(frozen=True)
class IterationMetrics:
    iteration: int
    delta_r: float        # raw sum over pairs
    delta_r_norm: float   # per compared pair
    utilization: float


def delta_r_terms(prev: Snapshot, curr: Snapshot) -> tuple[float, int]:
    """Sum of |curr - prev| over pairs present in both, and the number of such pairs.

    Pairs seen for the first time contribute nothing.
    """
    total = 0.0
    pairs = 0
    if len(prev) > len(curr):
        prev, curr = curr, prev
    for key, old in prev.items():
        new = curr.get(key)
        if new is None:
            continue
        total += abs(new - old)
        pairs += 1
    return total, pairs


def delta_r(prev: Snapshot, curr: Snapshot) -> float:
    return delta_r_terms(prev, curr)[0]


def delta_r_normalized(prev: Snapshot, curr: Snapshot) -> float:
    total, pairs = delta_r_terms(prev, curr)
    return total / pairs if pairs else 0.0


def utilization(delivered: Iterable[float], total_shared_capacity: float) -> float:
    if total_shared_capacity <= 0:
        raise DomainError("total shared capacity must be positive")
    return sum(delivered) / total_shared_capacity
