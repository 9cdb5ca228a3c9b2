"""Steady-state TCP Reno throughput, used as the feasible service rate of a link."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .trust import DomainError


@dataclass(frozen=True)
class TcpParams:
    w_max: float      # receiver window, packets
    rtt: float        # seconds
    t0: float         # retransmission timeout, seconds
    b: int = 1        # packets acknowledged per ACK
    p: float = 0.0    # loss probability

    def __post_init__(self):
        if self.w_max <= 0 or self.rtt <= 0 or self.t0 <= 0:
            raise DomainError("w_max, rtt and t0 must be positive")
        if self.b < 1 or int(self.b) != self.b:
            raise DomainError("b must be a positive integer")
        if not 0.0 <= self.p <= 1.0 or math.isnan(self.p):
            raise DomainError(f"loss probability must lie in [0, 1], got {self.p}")


def loss_limited_rate(rtt: float, t0: float, b: int, p: float) -> float:
    """Throughput bound imposed by losses alone, packets/s. Infinite at p = 0."""
    if p == 0.0:
        return math.inf
    fast = rtt * math.sqrt(2.0 * b * p / 3.0)
    timeout = t0 * min(1.0, 3.0 * math.sqrt(3.0 * b * p / 8.0)) * p * (1.0 + 32.0 * p * p)
    return 1.0 / (fast + timeout)


def feasible_rate(params: TcpParams) -> float:
    """min(window limit, loss limit) in packets per second.

    p = 0 is accepted and yields the window limit ``w_max / rtt``.
    """
    window = params.w_max / params.rtt
    return min(window, loss_limited_rate(params.rtt, params.t0, params.b, params.p))
