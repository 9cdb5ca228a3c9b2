"""Per-transaction trust measurement.

A requester measures a provider after every transaction. Three cases:

* plain measurement: received / requested
* the provider offered but the requester declined: a fixed credit ``delta``,
  bounded so nobody can farm credit by offering and then refusing to serve
* the requester accepted: (actual / feasible) * (willing / requested), which
  separates network-induced shortfall from the provider's own willingness
"""
from __future__ import annotations

from dataclasses import dataclass


class DomainError(ValueError):
    """Input outside the domain where a quantity is defined."""


class InvariantViolation(ValueError):
    """Input breaks a modelling invariant (e.g. over-delivery)."""


class NoSamplesError(ValueError):
    """An estimate was requested before any sample was observed."""


def clamp01(x: float) -> float:
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


@dataclass(frozen=True)
class TrustSample:
    observer: int
    subject: int
    transaction_index: int
    requested: float
    received: float
    value: float

    @classmethod
    def measure(cls, observer: int, subject: int, transaction_index: int,
                requested: float, received: float) -> "TrustSample":
        if transaction_index < 1:
            raise DomainError("transaction_index must be >= 1")
        return cls(observer, subject, transaction_index, requested, received,
                   measure_ratio(requested, received))


@dataclass(frozen=True)
class ServiceRates:
    """Rates observed on one accepted transaction, all in the same unit."""
    actual: float
    feasible: float
    willing: float
    requested: float


@dataclass(frozen=True)
class DeltaPolicy:
    delta: float
    download_capacity: float
    total_requests_made: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise DomainError(f"delta must lie in [0, 1], got {self.delta}")
        if self.download_capacity <= 0:
            raise DomainError("download_capacity must be positive")
        if self.total_requests_made < 0:
            raise DomainError("total_requests_made must be non-negative")

    @property
    def bound(self) -> float:
        """Anti-gaming ceiling on delta; 1.0 when no requests were made."""
        if self.total_requests_made > 0:
            return min(1.0, self.download_capacity / self.total_requests_made)
        return 1.0


def measure_ratio(requested: float, received: float) -> float:
    if requested <= 0:
        raise DomainError("undefined ratio: requested must be positive")
    if received < 0:
        raise DomainError("received must be non-negative")
    if received > requested:
        raise InvariantViolation(
            f"received {received} exceeds requested {requested}; "
            "extra offered resource must be refused")
    return received / requested


def trust_refused_offer(policy: DeltaPolicy) -> float:
    return min(policy.delta, policy.bound)


def trust_accepted_offer(rates: ServiceRates) -> float:
    if rates.feasible <= 0:
        raise DomainError("feasible rate must be positive")
    if rates.requested <= 0:
        raise DomainError("requested rate must be positive")
    if rates.actual < 0 or rates.willing < 0:
        raise DomainError("rates must be non-negative")
    return clamp01((rates.actual / rates.feasible) * (rates.willing / rates.requested))
