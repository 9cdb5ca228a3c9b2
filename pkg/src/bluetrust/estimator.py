"""Trust estimators: bias-corrected BLUE and the last-ten-average baseline.

Observed trust samples are modelled as ``x[n] = A - w[n]`` where the noise
has mean ``W = C * A``: providers look worse than they are because a
requester that over-asks turns down part of what it is offered. With i.i.d.
noise the BLUE of ``A`` collapses to the sample mean divided by ``1 - C``;
here the sample mean is replaced by an exponential moving average so the
estimate tracks behavioural drift in O(1) memory.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .trust import DomainError, NoSamplesError, clamp01

DEFAULT_ALPHA = 0.1
BASELINE_WINDOW = 10

# alpha sweeps used by the experiments
ALPHA_PRESETS = {
    "estimation": (0.1, 0.01, 0.001),
    "simulation": (0.1, 0.3),
}


@dataclass(frozen=True)
class NoiseModel:
    c1: float
    c2: float
    c: float
    sigma: float = 1.0


def correction_factor(c1: float, c2: float) -> float:
    """Relative noise bias ``W / A``; zero unless the node is over-offered."""
    prod = c1 * c2
    if prod > 1.0:
        return 1.0 - 1.0 / prod
    return 0.0


def compute_noise_model(c1: float, c2: float, sigma: float = 1.0) -> NoiseModel:
    if c1 < 0 or c2 < 0:
        raise DomainError("c1 and c2 must be non-negative")
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    return NoiseModel(c1=c1, c2=c2, c=correction_factor(c1, c2), sigma=sigma)


def estimate_c1(requests_made: float, download_capacity: float) -> float:
    if download_capacity <= 0:
        raise DomainError("download capacity must be positive")
    if requests_made < 0:
        raise DomainError("requests_made must be non-negative")
    return requests_made / download_capacity


def estimate_c2_global(total_shared_capacity: float, total_requests: float) -> float:
    if total_requests <= 0:
        raise DomainError("total requests must be positive")
    if total_shared_capacity < 0:
        raise DomainError("shared capacity must be non-negative")
    return total_shared_capacity / total_requests


def estimate_c2_neighborhood(reports: Iterable[tuple[float, float]]) -> float:
    """C2 as seen by a hub that collects (shared_capacity, requests) from its neighbours."""
    shared = 0.0
    requests = 0.0
    for cap, req in reports:
        shared += cap
        requests += req
    if requests <= 0:
        raise DomainError("no neighbour reported any requests")
    return estimate_c2_global(shared, requests)


@dataclass(frozen=True)
class EstimatorState:
    """Running state one observer keeps about one subject.

    ``window`` holds the most recent raw samples (oldest first) for the
    baseline; the EMA is what the BLUE estimate reads.
    """
    alpha: float = DEFAULT_ALPHA
    ema_mean: float | None = None
    sample_count: int = 0
    window: tuple[float, ...] = ()
    window_size: int = BASELINE_WINDOW

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if (self.sample_count == 0) != (self.ema_mean is None):
            raise DomainError("ema_mean is defined iff sample_count > 0")
        if len(self.window) > self.window_size:
            raise DomainError("window longer than window_size")


@dataclass(frozen=True)
class TrustEstimate:
    value: float
    raw_mean: float
    correction: float


def update_ema(state: EstimatorState, sample: float) -> EstimatorState:
    if not 0.0 <= sample <= 1.0:
        raise DomainError(f"trust sample must lie in [0, 1], got {sample}")
    if state.sample_count == 0:
        ema = sample
    else:
        ema = state.alpha * sample + (1.0 - state.alpha) * state.ema_mean
    window = state.window + (sample,)
    if len(window) > state.window_size:
        window = window[-state.window_size:]
    return EstimatorState(state.alpha, ema, state.sample_count + 1, window, state.window_size)


def _check_correction(c: float) -> None:
    if not 0.0 <= c < 1.0:
        raise DomainError(f"correction must lie in [0, 1), got {c}")


def blue_estimate(state: EstimatorState, noise: NoiseModel) -> TrustEstimate:
    if state.sample_count == 0:
        raise NoSamplesError("no samples")
    _check_correction(noise.c)
    return TrustEstimate(value=clamp01(state.ema_mean / (1.0 - noise.c)),
                         raw_mean=state.ema_mean, correction=noise.c)


def blue_value(ema_mean: float, c: float) -> float:
    """Scalar fast path of :func:`blue_estimate` for the simulator."""
    return clamp01(ema_mean / (1.0 - c))


def flat_mean_estimate(samples: Sequence[float], noise: NoiseModel) -> TrustEstimate:
    """BLUE with the exact sample mean over all samples instead of the EMA."""
    n = len(samples)
    if n == 0:
        raise NoSamplesError("no samples")
    _check_correction(noise.c)
    mean = sum(samples) / n
    return TrustEstimate(value=clamp01(mean / (1.0 - noise.c)), raw_mean=mean,
                         correction=noise.c)


def baseline_estimate(state: EstimatorState) -> float:
    if not state.window:
        raise NoSamplesError("no samples")
    return sum(state.window) / len(state.window)
