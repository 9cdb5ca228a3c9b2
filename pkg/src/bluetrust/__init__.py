"""Trust estimation for P2P reputation systems and a slotted-time sharing simulator."""
from .estimator import (EstimatorState, NoiseModel, TrustEstimate, baseline_estimate,
                        blue_estimate, compute_noise_model, estimate_c1,
                        estimate_c2_global, estimate_c2_neighborhood,
                        flat_mean_estimate, update_ema)
from .metrics import IterationMetrics, delta_r, delta_r_normalized, utilization
from .sim import PopulationConfig, SimConfig, SimReport, Simulation, run_simulation
from .tcp import TcpParams, feasible_rate
from .trust import (DeltaPolicy, DomainError, InvariantViolation, NoSamplesError,
                    ServiceRates, TrustSample, measure_ratio, trust_accepted_offer,
                    trust_refused_offer)

__version__ = "0.1.0"
