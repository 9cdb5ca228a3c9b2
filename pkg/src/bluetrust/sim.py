"""Slotted-time P2P bandwidth-sharing simulator.

Every slot runs five phases for all nodes:

1. query     - each node discovers a random set of candidate providers
2. request   - it asks each candidate for an even share of
               ``overrequest * download_capacity``
3. allocate  - each provider picks at most ``max_served_requests`` requesters,
               reputation-weighted (uniform during the acquaintance period),
               and splits its upload capacity among them
4. transact  - requesters take offers until their download capacity is full
               and refuse the rest; TCP caps the delivered amount if enabled
5. update    - requesters turn each transaction into a trust sample and feed
               their reputation tables

Randomness comes from independent per-node streams (one per phase), so the
outcome never depends on the order nodes are processed within a phase.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import estimator as est
from .metrics import IterationMetrics, utilization
from .tcp import TcpParams, feasible_rate
from .trust import (DeltaPolicy, DomainError, ServiceRates, measure_ratio,
                    trust_accepted_offer, trust_refused_offer)

ESTIMATOR_KINDS = ("blue", "baseline")
POPULATION_MODES = ("homogeneous", "heterogeneous")
C2_MODES = ("global", "neighborhood")


@dataclass
class PopulationConfig:
    mode: str = "homogeneous"
    download_capacity: float = 100.0
    max_served_requests: int = 2
    # heterogeneous draws, uniform over the listed values
    download_capacity_choices: list[float] = field(default_factory=lambda: [50.0, 100.0, 150.0, 200.0])
    max_served_choices: list[int] = field(default_factory=lambda: [1, 2, 3, 4])
    upload_ratio: float = 1.0  # upload capacity = upload_ratio * download capacity
    free_rider_fraction: float = 0.0

    def validate(self):
        if self.mode not in POPULATION_MODES:
            raise DomainError(f"unknown population mode {self.mode!r}")
        if self.download_capacity <= 0 or self.max_served_requests < 1:
            raise DomainError("capacities and max_served_requests must be positive")
        if not self.download_capacity_choices or min(self.download_capacity_choices) <= 0:
            raise DomainError("download_capacity_choices must be positive")
        if not self.max_served_choices or min(self.max_served_choices) < 1:
            raise DomainError("max_served_choices must be >= 1")
        if self.upload_ratio <= 0:
            raise DomainError("upload_ratio must be positive")
        if not 0.0 <= self.free_rider_fraction < 1.0:
            raise DomainError("free_rider_fraction must lie in [0, 1)")


@dataclass
class TcpLinkConfig:
    """Per-link TCP parameters; rtt and loss are drawn uniformly per link."""
    w_max: float = 64.0
    rtt_range: tuple[float, float] = (0.02, 0.3)
    t0: float = 1.0
    b: int = 1
    loss_range: tuple[float, float] = (0.0, 0.05)
    packet_size: float = 1.0     # resource units per packet
    slot_duration: float = 1.0   # seconds

    def validate(self):
        lo, hi = self.rtt_range
        if not 0 < lo <= hi:
            raise DomainError("rtt_range must be positive and ordered")
        lo, hi = self.loss_range
        if not 0 <= lo <= hi <= 1:
            raise DomainError("loss_range must lie in [0, 1] and be ordered")
        if self.packet_size <= 0 or self.slot_duration <= 0:
            raise DomainError("packet_size and slot_duration must be positive")
        TcpParams(self.w_max, self.rtt_range[0], self.t0, self.b, self.loss_range[0])


@dataclass
class SimConfig:
    node_count: int = 200
    iterations: int = 500
    acquaintance_iterations: int = 50
    delta: float = 0.3
    alpha: float = est.DEFAULT_ALPHA
    population: PopulationConfig = field(default_factory=PopulationConfig)
    estimator_kind: str = "blue"
    rng_seed: int = 0
    tcp_enabled: bool = False
    tcp: TcpLinkConfig = field(default_factory=TcpLinkConfig)
    overrequest: float = 2.0
    candidates_min: int = 2
    candidates_max: int = 6
    prior_reputation: float | None = None  # None -> delta
    window_size: int = est.BASELINE_WINDOW
    c2_mode: str = "global"
    c2_refresh_interval: int = 10
    hub_count: int = 10
    record_transactions: bool = False

    def validate(self):
        if self.node_count < 2:
            raise DomainError("need at least two nodes")
        if self.iterations < 1:
            raise DomainError("iterations must be positive")
        if not 0 <= self.acquaintance_iterations < self.iterations:
            raise DomainError("acquaintance_iterations must be in [0, iterations)")
        if not 0.0 <= self.delta <= 1.0:
            raise DomainError("delta must lie in [0, 1]")
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError("alpha must lie in (0, 1]")
        if self.estimator_kind not in ESTIMATOR_KINDS:
            raise DomainError(f"unknown estimator {self.estimator_kind!r}")
        if not 0 <= self.rng_seed < 2**64:
            raise DomainError("rng_seed must be an unsigned 64-bit integer")
        if self.overrequest < 1.0:
            raise DomainError("overrequest must be >= 1")
        if not 1 <= self.candidates_min <= self.candidates_max:
            raise DomainError("need 1 <= candidates_min <= candidates_max")
        if self.prior_reputation is not None and not 0.0 <= self.prior_reputation <= 1.0:
            raise DomainError("prior_reputation must lie in [0, 1]")
        if self.window_size < 1 or self.c2_refresh_interval < 1 or self.hub_count < 1:
            raise DomainError("window_size, c2_refresh_interval and hub_count must be positive")
        if self.c2_mode not in C2_MODES:
            raise DomainError(f"unknown c2_mode {self.c2_mode!r}")
        self.population.validate()
        if self.tcp_enabled:
            self.tcp.validate()

    @property
    def prior(self) -> float:
        return self.delta if self.prior_reputation is None else self.prior_reputation


@dataclass
class PeerNode:
    id: int
    download_capacity: float
    upload_capacity: float
    max_served_requests: int
    delta_policy: DeltaPolicy
    free_rider: bool = False
    reputation_table: dict[int, est.EstimatorState] = field(default_factory=dict)

    @property
    def shared_capacity(self) -> float:
        return 0.0 if self.free_rider else self.upload_capacity


@dataclass(slots=True)
class Transaction:
    slot: int
    requester: int
    provider: int
    requested: float
    offered: float = 0.0     # what the provider allocated
    allocated: float = 0.0   # what the requester took (never above requested)
    delivered: float = 0.0   # what actually arrived after any TCP cap
    accepted: bool = False
    sample: float | None = None

    @property
    def refused(self) -> bool:
        return self.offered > 0 and not self.accepted


@dataclass
class SimReport:
    config: SimConfig
    metrics: list[IterationMetrics]
    reputations: dict[tuple[int, int], float]
    transactions: list[Transaction] | None = None


def _stream(seed: int, *tag) -> random.Random:
    return random.Random("/".join(str(t) for t in (seed,) + tag))


def build_population(config: SimConfig) -> list[PeerNode]:
    pop = config.population
    rng = _stream(config.rng_seed, "population")
    nodes = []
    for i in range(config.node_count):
        if pop.mode == "homogeneous":
            down, served = pop.download_capacity, pop.max_served_requests
        else:
            down = float(rng.choice(pop.download_capacity_choices))
            served = int(rng.choice(pop.max_served_choices))
        nodes.append(PeerNode(
            id=i, download_capacity=down, upload_capacity=down * pop.upload_ratio,
            max_served_requests=served,
            delta_policy=DeltaPolicy(config.delta, down, config.overrequest * down)))
    n_free = int(round(pop.free_rider_fraction * config.node_count))
    n_free = min(n_free, config.node_count - 1)
    for i in rng.sample(range(config.node_count), n_free):
        nodes[i].free_rider = True
    return nodes


def phase_query(node_id: int, node_count: int, rng: random.Random,
                candidates_min: int = 2, candidates_max: int = 6) -> list[int]:
    """Random distinct providers (never the node itself), at least one."""
    others = node_count - 1
    hi = min(candidates_max, others)
    lo = min(max(1, candidates_min), hi)
    k = rng.randint(lo, hi)
    picks = rng.sample(range(others), k)
    return [p + 1 if p >= node_id else p for p in picks]


def phase_request(node: PeerNode, candidates: Sequence[int], overrequest: float,
                  slot: int = 0) -> list[Transaction]:
    total = overrequest * node.download_capacity
    share = total / len(candidates)
    return [Transaction(slot, node.id, c, share) for c in candidates]


def weighted_sample(weights: Sequence[float], k: int, rng: random.Random) -> list[int]:
    """Successive draws without replacement, each proportional to remaining weight.

    Zero-weight items are never chosen.
    """
    remaining = [i for i, w in enumerate(weights) if w > 0]
    chosen = []
    while remaining and len(chosen) < k:
        total = sum(weights[i] for i in remaining)
        r = rng.random() * total
        acc = 0.0
        pick = len(remaining) - 1
        for idx, i in enumerate(remaining):
            acc += weights[i]
            if r < acc:
                pick = idx
                break
        chosen.append(remaining.pop(pick))
    return chosen


def phase_allocate(provider: PeerNode, requests: Sequence[Transaction],
                   reputation: Callable[[int], float], rng: random.Random,
                   acquaintance: bool) -> list[Transaction]:
    """Fill ``offered`` on the selected requests; returns the selected ones."""
    if provider.free_rider or not requests:
        return []
    k = provider.max_served_requests
    if acquaintance:
        if len(requests) <= k:
            chosen = list(range(len(requests)))
        else:
            chosen = rng.sample(range(len(requests)), k)
    else:
        chosen = weighted_sample([reputation(t.requester) for t in requests], k, rng)
    selected = [requests[i] for i in sorted(chosen)]
    demand = sum(t.requested for t in selected)
    if demand <= 0:
        return selected
    scale = min(1.0, provider.upload_capacity / demand)
    for t in selected:
        t.offered = t.requested * scale
    return selected


def phase_transact(requester: PeerNode, transactions: Sequence[Transaction],
                   link_cap: Callable[[int, int], float] | None = None) -> list[Transaction]:
    """Accept offers in request order until the download capacity is used up.

    ``link_cap(requester, provider)`` returns the feasible amount for the slot
    when the TCP model is enabled.
    """
    room = requester.download_capacity
    for t in transactions:
        if t.offered <= 0:
            continue
        take = min(t.offered, room)
        if take <= 0:
            t.accepted = False
            continue
        t.accepted = True
        t.allocated = take
        room -= take
        if link_cap is not None:
            t.delivered = min(take, link_cap(t.requester, t.provider))
        else:
            t.delivered = take
    return list(transactions)


def transaction_sample(node: PeerNode, t: Transaction,
                       link_cap: Callable[[int, int], float] | None = None) -> float:
    """Trust sample the requester records for one transaction."""
    if t.refused:
        return trust_refused_offer(node.delta_policy)
    if not t.accepted:
        return measure_ratio(t.requested, 0.0)
    feasible = t.allocated
    if link_cap is not None:
        feasible = min(feasible, link_cap(t.requester, t.provider))
    if feasible <= 0:
        return measure_ratio(t.requested, t.allocated)
    return trust_accepted_offer(ServiceRates(
        actual=t.delivered, feasible=feasible, willing=t.allocated, requested=t.requested))


def phase_update_reputation(node: PeerNode, transactions: Sequence[Transaction],
                            link_cap: Callable[[int, int], float] | None = None,
                            alpha: float = est.DEFAULT_ALPHA,
                            window_size: int = est.BASELINE_WINDOW
                            ) -> dict[int, est.EstimatorState]:
    table = node.reputation_table
    for t in transactions:
        t.sample = transaction_sample(node, t, link_cap)
        state = table.get(t.provider)
        if state is None:
            state = est.EstimatorState(alpha=alpha, window_size=window_size)
        table[t.provider] = est.update_ema(state, t.sample)
    return table


class Simulation:
    """Stateful slot-by-slot driver; :func:`run_simulation` wraps it."""

    def __init__(self, config: SimConfig):
        config.validate()
        self.config = config
        self.nodes = build_population(config)
        n = config.node_count
        seed = config.rng_seed
        self._query_rng = [_stream(seed, "query", i) for i in range(n)]
        self._alloc_rng = [_stream(seed, "allocate", i) for i in range(n)]
        self.slot = 0
        # queryable reputation per observer, kept in step with reputation_table
        self.values: list[dict[int, float]] = [{} for _ in range(n)]
        self.corrections = [0.0] * n
        self._pairs = 0
        self.total_shared = sum(node.shared_capacity for node in self.nodes)
        self.link_cap = self._link_cap if config.tcp_enabled else None
        self._links: dict[tuple[int, int], float] = {}
        self.hub_of = self._assign_hubs() if config.c2_mode == "neighborhood" else None

    def _assign_hubs(self) -> list[int]:
        rng = _stream(self.config.rng_seed, "hubs")
        n = self.config.node_count
        hubs = sorted(rng.sample(range(n), min(self.config.hub_count, n)))
        hub_of = [rng.choice(hubs) for _ in range(n)]
        for h in hubs:
            hub_of[h] = h
        return hub_of

    def _link_cap(self, requester: int, provider: int) -> float:
        key = (requester, provider)
        cap = self._links.get(key)
        if cap is None:
            tcp = self.config.tcp
            rng = _stream(self.config.rng_seed, "link", requester, provider)
            params = TcpParams(tcp.w_max, rng.uniform(*tcp.rtt_range), tcp.t0, tcp.b,
                               rng.uniform(*tcp.loss_range))
            cap = feasible_rate(params) * tcp.packet_size * tcp.slot_duration
            self._links[key] = cap
        return cap

    def reputation(self, observer: int, subject: int) -> float:
        return self.values[observer].get(subject, self.config.prior)

    def _value(self, observer: int, state: est.EstimatorState) -> float:
        if self.config.estimator_kind == "blue":
            return est.blue_value(state.ema_mean, self.corrections[observer])
        return est.baseline_estimate(state)

    def noise_model(self, observer: int, requested: float) -> est.NoiseModel:
        node = self.nodes[observer]
        c1 = est.estimate_c1(requested, node.download_capacity)
        return est.compute_noise_model(c1, self.c2_estimate(observer))

    def c2_estimate(self, observer: int) -> float:
        if self.hub_of is None:
            return est.estimate_c2_global(self.total_shared, self._total_requested)
        hub = self.hub_of[observer]
        return est.estimate_c2_neighborhood(
            (self.nodes[i].shared_capacity, self._requested[i])
            for i in self._members[hub])

    def _refresh_corrections(self, outgoing, touched):
        # planned totals, not summed shares: keeps C1*C2 free of rounding noise
        self._requested = [self.config.overrequest * node.download_capacity
                           if reqs else 0.0 for node, reqs in zip(self.nodes, outgoing)]
        self._total_requested = sum(self._requested)
        if self.hub_of is not None:
            self._members = {}
            for i, h in enumerate(self.hub_of):
                self._members.setdefault(h, []).append(i)
        for node in self.nodes:
            i = node.id
            c = self.noise_model(i, self._requested[i]).c
            if c == self.corrections[i]:
                continue
            self.corrections[i] = c
            if self.config.estimator_kind != "blue":
                continue
            vals = self.values[i]
            for j, state in node.reputation_table.items():
                touched.setdefault((i, j), vals[j])
                vals[j] = self._value(i, state)

    def snapshot(self) -> dict[tuple[int, int], float]:
        return {(i, j): v for i, vals in enumerate(self.values) for j, v in vals.items()}

    def step(self) -> tuple[IterationMetrics, list[Transaction]]:
        cfg = self.config
        self.slot += 1
        slot = self.slot
        nodes = self.nodes
        acquaintance = slot <= cfg.acquaintance_iterations

        outgoing = []
        incoming: list[list[Transaction]] = [[] for _ in nodes]
        for node in nodes:
            cands = phase_query(node.id, len(nodes), self._query_rng[node.id],
                                cfg.candidates_min, cfg.candidates_max)
            reqs = phase_request(node, cands, cfg.overrequest, slot)
            outgoing.append(reqs)
            for t in reqs:
                incoming[t.provider].append(t)

        prior = cfg.prior
        for node in nodes:
            table = self.values[node.id]
            phase_allocate(node, incoming[node.id], lambda r: table.get(r, prior),
                           self._alloc_rng[node.id], acquaintance)

        for node in nodes:
            phase_transact(node, outgoing[node.id], self.link_cap)

        touched: dict[tuple[int, int], float | None] = {}
        if (slot - 1) % cfg.c2_refresh_interval == 0:
            self._refresh_corrections(outgoing, touched)

        pairs_before = self._pairs
        for node in nodes:
            i = node.id
            vals = self.values[i]
            reqs = outgoing[i]
            for t in reqs:
                touched.setdefault((i, t.provider), vals.get(t.provider))
            phase_update_reputation(node, reqs, self.link_cap, cfg.alpha, cfg.window_size)
            table = node.reputation_table
            for t in reqs:
                vals[t.provider] = self._value(i, table[t.provider])

        self._pairs = sum(len(vals) for vals in self.values)

        raw = 0.0
        for (i, j), old in touched.items():
            if old is not None:
                raw += abs(self.values[i][j] - old)
        norm = raw / pairs_before if pairs_before else 0.0
        delivered = [t.delivered for reqs in outgoing for t in reqs]
        metrics = IterationMetrics(slot, raw, norm, utilization(delivered, self.total_shared))
        return metrics, [t for reqs in outgoing for t in reqs]


def run_simulation(config: SimConfig) -> SimReport:
    sim = Simulation(config)
    metrics = []
    log = [] if config.record_transactions else None
    for _ in range(config.iterations):
        m, txs = sim.step()
        metrics.append(m)
        if log is not None:
            log.extend(txs)
    return SimReport(config, metrics, sim.snapshot(), log)
