"""Seeded discrete-event simulation of the photonic entanglement fabric.

Attempt semantics: every active TDM slot (communication ion) fires one
heralded attempt per repetition period 1/R; a failed ion is blocked for its
re-initialization time (and, conservatively, for the heralding flight time of
the classical outcome) before its slot attempts again.  Successful ions swap
their entanglement into memory and re-enter the rotation on the same
schedule.  All randomness flows through one counter-based stream per run, and
events are processed in (time, sequence) order, so identical seeds give
bit-identical event logs.
"""

from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .device import DeviceParams, LinkModel, link_success_probability
from .errors import InvalidPort, ValidationError, ZeroSuccessProbability
from .rng import philox_stream
from .steane import LogicalCostTable


class EventKind(Enum):
    ATTEMPT_START = "AttemptStart"
    HERALD = "Herald"
    REINIT = "Reinit"
    SWITCH_RECONFIG = "SwitchReconfig"
    GATE_DONE = "GateDone"
    MEASURE_DONE = "MeasureDone"


@dataclass(frozen=True)
class SimEvent:
    time: float
    kind: EventKind
    elu: int = -1
    port: int = -1
    request: int = -1
    success: bool | None = None

    def log_line(self) -> str:
        kind = self.kind.value
        if self.kind is EventKind.HERALD:
            kind = f"Herald({'ok' if self.success else 'fail'})"
        return f"{self.time:.9e},{kind},{self.elu},{self.port},{self.request}"


class EventQueue:
    """Min-heap of events with strict causality: no event before the clock."""

    def __init__(self):
        self._heap = []
        self._seq = 0
        self.clock = 0.0

    def push(self, event: SimEvent, ctx=None):
        if event.time < self.clock:
            raise ValidationError(
                f"causality violation: event at {event.time} before clock {self.clock}")
        heapq.heappush(self._heap, (event.time, self._seq, event, ctx))
        self._seq += 1

    def pop(self) -> tuple[SimEvent, object]:
        time, _, event, ctx = heapq.heappop(self._heap)
        self.clock = time
        return event, ctx

    def __len__(self):
        return len(self._heap)


@dataclass
class EluState:
    """Register capacity relevant to the network: ports and TDM depth."""

    elu_id: int
    n_qubits: int = 100
    ports: int = 2
    m_t: int = 10
    memory_qubits: int = 0

    def __post_init__(self):
        comm = self.ports * self.m_t
        if comm + self.memory_qubits > self.n_qubits:
            raise ValidationError(
                f"register {self.elu_id}: {comm} communication + "
                f"{self.memory_qubits} memory qubits exceed {self.n_qubits}")
        if self.ports < 1 or self.m_t < 1:
            raise ValidationError("ports and m_t must be at least 1")


@dataclass
class EntanglementRequest:
    elu_a: int
    elu_b: int
    pairs_needed: int
    request_id: int = 0
    completed: int = 0
    completion_times: list = field(default_factory=list)

    def register(self, time: float):
        if self.completed >= self.pairs_needed:
            raise ValidationError("request over-completed")
        self.completed += 1
        self.completion_times.append(time)

    @property
    def done(self) -> bool:
        return self.completed >= self.pairs_needed


class OXCSwitch:
    """Non-blocking optical crossconnect with FIFO arbitration.

    Any free input port can be routed to any free input port through one of
    floor(n_ports / 2) Bell-state detectors; a port participates in at most
    one active circuit.  Requests that cannot be served queue in FIFO order
    and are re-examined head-first on every release.
    """

    def __init__(self, n_ports: int):
        if n_ports < 2:
            raise ValidationError("switch needs at least 2 ports")
        self.n_ports = n_ports
        self.capacity = n_ports // 2
        self.active: set[tuple[int, int]] = set()
        self.busy_ports: set[int] = set()
        self.queue: deque[tuple[int, int]] = deque()
        self.granted_log: list[tuple[int, int]] = []
        self.released_log: list[tuple[int, int]] = []

    def _check_ports(self, a: int, b: int):
        if a == b:
            raise InvalidPort("circuit endpoints must differ")
        for port in (a, b):
            if not 0 <= port < self.n_ports:
                raise InvalidPort(f"port {port} out of range 0..{self.n_ports - 1}")

    def _grantable(self, a: int, b: int) -> bool:
        return (len(self.active) < self.capacity
                and a not in self.busy_ports and b not in self.busy_ports)

    def request(self, a: int, b: int) -> str:
        self._check_ports(a, b)
        if self._grantable(a, b):
            self._grant(a, b)
            return "granted"
        self.queue.append((a, b))
        return "queued"

    def _grant(self, a: int, b: int):
        self.active.add((a, b))
        self.busy_ports.update((a, b))
        self.granted_log.append((a, b))
        self._invariants()

    def release(self, a: int, b: int) -> list[tuple[int, int]]:
        """Release a circuit; returns the queued circuits granted as a result."""
        if (a, b) not in self.active:
            raise InvalidPort(f"circuit {(a, b)} is not active")
        self.active.remove((a, b))
        self.busy_ports.difference_update((a, b))
        self.released_log.append((a, b))
        granted = []
        # FIFO scan: earlier arrivals get first pick of the freed resources
        pending = deque()
        while self.queue:
            req = self.queue.popleft()
            if self._grantable(*req):
                self._grant(*req)
                granted.append(req)
            else:
                pending.append(req)
        self.queue = pending
        self._invariants()
        return granted

    def _invariants(self):
        if len(self.active) > self.capacity:
            raise ValidationError("detector capacity exceeded")
        ports = [p for circuit in self.active for p in circuit]
        if len(ports) != len(set(ports)):
            raise ValidationError("a port appears in two active circuits")


# ---------------------------------------------------------------------------

@dataclass
class _Ion:
    """One TDM slot: an attempt stream on a fixed per-ion grid.

    Attempt k happens at ``start + k * tick``; keeping the grid arithmetic
    multiplicative (not accumulated) makes the event engine and the batched
    closed-form path bit-identical.
    """

    elu: int
    port: int
    start: float = 0.0
    ticks: int = 0

    def next_allowed(self, tick: float) -> float:
        return self.start + self.ticks * tick


class _LinkEngine:
    """Shared attempt/herald machinery for link and pipeline runs."""

    def __init__(self, params: DeviceParams, p_success: float, seed: int,
                 herald_latency: float, overlap_feedback: bool,
                 log: list | None):
        if p_success <= 0.0:
            raise ZeroSuccessProbability("link success probability is zero")
        self.params = params
        self.p = p_success
        self.rng = philox_stream(seed)
        self.herald_latency = herald_latency
        self.overlap_feedback = overlap_feedback
        self.queue = EventQueue()
        self.log = log
        self.attempts = 0
        self.heralds_ok = 0

    def _emit(self, event: SimEvent):
        if self.log is not None:
            self.log.append(event.log_line())

    @property
    def tick(self) -> float:
        """Per-ion attempt spacing: repetition period or herald + reinit."""
        block = 0.0 if self.overlap_feedback else self.herald_latency
        return max(1.0 / self.params.rep_rate,
                   block + self.params.reinit_time)

    def run_request_group(self, requests, ions_by_request, start: float) -> float:
        """Drive concurrent requests to completion; returns the last herald time."""
        w = self.herald_latency
        tick = self.tick

        def schedule_attempt(ion, request):
            t = max(ion.next_allowed(tick), self.queue.clock)
            ev = SimEvent(t, EventKind.ATTEMPT_START, ion.elu, ion.port,
                          request.request_id)
            self.queue.push(ev, (ion, request))

        for request in requests:
            for ion in ions_by_request[request.request_id]:
                ion.start = max(ion.start, start)
                schedule_attempt(ion, request)

        last_done = start
        while len(self.queue):
            event, ctx = self.queue.pop()
            if event.kind is EventKind.ATTEMPT_START:
                ion, request = ctx
                self._emit(event)
                self.attempts += 1
                ok = bool(self.rng.random() < self.p)
                herald = SimEvent(event.time + w, EventKind.HERALD, ion.elu,
                                  ion.port, request.request_id, success=ok)
                self.queue.push(herald, ctx)
                ion.ticks += 1
            elif event.kind is EventKind.HERALD:
                ion, request = ctx
                self._emit(event)
                if event.success:
                    self.heralds_ok += 1
                if not request.done:
                    if event.success:
                        request.register(event.time)
                        last_done = max(last_done, event.time)
                    if not request.done:
                        schedule_attempt(ion, request)
            else:
                self._emit(event)
        return last_done


def _effective_multiplexity(elu_a: EluState, elu_b: EluState,
                            m_p: int | None, m_t: int | None) -> tuple[int, int]:
    ports = m_p if m_p is not None else min(elu_a.ports, elu_b.ports)
    tdm = m_t if m_t is not None else min(elu_a.m_t, elu_b.m_t)
    if ports < 1 or tdm < 1:
        raise ValidationError("multiplexities must be at least 1")
    return ports, tdm


def _closed_form_link_run(p: float, n_pairs: int, n_ions: int, tick: float,
                          w: float, seed: int) -> dict:
    """Batched equivalent of the event engine for one uncontended request.

    With a common start and a uniform per-ion cadence, the engine processes
    attempts tick by tick in ion order and consumes one uniform per attempt,
    so outcomes can be drawn in bulk in the same stream order.  After the
    pair completing the request heralds, the engine drains the already
    scheduled attempts of the next tick (the ions whose heralds preceded the
    completing one), which is reproduced exactly here.
    """
    rng = philox_stream(seed)
    completions: list[float] = []
    successes_seen = 0
    tick_base = 0
    chunk_ticks = max(1, (1 << 16) // max(n_ions, 1))
    while True:
        draws = rng.random(chunk_ticks * n_ions) < p
        hits = draws.nonzero()[0]
        if successes_seen + hits.size < n_pairs:
            successes_seen += hits.size
            for flat in hits:
                completions.append((tick_base + int(flat) // n_ions) * tick + w)
            tick_base += chunk_ticks
            continue
        final = hits[n_pairs - 1 - successes_seen]
        for flat in hits[:n_pairs - successes_seen]:
            completions.append((tick_base + int(flat) // n_ions) * tick + w)
        k_done = int(final) // n_ions
        rank = int(final) % n_ions
        # attempts: every ion through tick k_done, plus the drained attempts
        # of the ions already rescheduled before the completing herald
        attempts = (tick_base + k_done + 1) * n_ions + rank
        drawn = attempts - tick_base * n_ions
        heralds_ok = successes_seen + int(draws[:drawn].sum())
        if drawn > draws.size:      # drained tick spills into the next chunk
            extra = rng.random(drawn - draws.size) < p
            heralds_ok += int(extra.sum())
        return {"completions": completions, "attempts": attempts,
                "heralds_ok": heralds_ok}


def run_link_sim(link: LinkModel, elu_a: EluState, elu_b: EluState,
                 n_pairs: int, seed: int, m_p: int | None = None,
                 m_t: int | None = None, herald_latency: float = 10e-9,
                 overlap_feedback: bool = False,
                 collect_log: bool = False,
                 p_override: float | None = None) -> dict:
    """Generate ``n_pairs`` heralded pairs between two registers.

    Returns the makespan, per-pair inter-completion latencies, attempt count
    and success count, plus the event log when requested.  ``p_override``
    replaces the physical success probability (for degenerate-link studies).
    """
    if n_pairs < 1:
        raise ValidationError("n_pairs must be at least 1")
    ports, tdm = _effective_multiplexity(elu_a, elu_b, m_p, m_t)
    p = p_override if p_override is not None else link_success_probability(link)
    if p <= 0.0:
        raise ZeroSuccessProbability("link success probability is zero")
    log: list | None = [] if collect_log else None

    switch = OXCSwitch(n_ports=max(2 * ports, 2))
    circuits = [(2 * k, 2 * k + 1) for k in range(ports)]
    for a, b in circuits:
        if switch.request(a, b) != "granted":
            raise ValidationError("fresh switch must grant immediately")
        if log is not None:
            log.append(SimEvent(0.0, EventKind.SWITCH_RECONFIG, elu_a.elu_id,
                                a, 0).log_line())

    params = link.params
    block = 0.0 if overlap_feedback else herald_latency
    tick = max(1.0 / params.rep_rate, block + params.reinit_time)
    if collect_log or herald_latency >= tick:
        engine = _LinkEngine(params, p, seed, herald_latency,
                             overlap_feedback, log)
        request = EntanglementRequest(elu_a.elu_id, elu_b.elu_id, n_pairs,
                                      request_id=0)
        ions = [_Ion(elu_a.elu_id, port)
                for port in range(ports) for _ in range(tdm)]
        makespan = engine.run_request_group([request], {0: ions}, start=0.0)
        times = request.completion_times
        attempts, heralds_ok = engine.attempts, engine.heralds_ok
        completed = request.completed
    else:
        # batched path, draw-for-draw equivalent to the event engine
        run = _closed_form_link_run(p, n_pairs, ports * tdm, tick,
                                    herald_latency, seed)
        times = run["completions"]
        makespan = times[-1]
        attempts, heralds_ok = run["attempts"], run["heralds_ok"]
        completed = len(times)
    for a, b in circuits:
        switch.release(a, b)
    latencies = [times[0]] + [t2 - t1 for t1, t2 in zip(times, times[1:])]
    busy = n_pairs * herald_latency
    result = {
        "makespan_s": makespan,
        "latencies_s": latencies,
        "mean_pair_latency_s": makespan / n_pairs,
        "attempts": attempts,
        "successes": completed,
        "heralded_successes": heralds_ok,
        "link_wait_fraction": max(0.0, 1.0 - busy / makespan) if makespan else 0.0,
        "switch_granted": len(switch.granted_log),
        "switch_released": len(switch.released_log),
    }
    if collect_log:
        result["event_log"] = log
    return result


def summary_json(result: dict) -> str:
    payload = {
        "makespan_s": result["makespan_s"],
        "mean_pair_latency_s": result["mean_pair_latency_s"],
        "attempts": result["attempts"],
        "successes": result["successes"],
        "link_wait_fraction": result["link_wait_fraction"],
    }
    return json.dumps(payload, sort_keys=True)


def run_toffoli_pipeline(n_toffolis: int, table: LogicalCostTable,
                         link: LinkModel, seed: int,
                         m_p: int | None = None, m_t: int | None = None,
                         herald_latency: float = 10e-9,
                         collect_log: bool = False,
                         p_override: float | None = None) -> dict:
    """Simulate sequential teleported Toffoli gates on fresh registers.

    Each gate prepares its resource state on a fresh register (deterministic
    duration from the cost table's audit trail) while seven heralded pairs
    are generated to each of the three operand registers over the available
    ports; the gate completes after the slower of the two phases plus the
    teleportation circuit.
    """
    if n_toffolis < 1:
        raise ValidationError("n_toffolis must be at least 1")
    layout = table.layout
    ports = m_p if m_p is not None else getattr(layout, "m_p", 2)
    tdm = m_t if m_t is not None else getattr(layout, "m_t", 10)
    p = p_override if p_override is not None else link_success_probability(link)
    log: list | None = [] if collect_log else None
    engine = _LinkEngine(link.params, p, seed, herald_latency, False, log)

    prep = table.phi_plus_prep_time
    teleport = table.toffoli_teleport_time
    gate_times = []
    link_wait = 0.0
    t = 0.0
    for k in range(n_toffolis):
        requests = [EntanglementRequest(elu_a=3 * k + op, elu_b=-1,
                                        pairs_needed=7, request_id=op)
                    for op in range(3)]
        ions = {op: [_Ion(3 * k + op, port) for port in range(ports)
                     for _ in range(tdm)]
                for op in range(3)}
        links_end = engine.run_request_group(requests, ions, start=t)
        prep_end = t + prep
        gate_end = max(prep_end, links_end) + teleport
        link_wait += max(0.0, links_end - prep_end)
        if log is not None:
            log.append(SimEvent(gate_end, EventKind.GATE_DONE,
                                elu=k, request=k).log_line())
        gate_times.append(gate_end - t)
        t = gate_end
    return {
        "makespan_s": t,
        "gate_times_s": gate_times,
        "mean_gate_time_s": t / n_toffolis,
        "link_wait_fraction": link_wait / t if t else 0.0,
        "attempts": engine.attempts,
        "event_log": log if collect_log else None,
    }
