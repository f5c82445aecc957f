"""Deterministic discrete-event engine.

One event queue, one transmitter per node. Each node's buffer is split
into per-neighbor sub-queues served round-robin (a reserved control queue
always goes first), so backlog toward one neighbor never blocks traffic
toward the others. Congestion arises purely from queueing at shared nodes;
identical scenario and seed reproduce every metric bit for bit.
"""

from __future__ import annotations

import heapq
import itertools
import random
from collections import deque
from dataclasses import dataclass, field

from .allocator import AllocationInput, PathParams, scheme_allocation
from .discovery import ProbeFailedError, choke_probe
from .metrics import (
    path_delay,
    path_energy,
    receive_energy_per_bit,
    transmit_energy_per_bit,
)
from .model import (
    CONTROL_PRIORITY,
    DATA_PRIORITY,
    Link,
    Packet,
    RoutingError,
    ScenarioError,
    SourceSpec,
)
from .scenario import RunConfig, Scenario, build_scenario, scenario_hash


class LivelockError(RuntimeError):
    """The event count exceeded the configured cap before quiescence."""


# event ranks: scheduled faults fire before transmissions complete, which
# fire before arrivals land, which fire before watchdog timers and probes
_RANK_FAULT = 0
_RANK_SERVICE = 1
_RANK_ARRIVAL = 2
_RANK_TIMER = 3
_RANK_PROBE = 4


@dataclass
class FaultConfig:
    max_attempts: int = 10
    detection: bool = True


@dataclass
class _Flow:
    key: tuple[int, int]            # (source node, path index)
    route: list[int]
    quota: int
    tau_s: float
    next_seq: int = 0               # backlog position, 0..quota
    outstanding: int = 0
    delivered: int = 0
    dropped: int = 0
    abandoned: bool = False
    last_delivery_s: float = 0.0
    wait_total_s: float = 0.0
    wait_hops: int = 0

    @property
    def backlog(self) -> int:
        return self.quota - self.next_seq

    @property
    def resolved(self) -> int:
        return self.delivered + self.dropped

    @property
    def finished(self) -> bool:
        return self.resolved >= self.quota


class _NodeQueues:
    """Per-neighbor sub-queues plus the reserved control queue."""

    def __init__(self, owner: int, neighbors: tuple[int, ...],
                 capacity_pkts: int, fragmented: bool):
        self.owner = owner
        self.fragmented = fragmented
        self.capacity_pkts = capacity_pkts
        self.control: deque[Packet] = deque()
        self.data: dict[int, deque[Packet]] = {n: deque() for n in neighbors}
        self.blocked: set[int] = set()
        self.cursor: int | None = None  # last-served neighbor id
        self.fifo: deque[Packet] = deque()
        self.fifo_capacity = capacity_pkts * max(1, len(neighbors))

    def ensure_queue(self, neighbor: int) -> None:
        if neighbor not in self.data:
            self.data[neighbor] = deque()

    def total_data(self) -> int:
        if not self.fragmented:
            return len(self.fifo)
        return sum(len(q) for q in self.data.values())

    def total_capacity(self) -> int:
        if not self.fragmented:
            return self.fifo_capacity
        return self.capacity_pkts * max(1, len(self.data))

    def occupancy(self) -> float:
        cap = self.total_capacity()
        return self.total_data() / cap if cap else 0.0

    def has_space(self, next_hop: int) -> bool:
        if not self.fragmented:
            return len(self.fifo) < self.fifo_capacity
        self.ensure_queue(next_hop)
        return (next_hop not in self.blocked
                and len(self.data[next_hop]) < self.capacity_pkts)

    def enqueue_control(self, pkt: Packet) -> None:
        self.control.append(pkt)

    def enqueue_data(self, pkt: Packet, next_hop: int) -> tuple[bool, Packet | None]:
        """Returns (arrival accepted, evicted victim). On overflow the
        lowest-priority packet among incumbents and the arrival loses;
        ties evict the newest (largest uid)."""
        if not self.fragmented:
            if len(self.fifo) >= self.fifo_capacity:
                return False, None  # drop-tail, no priority eviction
            self.fifo.append(pkt)
            return True, None
        if next_hop not in self.data:
            raise RoutingError(
                f"node {self.owner}: next hop {next_hop} is not a neighbor")
        queue = self.data[next_hop]
        if len(queue) < self.capacity_pkts:
            queue.append(pkt)
            return True, None
        victim = pkt
        for candidate in queue:
            if (candidate.priority, -candidate.uid) < (victim.priority, -victim.uid):
                victim = candidate
        if victim is pkt:
            return False, None
        queue.remove(victim)
        queue.append(pkt)
        return True, victim

    def dispatch_next(self) -> Packet | None:
        """Control queue first; otherwise advance the round-robin cursor
        over non-empty, non-blocked sub-queues. The cursor persists."""
        if self.control:
            return self.control.popleft()
        if not self.fragmented:
            return self.fifo.popleft() if self.fifo else None
        order = sorted(self.data)
        if not order:
            return None
        if self.cursor is None or self.cursor not in self.data:
            rotated = order
        else:
            i = order.index(self.cursor) + 1
            rotated = order[i:] + order[:i]
        for neighbor in rotated:
            if neighbor in self.blocked:
                continue
            queue = self.data[neighbor]
            if queue:
                self.cursor = neighbor
                return queue.popleft()
        return None


class QueueStateView:
    """Read-only view the choke probe walks."""

    def __init__(self, engine: "Engine"):
        self._engine = engine

    def occupancy(self, node_id: int) -> float:
        return self._engine.queues[node_id].occupancy()

    def is_alive(self, node_id: int) -> bool:
        return self._engine.topology.nodes[node_id].alive


@dataclass
class RunMetrics:
    scenario_name: str
    scenario_hash: str
    seed: int
    completion_s: float = 0.0
    per_source_completion_s: dict[int, float] = field(default_factory=dict)
    per_path: dict[tuple[int, int], dict] = field(default_factory=dict)
    injected: dict[int, int] = field(default_factory=dict)
    delivered: dict[int, int] = field(default_factory=dict)
    dropped_overflow: int = 0
    dropped_fault: int = 0
    retransmissions: int = 0
    duplicates: int = 0
    energy_spent_j: float = 0.0
    energy_breakdown_j: dict[str, float] = field(default_factory=dict)
    per_source_comm_j: dict[int, float] = field(default_factory=dict)
    residual_j: dict[int, float] = field(default_factory=dict)
    initial_j: dict[int, float] = field(default_factory=dict)
    contention_history: dict[tuple[int, int], list[int]] = field(default_factory=dict)
    detections: list[dict] = field(default_factory=list)
    replacements: list[tuple[int, int]] = field(default_factory=list)
    abandoned: list[tuple[int, int, int]] = field(default_factory=list)
    event_count: int = 0
    final_time_s: float = 0.0
    trace: list[str] = field(default_factory=list)

    @property
    def total_injected(self) -> int:
        return sum(self.injected.values())

    @property
    def total_delivered(self) -> int:
        return sum(self.delivered.values())

    @property
    def total_dropped(self) -> int:
        return self.dropped_overflow + self.dropped_fault


class Engine:
    def __init__(self, scenario: Scenario, seed: int | None = None):
        self.scenario = scenario
        self.config: RunConfig = scenario.engine
        self.params = scenario.params
        self.seed = scenario.seed if seed is None else seed
        self.rng = random.Random(self.seed)
        self.topology, self.specs = build_scenario(scenario)
        self.fault = FaultConfig(
            max_attempts=self.config.max_attempts,
            detection=self._detection_enabled(),
        )
        self.metrics = RunMetrics(
            scenario_name=scenario.name,
            scenario_hash=scenario_hash(scenario),
            seed=self.seed,
        )
        self._uid = itertools.count(1)
        self._event_counter = itertools.count()
        self._events: list[tuple] = []
        self._now = 0.0
        self.queues: dict[int, _NodeQueues] = {}
        self._busy: dict[int, bool] = {}
        self._busy_time: dict[int, float] = {}
        self._pos: dict[int, int] = {}            # packet uid -> route index
        self._pkt_flow: dict[int, _Flow] = {}     # packet uid -> flow
        self._enq_time: dict[int, float] = {}     # packet uid -> enqueue time
        self._attempts: dict[tuple[int, int], int] = {}
        self._fault_time: dict[int, float] = {}
        self._fault_resolved: set[int] = set()
        self._last_arrival: dict[tuple[tuple[int, int], int], tuple[float, int]] = {}
        self._first_copy: dict[tuple[int, int], float] = {}
        # beacon uid -> (target, origin, suspect, tried targets)
        self._beacons: dict[int, tuple[int, int, int, set[int]]] = {}
        self._source_seq: dict[int, itertools.count] = {}
        self.flows: dict[tuple[int, int], _Flow] = {}
        self.replaced: dict[int, int] = {}
        for key in ("tx_data", "rx_data", "tx_control", "rx_control",
                    "sensing", "idle"):
            self.metrics.energy_breakdown_j[key] = 0.0
        self._init_queues()
        self._init_flows()

    # ------------------------------------------------------------------ setup

    def _detection_enabled(self) -> bool:
        if self.config.fault_detection == "on":
            return True
        if self.config.fault_detection == "off":
            return False
        return bool(self.scenario.faults)

    def _init_queues(self) -> None:
        s_bits = self.params.packet_size_bits
        for nid, node in self.topology.nodes.items():
            neighbors = self.topology.neighbors(nid)
            n_i = max(1, len(neighbors))
            if node.queue_capacity_bits is None:
                cap = self.config.queue_packets_per_subqueue
            else:
                cap = int(node.queue_capacity_bits // (n_i * s_bits))
                if cap < 1:
                    raise ScenarioError(
                        f"node {nid}: queue capacity below one packet per sub-queue")
            self.queues[nid] = _NodeQueues(nid, neighbors, cap, self.config.fragmented)
            self._busy[nid] = False
            self._busy_time[nid] = 0.0

    def _allocate(self, spec: SourceSpec) -> list[int]:
        if self.config.replicate:
            return [spec.packets] * len(spec.paths)
        inp = AllocationInput(
            params=self.params,
            total_packets=spec.packets,
            paths=[PathParams(p.hops, p.tau_s, p.contention) for p in spec.paths],
            source_sink_dist_m=spec.source_sink_dist_m,
        )
        return scheme_allocation(self.config.scheme, inp).quotas

    def _init_flows(self) -> None:
        view = QueueStateView(self)
        for spec in self.specs:
            # probe before distribution; on the idle start network this is 0
            for idx, path in enumerate(spec.paths):
                path.contention = choke_probe(view, path)
                self.metrics.contention_history.setdefault(
                    (spec.node_id, idx), []).append(path.contention)
            quotas = self._allocate(spec)
            self.metrics.injected[spec.node_id] = sum(quotas)
            self.metrics.delivered[spec.node_id] = 0
            self.metrics.per_source_comm_j[spec.node_id] = 0.0
            self._source_seq[spec.node_id] = itertools.count()
            for idx, (path, quota) in enumerate(zip(spec.paths, quotas)):
                flow = _Flow(key=(spec.node_id, idx), route=list(path.nodes),
                             quota=quota, tau_s=path.tau_s)
                self.flows[flow.key] = flow
                self.metrics.per_path[flow.key] = {
                    "route": tuple(path.nodes),
                    "hops": path.hops,
                    "quota": quota,
                    "tau_s": path.tau_s,
                    "model_delay_s": path_delay(quota, path.tau_s, path.hops),
                    "model_energy_j": path_energy(
                        self.params, quota, path.hops, spec.source_sink_dist_m),
                    "sim_delay_s": 0.0,
                    "delivered": 0,
                    "dropped": 0,
                    "mean_wait_s": 0.0,
                }

    # ------------------------------------------------------------- primitives

    def _push(self, time: float, rank: int, node: int, kind: str, payload: tuple) -> None:
        heapq.heappush(self._events, (time, rank, node, next(self._event_counter),
                                      kind, payload))

    def _trace(self, kind: str, node: int, pkt_uid: int) -> None:
        if self.config.record_trace:
            self.metrics.trace.append(f"{self._now:.9f},{kind},{node},{pkt_uid}")

    def _debit(self, node_id: int, joules: float, bucket: str,
               source: int | None = None) -> None:
        node = self.topology.nodes[node_id]
        node.residual_energy_j -= joules
        self.metrics.energy_spent_j += joules
        self.metrics.energy_breakdown_j[bucket] += joules
        if source is not None:
            self.metrics.per_source_comm_j[source] = (
                self.metrics.per_source_comm_j.get(source, 0.0) + joules)
        if node.residual_energy_j < 0 and node.alive:
            self._node_failure(node_id)

    def _tx_energy(self, sender: int, receiver: int, size_bits: float) -> float:
        link = self.topology.link(sender, receiver)
        if self.config.energy_mode == "per_packet":
            return self.config.tx_power_w * (size_bits / link.speed_bps)
        dist = self.topology.distance(sender, receiver)
        return transmit_energy_per_bit(self.params, dist) * size_bits

    def _rx_energy(self, sender: int, receiver: int, size_bits: float) -> float:
        if self.config.energy_mode == "per_packet":
            link = self.topology.link(sender, receiver)
            return self.config.rx_power_w * (size_bits / link.speed_bps)
        return receive_energy_per_bit(self.params) * size_bits

    # -------------------------------------------------------------- injection

    def _inject(self, flow: _Flow) -> bool:
        """Move one backlog packet into the source's first-hop sub-queue."""
        if flow.backlog <= 0 or flow.abandoned:
            return False
        source = flow.route[0]
        if not self.topology.nodes[source].alive:
            return False
        next_hop = flow.route[1]
        queues = self.queues[source]
        if not queues.has_space(next_hop):
            return False
        seq = (flow.next_seq if self.config.replicate
               else next(self._source_seq[flow.key[0]]))
        pkt = Packet(kind="data", priority=DATA_PRIORITY, source=flow.key[0],
                     destination=flow.route[-1], flow_key=flow.key, seq=seq,
                     size_bits=self.params.packet_size_bits, uid=next(self._uid))
        flow.next_seq += 1
        flow.outstanding += 1
        self._pos[pkt.uid] = 0
        self._pkt_flow[pkt.uid] = flow
        self._enq_time[pkt.uid] = self._now
        accepted, victim = queues.enqueue_data(pkt, next_hop)
        assert accepted and victim is None
        self._trace("inject", source, pkt.uid)
        return True

    def _fill_source(self, flow: _Flow) -> None:
        limit = self.config.window
        while flow.backlog > 0 and (limit is None or flow.outstanding < limit):
            if not self._inject(flow):
                break

    # ------------------------------------------------------------ packet fate

    def _packet_resolved(self, pkt: Packet, delivered: bool, cause: str) -> None:
        flow = self._pkt_flow.pop(pkt.uid, None)
        self._pos.pop(pkt.uid, None)
        self._enq_time.pop(pkt.uid, None)
        if flow is None:
            return
        flow.outstanding -= 1
        stats = self.metrics.per_path[flow.key]
        if delivered:
            flow.delivered += 1
            flow.last_delivery_s = self._now
            stats["delivered"] += 1
            stats["sim_delay_s"] = self._now
            self.metrics.delivered[flow.key[0]] += 1
            copy_key = (flow.key[0], pkt.seq)
            if copy_key in self._first_copy:
                self.metrics.duplicates += 1
            else:
                self._first_copy[copy_key] = self._now
        else:
            flow.dropped += 1
            stats["dropped"] += 1
            if cause == "overflow":
                self.metrics.dropped_overflow += 1
            else:
                self.metrics.dropped_fault += 1
        self._fill_source(flow)
        source = flow.route[0]
        if not self._busy[source] and self.topology.nodes[source].alive:
            self._try_start(source)

    # ---------------------------------------------------------------- service

    def _try_start(self, node_id: int) -> None:
        node = self.topology.nodes[node_id]
        if self._busy[node_id] or not node.alive:
            return
        queues = self.queues[node_id]
        pkt = queues.dispatch_next()
        if pkt is None:
            return
        if pkt.kind == "data":
            flow = self._pkt_flow[pkt.uid]
            next_hop = flow.route[self._pos[pkt.uid] + 1]
            enq = self._enq_time.pop(pkt.uid, None)
            if enq is not None:
                flow.wait_total_s += self._now - enq
                flow.wait_hops += 1
            if self._pos[pkt.uid] == 0:
                self._fill_source(flow)
        else:
            next_hop = self._beacons[pkt.uid][0]
        link = self.topology.link(node_id, next_hop)
        occupancy = pkt.size_bits / link.speed_bps
        bucket = "tx_data" if pkt.kind == "data" else "tx_control"
        source = pkt.source if pkt.kind == "data" else None
        self._debit(node_id, self._tx_energy(node_id, next_hop, pkt.size_bits),
                    bucket, source)
        self._busy[node_id] = True
        self._busy_time[node_id] += occupancy
        self._trace("service", node_id, pkt.uid)
        self._push(self._now + occupancy, _RANK_SERVICE, node_id, "service_end",
                   (pkt, next_hop))

    def _on_service_end(self, node_id: int, pkt: Packet, next_hop: int) -> None:
        self._busy[node_id] = False
        sender = self.topology.nodes[node_id]
        link = self.topology.link(node_id, next_hop)
        lost = (self.config.loss_prob > 0.0
                and self.rng.random() < self.config.loss_prob)
        if not sender.alive:
            # the transmitter died mid-send; the frame is gone
            if pkt.kind == "data":
                self._packet_resolved(pkt, delivered=False, cause="fault")
            else:
                self._beacons.pop(pkt.uid, None)
        elif not self.topology.nodes[next_hop].alive or not link.up or lost:
            self._on_attempt_failed(node_id, next_hop, pkt)
        else:
            self._push(self._now + link.delay_s, _RANK_ARRIVAL, next_hop,
                       "arrival", (pkt, node_id))
        self._try_start(node_id)

    def _on_attempt_failed(self, node_id: int, next_hop: int, pkt: Packet) -> None:
        self.metrics.retransmissions += 1
        if pkt.kind != "data":
            self._retry_beacon(pkt)
            return
        key = (node_id, next_hop)
        self._attempts[key] = self._attempts.get(key, 0) + 1
        queues = self.queues[node_id]
        flow = self._pkt_flow[pkt.uid]
        # requeue under the route's current next hop, which may already be
        # a replacement node rather than the hop just attempted
        requeue_hop = flow.route[self._pos[pkt.uid] + 1]
        if queues.fragmented:
            queues.ensure_queue(requeue_hop)
            queues.data[requeue_hop].appendleft(pkt)  # retry keeps head position
        else:
            queues.fifo.appendleft(pkt)
        self._enq_time.setdefault(pkt.uid, self._now)
        if (requeue_hop == next_hop
                and self._attempts[key] >= self.fault.max_attempts):
            if queues.fragmented:
                queues.blocked.add(next_hop)
            self._start_sender_check(node_id, next_hop)

    def _on_arrival(self, node_id: int, pkt: Packet, sender: int) -> None:
        node = self.topology.nodes[node_id]
        self._trace("arrival", node_id, pkt.uid)
        if not node.alive:
            if pkt.kind == "data":
                self._packet_resolved(pkt, delivered=False, cause="fault")
            else:
                self._beacons.pop(pkt.uid, None)
            return
        bucket = "rx_data" if pkt.kind == "data" else "rx_control"
        source = pkt.source if pkt.kind == "data" else None
        self._debit(node_id, self._rx_energy(sender, node_id, pkt.size_bits),
                    bucket, source)
        self._busy_time[node_id] += pkt.size_bits / self.topology.link(
            sender, node_id).speed_bps
        if pkt.kind != "data":
            self._on_beacon_arrived(pkt)
            return
        flow = self._pkt_flow[pkt.uid]
        self._pos[pkt.uid] += 1
        pos = self._pos[pkt.uid]
        self._attempts.pop((sender, node_id), None)  # success resets the counter
        if node_id == flow.route[-1]:
            self._trace("deliver", node_id, pkt.uid)
            self._packet_resolved(pkt, delivered=True, cause="")
            return
        if self.fault.detection:
            self._arm_receiver_timer(flow, node_id, pkt.seq)
        next_hop = flow.route[pos + 1]
        queues = self.queues[node_id]
        if queues.fragmented:
            queues.ensure_queue(next_hop)
        accepted, victim = queues.enqueue_data(pkt, next_hop)
        if victim is not None:
            self._trace("drop", node_id, victim.uid)
            self._packet_resolved(victim, delivered=False, cause="overflow")
        if not accepted:
            self._trace("drop", node_id, pkt.uid)
            self._packet_resolved(pkt, delivered=False, cause="overflow")
        else:
            self._enq_time[pkt.uid] = self._now
        self._try_start(node_id)

    # ------------------------------------------------------------ fault logic

    def _node_failure(self, node_id: int) -> None:
        node = self.topology.nodes[node_id]
        if not node.alive:
            return
        node.alive = False
        self._fault_time[node_id] = self._now
        self._trace("fault", node_id, 0)
        queues = self.queues[node_id]
        doomed: list[Packet] = []
        if queues.fragmented:
            for q in queues.data.values():
                doomed.extend(q)
                q.clear()
        else:
            doomed.extend(queues.fifo)
            queues.fifo.clear()
        for pkt in queues.control:
            self._beacons.pop(pkt.uid, None)
        queues.control.clear()
        for pkt in doomed:
            self._packet_resolved(pkt, delivered=False, cause="fault")
        # data held at a dead source is gone with it
        for flow in self.flows.values():
            if flow.route[0] == node_id and flow.backlog > 0 and not flow.abandoned:
                self._discard_backlog(flow)

    def _discard_backlog(self, flow: _Flow) -> None:
        lost = flow.backlog
        if lost <= 0:
            return
        flow.next_seq = flow.quota
        flow.dropped += lost
        self.metrics.per_path[flow.key]["dropped"] += lost
        self.metrics.dropped_fault += lost

    def _arm_receiver_timer(self, flow: _Flow, node_id: int, seq: int) -> None:
        if flow.route.index(node_id) < 1:
            return
        self._last_arrival[(flow.key, node_id)] = (self._now, seq)
        if flow.backlog == 0 and flow.outstanding <= 1:
            return  # nothing more will come this way
        # expected next arrival: one full per-packet cycle under windowed
        # transfer, one service slot otherwise, plus the watchdog allowance
        cycle = (len(flow.route) - 1) * flow.tau_s if self.config.window else flow.tau_s
        allowance = self.fault.max_attempts * flow.tau_s
        self._push(self._now + cycle + allowance, _RANK_TIMER, node_id,
                   "timer", (flow.key, seq, self._now + cycle))

    def _on_timer(self, node_id: int, flow_key: tuple[int, int], seq: int,
                  expected_s: float) -> None:
        flow = self.flows[flow_key]
        if flow.finished or flow.abandoned:
            return
        _last_time, last_seq = self._last_arrival.get(
            (flow_key, node_id), (0.0, -1))
        if last_seq != seq:
            return  # newer traffic arrived; no silence to act on
        if not self.topology.nodes[node_id].alive:
            return
        try:
            pos = flow.route.index(node_id)
        except ValueError:
            return
        upstream = flow.route[pos - 1]
        if upstream in self._fault_resolved or self.topology.nodes[upstream].alive:
            return
        self.metrics.detections.append({
            "kind": "receiver_timer", "failed": upstream, "detector": node_id,
            "time_s": self._now, "latency_s": self._now - expected_s,
            "since_fault_s": self._now - self._fault_time.get(upstream, self._now),
        })
        self._resolve_fault(detector=node_id, failed=upstream)

    def _start_sender_check(self, node_id: int, suspect: int) -> None:
        """Self-check: transmit a beacon to a third neighbor. Success means
        the suspect hop (node or link) is at fault and this node resolves."""
        if suspect in self._fault_resolved or not self.fault.detection:
            return
        self._send_beacon(node_id, suspect, tried=set())

    def _send_beacon(self, origin: int, suspect: int, tried: set[int]) -> bool:
        candidates = [n for n in self.topology.neighbors(origin)
                      if n != suspect and n not in tried
                      and self.topology.nodes[n].alive]
        if not candidates:
            return False  # no third neighbor; the downstream watchdog decides
        target = candidates[0]
        pkt = Packet(kind="beacon", priority=CONTROL_PRIORITY, source=origin,
                     destination=target, flow_key=(origin, -1), seq=0,
                     size_bits=self.config.control_size_bits, uid=next(self._uid))
        self._beacons[pkt.uid] = (target, origin, suspect, tried)
        self.queues[origin].enqueue_control(pkt)
        self._try_start(origin)
        return True

    def _retry_beacon(self, pkt: Packet) -> None:
        target, origin, suspect, tried = self._beacons.pop(pkt.uid)
        self._send_beacon(origin, suspect, tried | {target})

    def _on_beacon_arrived(self, pkt: Packet) -> None:
        _target, origin, suspect, _tried = self._beacons.pop(pkt.uid)
        if suspect in self._fault_resolved:
            return
        self.metrics.detections.append({
            "kind": "sender_beacon", "failed": suspect, "detector": origin,
            "time_s": self._now,
            "latency_s": self._now - self._fault_time.get(suspect, self._now),
            "since_fault_s": self._now - self._fault_time.get(suspect, self._now),
        })
        self._resolve_fault(detector=origin, failed=suspect)

    def _nearest_redundant(self, detector: int) -> int | None:
        best = None
        best_key = None
        for nid, node in self.topology.nodes.items():
            if node.is_redundant and node.alive:
                key = (self.topology.distance(detector, nid), nid)
                if best_key is None or key < best_key:
                    best, best_key = nid, key
        return best

    def _substitution_fits(self, flow: _Flow, failed: int, substitute: int) -> bool:
        idx = flow.route.index(failed)
        before = flow.route[idx - 1] if idx > 0 else None
        after = flow.route[idx + 1] if idx + 1 < len(flow.route) else None
        return all(other is None or self.topology.are_adjacent(other, substitute)
                   for other in (before, after))

    def _resolve_fault(self, detector: int, failed: int) -> None:
        if failed in self._fault_resolved:
            return
        self._fault_resolved.add(failed)
        affected = [f for f in self.flows.values()
                    if failed in f.route and not f.finished and not f.abandoned]
        substitute = self._nearest_redundant(detector)
        usable = (substitute is not None
                  and all(self._substitution_fits(f, failed, substitute)
                          for f in affected))
        if not usable:
            for flow in affected:
                self._abandon_flow(flow)
            return
        self.topology.nodes[substitute].is_redundant = False
        self.replaced[failed] = substitute
        self.metrics.replacements.append((failed, substitute))
        self._trace("replace", substitute, 0)
        for flow in affected:
            flow.route[flow.route.index(failed)] = substitute
        for nid in sorted(self.queues):
            queues = self.queues[nid]
            if queues.fragmented and failed in queues.data:
                pending = queues.data.pop(failed)
                queues.blocked.discard(failed)
                if pending:
                    queues.ensure_queue(substitute)
                    queues.data[substitute].extend(pending)
                if queues.cursor == failed:
                    queues.cursor = substitute
            self._attempts.pop((nid, failed), None)
        for flow in affected:
            self._fill_source(flow)
        for nid in sorted(self.queues):
            if not self._busy[nid] and self.topology.nodes[nid].alive:
                self._try_start(nid)

    def _abandon_flow(self, flow: _Flow) -> None:
        flow.abandoned = True
        undeliverable = flow.backlog
        self._discard_backlog(flow)
        # flush whatever of this flow is still parked in sub-queues
        for nid in sorted(self.queues):
            queues = self.queues[nid]
            pools = (list(queues.data.values()) if queues.fragmented
                     else [queues.fifo])
            for pool in pools:
                stuck = [p for p in pool
                         if p.kind == "data" and p.flow_key == flow.key]
                for pkt in stuck:
                    pool.remove(pkt)
                    self._packet_resolved(pkt, delivered=False, cause="fault")
        self.metrics.abandoned.append((flow.key[0], flow.key[1], undeliverable))

    # ------------------------------------------------------------------- run

    def choke_view(self) -> QueueStateView:
        return QueueStateView(self)

    def _on_probe(self) -> None:
        view = QueueStateView(self)
        for spec in self.specs:
            for idx, path in enumerate(spec.paths):
                try:
                    count = choke_probe(view, path)
                except ProbeFailedError:
                    continue  # stale route; skip this sample
                self.metrics.contention_history[(spec.node_id, idx)].append(count)

    def run(self) -> RunMetrics:
        for fault in self.scenario.faults:
            node = fault.node if fault.node is not None else 0
            self._push(fault.time_s, _RANK_FAULT, node, "fault",
                       (fault.node, fault.link))
        for when in self.config.probe_times:
            self._push(when, _RANK_PROBE, 0, "probe", ())
        for key in sorted(self.flows):
            self._fill_source(self.flows[key])
        for nid in sorted(self.queues):
            self._try_start(nid)
        processed = 0
        while self._events:
            time, _rank, node, _count, kind, payload = heapq.heappop(self._events)
            self._now = time
            processed += 1
            if processed > self.config.max_events:
                raise LivelockError(
                    f"exceeded {self.config.max_events} events at t={time:.6f}s; "
                    f"{sum(f.resolved for f in self.flows.values())} packets resolved")
            if kind == "service_end":
                self._on_service_end(node, *payload)
            elif kind == "arrival":
                self._on_arrival(node, *payload)
            elif kind == "timer":
                self._on_timer(node, *payload)
            elif kind == "probe":
                self._on_probe()
            elif kind == "fault":
                fail_node, fail_link = payload
                if fail_node is not None:
                    self._node_failure(fail_node)
                else:
                    a, b = min(fail_link), max(fail_link)
                    link = self.topology.link(a, b)
                    self.topology.links[(a, b)] = Link(
                        (a, b), link.speed_bps, link.delay_s, up=False)
        self.metrics.event_count = processed
        self.metrics.final_time_s = self._now
        self._finalize()
        return self.metrics

    def _sweep_unresolved(self) -> None:
        """Account for traffic stranded by unrecovered faults so that
        injected = delivered + dropped holds at quiescence."""
        for nid in sorted(self.queues):
            queues = self.queues[nid]
            pools = (list(queues.data.values()) if queues.fragmented
                     else [queues.fifo])
            for pool in pools:
                while pool:
                    pkt = pool.popleft()
                    if pkt.kind == "data":
                        self._packet_resolved(pkt, delivered=False, cause="fault")
        for key in sorted(self.flows):
            flow = self.flows[key]
            if flow.backlog > 0 and not self._inject_possible(flow):
                self._discard_backlog(flow)

    def _inject_possible(self, flow: _Flow) -> bool:
        return (not flow.abandoned
                and self.topology.nodes[flow.route[0]].alive
                and flow.route[1] not in self.queues[flow.route[0]].blocked)

    def _finalize(self) -> None:
        self._sweep_unresolved()
        duration = self._now
        for nid in sorted(self.topology.nodes):
            node = self.topology.nodes[nid]
            alive_span = duration if node.alive else self._fault_time.get(nid, duration)
            sensing = self.params.sensing_w * alive_span
            node.residual_energy_j -= sensing
            self.metrics.energy_spent_j += sensing
            self.metrics.energy_breakdown_j["sensing"] += sensing
            if self.config.include_idle:
                idle_span = max(0.0, alive_span - self._busy_time[nid])
                idle = self.config.idle_power_w * idle_span
                node.residual_energy_j -= idle
                self.metrics.energy_spent_j += idle
                self.metrics.energy_breakdown_j["idle"] += idle
            self.metrics.residual_j[nid] = node.residual_energy_j
            self.metrics.initial_j[nid] = self.params.initial_energy_j
        for key in sorted(self.flows):
            flow = self.flows[key]
            stats = self.metrics.per_path[key]
            if flow.wait_hops:
                stats["mean_wait_s"] = flow.wait_total_s / flow.wait_hops
        if self.config.replicate:
            per_source: dict[int, float] = {}
            for (source, _seq), t in self._first_copy.items():
                per_source[source] = max(per_source.get(source, 0.0), t)
            self.metrics.per_source_completion_s = {
                s.node_id: per_source.get(s.node_id, 0.0) for s in self.specs}
        else:
            self.metrics.per_source_completion_s = {
                s.node_id: max((self.flows[(s.node_id, i)].last_delivery_s
                                for i in range(len(s.paths))), default=0.0)
                for s in self.specs}
        self.metrics.completion_s = max(
            self.metrics.per_source_completion_s.values(), default=0.0)


def run_scenario(scenario: Scenario, seed: int | None = None) -> RunMetrics:
    return Engine(scenario, seed=seed).run()


def service_time(size_bits: float, speed_bps: float, link_delay_s: float = 0.0) -> float:
    """Completion delay for one packet over one idle hop."""
    return size_bits / speed_bps + link_delay_s


__all__ = [
    "Engine", "FaultConfig", "LivelockError", "QueueStateView", "RunMetrics",
    "run_scenario", "service_time",
]
