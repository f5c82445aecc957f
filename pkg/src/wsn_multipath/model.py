"""Domain types shared by every other module: radio/energy parameters,
nodes, links, topology, paths and per-source routing specs.

Everything here is immutable after construction and safe to share across
concurrent simulation runs; the engine keeps its own mutable per-run state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class RangeExceededError(DomainError):
    """A hop distance exceeds the radio range."""


class InvalidPathError(ValueError):
    def __init__(self, message: str, hop_index: int | None = None):
        super().__init__(message)
        self.hop_index = hop_index


class DuplicateNodeError(InvalidPathError):
    pass


class ConnectivityError(ValueError):
    def __init__(self, message: str, source: int | None = None):
        super().__init__(message)
        self.source = source


class UnreachableError(ValueError):
    pass


class RoutingError(ValueError):
    pass


class ScenarioError(ValueError):
    """A scenario file or its contents are invalid."""


CONTROL_PRIORITY = 255
DATA_PRIORITY = 1


@dataclass(frozen=True)
class NetworkParams:
    """Global radio, energy and timing constants.

    Units: powers in J/s (W), times in seconds, distances in meters,
    packet size in bits. ``tx_amp_w_per_mk`` is the distance-dependent
    transmit term coefficient, in J/s per m**path_loss_exp.
    """

    tx_electronics_w: float = 1.024e-3
    tx_amp_w_per_mk: float = 1.0e-12
    path_loss_exp: float = 2.0
    rx_electronics_w: float = 8.192e-4
    tx_bit_time_s: float = 2.0e-5
    rx_bit_time_s: float = 2.0e-5
    sensing_w: float = 8.12e-5
    packet_size_bits: float = 1000.0
    radio_range_m: float = 30.0
    initial_energy_j: float = 23760.0

    def __post_init__(self):
        for name in (
            "tx_electronics_w", "tx_amp_w_per_mk", "rx_electronics_w",
            "tx_bit_time_s", "rx_bit_time_s", "sensing_w",
            "packet_size_bits", "radio_range_m", "initial_energy_j",
        ):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be strictly positive, got {value!r}")
        if not 2.0 <= self.path_loss_exp <= 4.0:
            raise DomainError(
                f"path_loss_exp must lie in [2.0, 4.0], got {self.path_loss_exp!r}")


@dataclass
class Node:
    id: int
    position: tuple[float, float]
    residual_energy_j: float = 23760.0
    queue_capacity_bits: float | None = None  # M_i; engine fills the default
    neighbor_count: int = 0
    is_redundant: bool = False
    alive: bool = True


@dataclass(frozen=True)
class Link:
    endpoints: tuple[int, int]  # ordered (low id, high id)
    speed_bps: float = 50000.0
    delay_s: float = 0.0
    up: bool = True

    def __post_init__(self):
        if self.speed_bps <= 0:
            raise DomainError(f"link speed must be positive, got {self.speed_bps!r}")
        if self.delay_s < 0:
            raise DomainError(f"link delay must be >= 0, got {self.delay_s!r}")


@dataclass
class PathInfo:
    """An ordered source-to-sink node sequence with its per-path figures."""

    nodes: tuple[int, ...]
    hops: int
    tau_s: float = 0.0          # per-packet per-hop latency
    hop_dist_m: float = 0.0     # straight-line source-sink distance / hops
    contention: int = 0         # nodes flagged by the most recent choke probe
    queue_wait_s: float = 0.0   # measured mean per-hop queueing delay

    @property
    def interior(self) -> frozenset[int]:
        return frozenset(self.nodes[1:-1])


@dataclass
class SourceSpec:
    node_id: int
    packets: int
    paths: list[PathInfo] = field(default_factory=list)
    source_sink_dist_m: float = 0.0

    @property
    def h_avg(self) -> float:
        return sum(p.hops for p in self.paths) / len(self.paths)

    @property
    def tau_avg(self) -> float:
        return sum(p.tau_s for p in self.paths) / len(self.paths)

    def check_locally_disjoint(self) -> None:
        """Paths of one source may share only their endpoints."""
        for i, a in enumerate(self.paths):
            for b in self.paths[i + 1:]:
                shared = a.interior & b.interior
                if shared:
                    raise InvalidPathError(
                        f"source {self.node_id}: paths {a.nodes} and {b.nodes} "
                        f"share interior nodes {sorted(shared)}")


@dataclass(frozen=True)
class Packet:
    kind: str                   # data | hello | reply | choke | beacon | notify
    priority: int
    source: int
    destination: int
    flow_key: tuple[int, int]   # (source id, path index)
    seq: int
    size_bits: float
    uid: int = 0                # global injection order; larger = newer

    def __post_init__(self):
        if self.kind != "data" and self.priority != CONTROL_PRIORITY:
            raise DomainError("control packets must carry the maximum priority")


class Topology:
    """Immutable radio-range adjacency over a fixed node deployment."""

    def __init__(self, nodes: dict[int, Node], radio_range_m: float,
                 links: dict[tuple[int, int], Link]):
        self.nodes = nodes
        self.radio_range_m = radio_range_m
        self.links = links
        self._adjacency: dict[int, tuple[int, ...]] = {}
        adj: dict[int, set[int]] = {nid: set() for nid in nodes}
        for a, b in links:
            adj[a].add(b)
            adj[b].add(a)
        for nid in nodes:
            self._adjacency[nid] = tuple(sorted(adj[nid]))
            nodes[nid].neighbor_count = len(self._adjacency[nid])

    def neighbors(self, node_id: int) -> tuple[int, ...]:
        return self._adjacency[node_id]

    def are_adjacent(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.links

    def link(self, a: int, b: int) -> Link:
        try:
            return self.links[(min(a, b), max(a, b))]
        except KeyError:
            raise RoutingError(f"no link between {a} and {b}") from None

    def distance(self, a: int, b: int) -> float:
        (ax, ay), (bx, by) = self.nodes[a].position, self.nodes[b].position
        return math.hypot(ax - bx, ay - by)

    def alive_ids(self) -> list[int]:
        return sorted(n for n, node in self.nodes.items() if node.alive)

    def reachable_from(self, start: int) -> set[int]:
        seen = {start}
        frontier = [start]
        while frontier:
            nxt = []
            for n in frontier:
                for m in self._adjacency[n]:
                    if m not in seen and self.nodes[m].alive:
                        seen.add(m)
                        nxt.append(m)
            frontier = nxt
        return seen


def build_topology(positions: dict[int, tuple[float, float]],
                   radio_range_m: float,
                   link_speed_bps: float = 50000.0,
                   link_delay_s: float = 0.0,
                   link_overrides: dict[tuple[int, int], tuple[float, float]] | None = None,
                   sources: tuple[int, ...] = (),
                   sink: int | None = None,
                   redundant: tuple[int, ...] = (),
                   initial_energy_j: float = 23760.0) -> Topology:
    """Build the adjacency containing exactly the node pairs within radio range.

    Raises ConnectivityError naming the offending source if the sink is
    declared and unreachable from any declared source.
    """
    if radio_range_m <= 0:
        raise DomainError("radio range must be positive")
    for nid, (x, y) in positions.items():
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DomainError(f"node {nid} has a non-finite position")
    nodes = {
        nid: Node(id=nid, position=(float(x), float(y)),
                  residual_energy_j=initial_energy_j,
                  is_redundant=nid in set(redundant))
        for nid, (x, y) in positions.items()
    }
    overrides = link_overrides or {}
    links: dict[tuple[int, int], Link] = {}
    ids = sorted(positions)
    for i, a in enumerate(ids):
        ax, ay = positions[a]
        for b in ids[i + 1:]:
            bx, by = positions[b]
            if math.hypot(ax - bx, ay - by) <= radio_range_m:
                speed, delay = overrides.get((a, b), (link_speed_bps, link_delay_s))
                links[(a, b)] = Link((a, b), speed, delay)
    topo = Topology(nodes, radio_range_m, links)
    if sink is not None:
        for src in sources:
            if src == sink:
                continue
            if sink not in topo.reachable_from(src):
                raise ConnectivityError(
                    f"sink {sink} is unreachable from source {src}", source=src)
    return topo


def validate_path(topology: Topology, sequence: tuple[int, ...] | list[int]) -> PathInfo:
    """Check a node sequence against the topology and return its PathInfo.

    Rejects repeated nodes and non-adjacent consecutive pairs; the raised
    error carries the index of the offending hop.
    """
    seq = tuple(sequence)
    if len(seq) < 2:
        raise InvalidPathError(f"a path needs at least one hop, got {seq}")
    seen: set[int] = set()
    for n in seq:
        if n not in topology.nodes:
            raise InvalidPathError(f"unknown node {n} in path {seq}")
        if n in seen:
            raise DuplicateNodeError(f"node {n} repeats in path {seq}")
        seen.add(n)
    for i in range(len(seq) - 1):
        if not topology.are_adjacent(seq[i], seq[i + 1]):
            raise InvalidPathError(
                f"nodes {seq[i]} and {seq[i + 1]} are not adjacent (hop {i})",
                hop_index=i)
    return PathInfo(nodes=seq, hops=len(seq) - 1)


def path_tau(topology: Topology, path: PathInfo, packet_size_bits: float,
             queue_wait_s: float = 0.0) -> float:
    """Mean per-hop latency along a path from its link parameters."""
    total = 0.0
    for a, b in zip(path.nodes, path.nodes[1:]):
        link = topology.link(a, b)
        total += packet_size_bits / link.speed_bps + link.delay_s
    return total / path.hops + queue_wait_s


def annotate_source(topology: Topology, spec: SourceSpec, sink: int,
                    params: NetworkParams) -> SourceSpec:
    """Fill per-path tau and hop distances for a source's path set."""
    dist = topology.distance(spec.node_id, sink)
    for p in spec.paths:
        p.tau_s = path_tau(topology, p, params.packet_size_bits)
        p.hop_dist_m = dist / p.hops
    spec.source_sink_dist_m = dist
    return spec


__all__ = [
    "CONTROL_PRIORITY", "DATA_PRIORITY",
    "ConnectivityError", "DomainError", "DuplicateNodeError",
    "InvalidPathError", "Link", "NetworkParams", "Node", "Packet",
    "PathInfo", "RangeExceededError", "RoutingError", "ScenarioError",
    "SourceSpec", "Topology", "UnreachableError",
    "annotate_source", "build_topology", "path_tau", "validate_path",
    "replace",
]
