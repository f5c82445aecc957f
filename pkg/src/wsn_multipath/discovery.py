"""Routing-table construction: locally node-disjoint path discovery,
round-trip-time latency estimation and choke-packet contention probing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    DomainError,
    PathInfo,
    Topology,
    UnreachableError,
    validate_path,
)


class ProbeFailedError(ValueError):
    """A choke probe crossed a failed node; the routing table is stale."""


def _lex_shortest_path(topology: Topology, source: int, sink: int,
                       blocked: set[int]) -> tuple[int, ...] | None:
    """Hop-count shortest path, lexicographically smallest node sequence.

    BFS from the sink gives every node's distance-to-sink; the path is then
    reconstructed greedily from the source, always stepping to the
    lowest-id neighbor one level closer. `blocked` nodes are unusable as
    interior nodes.
    """
    usable = lambda n: (n == source or n == sink
                        or (n not in blocked and topology.nodes[n].alive))
    dist = {sink: 0}
    frontier = [sink]
    while frontier:
        nxt = []
        for n in frontier:
            for m in topology.neighbors(n):
                if m not in dist and usable(m):
                    dist[m] = dist[n] + 1
                    nxt.append(m)
        frontier = nxt
    if source not in dist:
        return None
    path = [source]
    current = source
    while current != sink:
        step = min(m for m in topology.neighbors(current)
                   if usable(m) and dist.get(m) == dist[current] - 1)
        path.append(step)
        current = step
    return tuple(path)


def discover_paths(topology: Topology, source: int, sink: int,
                   max_paths: int | None = None) -> list[PathInfo]:
    """Interior-node-disjoint paths by iterated shortest-path extraction.

    Each round takes the hop-count shortest path (lowest-node-id tie-break)
    and removes its interior nodes before the next round. Path count never
    exceeds the source degree; at least one path must exist.
    """
    if source == sink:
        raise DomainError("source and sink must differ")
    if not (topology.nodes[source].alive and topology.nodes[sink].alive):
        raise DomainError("source and sink must both be alive")
    limit = len(topology.neighbors(source))
    if max_paths is not None:
        limit = min(limit, max_paths)
    blocked: set[int] = set()
    found: list[PathInfo] = []
    while len(found) < limit:
        seq = _lex_shortest_path(topology, source, sink, blocked)
        if seq is None:
            break
        found.append(validate_path(topology, seq))
        blocked.update(seq[1:-1])
    if not found:
        raise UnreachableError(f"no path from {source} to {sink}")
    return found


def estimate_tau(hello_send_s: float, reply_receive_s: float) -> float:
    """One-way per-path latency from a hello/reply round trip: half the
    measured interval."""
    if reply_receive_s < hello_send_s:
        raise DomainError(
            f"reply at {reply_receive_s} precedes hello at {hello_send_s}")
    return (reply_receive_s - hello_send_s) / 2.0


def estimate_tau_per_hop(hello_send_s: float, reply_receive_s: float,
                         hops: int) -> float:
    """Per-hop latency: the one-way figure divided by the hop count."""
    if hops < 1:
        raise DomainError("hops must be >= 1")
    return estimate_tau(hello_send_s, reply_receive_s) / hops


def choke_probe(queue_state, path: PathInfo, threshold: float = 0.5) -> int:
    """Count of nodes along the path whose aggregate queue occupancy
    exceeds `threshold`.

    The probe visits every node after the probing source, sink included,
    so the count lies in [0, hops + 1]. `queue_state` must expose
    ``occupancy(node_id) -> float`` and ``is_alive(node_id) -> bool``.
    """
    count = 0
    for node in path.nodes[1:]:
        if not queue_state.is_alive(node):
            raise ProbeFailedError(
                f"node {node} on path {path.nodes} has failed")
        if queue_state.occupancy(node) > threshold:
            count += 1
    return count


@dataclass
class TableEvent:
    kind: str  # initial_join | node_failure | link_failure | node_joined
    count_since_build: int = 1


def refresh_policy(event: TableEvent) -> bool:
    """Rebuild the routing table only for events that change the path set:
    the node's own join, or multiple failures / multiple newcomers since
    the last build. Single transient drops do not trigger a rebuild."""
    if event.kind == "initial_join":
        return True
    if event.kind in ("node_failure", "link_failure"):
        return event.count_since_build >= 2
    if event.kind == "node_joined":
        return event.count_since_build >= 2
    return False


@dataclass
class RoutingTable:
    """Per-destination path sets plus the parameters measured for each."""

    source: int
    destination: int
    paths: list[PathInfo] = field(default_factory=list)
    created_at: float = 0.0
    stale: bool = False
    failures_since_build: int = 0
    joins_since_build: int = 0

    def register(self, kind: str) -> bool:
        """Record a network event; returns True when a rebuild is due."""
        if kind in ("node_failure", "link_failure"):
            self.failures_since_build += 1
            due = refresh_policy(TableEvent(kind, self.failures_since_build))
        elif kind == "node_joined":
            self.joins_since_build += 1
            due = refresh_policy(TableEvent(kind, self.joins_since_build))
        else:
            due = refresh_policy(TableEvent(kind))
        if due:
            self.stale = True
        return due


__all__ = [
    "ProbeFailedError", "RoutingTable", "TableEvent", "choke_probe",
    "discover_paths", "estimate_tau", "estimate_tau_per_hop", "refresh_policy",
]
