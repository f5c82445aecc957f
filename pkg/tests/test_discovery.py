import pytest

from wsn_multipath.discovery import (
    ProbeFailedError,
    RoutingTable,
    TableEvent,
    choke_probe,
    discover_paths,
    estimate_tau,
    estimate_tau_per_hop,
    refresh_policy,
)
from wsn_multipath.model import DomainError, UnreachableError, build_topology, validate_path
from wsn_multipath.scenario import build_scenario


class FakeQueueState:
    def __init__(self, occupancy=None, dead=()):
        self._occ = occupancy or {}
        self._dead = set(dead)

    def occupancy(self, node_id):
        return self._occ.get(node_id, 0.0)

    def is_alive(self, node_id):
        return node_id not in self._dead


def test_line_graph_single_path():
    topo = build_topology({1: (0, 0), 3: (10, 0), 2: (20, 0)}, radio_range_m=12.0)
    paths = discover_paths(topo, 1, 2)
    assert len(paths) == 1
    assert paths[0].nodes == (1, 3, 2)
    assert paths[0].hops == 2


def test_mesh_discovery_matches_declared_sets(mesh):
    topo, specs = build_scenario(mesh)
    found = discover_paths(topo, 1, 6)
    declared = {s.node_id: s for s in specs}[1]
    assert ({frozenset(p.interior) for p in found}
            == {frozenset(p.interior) for p in declared.paths})
    # extraction order: shortest first, then lowest-id tie-break
    assert found[0].nodes == (1, 7, 8, 9, 6)
    assert found[1].nodes == (1, 2, 3, 4, 5, 6)
    assert found[2].nodes == (1, 10, 11, 12, 13, 6)


def test_complete_graph_enumeration():
    # all four nodes mutually in range; by-hand enumeration: the direct
    # route is found first, then no interior-disjoint alternative is needed
    topo = build_topology({1: (0, 0), 3: (1, 0), 4: (0, 1), 2: (1, 1)},
                          radio_range_m=2.0)
    paths = discover_paths(topo, 1, 2)
    assert paths[0].nodes == (1, 2)
    assert len(paths) <= len(topo.neighbors(1))
    for a in paths:
        for b in paths:
            if a is not b:
                assert not (a.interior & b.interior)


def test_discovery_respects_max_paths(mesh):
    topo, _ = build_scenario(mesh)
    assert len(discover_paths(topo, 1, 6, max_paths=2)) == 2


def test_discovery_unreachable():
    topo = build_topology({1: (0, 0), 2: (100, 0)}, radio_range_m=5.0)
    with pytest.raises(UnreachableError):
        discover_paths(topo, 1, 2)


def test_discovery_source_equals_sink(mesh):
    topo, _ = build_scenario(mesh)
    with pytest.raises(DomainError):
        discover_paths(topo, 6, 6)


def test_discovery_deterministic(mesh):
    topo1, _ = build_scenario(mesh)
    topo2, _ = build_scenario(mesh)
    assert ([p.nodes for p in discover_paths(topo1, 3, 6)]
            == [p.nodes for p in discover_paths(topo2, 3, 6)])


def test_estimate_tau_round_trip():
    assert estimate_tau(0.0, 0.4) == pytest.approx(0.2)
    assert estimate_tau_per_hop(0.0, 0.4, 5) == pytest.approx(0.04)


def test_estimate_tau_zero_interval():
    assert estimate_tau(1.5, 1.5) == 0.0


def test_estimate_tau_linear():
    assert estimate_tau_per_hop(0.0, 0.8, 5) == pytest.approx(
        2 * estimate_tau_per_hop(0.0, 0.4, 5))


def test_estimate_tau_clock_error():
    with pytest.raises(DomainError):
        estimate_tau(2.0, 1.0)


def _mesh_path(mesh, nodes):
    topo, _ = build_scenario(mesh)
    return validate_path(topo, nodes)


def test_choke_probe_idle_network(mesh):
    path = _mesh_path(mesh, [3, 7, 8, 9, 6])
    assert choke_probe(FakeQueueState(), path) == 0


def test_choke_probe_saturation_counts_sink(mesh):
    # every visited node (interior + sink, not the probing source) flagged
    path = _mesh_path(mesh, [3, 7, 8, 9, 6])
    occ = {n: 0.9 for n in path.nodes}
    assert choke_probe(FakeQueueState(occ), path) == path.hops


def test_choke_probe_single_hot_node(mesh):
    path = _mesh_path(mesh, [3, 7, 8, 9, 6])
    assert choke_probe(FakeQueueState({8: 0.6}), path) == 1
    # the probing source's own queue is not inspected
    assert choke_probe(FakeQueueState({3: 0.9}), path) == 0


def test_choke_probe_threshold_is_strict(mesh):
    path = _mesh_path(mesh, [3, 7, 8, 9, 6])
    assert choke_probe(FakeQueueState({8: 0.5}), path) == 0


def test_choke_probe_failed_node(mesh):
    path = _mesh_path(mesh, [3, 7, 8, 9, 6])
    with pytest.raises(ProbeFailedError):
        choke_probe(FakeQueueState(dead=(8,)), path)


def test_choke_count_monotone_in_occupancy(mesh):
    path = _mesh_path(mesh, [3, 7, 8, 9, 6])
    base = {7: 0.6, 8: 0.3, 9: 0.7}
    before = choke_probe(FakeQueueState(dict(base)), path)
    filled = {**base, 8: 0.8}           # one queue fills
    drained = {**base, 7: 0.1}          # one queue drains
    assert choke_probe(FakeQueueState(filled), path) >= before
    assert choke_probe(FakeQueueState(drained), path) <= before


def test_refresh_policy_cases():
    assert refresh_policy(TableEvent("initial_join"))
    assert not refresh_policy(TableEvent("link_failure", 1))
    assert refresh_policy(TableEvent("node_failure", 2))
    assert refresh_policy(TableEvent("node_joined", 2))
    assert not refresh_policy(TableEvent("node_joined", 1))


def test_routing_table_event_accumulation():
    table = RoutingTable(source=1, destination=6)
    assert not table.register("link_failure")
    assert table.register("node_failure")       # second failure since build
    assert table.stale
