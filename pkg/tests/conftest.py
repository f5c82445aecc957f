"""Shared scenario factories for the test suite."""

from __future__ import annotations

import math
import random

import pytest

from wsn_multipath.model import NetworkParams
from wsn_multipath.scenario import FaultDecl, RunConfig, Scenario, SourceDecl


def small_params(**overrides) -> NetworkParams:
    base = dict(
        tx_electronics_w=1.024e-3,
        tx_amp_w_per_mk=1.0e-12,
        path_loss_exp=2.0,
        rx_electronics_w=8.192e-4,
        tx_bit_time_s=2.0e-5,
        rx_bit_time_s=2.0e-5,
        sensing_w=1e-9,
        packet_size_bits=1000.0,
        radio_range_m=25.0,
        initial_energy_j=23760.0,
    )
    base.update(overrides)
    return NetworkParams(**base)


def line_scenario(packets=20, hops=5, window=None, link_delay=0.0,
                  **engine_overrides) -> Scenario:
    """Source 1 -> interior 11.. -> sink 2, nodes 20 m apart."""
    positions = {1: (0.0, 0.0)}
    route = [1]
    for i in range(hops - 1):
        positions[11 + i] = (20.0 * (i + 1), 0.0)
        route.append(11 + i)
    positions[2] = (20.0 * hops, 0.0)
    route.append(2)
    return Scenario(
        name=f"line-{hops}hops",
        params=small_params(),
        positions=positions,
        sink=2,
        sources=[SourceDecl(1, packets, paths=[route])],
        link_delay_s=link_delay,
        engine=RunConfig(scheme=2, window=window, **engine_overrides),
    )


def y_scenario(shared: bool, packets=2) -> Scenario:
    """Two sources merging at a relay (shared) or using private relays."""
    positions = {1: (0.0, 0.0), 2: (0.0, 30.0), 5: (60.0, 15.0)}
    if shared:
        positions[3] = (20.0, 15.0)
        positions[4] = (40.0, 15.0)
        paths1, paths2 = [[1, 3, 4, 5]], [[2, 3, 4, 5]]
    else:
        positions.update({3: (20.0, 0.0), 4: (40.0, 2.0),
                          6: (20.0, 30.0), 7: (40.0, 28.0)})
        paths1, paths2 = [[1, 3, 4, 5]], [[2, 6, 7, 5]]
    return Scenario(
        name="y-shared" if shared else "y-disjoint",
        params=small_params(radio_range_m=26.0),
        positions=positions,
        sink=5,
        sources=[SourceDecl(1, packets, paths=paths1),
                 SourceDecl(2, packets, paths=paths2)],
        engine=RunConfig(scheme=2, window=None, fault_detection="off"),
    )


def fault_beacon_scenario(packets=5, fail_time=0.125) -> Scenario:
    """Line 1-2-3-4 with a third neighbor for node 2 and a redundant spare
    next to node 3; node 3 (the receiver of hop 2->3) fails mid-run."""
    positions = {1: (0.0, 0.0), 2: (20.0, 0.0), 3: (40.0, 0.0), 4: (60.0, 0.0),
                 5: (20.0, 20.0), 6: (40.0, 1.0)}
    return Scenario(
        name="fault-beacon",
        params=small_params(),
        positions=positions,
        sink=4,
        sources=[SourceDecl(1, packets, paths=[[1, 2, 3, 4]])],
        redundant=(6,),
        faults=[FaultDecl(fail_time, node=3)],
        engine=RunConfig(scheme=2, window=1),
    )


def fault_timer_scenario(packets=5, fail_time=0.6) -> Scenario:
    """Line 1-2-3-4 where node 2 (the sender of hop 2->3) fails while idle.

    The source's link is slowed tenfold so its own retry counter cannot
    reach the threshold before the downstream watchdog concludes the
    failure; the receiver-timer path is the one that resolves. A spare
    sits next to node 2.
    """
    positions = {1: (0.0, 0.0), 2: (20.0, 0.0), 3: (40.0, 0.0), 4: (60.0, 0.0),
                 7: (20.0, 1.0)}
    return Scenario(
        name="fault-timer",
        params=small_params(),
        positions=positions,
        sink=4,
        sources=[SourceDecl(1, packets, paths=[[1, 2, 3, 4]])],
        link_overrides={(1, 2): (5000.0, 0.0), (1, 7): (5000.0, 0.0)},
        redundant=(7,),
        faults=[FaultDecl(fail_time, node=2)],
        engine=RunConfig(scheme=2, window=1),
    )


def random_scenario(seed: int) -> Scenario:
    """Small random connected deployment for conservation sweeps.

    Roughly a third get one-packet sub-queues fed through a fast ingress
    link, which reliably forces overflow drops at the first relay.
    """
    rng = random.Random(seed)
    hops = rng.randint(2, 6)
    branches = rng.randint(1, 3)
    positions = {1: (0.0, 0.0)}
    sink = 2
    paths = []
    nid = 10
    # tent heights scaled so every hop stays within the 25 m radio range
    heights = [0.0, 6.0 * hops, -6.0 * hops]
    span = 20.0 * hops
    for b in range(branches):
        route = [1]
        for i in range(1, hops):
            t = i / hops
            y = heights[b] * (2 * t if t <= 0.5 else 2 * (1 - t))
            positions[nid] = (span * t, y)
            route.append(nid)
            nid += 1
        route.append(sink)
        paths.append(route)
        nid = (nid // 10 + 1) * 10
    positions[sink] = (span, 0.0)
    packets = rng.randint(5, 40)
    tight = rng.random() < 0.35
    overrides = {}
    if tight:
        window = None
        for route in paths:
            a, b = sorted((route[0], route[1]))
            overrides[(a, b)] = (200000.0, 0.0)
    else:
        window = rng.choice([None, 1, 3])
    return Scenario(
        name=f"random-{seed}",
        seed=seed,
        params=small_params(radio_range_m=25.0),
        positions=positions,
        sink=sink,
        sources=[SourceDecl(1, packets, paths=paths)],
        link_overrides=overrides,
        engine=RunConfig(
            scheme=rng.choice([1, 2, 3]),
            window=window,
            queue_packets_per_subqueue=1 if tight else 50,
            fault_detection="off",
        ),
    )


@pytest.fixture
def mesh():
    from wsn_multipath.scenarios import three_source_mesh
    return three_source_mesh()


@pytest.fixture
def mesh_sim():
    from wsn_multipath.scenarios import three_source_mesh_sim
    return three_source_mesh_sim()


@pytest.fixture
def fan():
    from wsn_multipath.scenarios import five_path_fan
    return five_path_fan()
