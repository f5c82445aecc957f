"""Shipped scenario builders.

Coordinates are synthetic: they were solved so that the radio-range
adjacency realizes exactly the intended link structure (asserted edge-exact
in the test suite). Run ``python -m wsn_multipath.scenarios --out DIR`` to
write the YAML files the CLI consumes.
"""

from __future__ import annotations

import argparse
import os

from .model import NetworkParams
from .scenario import RunConfig, Scenario, SourceDecl, save_scenario

# 13-node mesh: three sources (nodes 1, 3, 10) and one sink (node 6).
_MESH_POSITIONS = {
    1: (0.0, 0.0), 2: (10.0, 24.0), 3: (31.0, 27.0), 4: (58.0, 31.0),
    5: (84.0, 23.0), 6: (100.0, 0.0), 7: (25.0, 0.0), 8: (50.0, 0.0),
    9: (75.0, 0.0), 10: (26.0, -12.0), 11: (52.0, -17.0), 12: (66.0, -38.0),
    13: (93.0, -27.0),
}

# Same mesh with nodes 2, 10, 11 repositioned so a direct 2-10 link exists,
# shortening source 3's third route by one hop.
_MESH_VARIANT_POSITIONS = dict(_MESH_POSITIONS)
_MESH_VARIANT_POSITIONS.update({2: (14.0, 19.0), 10: (22.0, -8.0), 11: (50.0, -15.0)})

_MESH_PARAMS = NetworkParams(
    tx_electronics_w=1.024e-3,
    tx_amp_w_per_mk=1.0e-12,
    path_loss_exp=2.0,
    rx_electronics_w=8.192e-4,
    tx_bit_time_s=2.0e-5,
    rx_bit_time_s=2.0e-5,
    sensing_w=8.12e-5,
    packet_size_bits=1000.0,
    radio_range_m=30.0,
    initial_energy_j=23760.0,
)


def three_source_mesh(packets: int = 100) -> Scenario:
    """The 13-node worked example: three sources, three interior-disjoint
    routes each, all starting together on an idle network."""
    return Scenario(
        name="three-source-mesh",
        seed=1,
        params=_MESH_PARAMS,
        positions=dict(_MESH_POSITIONS),
        sink=6,
        sources=[
            SourceDecl(1, packets, paths=[
                [1, 2, 3, 4, 5, 6], [1, 7, 8, 9, 6], [1, 10, 11, 12, 13, 6]]),
            SourceDecl(3, packets, paths=[
                [3, 4, 5, 6], [3, 7, 8, 9, 6], [3, 2, 1, 10, 11, 12, 13, 6]]),
            SourceDecl(10, packets, paths=[
                [10, 11, 12, 13, 6], [10, 7, 8, 9, 6], [10, 1, 2, 3, 4, 5, 6]]),
        ],
        engine=RunConfig(scheme=3, window=1),
    )


def three_source_mesh_sim(packets: int = 1000) -> Scenario:
    """The multi-source simulation variant of the mesh: source 3's third
    route runs 3-2-10-11-12-13-6 (six hops) over the added 2-10 link."""
    return Scenario(
        name="three-source-mesh-sim",
        seed=1,
        params=_MESH_PARAMS,
        positions=dict(_MESH_VARIANT_POSITIONS),
        sink=6,
        sources=[
            SourceDecl(1, packets, paths=[
                [1, 2, 3, 4, 5, 6], [1, 7, 8, 9, 6], [1, 10, 11, 12, 13, 6]]),
            SourceDecl(3, packets, paths=[
                [3, 4, 5, 6], [3, 7, 8, 9, 6], [3, 2, 10, 11, 12, 13, 6]]),
            SourceDecl(10, packets, paths=[
                [10, 11, 12, 13, 6], [10, 7, 8, 9, 6], [10, 1, 2, 3, 4, 5, 6]]),
        ],
        engine=RunConfig(scheme=3, window=1),
    )


_FAN_HOPS = (9, 22, 5, 20, 7)
_FAN_HEIGHTS = (40.0, 80.0, 0.0, -80.0, -40.0)
_FAN_SPAN = 100.0


def _tent_point(t: float, height: float) -> tuple[float, float]:
    x = _FAN_SPAN * t
    y = 2.0 * t * height if t <= 0.5 else 2.0 * (1.0 - t) * height
    return (round(x, 6), round(y, 6))


def five_path_fan(packets: int = 100) -> Scenario:
    """One source, five interior-disjoint routes of very different lengths
    (9/22/5/20/7 hops) fanned between the same endpoints.

    Sensing power is set negligible so that scheme comparisons isolate
    communication energy.
    """
    positions: dict[int, tuple[float, float]] = {1: (0.0, 0.0), 2: (_FAN_SPAN, 0.0)}
    paths: list[list[int]] = []
    next_id = 100
    for hops, height in zip(_FAN_HOPS, _FAN_HEIGHTS):
        route = [1]
        for i in range(1, hops):
            positions[next_id] = _tent_point(i / hops, height)
            route.append(next_id)
            next_id += 1
        route.append(2)
        paths.append(route)
        next_id = (next_id // 100 + 1) * 100
    params = NetworkParams(**{
        **{f: getattr(_MESH_PARAMS, f) for f in (
            "tx_electronics_w", "tx_amp_w_per_mk", "path_loss_exp",
            "rx_electronics_w", "tx_bit_time_s", "rx_bit_time_s",
            "packet_size_bits", "radio_range_m", "initial_energy_j")},
        "sensing_w": 1e-9,
    })
    return Scenario(
        name="five-path-fan",
        seed=1,
        params=params,
        positions=positions,
        sink=2,
        sources=[SourceDecl(1, packets, paths=paths)],
        engine=RunConfig(scheme=3, window=1),
    )


BUILTIN = {
    "three-source-mesh": three_source_mesh,
    "three-source-mesh-sim": three_source_mesh_sim,
    "five-path-fan": five_path_fan,
}


def write_all(out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, builder in BUILTIN.items():
        path = os.path.join(out_dir, f"{name}.yaml")
        save_scenario(builder(), path)
        written.append(path)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="write the built-in scenario files")
    parser.add_argument("--out", default="scenarios")
    args = parser.parse_args(argv)
    for path in write_all(args.out):
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
