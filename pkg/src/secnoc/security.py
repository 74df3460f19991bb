"""Exposure of a sensitive flow to an attacker's probe route.

The metric is the probability that the route drawn for one sensitive packet
shares at least one link with the attacker's (fixed, XY-routed) probe route.
Deterministic routing leaves it at 0 or 1; randomisation spreads packets over
routes the attacker cannot watch all at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .routing import Coord, Policy, path_links, route_distribution, xy_moves


@dataclass(frozen=True)
class ThreatScenario:
    sensitive_src: Coord
    sensitive_dst: Coord
    policy: Policy | str
    attacker_src: Coord
    attacker_dst: Coord
    id: str = ""

    def attacker_route(self) -> frozenset:
        return frozenset(path_links(tuple(self.attacker_src), xy_moves(self.attacker_src, self.attacker_dst)))


def overlap_probability_exact(scenario: ThreatScenario) -> Fraction:
    if tuple(scenario.attacker_src) == tuple(scenario.attacker_dst):
        raise ValueError("attacker cores must be distinct")
    watched = scenario.attacker_route()
    dist = route_distribution(scenario.policy, scenario.sensitive_src, scenario.sensitive_dst)
    return sum((p for route, p in dist if watched.intersection(route)), Fraction(0))


def overlap_probability(scenario: ThreatScenario) -> float:
    """Chance that a sensitive packet crosses at least one probe link."""
    return float(overlap_probability_exact(scenario))


OVERLAP_COLUMNS = ["scenario", "policy", "overlap_probability"]


def overlap_rows(scenarios) -> list[list]:
    rows = []
    for k, sc in enumerate(scenarios):
        rows.append([sc.id or str(k), Policy.parse(sc.policy).value, f"{overlap_probability(sc):.6f}"])
    return rows
