"""Minimal routing on a 2D mesh: deterministic XY/YX and the randomised
XY/YX and west-first route sets.

A route is the ordered list of unidirectional links a packet crosses: the
injection link from the source core into its switch, the switch-to-switch
links, and the ejection link into the destination core. A :class:`RouteSet`
is the union of every link that any permitted route may use.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .model import Flow, Mapping, Platform

Coord = tuple[int, int]

CORE_TO_SWITCH = "core-to-switch"
SWITCH_TO_SWITCH = "switch-to-switch"
SWITCH_TO_CORE = "switch-to-core"

STEP = {"E": (1, 0), "W": (-1, 0), "N": (0, 1), "S": (0, -1)}


class Policy(str, enum.Enum):
    XY = "XY"
    YX = "YX"
    XYYX = "XYYX"
    WEST_FIRST = "WestFirst"

    @classmethod
    def parse(cls, value: "str | Policy") -> "Policy":
        if isinstance(value, Policy):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "").replace("/", "")
        aliases = {"xy": cls.XY, "yx": cls.YX, "xyyx": cls.XYYX, "randomxyyx": cls.XYYX,
                   "westfirst": cls.WEST_FIRST, "wf": cls.WEST_FIRST, "rwf": cls.WEST_FIRST}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown routing policy {value!r}") from None


@dataclass(frozen=True, order=True)
class LinkId:
    kind: str
    src: Coord
    dst: Coord
    direction: str

    def __str__(self):
        if self.kind == CORE_TO_SWITCH:
            return f"c{self.src[0]},{self.src[1]}>s"
        if self.kind == SWITCH_TO_CORE:
            return f"s>c{self.dst[0]},{self.dst[1]}"
        return f"{self.src[0]},{self.src[1]}{self.direction}"


_LINK_BITS: dict[LinkId, int] = {}


def link_bit(link: LinkId) -> int:
    """Process-local bit index for a link; used for fast overlap tests."""
    bit = _LINK_BITS.get(link)
    if bit is None:
        bit = _LINK_BITS[link] = len(_LINK_BITS)
    return bit


def links_mask(links) -> int:
    mask = 0
    for link in links:
        mask |= 1 << link_bit(link)
    return mask


@dataclass(frozen=True)
class RouteSet:
    policy: Policy
    source: Coord
    dest: Coord
    links: frozenset
    min_hops: int
    route_count: int
    mask: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        if not self.mask and self.links:
            object.__setattr__(self, "mask", links_mask(self.links))

    @property
    def empty(self) -> bool:
        return not self.links

    def overlaps(self, other: "RouteSet") -> bool:
        return bool(self.mask & other.mask)


def manhattan(a: Coord, b: Coord) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def move(node: Coord, direction: str) -> Coord:
    dx, dy = STEP[direction]
    return node[0] + dx, node[1] + dy


def mesh_link(node: Coord, direction: str) -> LinkId:
    return LinkId(SWITCH_TO_SWITCH, node, move(node, direction), direction)


def injection_link(core: Coord) -> LinkId:
    return LinkId(CORE_TO_SWITCH, core, core, "local")


def ejection_link(core: Coord) -> LinkId:
    return LinkId(SWITCH_TO_CORE, core, core, "local")


def path_links(src: Coord, moves: Sequence[str]) -> list[LinkId]:
    """Ordered links for a route that starts at ``src`` and takes ``moves``."""
    links = [injection_link(src)]
    node = src
    for d in moves:
        links.append(mesh_link(node, d))
        node = move(node, d)
    links.append(ejection_link(node))
    return links


def _x_moves(src: Coord, dst: Coord) -> list[str]:
    dx = dst[0] - src[0]
    return ["E" if dx > 0 else "W"] * abs(dx)


def _y_moves(src: Coord, dst: Coord) -> list[str]:
    dy = dst[1] - src[1]
    return ["N" if dy > 0 else "S"] * abs(dy)


def _check_distinct(src: Coord, dst: Coord):
    if tuple(src) == tuple(dst):
        raise ValueError(f"source and destination are the same core {tuple(src)}")


def xy_moves(src: Coord, dst: Coord) -> list[str]:
    return _x_moves(src, dst) + _y_moves(src, dst)


def yx_moves(src: Coord, dst: Coord) -> list[str]:
    return _y_moves(src, dst) + _x_moves(src, dst)


def west_first_moves(node: Coord, dst: Coord) -> list[str]:
    """Directions a west-first router may forward to from ``node``.

    West is mandatory while the destination lies strictly west; otherwise any
    productive direction among east, north and south is allowed.
    """
    if dst[0] < node[0]:
        return ["W"]
    out = []
    if dst[0] > node[0]:
        out.append("E")
    if dst[1] > node[1]:
        out.append("N")
    elif dst[1] < node[1]:
        out.append("S")
    return out


def route_xy(src: Coord, dst: Coord) -> RouteSet:
    _check_distinct(src, dst)
    links = path_links(src, xy_moves(src, dst))
    return RouteSet(Policy.XY, tuple(src), tuple(dst), frozenset(links), len(links), 1)


def route_yx(src: Coord, dst: Coord) -> RouteSet:
    _check_distinct(src, dst)
    links = path_links(src, yx_moves(src, dst))
    return RouteSet(Policy.YX, tuple(src), tuple(dst), frozenset(links), len(links), 1)


def route_set_xyyx(src: Coord, dst: Coord) -> RouteSet:
    xy, yx = route_xy(src, dst), route_yx(src, dst)
    aligned = src[0] == dst[0] or src[1] == dst[1]
    return RouteSet(Policy.XYYX, tuple(src), tuple(dst), xy.links | yx.links, xy.min_hops, 1 if aligned else 2)


def route_set_west_first(src: Coord, dst: Coord) -> RouteSet:
    _check_distinct(src, dst)
    src, dst = tuple(src), tuple(dst)
    if dst[0] < src[0]:
        # forced westward leg, then a straight vertical leg
        links = frozenset(path_links(src, xy_moves(src, dst)))
        count = 1
    else:
        x0, x1 = src[0], dst[0]
        y0, y1 = sorted((src[1], dst[1]))
        vdir = "N" if dst[1] > src[1] else "S"
        mesh = set()
        for x in range(x0, x1 + 1):
            for y in range(y0, y1 + 1):
                if x < x1:
                    mesh.add(mesh_link((x, y), "E"))
                if (vdir == "N" and y < y1) or (vdir == "S" and y > y0):
                    mesh.add(mesh_link((x, y), vdir))
        links = frozenset(mesh | {injection_link(src), ejection_link(dst)})
        dx, dy = x1 - x0, abs(dst[1] - src[1])
        count = comb(dx + dy, dx)
    return RouteSet(Policy.WEST_FIRST, src, dst, links, manhattan(src, dst) + 2, count)


_BUILDERS = {
    Policy.XY: route_xy,
    Policy.YX: route_yx,
    Policy.XYYX: route_set_xyyx,
    Policy.WEST_FIRST: route_set_west_first,
}


@lru_cache(maxsize=None)
def route_set(policy: Policy, src: Coord, dst: Coord) -> RouteSet:
    return _BUILDERS[Policy.parse(policy)](tuple(src), tuple(dst))


def empty_route_set(policy: Policy, src: Coord, dst: Coord) -> RouteSet:
    return RouteSet(Policy.parse(policy), tuple(src), tuple(dst), frozenset(), 0, 0)


def route_set_for_flow(flow: Flow, mapping: Mapping, platform: Platform, policy: Policy | str) -> RouteSet:
    """``route_r`` for a randomised flow, the XY baseline route otherwise.

    Flows whose endpoint tasks share a core never enter the NoC and get an
    empty set.
    """
    src = platform.coord(mapping[flow.source_task])
    dst = platform.coord(mapping[flow.dest_task])
    policy = Policy.parse(policy) if flow.randomized else Policy.XY
    if src == dst:
        return empty_route_set(policy, src, dst)
    return route_set(policy, src, dst)


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def draw_route(policy: Policy | str, src: Coord, dst: Coord, rng=None) -> list[LinkId]:
    """Pick one concrete route the way the routing hardware would.

    Random XY/YX flips a fair coin once at injection; random west-first picks
    uniformly among the permitted ports at every hop. ``rng`` is a numpy
    Generator or a seed.
    """
    _check_distinct(src, dst)
    policy = Policy.parse(policy)
    src, dst = tuple(src), tuple(dst)
    if policy is Policy.XY:
        return path_links(src, xy_moves(src, dst))
    if policy is Policy.YX:
        return path_links(src, yx_moves(src, dst))
    rng = _as_rng(rng)
    if policy is Policy.XYYX:
        moves = xy_moves(src, dst) if rng.random() < 0.5 else yx_moves(src, dst)
        return path_links(src, moves)
    moves, node = [], src
    while node != dst:
        options = west_first_moves(node, dst)
        d = options[int(rng.integers(len(options)))] if len(options) > 1 else options[0]
        moves.append(d)
        node = move(node, d)
    return path_links(src, moves)


def route_distribution(policy: Policy | str, src: Coord, dst: Coord) -> list[tuple[tuple[LinkId, ...], Fraction]]:
    """Every concrete route the policy can produce with its exact probability."""
    _check_distinct(src, dst)
    policy = Policy.parse(policy)
    src, dst = tuple(src), tuple(dst)
    if policy in (Policy.XY, Policy.YX):
        return [(tuple(draw_route(policy, src, dst)), Fraction(1))]
    if policy is Policy.XYYX:
        xy = tuple(path_links(src, xy_moves(src, dst)))
        yx = tuple(path_links(src, yx_moves(src, dst)))
        if xy == yx:
            return [(xy, Fraction(1))]
        return [(xy, Fraction(1, 2)), (yx, Fraction(1, 2))]

    out = []

    def walk(node, moves, p):
        if node == dst:
            out.append((tuple(path_links(src, moves)), p))
            return
        options = west_first_moves(node, dst)
        for d in options:
            walk(move(node, d), moves + [d], p / len(options))

    walk(src, [], Fraction(1))
    return out
