"""Cycle-accurate flit-level simulator of a priority-preemptive wormhole mesh.

Every input port of every switch has one virtual channel per priority level,
``vc_buffer_depth`` flits deep, fed under credit-based flow control. Each
cycle, every output link is granted to the highest-priority virtual channel
whose head flit is ready and has a downstream credit, so a higher-priority
packet preempts a lower-priority one at flit granularity.

Timing: a header flit spends ``hop_latency - flit_latency`` cycles being
routed in each buffer and ``flit_latency`` cycles on each link; body flits
are forwarded as soon as they reach the head of their buffer. A packet that
meets no contention is therefore delivered exactly
``hops * hop_latency + (flits - 1) * flit_latency`` cycles after release.
Credits freed by a departing flit become visible on the next cycle.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .analysis import AnalysisResult
from .model import Application, Mapping, Platform, no_load_latency
from .routing import (LinkId, SWITCH_TO_CORE, ejection_link, mesh_link, move,
                      path_links, west_first_moves, xy_moves, yx_moves)

Coord = tuple[int, int]

XY, XYYX, RWF = "XY", "XYYX", "RWF"


class SimulationDeadlock(RuntimeError):
    def __init__(self, cycle: int, blocked: list[str]):
        super().__init__(f"no flit moved for too long at cycle {cycle}; blocked packets: {', '.join(blocked)}")
        self.cycle = cycle
        self.blocked = blocked


def parse_mode(mode: str) -> str:
    m = str(mode).strip().upper().replace("/", "").replace("-", "").replace("_", "")
    if m in ("XY",):
        return XY
    if m in ("XYYX", "RANDOMXYYX"):
        return XYYX
    if m in ("RWF", "WESTFIRST", "RANDOMWESTFIRST", "WF"):
        return RWF
    raise ValueError(f"unknown routing mode {mode!r}")


@dataclass(frozen=True)
class Injection:
    """Release pattern of one flow: ``k * period + phase + U[0, max_jitter]``."""

    period: int
    phase: int = 0
    max_jitter: int = 0


@dataclass(frozen=True)
class SimConfig:
    platform: Platform = field(default_factory=Platform)
    routing_mode: str = XY
    duration: int = 10_000
    seed: int = 0
    injections: dict | None = None
    drain: bool = True
    stall_limit: int = 10_000

    def check(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        parse_mode(self.routing_mode)
        p = self.platform
        if p.hop_latency < p.flit_latency:
            raise ValueError("hop_latency must be at least flit_latency")
        if p.vc_buffer_depth <= p.hop_latency // p.flit_latency:
            raise ValueError("vc_buffer_depth must exceed hop_latency // flit_latency for full-rate wormhole pipelining")


@dataclass(frozen=True)
class SimFlow:
    id: int
    priority: int
    src: Coord
    dst: Coord
    flits: int
    mode: str
    injection: Injection


@dataclass(frozen=True)
class LatencyRecord:
    flow: int
    seq: int
    release: int
    delivery: int
    latency: int
    flits: int
    normalized: float
    route: tuple
    contended: bool

    def route_string(self) -> str:
        return " ".join(str(link) for link in self.route)


@dataclass(frozen=True)
class FlowStats:
    flow: int
    priority: int
    packets: int
    min: int
    mean: float
    max: int
    norm_min: float
    norm_mean: float
    norm_max: float


@dataclass
class SimResult:
    records: list[LatencyRecord]
    injected: int
    delivered: int
    in_flight: int
    cycles: int
    saturated: bool
    flows: dict[int, SimFlow]

    def latencies(self, flow_id: int) -> list[int]:
        return [r.latency for r in self.records if r.flow == flow_id]

    def stats(self) -> list[FlowStats]:
        out = []
        for fid, f in sorted(self.flows.items(), key=lambda kv: (kv[1].priority, kv[0])):
            lat = [r.latency for r in self.records if r.flow == fid]
            if not lat:
                continue
            norm = [x / f.flits for x in lat]
            out.append(FlowStats(fid, f.priority, len(lat), min(lat), float(np.mean(lat)), max(lat),
                                 min(norm), float(np.mean(norm)), max(norm)))
        return out


class _Packet:
    __slots__ = ("flow", "seq", "release", "route", "flits", "contended", "rng")

    def __init__(self, flow, seq, release, route, rng):
        self.flow = flow
        self.seq = seq
        self.release = release
        self.route = route
        self.flits = flow.flits
        self.contended = False
        self.rng = rng


class _Flit:
    __slots__ = ("pkt", "idx", "pos", "ready")

    def __init__(self, pkt, idx, pos, ready):
        self.pkt = pkt
        self.idx = idx
        self.pos = pos
        self.ready = ready


class _Buffer:
    __slots__ = ("q", "occ", "cap", "owner", "prio")

    def __init__(self, cap, prio):
        self.q = deque()
        self.occ = 0
        self.cap = cap
        self.owner = None
        self.prio = prio


def _flow_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, *[int(k) for k in key]])


def build_flows(app: Application, mapping: Mapping, cfg: SimConfig) -> list[SimFlow]:
    """Network flows of ``app``; co-mapped endpoints produce no NoC traffic.

    Flows marked ``randomized`` use the configured random routing mode, the
    others stay on XY.
    """
    p = cfg.platform
    mode = parse_mode(cfg.routing_mode)
    out = []
    for f in app.flows:
        src, dst = p.coord(mapping[f.source_task]), p.coord(mapping[f.dest_task])
        if src == dst:
            continue
        inj = (cfg.injections or {}).get(f.id) or Injection(f.period)
        out.append(SimFlow(f.id, f.priority, src, dst, p.flits(f.size), mode if f.randomized else XY, inj))
    return out


def release_times(flow: SimFlow, duration: int, seed: int) -> list[int]:
    inj = flow.injection
    rng = _flow_rng(seed, 0, flow.id)
    out = []
    k = 0
    while True:
        base = k * inj.period + inj.phase
        if base >= duration:
            break
        jitter = int(rng.integers(0, inj.max_jitter, endpoint=True)) if inj.max_jitter > 0 else 0
        if base + jitter < duration:
            out.append(base + jitter)
        k += 1
    return out


def simulate_flows(flows: Sequence[SimFlow], cfg: SimConfig) -> SimResult:
    cfg.check()
    p = cfg.platform
    H, F, B = p.hop_latency, p.flit_latency, p.vc_buffer_depth
    route_delay = H - F
    seed = cfg.seed

    releases = []
    for f in flows:
        for seq, t in enumerate(release_times(f, cfg.duration, seed)):
            releases.append((t, f.priority, f.id, seq, f))
    releases.sort(key=lambda r: r[:4])
    rel_i = 0

    choice_rng = {f.id: _flow_rng(seed, 1, f.id) for f in flows}
    router_rng: dict[tuple, np.random.Generator] = {}

    def rwf_rng(node, fid):
        key = (node, fid)
        g = router_rng.get(key)
        if g is None:
            g = router_rng[key] = _flow_rng(seed, 2, node[0], node[1], fid)
        return g

    ni: dict[tuple, _Buffer] = {}
    vcs: dict[tuple, _Buffer] = {}
    active: dict[_Buffer, None] = {}
    link_busy: dict[LinkId, tuple[int, object]] = {}
    records: list[LatencyRecord] = []
    injected = delivered = 0
    in_network = 0

    def vc(link, prio):
        b = vcs.get((link, prio))
        if b is None:
            b = vcs[(link, prio)] = _Buffer(B, prio)
        return b

    def next_link_rwf(pkt, node):
        dst = pkt.flow.dst
        if node == dst:
            return ejection_link(dst)
        options = west_first_moves(node, dst)
        d = options[int(rwf_rng(node, pkt.flow.id).integers(len(options)))] if len(options) > 1 else options[0]
        return mesh_link(node, d)

    t = 0
    last_progress = 0
    drain_window = max(cfg.duration, cfg.stall_limit)
    while True:
        while rel_i < len(releases) and releases[rel_i][0] <= t:
            rt, prio, fid, seq, f = releases[rel_i]
            rel_i += 1
            if f.mode == XYYX:
                moves = xy_moves(f.src, f.dst) if choice_rng[f.id].random() < 0.5 else yx_moves(f.src, f.dst)
                route = path_links(f.src, moves)
            elif f.mode == RWF:
                route = [path_links(f.src, [])[0]]
            else:
                route = path_links(f.src, xy_moves(f.src, f.dst))
            pkt = _Packet(f, seq, rt, route, None)
            buf = ni.get((f.src, prio))
            if buf is None:
                buf = ni[(f.src, prio)] = _Buffer(math.inf, prio)
            for i in range(f.flits):
                buf.q.append(_Flit(pkt, i, 0, rt + (route_delay if i == 0 else 0)))
            active[buf] = None
            injected += 1
            in_network += 1

        requests: dict[LinkId, list] = {}
        next_ready = math.inf
        for buf in active:
            flit = buf.q[0]
            if flit.ready > t:
                if flit.ready < next_ready:
                    next_ready = flit.ready
                continue
            link = flit.pkt.route[flit.pos]
            requests.setdefault(link, []).append(flit)

        grants = []
        for link, cands in requests.items():
            if len(cands) > 1:
                cands.sort(key=lambda fl: (fl.pkt.flow.priority, fl.pkt.seq))
            busy = link_busy.get(link)
            if busy is not None and busy[0] > t:
                for fl in cands:
                    if fl.pkt is not busy[1]:
                        fl.pkt.contended = True
                continue
            winner = None
            eject = link.kind == SWITCH_TO_CORE
            for fl in cands:
                if winner is None:
                    if not eject:
                        down = vc(link, fl.pkt.flow.priority)
                        if down.occ >= down.cap or (fl.idx == 0 and down.owner is not None and down.owner is not fl.pkt):
                            fl.pkt.contended = True
                            continue
                    winner = fl
                else:
                    fl.pkt.contended = True
            if winner is not None:
                grants.append((link, winner))

        for link, fl in grants:
            pkt = fl.pkt
            prio = pkt.flow.priority
            src_buf = ni[(pkt.flow.src, prio)] if fl.pos == 0 else vcs[(pkt.route[fl.pos - 1], prio)]
            src_buf.q.popleft()
            if fl.pos > 0:
                src_buf.occ -= 1
            if not src_buf.q:
                del active[src_buf]
            link_busy[link] = (t + F, pkt)
            arrive = t + F
            if link.kind == SWITCH_TO_CORE:
                if fl.idx == pkt.flits - 1:
                    lat = arrive - pkt.release
                    records.append(LatencyRecord(pkt.flow.id, pkt.seq, pkt.release, arrive, lat, pkt.flits,
                                                 lat / pkt.flits, tuple(pkt.route), pkt.contended))
                    delivered += 1
                    in_network -= 1
                continue
            down = vcs[(link, prio)]
            down.occ += 1
            if fl.idx == 0:
                down.owner = pkt
                if pkt.flow.mode == RWF:
                    pkt.route.append(next_link_rwf(pkt, link.dst))
            if fl.idx == pkt.flits - 1:
                down.owner = None
            fl.pos += 1
            fl.ready = arrive + (route_delay if fl.idx == 0 else 0)
            down.q.append(fl)
            active[down] = None

        if grants:
            last_progress = t
        elif active and t - last_progress > cfg.stall_limit:
            blocked = sorted({f"flow {b.q[0].pkt.flow.id}#{b.q[0].pkt.seq}" for b in active})
            raise SimulationDeadlock(t, blocked)

        if rel_i >= len(releases) and not active:
            break
        if t >= cfg.duration and (not cfg.drain or t >= cfg.duration + drain_window):
            break

        if grants or requests:
            t += 1
        else:
            nxt = next_ready
            if rel_i < len(releases):
                nxt = min(nxt, releases[rel_i][0])
            if nxt == math.inf:
                break
            t = max(t + 1, int(nxt))

    return SimResult(records, injected, delivered, in_network, t,
                     saturated=in_network > 0, flows={f.id: f for f in flows})


def simulate(app: Application, mapping: Mapping, cfg: SimConfig) -> SimResult:
    """Simulate every network flow of ``app`` under ``mapping``."""
    return simulate_flows(build_flows(app, mapping, cfg), cfg)


def random_injections(app: Application, seed: int, analysis: AnalysisResult | None = None,
                      random_phase: bool = True) -> dict[int, Injection]:
    """Per-flow releases with a seeded random phase and, when an analysis is
    given, uniform jitter bounded by the source task's response time."""
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, 3])
    out = {}
    for f in sorted(app.flows, key=lambda f: f.id):
        phase = int(rng.integers(f.period)) if random_phase else 0
        jitter = 0
        if analysis is not None:
            jitter = analysis.jitter.get(f.id) or 0
        out[f.id] = Injection(f.period, phase, jitter)
    return out


@dataclass(frozen=True)
class Probe:
    """Attacker flow between two compromised cores, always XY-routed."""

    src: Coord
    dst: Coord
    size: int
    period: int
    phase: int = 0


@dataclass
class ProbeTrace:
    latencies: list[int]
    releases: list[int]
    no_load: int
    perturbed: int

    @property
    def fraction(self) -> float:
        return self.perturbed / len(self.latencies) if self.latencies else 0.0


def attacker_probe(app: Application, mapping: Mapping, cfg: SimConfig, probe: Probe) -> ProbeTrace:
    """Inject ``probe`` below every application priority and record what it sees.

    A probe packet counts as perturbed when its latency exceeds its no-load
    latency, i.e. it met the traffic it is spying on.
    """
    flows = build_flows(app, mapping, cfg)
    prio = max([f.priority for f in app.flows] + [0]) + 1
    pid = max([f.id for f in app.flows] + [-1]) + 1
    pf = SimFlow(pid, prio, tuple(probe.src), tuple(probe.dst), cfg.platform.flits(probe.size), XY,
                 Injection(probe.period, probe.phase))
    res = simulate_flows(flows + [pf], cfg)
    recs = sorted((r for r in res.records if r.flow == pid), key=lambda r: r.seq)
    hops = len(path_links(pf.src, xy_moves(pf.src, pf.dst)))
    L = no_load_latency(probe.size, hops, cfg.platform)
    lat = [r.latency for r in recs]
    return ProbeTrace(lat, [r.release for r in recs], L, sum(x > L for x in lat))


def sample_routes(mode: str, src: Coord, dst: Coord, n: int, seed: int = 0) -> list[tuple]:
    """Routes the simulator's routing logic produces for ``n`` successive packets."""
    mode = parse_mode(mode)
    fid = 0
    if mode == XY:
        return [tuple(path_links(src, xy_moves(src, dst)))] * n
    if mode == XYYX:
        rng = _flow_rng(seed, 1, fid)
        return [tuple(path_links(src, xy_moves(src, dst) if rng.random() < 0.5 else yx_moves(src, dst)))
                for _ in range(n)]
    routers: dict = {}
    out = []
    for _ in range(n):
        node, moves = tuple(src), []
        while node != tuple(dst):
            options = west_first_moves(node, dst)
            if len(options) > 1:
                g = routers.get(node)
                if g is None:
                    g = routers[node] = _flow_rng(seed, 2, node[0], node[1], fid)
                d = options[int(g.integers(len(options)))]
            else:
                d = options[0]
            moves.append(d)
            node = move(node, d)
        out.append(tuple(path_links(src, moves)))
    return out
