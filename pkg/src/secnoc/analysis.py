"""End-to-end worst-case analysis for priority-preemptive wormhole NoCs.

Task response times come from uniprocessor fixed-priority response time
analysis on each core. Packet latencies are upper-bounded by the fixed point

    S_i = L_i + sum_{j in interf(i)} ceil((S_i + K_j + KI_j) / T_j) * L_j

where K_j is the response time of the task releasing flow j and KI_j = S_j - L_j
is its indirect interference jitter. With randomised routing the interference
set is taken over every link any permitted route may use.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from math import ceil
from typing import Iterable, Sequence

from .model import Application, Flow, Mapping, Platform, Task, no_load_latency
from .routing import Policy, route_set_for_flow

ITERATION_CAP = 10_000


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def task_response_time(task: Task, higher: Sequence[Task], cap: int = ITERATION_CAP) -> int | None:
    """Worst-case response time of ``task`` given co-mapped higher-priority tasks.

    Returns None when the iteration passes the task deadline (or the cap).
    """
    r = task.wcet
    for _ in range(cap):
        nxt = task.wcet + task.release_jitter + sum(
            _ceil_div(r + hp.release_jitter, hp.period) * hp.wcet for hp in higher)
        if nxt > task.deadline:
            return None
        if nxt == r:
            return r
        r = nxt
    return None


@dataclass(frozen=True)
class Interferer:
    no_load: int
    period: int
    jitter: int
    indirect_jitter: int


def _latency_fixed_point(no_load, terms, budget, cap):
    """Returns (S or None, hit_cap, last iterate)."""
    s = no_load
    if budget is not None and s > budget:
        return None, False, s
    for _ in range(cap):
        nxt = no_load
        for lj, tj, kj, kij in terms:
            nxt += -(-(s + kj + kij) // tj) * lj
        if budget is not None and nxt > budget:
            return None, False, nxt
        if nxt == s:
            return s, False, s
        s = nxt
    return None, True, s


def packet_latency(no_load: int, interferers: Iterable[Interferer | tuple], budget: int | None = None,
                   cap: int = ITERATION_CAP) -> int | None:
    """Smallest fixed point of the worst-case packet latency recurrence.

    ``interferers`` holds (L_j, T_j, K_j, KI_j) per higher-priority flow. The
    iteration stops with None as soon as an iterate exceeds ``budget``, or if
    it has not converged after ``cap`` rounds.
    """
    terms = [(x.no_load, x.period, x.jitter, x.indirect_jitter) if isinstance(x, Interferer) else tuple(x)
             for x in interferers]
    return _latency_fixed_point(no_load, terms, budget, cap)[0]


@dataclass
class AnalysisResult:
    response_time: dict[int, int | None]
    latency: dict[int, int | None]
    no_load: dict[int, int]
    jitter: dict[int, int | None]
    schedulable: dict[int, bool]
    task_schedulable: dict[int, bool]
    interference: dict[int, frozenset]
    diverged: set = field(default_factory=set)
    demand: dict[int, float] = field(default_factory=dict)

    @property
    def flowset_schedulable(self) -> bool:
        return all(self.schedulable.values()) and all(self.task_schedulable.values())

    @property
    def schedulable_flows(self) -> int:
        return sum(self.schedulable.values())

    @property
    def all_flows_schedulable(self) -> bool:
        return all(self.schedulable.values())

    def latency_sum(self) -> int:
        return sum(s for s in self.latency.values() if s is not None)

    def demand_sum(self) -> float:
        """Sum over flows of (R_source + S) / deadline, capped at 2 per flow.

        Unschedulable flows count with the first latency iterate that broke
        their budget, or 2 when no bound exists at all.
        """
        return sum(self.demand.values())


def mark_secured(app: Application, fraction: float) -> Application:
    """Randomise the ceil(fraction * n) highest-priority flows, the rest stay XY."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"security fraction must be in [0, 1], got {fraction}")
    n = ceil(round(fraction * len(app.flows), 9))
    order = app.flows_by_priority()
    secured = {f.id for f in order[:n]}
    return app.replace_flows(dataclasses.replace(f, randomized=f.id in secured) for f in app.flows)


def interference_set(flow: Flow, flows: Iterable[Flow], mapping: Mapping, platform: Platform,
                     policy: Policy | str = Policy.XYYX, randomized: bool = True) -> frozenset:
    """Higher-priority flows whose route sets share at least one link with ``flow``'s.

    With ``randomized`` False every flow is treated as following its XY route.
    """
    def rs(f):
        if not randomized:
            f = dataclasses.replace(f, randomized=False)
        return route_set_for_flow(f, mapping, platform, policy)

    mine = rs(flow)
    if mine.empty:
        return frozenset()
    return frozenset(
        other.id for other in flows
        if other.priority < flow.priority and mine.mask & rs(other).mask
    )


class Analyzer:
    """Analysis of one application under one routing set-up, for many mappings.

    Application-level bookkeeping is done once so that the optimiser can
    evaluate thousands of mappings cheaply.
    """

    def __init__(self, app: Application, platform: Platform, policy: Policy | str = Policy.XYYX,
                 security_fraction: float | None = None, randomized: bool = True):
        if security_fraction is not None:
            app = mark_secured(app, security_fraction)
        if not randomized:
            app = app.replace_flows(dataclasses.replace(f, randomized=False) for f in app.flows)
        self.app = app
        self.platform = platform
        self.policy = Policy.parse(policy)
        self.tasks = sorted(app.tasks, key=lambda t: t.priority)
        self.flows = app.flows_by_priority()

    def analyze(self, mapping: Mapping) -> AnalysisResult:
        platform = self.platform

        response: dict[int, int | None] = {}
        per_core: dict[int, list[Task]] = {}
        for t in self.tasks:
            hp = per_core.setdefault(mapping[t.id], [])
            response[t.id] = task_response_time(t, hp)
            hp.append(t)
        task_ok = {t.id: response[t.id] is not None for t in self.tasks}

        routes = {f.id: route_set_for_flow(f, mapping, platform, self.policy) for f in self.flows}
        latency: dict[int, int | None] = {}
        no_load: dict[int, int] = {}
        jitter: dict[int, int | None] = {}
        ok: dict[int, bool] = {}
        interf: dict[int, frozenset] = {}
        diverged = set()
        demand: dict[int, float] = {}

        done: list[Flow] = []
        for f in self.flows:
            rs = routes[f.id]
            r_src = response[f.source_task]
            jitter[f.id] = r_src
            if rs.empty:
                no_load[f.id] = 0
                interf[f.id] = frozenset()
                latency[f.id] = 0
                ok[f.id] = r_src is not None and r_src <= f.deadline
                demand[f.id] = r_src / f.deadline if r_src is not None else 2.0
                done.append(f)
                continue
            L = no_load_latency(f, rs.min_hops, platform)
            no_load[f.id] = L
            mask = rs.mask
            hits = [g for g in done if routes[g.id].mask & mask]
            interf[f.id] = frozenset(g.id for g in hits)
            done.append(f)

            if r_src is None or any(latency[g.id] is None or jitter[g.id] is None for g in hits):
                latency[f.id] = None
                ok[f.id] = False
                demand[f.id] = 2.0
                continue
            terms = [(no_load[g.id], g.period, jitter[g.id], latency[g.id] - no_load[g.id]) for g in hits]
            budget = f.deadline - r_src
            s, hit_cap, last = _latency_fixed_point(L, terms, budget, ITERATION_CAP)
            if hit_cap:
                diverged.add(f.id)
            demand[f.id] = min(2.0, (r_src + last) / f.deadline)
            latency[f.id] = s
            ok[f.id] = s is not None and r_src + s <= f.deadline

        return AnalysisResult(response, latency, no_load, jitter, ok, task_ok, interf, diverged, demand)


def analyze(app: Application, mapping: Mapping, platform: Platform, policy: Policy | str = Policy.XYYX,
            security_fraction: float | None = None, randomized: bool = True) -> AnalysisResult:
    """Analyse ``app`` under ``mapping``.

    ``security_fraction`` (when given) re-marks which flows are randomised
    before the analysis; otherwise the flows' own ``randomized`` flags apply.
    A flow is schedulable when its source task response time plus its
    worst-case latency fits within its deadline.
    """
    return Analyzer(app, platform, policy, security_fraction, randomized).analyze(mapping)


def result_rows(app: Application, result: AnalysisResult) -> list[list]:
    """Rows for the per-flow CSV report, highest priority first, then a summary row."""
    rows = []
    for f in app.flows_by_priority():
        s = result.latency[f.id]
        r = result.response_time.get(f.source_task)
        rows.append([f.id, f.priority, result.no_load[f.id], "" if s is None else s,
                     "" if r is None else r, f.deadline, int(result.schedulable[f.id])])
    rows.append(["summary", "", "", "", "", "", int(result.flowset_schedulable)])
    return rows


RESULT_COLUMNS = ["id", "priority", "L", "S", "R_source", "deadline", "schedulable"]
