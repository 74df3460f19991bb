"""Synthetic taskset/flowset generation.

Tasks get periods uniform in [2 * max_no_load_latency, max_period], implicit
deadlines and WCETs uniform in a fraction of the period. Flows connect
uniformly drawn distinct ordered task pairs, with every task being an endpoint
of at least one flow. Packet sizes are uniform in flits between one flit and
the largest size whose no-load latency over the mesh diameter stays within
max_no_load_latency. Priorities are deadline monotonic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Application, Flow, Platform, Task, assign_priorities_deadline_monotonic, make_application

# Table-level values are given in milliseconds; this is how many ticks one
# millisecond is worth by default. Shrinking it keeps every ratio intact.
TICKS_PER_MS = 10

MAX_PAIR_DRAWS = 100_000


@dataclass(frozen=True)
class GenSpec:
    platform: Platform = field(default_factory=Platform)
    flow_count: int = 8
    task_count: int | None = None
    max_period: int = 500 * TICKS_PER_MS
    max_no_load_latency: int = 100 * TICKS_PER_MS
    seed: int = 0
    wcet_fraction: tuple[float, float] = (0.05, 0.2)

    @classmethod
    def from_ms(cls, platform: Platform, flow_count: int, max_period_ms: float = 500,
                max_no_load_latency_ms: float = 100, ticks_per_ms: int = TICKS_PER_MS, **kw) -> "GenSpec":
        return cls(platform=platform, flow_count=flow_count,
                   max_period=int(round(max_period_ms * ticks_per_ms)),
                   max_no_load_latency=int(round(max_no_load_latency_ms * ticks_per_ms)), **kw)

    @property
    def tasks(self) -> int:
        """Task population; defaults to max(8, flow_count // 2), capped so the
        flows can still touch every task."""
        if self.task_count is not None:
            return self.task_count
        return max(2, min(2 * self.flow_count, max(8, self.flow_count // 2)))

    def max_flits(self) -> int:
        p = self.platform
        return (self.max_no_load_latency - p.diameter_hops * p.hop_latency) // p.flit_latency + 1

    def check(self):
        n = self.tasks
        if self.flow_count < 1:
            raise ValueError("flow_count must be at least 1")
        if n < 2:
            raise ValueError("task_count must be at least 2")
        if n * (n - 1) < self.flow_count:
            raise ValueError(f"{n} tasks cannot host {self.flow_count} distinct ordered pairs")
        if 2 * self.flow_count < n:
            raise ValueError(f"{self.flow_count} flows cannot touch all {n} tasks")
        if not self.max_no_load_latency < self.max_period:
            raise ValueError("max_no_load_latency must be below max_period")
        if 2 * self.max_no_load_latency > self.max_period:
            raise ValueError("max_period must be at least twice max_no_load_latency")
        if self.max_flits() < 1:
            raise ValueError("max_no_load_latency is too small for a single flit over the mesh diameter")
        lo, hi = self.wcet_fraction
        if not 0 < lo <= hi <= 1:
            raise ValueError("wcet_fraction must satisfy 0 < lo <= hi <= 1")


def _draw_pairs(n_tasks: int, n_flows: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    pairs = [(a, b) for a in range(n_tasks) for b in range(n_tasks) if a != b]
    for _ in range(MAX_PAIR_DRAWS):
        picked = rng.choice(len(pairs), size=n_flows, replace=False)
        chosen = [pairs[i] for i in picked]
        touched = {t for p in chosen for t in p}
        if len(touched) == n_tasks:
            return chosen
    raise RuntimeError("could not draw a flow set touching every task")


def generate_flowset(spec: GenSpec) -> Application:
    spec.check()
    rng = np.random.default_rng(spec.seed)
    n = spec.tasks
    lo, hi = spec.wcet_fraction

    periods = rng.integers(2 * spec.max_no_load_latency, spec.max_period, endpoint=True, size=n)
    fractions = rng.uniform(lo, hi, size=n)
    tasks = []
    for i in range(n):
        period = int(periods[i])
        wcet = max(1, int(round(fractions[i] * period)))
        tasks.append(Task(id=i, wcet=wcet, period=period, deadline=period))

    pairs = _draw_pairs(n, spec.flow_count, rng)
    flits = rng.integers(1, spec.max_flits(), endpoint=True, size=spec.flow_count)
    flows = []
    for k, (a, b) in enumerate(pairs):
        src = tasks[a]
        flows.append(Flow(id=k, source_task=a, dest_task=b, size=int(flits[k]) * spec.platform.flit_width,
                          priority=0, period=src.period, deadline=src.deadline))
    return assign_priorities_deadline_monotonic(make_application(tasks, flows))
