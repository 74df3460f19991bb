"""Domain types for applications, platforms and task mappings.

Time is an integer tick count throughout. Cores are addressed either by a
linear index (``y * width + x``) or by ``(x, y)`` coordinates, with x growing
east and y growing north.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from math import ceil
from typing import Iterable, NamedTuple, Sequence


@dataclass(frozen=True)
class Platform:
    width: int = 4
    height: int = 4
    hop_latency: int = 3
    flit_latency: int = 1
    flit_width: int = 32
    vc_buffer_depth: int = 4

    @property
    def n_cores(self) -> int:
        return self.width * self.height

    def coord(self, core: int) -> tuple[int, int]:
        return core % self.width, core // self.width

    def core(self, coord: tuple[int, int]) -> int:
        x, y = coord
        return y * self.width + x

    def contains(self, coord: tuple[int, int]) -> bool:
        x, y = coord
        return 0 <= x < self.width and 0 <= y < self.height

    @property
    def diameter_hops(self) -> int:
        """Link count of the longest minimal core-to-core route."""
        return (self.width - 1) + (self.height - 1) + 2

    def flits(self, size_bits: int) -> int:
        return ceil(size_bits / self.flit_width)


@dataclass(frozen=True)
class Task:
    id: int
    wcet: int
    period: int
    deadline: int
    release_jitter: int = 0
    priority: int = 0
    flows: tuple[int, ...] = ()


@dataclass(frozen=True)
class Flow:
    id: int
    source_task: int
    dest_task: int
    size: int
    priority: int
    period: int
    deadline: int
    randomized: bool = False


@dataclass(frozen=True)
class Application:
    tasks: tuple[Task, ...]
    flows: tuple[Flow, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "flows", tuple(self.flows))

    def task(self, task_id: int) -> Task:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    def flow(self, flow_id: int) -> Flow:
        for f in self.flows:
            if f.id == flow_id:
                return f
        raise KeyError(flow_id)

    def flows_by_priority(self) -> list[Flow]:
        return sorted(self.flows, key=lambda f: (f.priority, f.id))

    def replace_flows(self, flows: Iterable[Flow]) -> "Application":
        return dataclasses.replace(self, flows=tuple(flows))


@dataclass(frozen=True)
class Mapping:
    """Task-to-core assignment; ``assignment[task_id]`` is a core index."""

    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(c) for c in self.assignment))

    def __len__(self):
        return len(self.assignment)

    def __getitem__(self, task_id: int) -> int:
        return self.assignment[task_id]


class Violation(NamedTuple):
    kind: str
    message: str


def validate_platform(platform: Platform) -> list[Violation]:
    out = []
    if platform.width < 2 or platform.height < 2:
        out.append(Violation("platform", f"mesh must be at least 2x2, got {platform.width}x{platform.height}"))
    for name in ("hop_latency", "flit_latency", "flit_width", "vc_buffer_depth"):
        if getattr(platform, name) <= 0:
            out.append(Violation("platform", f"{name} must be positive"))
    return out


def validate_application(app: Application, platform: Platform | None = None) -> list[Violation]:
    """Collect every broken invariant of ``app``; an empty list means valid."""
    out: list[Violation] = []
    if platform is not None:
        out.extend(validate_platform(platform))

    ids = [t.id for t in app.tasks]
    if sorted(ids) != list(range(len(ids))):
        out.append(Violation("task-ids", f"task ids must be 0..{len(ids) - 1}, got {sorted(ids)}"))
    tasks = {t.id: t for t in app.tasks}

    for t in app.tasks:
        if t.wcet <= 0:
            out.append(Violation("wcet", f"task {t.id}: wcet must be positive"))
        if t.period < t.wcet:
            out.append(Violation("period", f"task {t.id}: period {t.period} < wcet {t.wcet}"))
        if not 0 < t.deadline <= t.period:
            out.append(Violation("deadline", f"task {t.id}: deadline {t.deadline} outside (0, {t.period}]"))
        if t.release_jitter < 0:
            out.append(Violation("jitter", f"task {t.id}: negative release jitter"))
        for fid in t.flows:
            if fid not in {f.id for f in app.flows}:
                out.append(Violation("unknown-flow", f"task {t.id} lists unknown flow {fid}"))

    seen: dict[int, int] = {}
    for t in app.tasks:
        if t.priority in seen:
            out.append(Violation("duplicate-priority", f"tasks {seen[t.priority]} and {t.id} share priority {t.priority}"))
        else:
            seen[t.priority] = t.id

    seen = {}
    flow_ids = set()
    for f in app.flows:
        if f.id in flow_ids:
            out.append(Violation("duplicate-flow-id", f"flow id {f.id} repeated"))
        flow_ids.add(f.id)
        if f.source_task == f.dest_task:
            out.append(Violation("self-flow", f"flow {f.id}: source and destination are both task {f.source_task}"))
        if f.size <= 0:
            out.append(Violation("flow-size", f"flow {f.id}: size must be positive"))
        for end in (f.source_task, f.dest_task):
            if end not in tasks:
                out.append(Violation("unknown-task", f"flow {f.id} references missing task {end}"))
        src = tasks.get(f.source_task)
        if src is not None and (f.period != src.period or f.deadline != src.deadline):
            out.append(Violation("flow-timing", f"flow {f.id}: period/deadline differ from source task {src.id}"))
        if f.priority in seen:
            out.append(Violation("duplicate-flow-priority", f"flows {seen[f.priority]} and {f.id} share priority {f.priority}"))
        else:
            seen[f.priority] = f.id
    return out


def validate_mapping(mapping: Mapping, app: Application, platform: Platform) -> list[Violation]:
    out = []
    if len(mapping) != len(app.tasks):
        out.append(Violation("mapping-length", f"mapping has {len(mapping)} genes for {len(app.tasks)} tasks"))
    for i, c in enumerate(mapping.assignment):
        if not 0 <= c < platform.n_cores:
            out.append(Violation("mapping-bounds", f"task {i} mapped to core {c} outside the {platform.width}x{platform.height} mesh"))
    return out


def assign_priorities_deadline_monotonic(app: Application) -> Application:
    """Shorter deadline gets the higher priority (lower index, starting at 1).

    Ties between tasks go to the lower id. Flows inherit their source task's
    deadline and are ranked the same way, ties broken by source task priority
    then flow id, so flow priorities are unique as well.
    """
    order = sorted(app.tasks, key=lambda t: (t.deadline, t.id))
    task_prio = {t.id: i + 1 for i, t in enumerate(order)}
    tasks = tuple(dataclasses.replace(t, priority=task_prio[t.id]) for t in app.tasks)
    forder = sorted(app.flows, key=lambda f: (f.deadline, task_prio.get(f.source_task, 0), f.id))
    flow_prio = {f.id: i + 1 for i, f in enumerate(forder)}
    flows = tuple(dataclasses.replace(f, priority=flow_prio[f.id]) for f in app.flows)
    return Application(tasks, flows)


def no_load_latency(flow: Flow | int, hop_count: int, platform: Platform) -> int:
    """Contention-free traversal time of a packet over ``hop_count`` links.

    The header pays ``hop_latency`` per link and the remaining flits trail it
    one ``flit_latency`` apart. ``flow`` may also be a raw size in bits.
    """
    if hop_count <= 0:
        raise ValueError("no route: hop_count must be positive")
    size = flow if isinstance(flow, int) else flow.size
    return hop_count * platform.hop_latency + (platform.flits(size) - 1) * platform.flit_latency


def make_application(tasks: Sequence[Task], flows: Sequence[Flow]) -> Application:
    """Build an application, filling each task's ``flows`` from the flow list."""
    produced: dict[int, list[int]] = {t.id: [] for t in tasks}
    for f in flows:
        produced.setdefault(f.source_task, []).append(f.id)
    tasks = [dataclasses.replace(t, flows=tuple(produced.get(t.id, ()))) for t in tasks]
    return Application(tuple(tasks), tuple(flows))
