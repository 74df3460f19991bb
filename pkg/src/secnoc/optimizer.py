"""Evolutionary task mapping driven by the schedulability analysis, and the
experiment series that compare security levels.
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .analysis import Analyzer
from .generator import GenSpec, generate_flowset
from .model import Application, Mapping, Platform
from .routing import Policy

log = logging.getLogger(__name__)

MAX_DUPLICATE_RETRIES = 1000


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 100
    mutation_move_probability: float = 0.3
    max_generations: int = 50
    elite_fraction: float = 0.2
    crossover_rate: float = 0.9
    seed: int = 0
    count_tasks: bool = False

    def check(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        for name in ("mutation_move_probability", "elite_fraction", "crossover_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.max_generations < 0:
            raise ValueError("max_generations must be non-negative")


@dataclass(frozen=True)
class Mode:
    """One experiment series: NS, PS at a fraction, or SAP."""

    name: str
    fraction: float = 0.0

    @classmethod
    def parse(cls, text: str) -> "Mode":
        t = text.strip().upper().replace("(", "").replace(")", "").replace("%", "")
        if t == "NS":
            return cls("NS", 0.0)
        if t == "SAP":
            return cls("SAP", 1.0)
        if t.startswith("PS"):
            q = float(t[2:])
            q = q / 100 if q > 1 else q
            if not 0 < q <= 1:
                raise ValueError(f"PS fraction must be in (0, 1], got {text!r}")
            return cls(f"PS{int(round(q * 100))}", q)
        raise ValueError(f"unknown series mode {text!r}")

    def __str__(self):
        return self.name


DEFAULT_MODES = ("NS", "PS25", "PS50", "PS75", "PS100", "SAP")


@dataclass(frozen=True)
class SeriesSpec:
    modes: tuple[str, ...] = DEFAULT_MODES
    flow_counts: tuple[int, ...] = (8, 12, 16, 20, 24)
    flowsets_per_point: int = 100
    policy: str = "XYYX"

    def check(self):
        if self.flowsets_per_point < 1:
            raise ValueError("flowsets_per_point must be at least 1")
        for m in self.modes:
            Mode.parse(m)
        Policy.parse(self.policy)


def fitness(mapping: Mapping, app: Application, platform: Platform, policy: Policy | str = Policy.XYYX,
            security_fraction: float = 0.0) -> int:
    """Number of schedulable flows of ``app`` under ``mapping``."""
    return Analyzer(app, platform, policy, security_fraction).analyze(mapping).schedulable_flows


class Evaluator:
    """Memoised fitness of mappings for one application and security level.

    The sort key is (schedulable count, -total demand), where demand is each
    flow's response bound as a fraction of its deadline. Ties in count prefer
    mappings with more slack.
    """

    def __init__(self, app: Application, platform: Platform, policy, security_fraction: float,
                 count_tasks: bool = False):
        self.analyzer = Analyzer(app, platform, policy, security_fraction)
        self.count_tasks = count_tasks
        self.target = len(app.flows) + (len(app.tasks) if count_tasks else 0)
        self.cache: dict[tuple, tuple[int, int]] = {}

    def key(self, genes: tuple) -> tuple[int, int]:
        k = self.cache.get(genes)
        if k is None:
            res = self.analyzer.analyze(Mapping(genes))
            score = res.schedulable_flows
            if self.count_tasks:
                score += sum(res.task_schedulable.values())
            k = self.cache[genes] = (score, -res.demand_sum())
        return k


def mutate(mapping: Mapping | Sequence[int], rng: np.random.Generator, n_cores: int,
           probability: float = 0.3) -> Mapping:
    """Move each task, with ``probability``, to a different uniformly chosen core."""
    genes = list(mapping.assignment if isinstance(mapping, Mapping) else mapping)
    moves = rng.random(len(genes)) < probability
    for i in np.flatnonzero(moves):
        c = int(rng.integers(n_cores - 1))
        genes[i] = c if c < genes[i] else c + 1
    return Mapping(genes)


def crossover(parent_a: Mapping | Sequence[int], parent_b: Mapping | Sequence[int],
              rng: np.random.Generator | None = None, cut: int | None = None) -> tuple[Mapping, Mapping]:
    """Single-point crossover; the cut is uniform over interior positions unless given."""
    a = list(parent_a.assignment if isinstance(parent_a, Mapping) else parent_a)
    b = list(parent_b.assignment if isinstance(parent_b, Mapping) else parent_b)
    if len(a) != len(b):
        raise ValueError("parents differ in length")
    if cut is None:
        cut = int(rng.integers(1, len(a))) if len(a) > 1 else 0
    return Mapping(a[:cut] + b[cut:]), Mapping(b[:cut] + a[cut:])


@dataclass
class Evolution:
    best: Mapping
    best_fitness: int
    history: list[int]
    generations_used: int
    evaluations: int = 0


def evolve(app: Application, platform: Platform, policy: Policy | str, security_fraction: float,
           cfg: GAConfig = GAConfig()) -> Evolution:
    """Search task mappings that maximise the number of schedulable flows.

    The top ``elite_fraction`` survives unchanged and parents for the rest of
    each generation are drawn uniformly from it. Offspring already present in
    the next generation are redrawn (up to a bounded number of retries) to
    keep the population diverse. Stops early once the best mapping makes every
    flow schedulable. ``history`` holds the best-ever fitness after each
    generation, starting with the initial population.
    """
    cfg.check()
    rng = np.random.default_rng(cfg.seed)
    ev = Evaluator(app, platform, policy, security_fraction, cfg.count_tasks)
    n_tasks, n_cores = len(app.tasks), platform.n_cores
    pop = [tuple(int(c) for c in rng.integers(n_cores, size=n_tasks)) for _ in range(cfg.population_size)]

    def rank(population):
        keys = [ev.key(g) for g in population]
        order = sorted(range(len(population)), key=lambda i: keys[i], reverse=True)
        return [population[i] for i in order], [keys[i] for i in order]

    pop, keys = rank(pop)
    best, best_key = pop[0], keys[0]
    history = [best_key[0]]
    gen = 0
    n_elite = min(cfg.population_size, max(1, int(round(cfg.elite_fraction * cfg.population_size))))
    while best_key[0] < ev.target and gen < cfg.max_generations:
        gen += 1
        nxt = list(pop[:n_elite])
        seen = set(nxt)
        retries = 0
        while len(nxt) < cfg.population_size:
            pa = pop[int(rng.integers(n_elite))]
            pb = pop[int(rng.integers(n_elite))]
            if rng.random() < cfg.crossover_rate:
                ca, cb = crossover(pa, pb, rng)
            else:
                ca, cb = Mapping(pa), Mapping(pb)
            for child in (ca, cb):
                if len(nxt) >= cfg.population_size:
                    break
                genes = mutate(child, rng, n_cores, cfg.mutation_move_probability).assignment
                if genes in seen and retries < MAX_DUPLICATE_RETRIES:
                    retries += 1
                    continue
                nxt.append(genes)
                seen.add(genes)
        pop, keys = rank(nxt)
        if keys[0] > best_key:
            best, best_key = pop[0], keys[0]
        history.append(best_key[0])
    return Evolution(Mapping(best), best_key[0], history, gen, len(ev.cache))


@dataclass(frozen=True)
class SeriesRow:
    mode: str
    flow_count: int
    flowset_index: int
    schedulable_flows: int
    total_flows: int
    flowset_schedulable: bool
    generations_used: int
    mapping: tuple[int, ...] = field(default=(), compare=False)


SERIES_COLUMNS = ["mode", "flow_count", "flowset_index", "schedulable_flows", "total_flows",
                  "flowset_schedulable", "generations_used"]
SUMMARY_COLUMNS = ["mode", "flow_count", "flowsets", "flow_schedulability", "flowset_schedulability"]


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def run_flowset(modes: Sequence[str], gen: GenSpec, cfg: GAConfig, policy: str,
                flow_count: int, index: int) -> list[SeriesRow]:
    """All series for one synthetic flowset. GA runs share a seed across modes."""
    app = generate_flowset(dataclasses.replace(gen, flow_count=flow_count,
                                               seed=derive_seed(gen.seed, flow_count, index)))
    ga = dataclasses.replace(cfg, seed=derive_seed(cfg.seed, flow_count, index))
    platform = gen.platform
    parsed = [Mode.parse(m) for m in modes]
    evolved: dict[float, Evolution] = {}

    def evolution(fraction: float) -> Evolution:
        if fraction not in evolved:
            evolved[fraction] = evolve(app, platform, policy, fraction, ga)
        return evolved[fraction]

    rows = []
    for mode in parsed:
        if mode.name == "SAP":
            run = evolution(0.0)
            res = Analyzer(app, platform, policy, 1.0).analyze(run.best)
        else:
            run = evolution(mode.fraction)
            res = Analyzer(app, platform, policy, mode.fraction).analyze(run.best)
        rows.append(SeriesRow(mode.name, flow_count, index, res.schedulable_flows, len(app.flows),
                              res.all_flows_schedulable, run.generations_used, run.best.assignment))
    return rows


def run_series(series: SeriesSpec, gen: GenSpec, cfg: GAConfig = GAConfig(), workers: int = 1) -> list[SeriesRow]:
    """Evolve and evaluate every (flow count, flowset) for every series mode.

    Flowsets and GA seeds are derived from the master seeds and the
    (flow count, index) pair, so results do not depend on ``workers``.
    """
    series.check()
    cfg.check()
    jobs = [(fc, i) for fc in series.flow_counts for i in range(series.flowsets_per_point)]
    args = [(series.modes, gen, cfg, series.policy, fc, i) for fc, i in jobs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_flowset, *zip(*args)))
    else:
        chunks = []
        for a in args:
            chunks.append(run_flowset(*a))
            log.debug("flow_count=%d flowset=%d done", a[4], a[5])
    order = {m: k for k, m in enumerate(Mode.parse(m).name for m in series.modes)}
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (order[r.mode], r.flow_count, r.flowset_index))
    return rows


@dataclass(frozen=True)
class SummaryRow:
    mode: str
    flow_count: int
    flowsets: int
    flow_schedulability: float
    flowset_schedulability: float


def summarize(rows: Sequence[SeriesRow]) -> list[SummaryRow]:
    """Mean flow schedulability and flowset schedulability per (mode, flow count)."""
    groups: dict[tuple[str, int], list[SeriesRow]] = {}
    for r in rows:
        groups.setdefault((r.mode, r.flow_count), []).append(r)
    out = []
    for (mode, fc), rs in groups.items():
        flow = float(np.mean([r.schedulable_flows / r.total_flows for r in rs]))
        flowset = float(np.mean([r.flowset_schedulable for r in rs]))
        out.append(SummaryRow(mode, fc, len(rs), flow, flowset))
    return out
