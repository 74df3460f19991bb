"""JSON documents read and written by the command line: applications,
mappings and experiment manifests. See docs/FORMAT.md for the field list.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .generator import GenSpec
from .model import Application, Flow, Mapping, Platform, Task
from .optimizer import GAConfig, SeriesSpec, derive_seed


class ConfigError(ValueError):
    pass


PLATFORM_KEYS = {
    "width": "width",
    "height": "height",
    "hop_latency_H": "hop_latency",
    "flit_latency_F": "flit_latency",
    "flit_width": "flit_width",
    "vc_buffer_depth": "vc_buffer_depth",
}
TASK_KEYS = {
    "id": "id",
    "wcet_C": "wcet",
    "period_T": "period",
    "deadline_D": "deadline",
    "release_jitter_J": "release_jitter",
    "priority_P": "priority",
    "flows": "flows",
}
FLOW_KEYS = {
    "id": "id",
    "source_task": "source_task",
    "dest_task": "dest_task",
    "size_Z": "size",
    "priority": "priority",
    "period": "period",
    "deadline": "deadline",
    "randomized": "randomized",
}


def _load(obj, cls, keys: dict, what: str):
    if not isinstance(obj, dict):
        raise ConfigError(f"{what} must be an object")
    unknown = set(obj) - set(keys)
    if unknown:
        raise ConfigError(f"{what}: unknown field(s) {sorted(unknown)}")
    kw = {keys[k]: v for k, v in obj.items()}
    if "flows" in kw:
        kw["flows"] = tuple(kw["flows"])
    try:
        return cls(**kw)
    except TypeError as e:
        raise ConfigError(f"{what}: {e}") from None


def _dump(obj, keys: dict) -> dict:
    out = {}
    for k, attr in keys.items():
        v = getattr(obj, attr)
        out[k] = list(v) if isinstance(v, tuple) else v
    return out


def platform_from_dict(d: dict) -> Platform:
    return _load(d, Platform, PLATFORM_KEYS, "platform")


def platform_to_dict(p: Platform) -> dict:
    return _dump(p, PLATFORM_KEYS)


def application_from_dict(d: dict) -> tuple[Application, Platform | None]:
    if not isinstance(d, dict) or "tasks" not in d:
        raise ConfigError("application document needs a 'tasks' list")
    platform = platform_from_dict(d["platform"]) if "platform" in d else None
    tasks = [_load(t, Task, TASK_KEYS, f"task #{i}") for i, t in enumerate(d["tasks"])]
    flows = [_load(f, Flow, FLOW_KEYS, f"flow #{i}") for i, f in enumerate(d.get("flows", []))]
    return Application(tuple(tasks), tuple(flows)), platform


def application_to_dict(app: Application, platform: Platform | None = None) -> dict:
    out = {}
    if platform is not None:
        out["platform"] = platform_to_dict(platform)
    out["tasks"] = [_dump(t, TASK_KEYS) for t in app.tasks]
    out["flows"] = [_dump(f, FLOW_KEYS) for f in app.flows]
    return out


def write_json(path: Path | str, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def read_json(path: Path | str):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None


def load_application(path) -> tuple[Application, Platform | None]:
    return application_from_dict(read_json(path))


def save_application(path, app: Application, platform: Platform | None = None) -> None:
    write_json(path, application_to_dict(app, platform))


def load_mapping(path) -> Mapping:
    d = read_json(path)
    if isinstance(d, list):
        return Mapping(d)
    if not isinstance(d, dict) or "assignment" not in d:
        raise ConfigError(f"{path}: mapping document needs an 'assignment' list")
    return Mapping(d["assignment"])


def save_mapping(path, mapping: Mapping) -> None:
    write_json(path, {"assignment": list(mapping.assignment)})


@dataclass(frozen=True)
class SimulationBlock:
    routing_mode: str = "XYYX"
    duration: int = 20_000
    seed: int | None = None
    security_fraction: float | None = 1.0
    random_phase: bool = False
    jitter: bool = False
    probe: dict | None = None


@dataclass(frozen=True)
class Manifest:
    platform: Platform = field(default_factory=Platform)
    generation: dict = field(default_factory=dict)
    ga: GAConfig = field(default_factory=GAConfig)
    series: SeriesSpec = field(default_factory=SeriesSpec)
    simulation: SimulationBlock = field(default_factory=SimulationBlock)
    threats: tuple = ()
    seed: int = 0
    out: str = "results"

    def gen_spec(self, flow_count: int | None = None) -> GenSpec:
        g = dict(self.generation)
        g.setdefault("seed", derive_seed(self.seed, 1))
        if "wcet_fraction" in g:
            g["wcet_fraction"] = tuple(g["wcet_fraction"])
        g.pop("count", None)
        if flow_count is not None:
            g["flow_count"] = flow_count
        try:
            return GenSpec(platform=self.platform, **g)
        except TypeError as e:
            raise ConfigError(f"generation: {e}") from None

    def ga_config(self) -> GAConfig:
        return dataclasses.replace(self.ga, seed=derive_seed(self.seed, 2, self.ga.seed))

    def sim_seed(self) -> int:
        s = self.simulation.seed
        return derive_seed(self.seed, 3) if s is None else s


GEN_FIELDS = {"flow_count", "task_count", "max_period", "max_no_load_latency", "seed", "wcet_fraction", "count"}


def manifest_from_dict(d: dict) -> Manifest:
    if not isinstance(d, dict):
        raise ConfigError("manifest must be an object")
    known = {"platform", "generation", "ga", "series", "simulation", "threats", "seed", "out"}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"manifest: unknown block(s) {sorted(unknown)}")
    gen = dict(d.get("generation", {}))
    bad = set(gen) - GEN_FIELDS
    if bad:
        raise ConfigError(f"generation: unknown field(s) {sorted(bad)}")
    try:
        ga = GAConfig(**d.get("ga", {}))
        s = dict(d.get("series", {}))
        for k in ("modes", "flow_counts"):
            if k in s:
                s[k] = tuple(s[k])
        series = SeriesSpec(**s)
        sim = SimulationBlock(**d.get("simulation", {}))
    except TypeError as e:
        raise ConfigError(f"manifest: {e}") from None
    m = Manifest(
        platform=platform_from_dict(d.get("platform", platform_to_dict(Platform()))),
        generation=gen,
        ga=ga,
        series=series,
        simulation=sim,
        threats=tuple(d.get("threats", ())),
        seed=int(d.get("seed", 0)),
        out=str(d.get("out", "results")),
    )
    try:
        m.ga.check()
        m.series.check()
        m.gen_spec().check()
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return m


def manifest_to_dict(m: Manifest) -> dict:
    series = dataclasses.asdict(m.series)
    for k in ("modes", "flow_counts"):
        series[k] = list(series[k])
    return {
        "platform": platform_to_dict(m.platform),
        "generation": dict(m.generation),
        "ga": dataclasses.asdict(m.ga),
        "series": series,
        "simulation": dataclasses.asdict(m.simulation),
        "threats": list(m.threats),
        "seed": m.seed,
        "out": m.out,
    }


def load_manifest(path) -> Manifest:
    return manifest_from_dict(read_json(path))


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
