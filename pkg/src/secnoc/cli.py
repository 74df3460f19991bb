"""Command line entry point.

    secnoc generate  --manifest M --out DIR          synthetic flowset files
    secnoc analyze   APP MAPPING [--policy P]         per-flow bounds (exit 0/1/2)
    secnoc optimize  --manifest M --out DIR           GA series CSVs
    secnoc simulate  APP MAPPING --manifest M         latency CSVs (+ probe)
    secnoc overlap   --manifest M                     route overlap probabilities
    secnoc report    DIR                              figures from the CSVs in DIR
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import config
from .analysis import RESULT_COLUMNS, Analyzer, analyze, mark_secured, result_rows
from .config import ConfigError, Manifest
from .generator import generate_flowset
from .model import Platform, validate_application, validate_mapping
from .optimizer import SERIES_COLUMNS, SUMMARY_COLUMNS, derive_seed, run_series, summarize
from .routing import Policy
from .security import OVERLAP_COLUMNS, ThreatScenario, overlap_rows
from .simulator import Probe, SimConfig, SimulationDeadlock, attacker_probe, parse_mode, random_injections, simulate
from .workloads import standin

log = logging.getLogger("secnoc")

EXIT_OK, EXIT_UNSCHEDULABLE, EXIT_ERROR = 0, 1, 2

LATENCY_COLUMNS = ["flow", "seq", "release", "delivery", "latency", "flits", "normalized", "contended", "route"]
LATENCY_SUMMARY_COLUMNS = ["flow", "priority", "packets", "min", "mean", "max", "norm_min", "norm_mean", "norm_max"]
PROBE_COLUMNS = ["seq", "release", "latency", "no_load", "perturbed"]


class CliError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _manifest(args) -> Manifest:
    m = config.load_manifest(args.manifest) if args.manifest else Manifest()
    if args.seed is not None:
        m = dataclasses.replace(m, seed=args.seed)
    return m


def _out_dir(args, m: Manifest | None = None) -> Path:
    out = Path(args.out or (m.out if m else "results"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_instance(app_path, mapping_path, default_platform=None):
    app, platform = config.load_application(app_path)
    platform = platform or default_platform or Platform()
    problems = validate_application(app, platform)
    mapping = config.load_mapping(mapping_path)
    problems += validate_mapping(mapping, app, platform)
    if problems:
        raise CliError("; ".join(f"{v.kind}: {v.message}" for v in problems))
    return app, platform, mapping


def cmd_generate(args) -> int:
    m = _manifest(args)
    out = _out_dir(args, m)
    if args.workload == "standin":
        app, platform, mapping = standin()
        config.save_application(out / "standin.json", app, platform)
        config.save_mapping(out / "standin_mapping.json", mapping)
        print(out / "standin.json")
        return EXIT_OK
    counts = args.flow_count or [m.gen_spec().flow_count]
    n = args.count if args.count is not None else int(m.generation.get("count", 1))
    for fc in counts:
        base = m.gen_spec(fc)
        for i in range(n):
            # same derivation as the optimiser, so files match the series flowsets
            spec = dataclasses.replace(base, seed=derive_seed(base.seed, fc, i))
            app = generate_flowset(spec)
            path = out / f"flowset_fc{fc:02d}_{i:03d}.json"
            config.save_application(path, app, m.platform)
            print(path)
    return EXIT_OK


def cmd_analyze(args) -> int:
    app, platform, mapping = _load_instance(args.app, args.mapping)
    res = analyze(app, mapping, platform, args.policy, args.security_fraction)
    rows = result_rows(app, res)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        config.write_csv(args.out, RESULT_COLUMNS, rows)
    else:
        import csv
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        w.writerows(rows)
    return EXIT_OK if res.flowset_schedulable else EXIT_UNSCHEDULABLE


def cmd_optimize(args) -> int:
    m = _manifest(args)
    out = _out_dir(args, m)
    series = m.series
    if args.modes:
        series = dataclasses.replace(series, modes=tuple(args.modes))
    if args.flowsets is not None:
        series = dataclasses.replace(series, flowsets_per_point=args.flowsets)
    rows = run_series(series, m.gen_spec(), m.ga_config(), workers=args.workers)
    config.write_csv(out / "series.csv", SERIES_COLUMNS,
                     [[r.mode, r.flow_count, r.flowset_index, r.schedulable_flows, r.total_flows,
                       int(r.flowset_schedulable), r.generations_used] for r in rows])
    config.write_csv(out / "summary.csv", SUMMARY_COLUMNS,
                     [[s.mode, s.flow_count, s.flowsets, _fmt(s.flow_schedulability), _fmt(s.flowset_schedulability)]
                      for s in summarize(rows)])
    config.write_csv(out / "mappings.csv", ["mode", "flow_count", "flowset_index", "assignment"],
                     [[r.mode, r.flow_count, r.flowset_index, " ".join(map(str, r.mapping))] for r in rows])
    print(out / "summary.csv")
    return EXIT_OK


def _sim_config(m: Manifest, args, platform) -> SimConfig:
    sim = m.simulation
    mode = args.mode or sim.routing_mode
    duration = args.duration or sim.duration
    return SimConfig(platform=platform, routing_mode=parse_mode(mode), duration=duration, seed=m.sim_seed())


def cmd_simulate(args) -> int:
    m = _manifest(args)
    out = _out_dir(args, m)
    app, platform, mapping = _load_instance(args.app, args.mapping, m.platform)
    sim = m.simulation
    fraction = args.security_fraction if args.security_fraction is not None else sim.security_fraction
    if fraction is not None:
        app = mark_secured(app, fraction)
    cfg = _sim_config(m, args, platform)
    cfg.check()
    bounds = Analyzer(app, platform, Policy.XYYX).analyze(mapping) if sim.jitter else None
    inj = random_injections(app, cfg.seed, bounds, random_phase=sim.random_phase)
    cfg = dataclasses.replace(cfg, injections=inj)
    res = simulate(app, mapping, cfg)
    config.write_csv(out / "latencies.csv", LATENCY_COLUMNS,
                     [[r.flow, r.seq, r.release, r.delivery, r.latency, r.flits, _fmt(r.normalized),
                       int(r.contended), r.route_string()]
                      for r in sorted(res.records, key=lambda r: (r.flow, r.seq))])
    config.write_csv(out / "latency_summary.csv", LATENCY_SUMMARY_COLUMNS,
                     [[s.flow, s.priority, s.packets, s.min, _fmt(s.mean), s.max, _fmt(s.norm_min),
                       _fmt(s.norm_mean), _fmt(s.norm_max)] for s in res.stats()])
    if sim.probe:
        p = sim.probe
        probe = Probe(tuple(p["src"]), tuple(p["dst"]), int(p["size"]), int(p["period"]), int(p.get("phase", 0)))
        trace = attacker_probe(app, mapping, cfg, probe)
        config.write_csv(out / "probe.csv", PROBE_COLUMNS,
                         [[k, rel, lat, trace.no_load, int(lat > trace.no_load)]
                          for k, (rel, lat) in enumerate(zip(trace.releases, trace.latencies))])
    if res.saturated:
        log.warning("%d packets still in flight at the end of the run", res.in_flight)
    print(out / "latency_summary.csv")
    return EXIT_OK


def _scenario(d: dict, k: int) -> ThreatScenario:
    try:
        return ThreatScenario(tuple(d["sensitive_src"]), tuple(d["sensitive_dst"]), Policy.parse(d["policy"]),
                              tuple(d["attacker_src"]), tuple(d["attacker_dst"]), str(d.get("id", k)))
    except (KeyError, TypeError) as e:
        raise ConfigError(f"threat #{k}: missing or malformed field {e}") from None


def _coord(text: str) -> tuple[int, int]:
    x, y = text.split(",")
    return int(x), int(y)


def cmd_overlap(args) -> int:
    m = _manifest(args)
    scenarios = [_scenario(d, k) for k, d in enumerate(m.threats)]
    if args.sensitive:
        pols = args.policy or ["XY", "XYYX", "WestFirst"]
        for pol in pols:
            scenarios.append(ThreatScenario(_coord(args.sensitive[0]), _coord(args.sensitive[1]), Policy.parse(pol),
                                            _coord(args.attacker[0]), _coord(args.attacker[1]),
                                            f"cli-{Policy.parse(pol).value}"))
    if not scenarios:
        raise CliError("no threat scenarios: add a 'threats' list to the manifest or pass --sensitive/--attacker")
    out = _out_dir(args, m)
    config.write_csv(out / "overlap.csv", OVERLAP_COLUMNS, overlap_rows(scenarios))
    print(out / "overlap.csv")
    return EXIT_OK


def cmd_report(args) -> int:
    from . import plotting
    src = Path(args.dir)
    out = Path(args.out) if args.out else src
    out.mkdir(parents=True, exist_ok=True)
    made = []
    if (src / "summary.csv").exists():
        made += plotting.render_series(config.read_csv(src / "summary.csv"), out)
    if (src / "latency_summary.csv").exists():
        made += plotting.render_latency(config.read_csv(src / "latency_summary.csv"), out)
    if not made:
        raise CliError(f"{src}: no summary.csv or latency_summary.csv to plot")
    for p in made:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="secnoc", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, manifest=True):
        if manifest:
            p.add_argument("--manifest", help="experiment manifest (JSON)")
            p.add_argument("--seed", type=int, help="override the manifest master seed")
        p.add_argument("--out", help="output directory")
        return p

    p = common(sub.add_parser("generate", help="write synthetic flowset files"))
    p.add_argument("--flow-count", type=int, action="append", help="flows per flowset (repeatable)")
    p.add_argument("--count", type=int, help="flowsets per flow count")
    p.add_argument("--workload", choices=["standin"], help="write the bundled 4x3 example instead")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("analyze", help="worst-case bounds for one mapped application")
    p.add_argument("app")
    p.add_argument("mapping")
    p.add_argument("--policy", default="XYYX", type=Policy.parse)
    p.add_argument("--security-fraction", type=float,
                   help="randomise this share of the highest-priority flows (default: flags in the file)")
    p.add_argument("--out", help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_analyze)

    p = common(sub.add_parser("optimize", help="run the GA experiment series"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--modes", nargs="+", help="override the series modes, e.g. NS PS100 SAP")
    p.add_argument("--flowsets", type=int, help="override flowsets per point")
    p.set_defaults(func=cmd_optimize)

    p = common(sub.add_parser("simulate", help="flit-level simulation of one mapped application"))
    p.add_argument("app")
    p.add_argument("mapping")
    p.add_argument("--mode", help="XY, XYYX or RWF (default: manifest)")
    p.add_argument("--duration", type=int)
    p.add_argument("--security-fraction", type=float)
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("overlap", help="probability that a sensitive route meets a probe route"))
    p.add_argument("--sensitive", nargs=2, metavar="X,Y")
    p.add_argument("--attacker", nargs=2, metavar="X,Y")
    p.add_argument("--policy", action="append")
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("report", help="render figures from CSVs written by optimize/simulate")
    p.add_argument("dir")
    p.add_argument("--out", help="figure directory (default: DIR)")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "sensitive", None) and not getattr(args, "attacker", None):
        ap.error("--sensitive needs --attacker")
    try:
        return args.func(args)
    except (CliError, ValueError, OSError, SimulationDeadlock) as e:
        print(f"secnoc {args.command}: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
