"""Schedulability analysis, task mapping and flit-level simulation for
priority-preemptive wormhole meshes with randomised routing."""

from .analysis import AnalysisResult, Analyzer, analyze, mark_secured, packet_latency, task_response_time
from .generator import GenSpec, generate_flowset
from .model import Application, Flow, Mapping, Platform, Task, no_load_latency
from .optimizer import GAConfig, SeriesSpec, evolve, fitness, run_series, summarize
from .routing import Policy, RouteSet, route_set, route_xy, route_yx
from .security import ThreatScenario, overlap_probability
from .simulator import SimConfig, attacker_probe, simulate

__version__ = "0.1.0"

__all__ = [
    "AnalysisResult", "Analyzer", "Application", "Flow", "GAConfig", "GenSpec", "Mapping", "Platform",
    "Policy", "RouteSet", "SeriesSpec", "SimConfig", "Task", "ThreatScenario", "analyze", "attacker_probe",
    "evolve", "fitness", "generate_flowset", "mark_secured", "no_load_latency", "overlap_probability",
    "packet_latency", "route_set", "route_xy", "route_yx", "run_series", "simulate", "summarize",
    "task_response_time",
]
