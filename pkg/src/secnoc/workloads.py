"""Bundled example workload.

A synthetic 38-flow application on a 4x3 mesh standing in for an automotive
control workload whose flow table is not public. It is regenerated from a
fixed seed, so it never changes between releases.
"""

from __future__ import annotations

from .generator import GenSpec, generate_flowset
from .model import Application, Mapping, Platform

STANDIN_SEED = 0


def standin() -> tuple[Application, Platform, Mapping]:
    platform = Platform(width=4, height=3)
    spec = GenSpec(platform=platform, flow_count=38, task_count=24, max_no_load_latency=100,
                   seed=STANDIN_SEED)
    app = generate_flowset(spec)
    # round-robin placement: two tasks per core
    mapping = Mapping(tuple(i % platform.n_cores for i in range(len(app.tasks))))
    return app, platform, mapping
