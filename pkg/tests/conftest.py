import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from secnoc.generator import GenSpec, generate_flowset
from secnoc.model import Flow, Mapping, Platform, Task, make_application

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def two_task_app(size=64, period=100, deadline=None, wcet=5):
    deadline = period if deadline is None else deadline
    tasks = [Task(0, wcet, period, deadline, priority=1), Task(1, wcet, period, deadline, priority=2)]
    flows = [Flow(0, 0, 1, size, 1, period, deadline)]
    return make_application(tasks, flows)


def random_instance(seed, flow_count=None, platform=None, max_period=500, max_no_load_latency=100):
    """Small synthetic flowset plus a uniform random mapping."""
    rng = np.random.default_rng(seed)
    platform = platform or Platform()
    fc = int(rng.integers(2, 9)) if flow_count is None else flow_count
    spec = GenSpec(platform=platform, flow_count=fc, task_count=max(2, min(8, fc)), max_period=max_period,
                   max_no_load_latency=max_no_load_latency, seed=int(rng.integers(2**31)))
    app = generate_flowset(spec)
    mapping = Mapping(rng.integers(platform.n_cores, size=len(app.tasks)))
    return app, mapping, platform


@pytest.fixture
def platform():
    return Platform()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
