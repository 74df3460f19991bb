import dataclasses

import numpy as np
import pytest

from secnoc.analysis import mark_secured
from secnoc.model import Flow, Mapping, Platform, Task, make_application, no_load_latency
from secnoc.routing import draw_route, route_set, Policy
from secnoc.simulator import (Injection, Probe, SimConfig, SimFlow, attacker_probe, build_flows, parse_mode,
                              release_times, sample_routes, simulate, simulate_flows)

import simcheck


def flow(fid, prio, src, dst, flits, period, mode="XY", phase=0):
    return SimFlow(fid, prio, src, dst, flits, mode, Injection(period, phase))


@pytest.mark.parametrize("platform", [Platform(), Platform(hop_latency=2, flit_latency=1, vc_buffer_depth=3),
                                      Platform(hop_latency=4, flit_latency=2, vc_buffer_depth=3)])
@pytest.mark.parametrize("src,dst,flits", [((0, 0), (3, 2), 6), ((2, 1), (1, 1), 1), ((1, 3), (1, 0), 12)])
def test_lone_flow_runs_at_no_load_latency(platform, src, dst, flits):
    cfg = SimConfig(platform=platform, duration=500)
    res = simulate_flows([flow(0, 1, src, dst, flits, 50)], cfg)
    hops = abs(src[0] - dst[0]) + abs(src[1] - dst[1]) + 2
    L = no_load_latency(flits * platform.flit_width, hops, platform)
    assert {r.latency for r in res.records} == {L}
    assert len(res.records) == 10 and not any(r.contended for r in res.records)
    assert all(r.normalized == L / flits for r in res.records)


def test_higher_priority_flow_is_unaffected_by_a_competitor():
    cfg = SimConfig(duration=2000)
    hi = flow(0, 1, (0, 1), (3, 1), 8, 37)
    lo = flow(1, 2, (0, 1), (3, 1), 20, 23)
    solo = simulate_flows([hi], cfg)
    both = simulate_flows([hi, lo], cfg)
    assert both.latencies(0) == solo.latencies(0)
    assert max(both.latencies(1)) > min(both.latencies(1))


def test_preemption_delays_the_lower_priority_packet():
    cfg = SimConfig(duration=10)
    hi = flow(0, 1, (0, 0), (3, 0), 10, 100, phase=2)
    lo = flow(1, 2, (0, 0), (3, 0), 10, 100)
    res = simulate_flows([hi, lo], cfg)
    L = no_load_latency(10 * 32, 5, cfg.platform)
    (h,), (l,) = res.latencies(0), res.latencies(1)
    assert h == L and l > L
    assert not res.records[0].contended or res.records[0].flow == 1


def test_same_seed_same_records():
    insts = simcheck.schedulable_instances(3, seed=8)
    for app, mapping, res in insts:
        a = simcheck.simulate_instance(app, mapping, res, Platform(), "RWF", 5)
        b = simcheck.simulate_instance(app, mapping, res, Platform(), "RWF", 5)
        assert a.records == b.records


def test_conservation_and_drain():
    app, mapping, res = simcheck.schedulable_instances(1, seed=3)[0]
    cfg = SimConfig(duration=3000, routing_mode="XYYX", drain=False)
    run = simulate(app, mapping, cfg)
    assert run.injected == run.delivered + run.in_flight
    drained = simulate(app, mapping, dataclasses.replace(cfg, drain=True))
    assert drained.in_flight == 0 and drained.injected == drained.delivered


@pytest.mark.parametrize("mode,policy", [("XYYX", Policy.XYYX), ("RWF", Policy.WEST_FIRST)])
def test_routes_taken_belong_to_the_route_set(mode, policy):
    p = Platform()
    for app, mapping, res in simcheck.schedulable_instances(5, seed=21):
        sim = simcheck.simulate_instance(app, mapping, res, p, mode, 1)
        for r in sim.records:
            f = sim.flows[r.flow]
            rs = route_set(policy, f.src, f.dst)
            assert set(r.route) <= rs.links and len(r.route) == rs.min_hops


def test_xyyx_picks_each_route_half_the_time():
    p = Platform()
    fl = flow(0, 1, (0, 0), (2, 2), 1, 20, mode="XYYX")
    sim = simulate_flows([fl], SimConfig(platform=p, routing_mode="XYYX", duration=20 * 2000))
    xy = tuple(draw_route("XY", (0, 0), (2, 2)))
    share = np.mean([r.route == xy for r in sim.records])
    assert abs(share - 0.5) <= 3 * (0.25 / len(sim.records)) ** 0.5


def test_sample_routes_matches_the_simulator():
    fl = flow(0, 1, (0, 0), (3, 2), 2, 30, mode="RWF")
    sim = simulate_flows([fl], SimConfig(routing_mode="RWF", duration=30 * 200, seed=9))
    assert [r.route for r in sim.records] == sample_routes("RWF", (0, 0), (3, 2), 200, seed=9)


def test_release_times_with_jitter_stay_in_window():
    f = SimFlow(3, 1, (0, 0), (1, 0), 1, "XY", Injection(100, 7, 30))
    rel = release_times(f, 1000, seed=2)
    assert len(rel) == 10
    for k, t in enumerate(rel):
        assert 100 * k + 7 <= t <= 100 * k + 37


def test_unsound_buffer_depth_rejected():
    with pytest.raises(ValueError):
        SimConfig(platform=Platform(vc_buffer_depth=3)).check()
    with pytest.raises(ValueError):
        parse_mode("odd-even")


def test_build_flows_skips_co_mapped_and_respects_flags():
    tasks = [Task(i, 1, 100, 100, priority=i + 1) for i in range(3)]
    flows = [Flow(0, 0, 1, 64, 1, 100, 100, randomized=True), Flow(1, 1, 2, 64, 2, 100, 100),
             Flow(2, 0, 2, 64, 3, 100, 100)]
    app = make_application(tasks, flows)
    built = build_flows(app, Mapping((0, 5, 0)), SimConfig(routing_mode="RWF"))
    assert [(f.id, f.mode, f.flits) for f in built] == [(0, "RWF", 2), (1, "XY", 2)]


def _probe_app(period=200, size=32 * 16):
    tasks = [Task(0, 1, period, period, priority=1), Task(1, 1, period, period, priority=2)]
    flows = [Flow(0, 0, 1, size, 1, period, period, randomized=True)]
    return make_application(tasks, flows), Mapping((0, 10))  # (0,0) -> (2,2)


def test_probe_sees_nothing_without_sensitive_traffic():
    app, mapping = _probe_app()
    quiet = app.replace_flows([])
    trace = attacker_probe(quiet, mapping, SimConfig(duration=1000), Probe((1, 0), (3, 0), 64, 50))
    assert trace.perturbed == 0 and set(trace.latencies) == {trace.no_load} and len(trace.latencies) == 20


def test_probe_in_lockstep_with_xy_sensitive_flow_is_always_perturbed():
    app, mapping = _probe_app()
    cfg = SimConfig(duration=2000, routing_mode="XY")
    # same period, released while the sensitive packet is crossing (1,0)->(2,0)
    trace = attacker_probe(app, mapping, cfg, Probe((1, 0), (3, 0), 64, 200, phase=5))
    assert trace.fraction == 1.0
    # released long after the sensitive packet has left the shared link
    late = attacker_probe(app, mapping, cfg, Probe((1, 0), (3, 0), 64, 200, phase=100))
    assert late.fraction == 0.0


@pytest.mark.parametrize("probe_period", [4, 5, 6, 7, 9])
def test_probe_duty_cycle(probe_period):
    # The sensitive flits hold link (1,0)E during [2H + (H-F), 2H + (H-F) + flits*F)
    # and a probe released at r asks for that link at r + H + (H-F), so it is
    # perturbed iff r falls in [H, H + flits*F) of each sensitive period. A
    # probe delayed that way leaves at the window end, so one released exactly
    # there queues behind it.
    app, mapping = _probe_app(period=100, size=32 * 10)
    cfg = SimConfig(duration=1000, routing_mode="XY")
    H, F = cfg.platform.hop_latency, cfg.platform.flit_latency
    trace = attacker_probe(app, mapping, cfg, Probe((1, 0), (3, 0), 32, probe_period))
    end = H + 10 * F
    hit = lambda r: H <= r % 100 < end
    expected = sum(hit(r) or (r % 100 == end and hit(r - probe_period)) for r in range(0, 1000, probe_period))
    assert trace.perturbed == expected
