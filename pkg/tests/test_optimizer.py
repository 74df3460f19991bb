import numpy as np
import pytest
from hypothesis import given, strategies as st

from secnoc.analysis import analyze
from secnoc.generator import GenSpec, generate_flowset
from secnoc.model import Mapping, Platform
from secnoc.optimizer import (GAConfig, Mode, SeriesSpec, crossover, evolve, fitness, mutate, run_series,
                              summarize)

from conftest import random_instance, two_task_app

genes = st.lists(st.integers(0, 15), min_size=1, max_size=12)


def test_mutate_extremes():
    rng = np.random.default_rng(0)
    m = Mapping(tuple(range(10)))
    assert mutate(m, rng, 16, 0.0) == m
    moved = mutate(m, rng, 16, 1.0)
    assert all(a != b for a, b in zip(m.assignment, moved.assignment))


def test_mutation_moves_three_of_ten_genes_on_average():
    rng = np.random.default_rng(1)
    m = Mapping((0,) * 10)
    moved = [sum(g != 0 for g in mutate(m, rng, 16, 0.3).assignment) for _ in range(10_000)]
    assert abs(np.mean(moved) - 3.0) <= 0.1


@given(genes, st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_mutation_keeps_mappings_valid(g, seed, prob):
    out = mutate(Mapping(g), np.random.default_rng(seed), 16, prob)
    assert len(out) == len(g) and all(0 <= c < 16 for c in out.assignment)


def test_crossover_examples():
    a, b = Mapping((1, 2, 3)), Mapping((4, 5, 6))
    assert crossover(a, b, cut=0) == (b, a)
    same = crossover(a, a, np.random.default_rng(0))
    assert same == (a, a)
    with pytest.raises(ValueError):
        crossover(a, Mapping((1, 2)), cut=1)


@given(st.integers(1, 12).flatmap(lambda n: st.tuples(st.lists(st.integers(0, 15), min_size=n, max_size=n),
                                                      st.lists(st.integers(0, 15), min_size=n, max_size=n))),
       st.integers(0, 2**32 - 1))
def test_crossover_children_take_genes_from_parents(parents, seed):
    a, b = parents
    ca, cb = crossover(a, b, np.random.default_rng(seed))
    for k in range(len(a)):
        assert {ca[k], cb[k]} == {a[k], b[k]}


def test_fitness_examples():
    p = Platform()
    app = generate_flowset(GenSpec(flow_count=8, seed=3))
    everything_on_one_core = Mapping((5,) * len(app.tasks))
    res = analyze(app, everything_on_one_core, p)
    assert fitness(everything_on_one_core, app, p) == sum(res.schedulable.values())
    assert fitness(Mapping((0, 1)), two_task_app(), p) == 1


def test_fitness_never_improves_with_security():
    for seed in range(60):
        app, mapping, p = random_instance(seed)
        assert fitness(mapping, app, p, "XYYX", 1.0) <= fitness(mapping, app, p, "XYYX", 0.0)


def test_evolve_stops_immediately_when_everything_fits():
    run = evolve(two_task_app(), Platform(), "XYYX", 1.0, GAConfig(seed=0))
    assert run.generations_used == 0 and run.best_fitness == 1 and run.history == [1]


def test_evolve_is_deterministic_and_elitist():
    p = Platform()
    app = generate_flowset(GenSpec(flow_count=20, seed=9))
    cfg = GAConfig(population_size=30, max_generations=15, seed=5)
    a = evolve(app, p, "XYYX", 1.0, cfg)
    b = evolve(app, p, "XYYX", 1.0, cfg)
    assert a.best == b.best and a.history == b.history
    assert all(x <= y for x, y in zip(a.history, a.history[1:]))
    assert a.best_fitness == fitness(a.best, app, p, "XYYX", 1.0) == a.history[-1]
    assert len(a.best) == len(app.tasks)


def test_ga_config_checks():
    with pytest.raises(ValueError):
        GAConfig(population_size=1).check()
    with pytest.raises(ValueError):
        GAConfig(mutation_move_probability=1.2).check()


def test_mode_parsing():
    assert Mode.parse("NS") == Mode("NS", 0.0)
    assert Mode.parse("PS(25%)") == Mode("PS25", 0.25)
    assert Mode.parse("ps0.5") == Mode("PS50", 0.5)
    assert Mode.parse("SAP") == Mode("SAP", 1.0)
    for bad in ("PS0", "PS150", "XX"):
        with pytest.raises(ValueError):
            Mode.parse(bad)


@pytest.fixture(scope="module")
def tiny_series():
    series = SeriesSpec(modes=("NS", "PS50", "SAP"), flow_counts=(8, 16), flowsets_per_point=2)
    gen = GenSpec(seed=2)
    cfg = GAConfig(population_size=20, max_generations=5, seed=4)
    return series, gen, cfg, run_series(series, gen, cfg)


def test_series_shape_and_ratios(tiny_series):
    series, _, _, rows = tiny_series
    assert len(rows) == 3 * 2 * 2
    assert [r.mode for r in rows[:4]] == ["NS"] * 4
    for s in summarize(rows):
        assert 0 <= s.flowset_schedulability <= s.flow_schedulability <= 1


def test_sap_reuses_the_ns_mapping(tiny_series):
    _, gen, _, rows = tiny_series
    by = {(r.mode, r.flow_count, r.flowset_index): r for r in rows}
    for (mode, fc, i), r in by.items():
        if mode == "SAP":
            ns = by["NS", fc, i]
            assert r.mapping == ns.mapping and r.schedulable_flows <= ns.schedulable_flows


def test_series_independent_of_worker_count(tiny_series):
    series, gen, cfg, rows = tiny_series
    assert run_series(series, gen, cfg, workers=2) == rows
