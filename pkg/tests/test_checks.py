import time

from src.analysis.checks import (
    SuiteResult,
    adjunction_suite,
    closed_form_trial,
    curry_suite,
    global_sections_suite,
    oracle_suite,
    random_box_module,
    random_half_open,
    random_monotone_map,
    random_preorder,
    random_preorder_module,
    stability_suite,
    symmetry_suite,
    three_way_suite,
    translation_suite,
)
from src.models.interval import INF, Interval
from src.models.poset import GridPoset

H = Interval.half_open


def test_suite_result_counts():
    result = SuiteResult("demo")
    result.record(True, {})
    result.record(False, {"why": "mismatch"})
    assert not result.ok
    assert result.to_dict() == {"suite": "demo", "pass": 1, "fail": 1, "failures": [{"why": "mismatch"}]}


def test_random_instances_are_well_formed(rng):
    for _ in range(10):
        bar = random_half_open(rng, 0, 4)
        assert 0 <= bar.left.value < bar.right.value <= 4

        q = random_preorder(rng, 5)
        assert len(q.points()) == 5
        module = random_preorder_module(rng, q, 2, 3)
        assert module.validate()
        f = random_monotone_map(rng, q, GridPoset.cube(0, 3, 2))
        assert f.is_monotone()

        box_module = random_box_module(rng, GridPoset.cube(0, 2, 2), 3, 2)
        assert box_module.validate()


def test_closed_form_trial_with_an_infinite_bar():
    box = GridPoset.line(-1, 5)
    expected, observed = closed_form_trial(H(1, 3), H(0, INF), "cosheaf", box)
    assert expected == observed


def test_oracle_suite(small_oracle):
    result = oracle_suite(trials=3, seed=1)
    assert result.ok, result.failures
    assert result.passed == 6


def test_oracle_suite_single_mode(small_oracle):
    result = oracle_suite(trials=2, seed=2, modes=["cosheaf"])
    assert result.ok, result.failures
    assert result.passed == 2


def test_translation_suite(small_oracle):
    result = translation_suite(trials=3, seed=3)
    assert result.ok, result.failures
    assert result.passed == 9


def test_symmetry_suite(small_oracle):
    result = symmetry_suite(trials=3, seed=4)
    assert result.ok, result.failures


def test_adjunction_suite():
    result = adjunction_suite(trials=2, seed=5)
    assert result.ok, result.failures
    assert result.passed == 6


def test_adjunction_suite_in_two_parameters():
    result = adjunction_suite(trials=1, seed=6, parameters=2)
    assert result.ok, result.failures


def test_curry_suite(rng):
    box = GridPoset.cube(0, 2, 2)
    result = curry_suite(random_box_module(rng, box, 3, 3))
    assert result.ok, result.failures
    assert result.passed == len(box.points())


def test_stability_suite():
    result = stability_suite(trials=2, seed=7)
    assert result.ok, result.failures
    assert result.passed == 8


def test_suites_are_deterministic(small_oracle):
    first = translation_suite(trials=2, seed=9).to_dict()
    second = translation_suite(trials=2, seed=9).to_dict()
    assert first == second


def test_oracle_suite_at_the_default_scale():
    started = time.perf_counter()
    result = oracle_suite(trials=200, seed=11)
    assert result.ok, result.failures[:3]
    assert result.passed == 400
    assert time.perf_counter() - started < 60


def test_three_way_suite():
    result = three_way_suite(trials=6, seed=12)
    assert result.ok, result.failures
    assert result.passed == 6


def test_global_sections_suite():
    result = global_sections_suite(trials=4, seed=13)
    assert result.ok, result.failures
    assert result.passed == 24
