#!/usr/bin/env python3
import json

import numpy as np
import pytest

from scenario_binpack.core import (
    check_feasible,
    ensure_feasible,
    scenario_bin_counts,
    singleton_solution,
    val_bpps,
    val_vbpp,
)
from scenario_binpack.exceptions import (
    InfeasibleSolutionError,
    InstanceFormatError,
    InvalidParameterError,
)
from scenario_binpack.formats import (
    parse_instance,
    parse_solution_record,
    read_instance,
    serialize_instance,
    serialize_solution,
    write_instance,
)
from scenario_binpack.generator import derive_seed, generate_instance
from scenario_binpack.models import Instance, Pattern, Solution

from .conftest import build


# feasibility


def test_disjoint_scenarios_share_a_bin(two_disjoint):
    report = check_feasible(two_disjoint, Solution.from_bins([[0, 1]]))
    assert report.ok
    assert report.summary() == "ok"


def test_shared_scenario_overload_is_reported(two_conflicting):
    report = check_feasible(two_conflicting, Solution.from_bins([[0, 1]]))
    assert not report.ok
    (violation,) = report.violations
    assert violation.kind == "capacity"
    assert violation.scenario == 0
    assert violation.load == 120
    assert violation.overload == 20


def test_duplicate_and_missing_items(make_instance):
    inst = make_instance([10, 10, 10], [{0}, {0}, {0}])
    report = check_feasible(inst, Solution.from_bins([[0], [0, 1]]))
    kinds = sorted(v.kind for v in report.violations)
    assert kinds == ["duplicate", "missing"]
    assert any(v.item == 2 for v in report.violations if v.kind == "missing")


def test_unknown_item_and_empty_bin(make_instance):
    inst = make_instance([10], [{0}])
    report = check_feasible(inst, Solution.from_bins([[0], [], [7]]))
    kinds = {v.kind for v in report.violations}
    assert kinds == {"empty_bin", "unknown_item"}


def test_ensure_feasible_raises_with_summary(two_conflicting):
    with pytest.raises(InfeasibleSolutionError) as exc:
        ensure_feasible(two_conflicting, Solution.from_bins([[0, 1]]))
    assert "exceeds capacity by 20" in str(exc.value)
    assert not exc.value.report.ok


# objectives


def test_val_bpps_counts_bins_per_scenario(two_disjoint, two_conflicting):
    assert val_bpps(two_disjoint, Solution.from_bins([[0], [1]])) == 1
    assert val_bpps(two_conflicting, Solution.from_bins([[0], [1]])) == 2


def test_val_bpps_of_empty_instance_is_zero():
    inst = Instance(n=0, d=1, capacity=100, sizes=(), scenarios=())
    assert val_bpps(inst, Solution()) == 0


def test_val_bpps_rejects_infeasible(two_conflicting):
    with pytest.raises(InfeasibleSolutionError):
        val_bpps(two_conflicting, Solution.from_bins([[0, 1]]))


def test_val_vbpp_and_sandwich(random_instance):
    assert val_vbpp(Solution.from_bins([[0], [1]])) == 2
    assert val_vbpp(Solution.from_bins([[0, 1, 2]])) == 1
    for seed in range(20):
        inst = random_instance(8, 4, seed)
        sol = singleton_solution(inst)
        assert 1 <= val_bpps(inst, sol) <= val_vbpp(sol) == inst.n


def test_scenario_bin_counts(make_instance):
    inst = make_instance([30, 30, 30], [{0}, {0, 1}, {2}])
    counts = scenario_bin_counts(inst, Solution.from_bins([[0, 2], [1]]))
    assert counts.tolist() == [2, 1, 1]


# models


def test_instance_rejects_bad_invariants():
    with pytest.raises(ValueError):
        Instance(n=1, d=1, capacity=100, sizes=(101,), scenarios=(frozenset({0}),))
    with pytest.raises(ValueError):
        Instance(n=1, d=2, capacity=100, sizes=(10,), scenarios=(frozenset(),))
    with pytest.raises(ValueError):
        Instance(n=1, d=2, capacity=100, sizes=(10,), scenarios=(frozenset({2}),))


def test_consumption_and_scenario_items(make_instance):
    inst = make_instance([50, 20], [{1}, {0, 1}], d=3)
    assert inst.consumption.tolist() == [[0, 50, 0], [20, 20, 0]]
    assert inst.scenario_items(1) == (0, 1)
    assert inst.scenario_items(2) == ()
    assert inst.scenario_loads().tolist() == [20, 70, 0]


def test_pattern_touched_scenarios(make_instance):
    inst = make_instance([50, 20, 40], [{1}, {0, 1}, {2}])
    pattern = Pattern.from_items(inst, [0, 1])
    assert pattern.touched_scenarios == {0, 1}
    assert pattern.loads(inst).tolist() == [20, 70, 0]
    assert pattern.is_feasible(inst)
    assert not Pattern(items=frozenset({0}), touched_scenarios=frozenset({0})).is_feasible(inst)


# generator


def test_generator_is_deterministic():
    a = generate_instance(10, 5, 42)
    b = generate_instance(10, 5, 42)
    assert a == b
    assert serialize_instance(a) == serialize_instance(b)
    assert generate_instance(10, 5, 43) != a


def test_generator_large_instance_holds_invariants():
    inst = generate_instance(200, 400, 7)
    assert inst.n == 200 and inst.d == 400
    assert all(1 <= s <= 99 for s in inst.sizes)
    assert all(inst.scenarios)


def test_generator_membership_rate():
    sizes = []
    for seed in range(10):
        inst = generate_instance(100, 100, seed)
        sizes.extend(len(k) for k in inst.scenarios)
    assert 45 <= np.mean(sizes) <= 55


def test_generator_rejects_bad_ranges():
    with pytest.raises(InvalidParameterError):
        generate_instance(0, 5, 1)
    with pytest.raises(InvalidParameterError):
        generate_instance(5, 5, 1, size_lo=50, size_hi=40)
    with pytest.raises(InvalidParameterError):
        generate_instance(5, 5, 1, p=0.0)


def test_derive_seed_separates_classes_and_replicates():
    seeds = {derive_seed(0, c, r) for c in range(12) for r in range(10)}
    assert len(seeds) == 120
    assert derive_seed(3, 1, 2) == derive_seed(3, 1, 2)


# text format


def test_parse_instance_basic():
    inst = parse_instance("3 2 100\n50 2 1 2\n30 1 1\n20 1 2\n")
    assert (inst.n, inst.d, inst.capacity) == (3, 2, 100)
    assert inst.sizes == (50, 30, 20)
    assert inst.scenarios[0] == {0, 1}


def test_parse_instance_comments_and_name():
    inst = parse_instance("# name: toy\n# comment\n1 1 10\n\n5 1 1\n")
    assert inst.name == "toy"
    assert inst.sizes == (5,)


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("3 2 100\n50 2 1 2\n30 1 3\n20 1 2\n", 3, "scenario index 3"),
        ("1 2 100\n50 0\n", 2, "empty scenario set"),
        ("1 2 100\n50 2 1\n", 2, "does not match"),
        ("1 2 100\nfifty 1 1\n", 2, "expected integers"),
        ("2 2 100\n50 1 1\n", 2, "expected 2 item lines"),
        ("1 2\n", 1, "header"),
        ("1 2 100\n150 1 1\n", 2, "outside [1, 100]"),
        ("1 2 100\n50 2 1 1\n", 2, "repeated"),
    ],
)
def test_parse_instance_errors_name_the_line(text, line, fragment):
    with pytest.raises(InstanceFormatError) as exc:
        parse_instance(text)
    assert exc.value.line == line
    assert fragment in str(exc.value)
    assert str(exc.value).startswith(f"line {line}:")


def test_serialize_then_parse_preserves_instance():
    inst = generate_instance(12, 6, 5, name="r12")
    assert parse_instance(serialize_instance(inst)) == inst


def test_write_and_read_instance(tmp_path):
    inst = build([10, 20], [{0}, {0, 2}], d=3)
    path = write_instance(inst, tmp_path / "toy.txt")
    back = read_instance(path)
    assert back.name == "toy"
    assert back.model_copy(update={"name": None}) == inst


# solution records


def test_solution_record_one_item():
    inst = build([10], [{0}])
    text = serialize_solution(
        inst, Solution.from_bins([[0]]), {"algorithm": "ffd", "time_s": 0.01, "status": "optimal"}
    )
    data = json.loads(text)
    assert data["bins"] == [[0]]
    assert data["val_bpps"] == 1
    assert data["val_vbpp"] == 1
    assert data["lower_bound"] is None


def test_solution_record_carries_bound_and_metadata():
    inst = build([60, 60], [{0}, {0}])
    text = serialize_solution(
        inst,
        Solution.from_bins([[0], [1]]),
        {"algorithm": "bp", "time_s": 1.5, "status": "optimal", "lower_bound": 2, "nodes": 1},
    )
    record = parse_solution_record(text)
    assert record.algorithm == "bp"
    assert record.lower_bound == 2
    assert record.metadata == {"nodes": 1}
    assert record.to_solution().canonical() == {frozenset({0}), frozenset({1})}


def test_solution_record_rejects_infeasible(two_conflicting):
    with pytest.raises(InfeasibleSolutionError):
        serialize_solution(
            two_conflicting,
            Solution.from_bins([[0, 1]]),
            {"algorithm": "x", "time_s": 0.0, "status": "gap"},
        )
