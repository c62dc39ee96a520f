#!/usr/bin/env python3
from fractions import Fraction
from itertools import combinations

import pytest

from scenario_binpack import heuristic
from scenario_binpack.bench import standard_classes
from scenario_binpack.bounds import lb_root
from scenario_binpack.core import check_feasible, singleton_solution, val_bpps
from scenario_binpack.enumeration import solve_enumeration
from scenario_binpack.exceptions import InfeasibleSolutionError, InvalidParameterError
from scenario_binpack.generator import generate_instance, make_rng
from scenario_binpack.heuristic import (
    FRESH,
    Move,
    MoveKind,
    VnsConfig,
    apply_move,
    enumerate_neighbors,
    ffd_construct,
    fitness,
    local_search,
    shake,
    vns,
)
from scenario_binpack.models import Solution

from .conftest import build


def brute_force_moves(inst, bins, kappa):
    """Independent move generator: build each neighbor and check it."""
    where = {i: b for b, items in enumerate(bins) for i in items}
    n_bins = len(bins)

    def feasible(new_bins):
        return check_feasible(inst, Solution.from_bins([b for b in new_bins if b])).ok

    def copy():
        return [list(b) for b in bins]

    moves = []
    if kappa == 1:
        for i in range(inst.n):
            for j in range(i + 1, inst.n):
                if where[i] == where[j]:
                    continue
                new = copy()
                new[where[i]] = [j if x == i else x for x in new[where[i]]]
                new[where[j]] = [i if x == j else x for x in new[where[j]]]
                if feasible(new):
                    moves.append((i, j))
    elif kappa == 2:
        for i in range(inst.n):
            for t in list(range(n_bins)) + [FRESH]:
                if t == where[i]:
                    continue
                new = copy()
                new[where[i]].remove(i)
                if t == FRESH:
                    new.append([i])
                else:
                    new[t].append(i)
                if feasible(new):
                    moves.append((i, t))
    elif kappa == 3:
        for b1 in range(n_bins):
            if len(bins[b1]) < 2:
                continue
            targets = [t for t in range(n_bins) if t != b1] + [FRESH]
            for i, j in combinations(sorted(bins[b1]), 2):
                for t2 in targets:
                    for t3 in targets:
                        new = copy()
                        new[b1] = [x for x in new[b1] if x not in (i, j)]
                        if t2 == t3 == FRESH:
                            new.append([i, j])
                        else:
                            for t, x in ((t2, i), (t3, j)):
                                if t == FRESH:
                                    new.append([x])
                                else:
                                    new[t].append(x)
                        if feasible(new):
                            moves.append((b1, i, j, t2, t3))
    else:
        moves = [(b,) for b in range(n_bins)]
    return moves


FIVE = build([50, 40, 30, 60, 20], [{0}, {0, 1}, {1}, {0}, {1, 2}])
FIVE_BINS = [[0, 1], [2, 4], [3]]


# construction and fitness


def test_ffd_disjoint_items_share_a_bin(two_disjoint):
    assert ffd_construct(two_disjoint).bins == ((0, 1),)


def test_ffd_conflicting_items_split(two_conflicting):
    assert ffd_construct(two_conflicting).bins == ((0,), (1,))


def test_ffd_orders_by_size(make_instance):
    inst = make_instance([20, 70, 30], [{0}, {0}, {0}])
    assert ffd_construct(inst).bins == ((1, 2), (0,))


def test_ffd_never_beats_the_optimum():
    for seed in range(40):
        inst = generate_instance(7, 4, seed)
        assert val_bpps(inst, ffd_construct(inst)) >= val_bpps(inst, solve_enumeration(inst))


def test_fitness_of_full_single_bin():
    inst = build([100], [{0}])
    assert fitness(inst, Solution.from_bins([[0]])) == 0


def test_fitness_of_half_full_bin():
    inst = build([50], [{0}])
    assert fitness(inst, Solution.from_bins([[0]])) == Fraction(3, 4)


def test_fuller_bins_have_lower_fitness():
    inst = build([50, 50, 30, 30], [{0}] * 4)
    fuller = Solution.from_bins([[0, 1], [2, 3]])
    balanced = Solution.from_bins([[0, 2], [1, 3]])
    assert val_bpps(inst, fuller) == val_bpps(inst, balanced) == 2
    assert fitness(inst, fuller) == Fraction(83, 50)
    assert fitness(inst, balanced) == Fraction(84, 50)
    assert fitness(inst, fuller) < fitness(inst, balanced)


def test_fitness_rejects_infeasible(two_conflicting):
    with pytest.raises(InfeasibleSolutionError):
        fitness(two_conflicting, Solution.from_bins([[0, 1]]))


# neighborhoods


def test_conflicting_pair_neighborhoods(two_conflicting):
    sol = Solution.from_bins([[0], [1]])
    swaps = list(enumerate_neighbors(two_conflicting, sol, 1))
    assert swaps == [Move(MoveKind.SWAP, (0, 1))]
    relocations = list(enumerate_neighbors(two_conflicting, sol, 2))
    assert [m.operands for m in relocations] == [(0, FRESH), (1, FRESH)]
    assert list(enumerate_neighbors(two_conflicting, sol, 3)) == []


@pytest.mark.parametrize("kappa", [1, 2, 3, 4])
def test_neighbor_enumeration_matches_brute_force(kappa):
    sol = Solution.from_bins(FIVE_BINS)
    assert check_feasible(FIVE, sol).ok
    moves = [m.operands for m in enumerate_neighbors(FIVE, sol, kappa)]
    assert moves == brute_force_moves(FIVE, FIVE_BINS, kappa)


def test_every_enumerated_move_stays_feasible():
    sol = Solution.from_bins(FIVE_BINS)
    for kappa in (1, 2, 3, 4):
        for move in enumerate_neighbors(FIVE, sol, kappa):
            assert check_feasible(FIVE, apply_move(FIVE, sol, move)).ok


def test_dissolve_last_bin_into_others(make_instance):
    inst = make_instance([30, 30, 30], [{0}] * 3)
    sol = Solution.from_bins([[0, 1], [2]])
    assert apply_move(inst, sol, Move(MoveKind.DISSOLVE, (1,))).bins == ((0, 1, 2),)


def test_split_pair_into_one_fresh_bin():
    sol = Solution.from_bins(FIVE_BINS)
    moved = apply_move(FIVE, sol, Move(MoveKind.SPLIT_PAIR, (0, 0, 1, FRESH, FRESH)))
    assert moved.canonical() == {frozenset({2, 4}), frozenset({3}), frozenset({0, 1})}


def test_apply_move_rejects_capacity_break(two_conflicting):
    sol = Solution.from_bins([[0], [1]])
    with pytest.raises(InvalidParameterError):
        apply_move(two_conflicting, sol, Move(MoveKind.RELOCATE, (0, 1)))


def test_kappa_out_of_range(two_conflicting):
    sol = Solution.from_bins([[0], [1]])
    with pytest.raises(InvalidParameterError):
        list(enumerate_neighbors(two_conflicting, sol, 5))
    with pytest.raises(InvalidParameterError):
        shake(two_conflicting, sol, 0, make_rng(1))


# shake


def test_shake_singleton_neighborhood(two_conflicting):
    sol = Solution.from_bins([[0], [1]])
    assert shake(two_conflicting, sol, 1, make_rng(3)).bins == ((1,), (0,))


def test_shake_empty_neighborhood_returns_input(two_conflicting):
    sol = Solution.from_bins([[0], [1]])
    assert shake(two_conflicting, sol, 3, make_rng(3)) == sol


def test_shake_is_deterministic_for_a_seed():
    sol = Solution.from_bins(FIVE_BINS)
    for kappa in (1, 2, 3, 4):
        a = shake(FIVE, sol, kappa, make_rng(11))
        b = shake(FIVE, sol, kappa, make_rng(11))
        assert a == b
        assert check_feasible(FIVE, a).ok


# local search


def test_local_search_keeps_a_local_optimum():
    inst = build([100], [{0}])
    sol = Solution.from_bins([[0]])
    assert local_search(inst, sol) == sol


def test_local_search_merges_mergeable_bins(make_instance):
    inst = make_instance([40, 40], [{0}, {0}])
    result = local_search(inst, Solution.from_bins([[0], [1]]))
    assert result.n_bins == 1
    assert val_bpps(inst, result) == 1


def test_local_search_never_worsens_fitness():
    for seed in range(30):
        inst = generate_instance(8, 4, seed)
        start = singleton_solution(inst)
        result = local_search(inst, start)
        assert check_feasible(inst, result).ok
        assert fitness(inst, result) <= fitness(inst, start)


def test_local_search_rejects_bad_input(two_conflicting):
    with pytest.raises(InvalidParameterError):
        local_search(two_conflicting, Solution.from_bins([[0], [1]]), n_max=5)
    with pytest.raises(InfeasibleSolutionError):
        local_search(two_conflicting, Solution.from_bins([[0, 1]]))


# VNS


def test_vns_stops_at_cmax_when_ffd_is_optimal(two_conflicting):
    solution, stats = vns(two_conflicting, config=VnsConfig(c_max=3, seed=1))
    assert val_bpps(two_conflicting, solution) == 2
    assert stats.iterations == 3
    assert stats.improvements == 0
    assert stats.history == [(0, 2)]


def test_vns_is_deterministic_for_a_seed():
    inst = generate_instance(10, 5, 99)
    config = VnsConfig(t_max=1e6, c_max=5, seed=4)
    a, stats_a = vns(inst, config=config)
    b, stats_b = vns(inst, config=config)
    assert a == b
    assert stats_a.iterations == stats_b.iterations


def test_vns_best_value_is_monotone_and_bounded():
    inst = generate_instance(10, 10, 3)
    solution, stats = vns(inst, config=VnsConfig(c_max=10, seed=2))
    values = [v for _, v in stats.history]
    assert values == sorted(values, reverse=True)
    assert values[-1] == val_bpps(inst, solution)
    assert lb_root(inst) <= val_bpps(inst, solution) <= val_bpps(inst, ffd_construct(inst))


def test_vns_reaches_the_optimum_on_small_classes():
    hits = 0
    for seed in range(5):
        inst = generate_instance(10, 5, seed)
        solution, _ = vns(inst, config=VnsConfig(c_max=30, seed=seed))
        hits += val_bpps(inst, solution) == val_bpps(inst, solve_enumeration(inst))
    assert hits >= 4


@pytest.mark.slow
def test_vns_defaults_match_the_optimum_on_the_n10_classes():
    hits = total = 0
    for bench_class in standard_classes(ns=(10,)):
        for _, inst in bench_class.instances():
            solution, _ = vns(inst)
            hits += val_bpps(inst, solution) == val_bpps(inst, solve_enumeration(inst))
            total += 1
    assert total == 30
    assert hits >= 27


def test_vns_shakes_below_the_last_neighborhood(monkeypatch):
    shaken = []
    real_shake = heuristic._shake

    def recording_shake(packing, kappa, rng):
        shaken.append(kappa)
        return real_shake(packing, kappa, rng)

    monkeypatch.setattr(heuristic, "_shake", recording_shake)
    vns(generate_instance(10, 5, 2), config=VnsConfig(c_max=5, seed=0))
    assert shaken
    assert max(shaken) == 3
    assert 4 not in shaken


def test_vns_config_rejects_other_neighborhood_counts():
    with pytest.raises(ValueError):
        VnsConfig(n_max=3)
