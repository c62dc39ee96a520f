#!/usr/bin/env python3
import math

import numpy as np
import pytest

from scenario_binpack.exceptions import InvalidParameterError
from scenario_binpack.lp import LpModel, LpProblem, fix_variable_upper, solve_lp

TOL = 1e-6


def two_var_model() -> LpModel:
    # min x0 + 2 x1  s.t.  x0 + x1 >= 1, both in [0, 1]
    problem = LpProblem(
        objective=[1.0, 2.0],
        columns=[([0], [1.0]), ([0], [1.0])],
        senses=[">="],
        rhs=[1.0],
        lower=[0.0, 0.0],
        upper=[1.0, 1.0],
    )
    return LpModel(problem)


def random_lp(rng: np.random.Generator) -> LpProblem:
    """Feasible bounded LP built around a random interior point."""
    m = int(rng.integers(2, 6, endpoint=True))
    n = int(rng.integers(3, 8, endpoint=True))
    a = rng.integers(-3, 3, size=(m, n), endpoint=True).astype(float)
    upper = rng.integers(1, 5, size=n, endpoint=True).astype(float)
    x0 = rng.random(n) * upper
    senses, rhs = [], []
    for r in range(m):
        row = float(a[r] @ x0)
        if rng.random() < 0.5:
            senses.append("<=")
            rhs.append(row + float(rng.random()))
        else:
            senses.append(">=")
            rhs.append(row - float(rng.random()))
    columns = []
    for j in range(n):
        rows = np.flatnonzero(a[:, j]).tolist()
        columns.append((rows, a[rows, j].tolist()))
    return LpProblem(
        objective=rng.integers(-5, 5, size=n, endpoint=True).astype(float).tolist(),
        columns=columns,
        senses=senses,
        rhs=rhs,
        lower=[0.0] * n,
        upper=upper.tolist(),
    )


def test_single_variable_lower_row():
    problem = LpProblem(
        objective=[1.0], columns=[([0], [1.0])], senses=[">="], rhs=[3.0], lower=[0.0], upper=[10.0]
    )
    solution = solve_lp(problem)
    assert solution.status == "optimal"
    assert solution.x == pytest.approx([3.0])
    assert solution.duals == pytest.approx([1.0])
    assert solution.objective == pytest.approx(3.0)


def test_toy_master_with_two_conflicting_items():
    # F, bin {0}, bin {1}; both bins touch the single scenario
    problem = LpProblem(
        objective=[1.0, 0.0, 0.0],
        columns=[([2], [-1.0]), ([0, 2], [1.0, 1.0]), ([1, 2], [1.0, 1.0])],
        senses=[">=", ">=", "<="],
        rhs=[1.0, 1.0, 0.0],
        lower=[0.0, 0.0, 0.0],
        upper=[2.0, 1.0, 1.0],
    )
    solution = solve_lp(problem)
    assert solution.status == "optimal"
    assert solution.objective == pytest.approx(2.0)
    alpha, beta = solution.duals[:2], solution.duals[2]
    assert sum(alpha) == pytest.approx(2.0)
    assert min(alpha) >= -TOL
    assert beta <= TOL


def test_duplicate_columns_terminate():
    n = 3
    columns = [([n], [-1.0])]
    for i in range(n):
        for _ in range(5):
            columns.append(([i, n], [1.0, 1.0]))
    k = len(columns)
    problem = LpProblem(
        objective=[1.0] + [0.0] * (k - 1),
        columns=columns,
        senses=[">="] * n + ["<="],
        rhs=[1.0] * n + [0.0],
        lower=[0.0] * k,
        upper=[float(n)] + [1.0] * (k - 1),
    )
    solution = solve_lp(problem)
    assert solution.status == "optimal"
    assert solution.objective == pytest.approx(3.0)


def test_infeasible_and_unbounded():
    infeasible = LpProblem(
        objective=[1.0], columns=[([0], [1.0])], senses=[">="], rhs=[3.0], lower=[0.0], upper=[2.0]
    )
    assert solve_lp(infeasible).status == "infeasible"
    unbounded = LpProblem(
        objective=[-1.0], columns=[([0], [1.0])], senses=[">="], rhs=[0.0], lower=[0.0], upper=[math.inf]
    )
    assert solve_lp(unbounded).status == "unbounded"


def test_problem_without_rows():
    problem = LpProblem(objective=[1.0, -1.0], columns=[([], []), ([], [])], lower=[1.0, 0.0], upper=[4.0, 2.0])
    solution = solve_lp(problem)
    assert solution.status == "optimal"
    assert solution.x == [1.0, 2.0]
    assert solution.objective == pytest.approx(-1.0)


def test_random_lps_are_primal_and_dual_feasible():
    rng = np.random.default_rng(31)
    for _ in range(200):
        problem = random_lp(rng)
        solution = solve_lp(problem)
        assert solution.status == "optimal"
        a = problem.dense_matrix()
        x = np.asarray(solution.x)
        y = np.asarray(solution.duals)
        lower, upper = np.asarray(problem.lower), np.asarray(problem.upper)
        assert (x >= lower - TOL).all() and (x <= upper + TOL).all()
        activity = a @ x
        for r, sense in enumerate(problem.senses):
            if sense == "<=":
                assert activity[r] <= problem.rhs[r] + TOL
                assert y[r] <= TOL
            else:
                assert activity[r] >= problem.rhs[r] - TOL
                assert y[r] >= -TOL
        d = np.asarray(problem.objective) - y @ a
        dual_objective = float(np.asarray(problem.rhs) @ y + upper @ np.minimum(d, 0.0))
        assert solution.objective == pytest.approx(dual_objective, abs=TOL * (1 + abs(dual_objective)))


def test_solve_is_deterministic():
    problem = random_lp(np.random.default_rng(5))
    first, second = solve_lp(problem), solve_lp(problem)
    assert first.x == second.x
    assert first.duals == second.duals


def test_fix_variable_upper_drives_basic_variable_out():
    model = two_var_model()
    assert model.solve().objective == pytest.approx(1.0)
    fix_variable_upper(model, 0, 0.0)
    solution = model.solve()
    assert solution.status == "optimal"
    assert solution.x == pytest.approx([0.0, 1.0])
    assert solution.objective == pytest.approx(2.0)
    fix_variable_upper(model, 0, 1.0)
    assert model.solve().objective == pytest.approx(1.0)


def test_fixing_every_cover_makes_the_master_infeasible():
    model = two_var_model()
    model.solve()
    fix_variable_upper(model, 0, 0.0)
    fix_variable_upper(model, 1, 0.0)
    assert model.solve().status == "infeasible"


def test_fix_variable_upper_rejects_bad_bounds():
    model = two_var_model()
    with pytest.raises(InvalidParameterError):
        fix_variable_upper(model, 0, -1.0)
    with pytest.raises(InvalidParameterError):
        fix_variable_upper(model, 7, 1.0)


def test_added_column_is_used_after_warm_start():
    model = two_var_model()
    model.solve()
    j = model.add_column(0.5, [0], [1.0], 0.0, 1.0)
    solution = model.solve()
    assert solution.objective == pytest.approx(0.5)
    assert solution.x[j] == pytest.approx(1.0)


def test_problem_validation():
    with pytest.raises(ValueError):
        LpProblem(objective=[1.0], columns=[([0], [1.0])], senses=[">="], rhs=[1.0], lower=[2.0], upper=[1.0])
    with pytest.raises(ValueError):
        LpProblem(objective=[1.0], columns=[([3], [1.0])], senses=[">="], rhs=[1.0], lower=[0.0], upper=[1.0])
    problem = two_var_model().problem
    with pytest.raises(InvalidParameterError):
        problem.add_column(1.0, [5], [1.0])


def test_lp_format_export():
    problem = LpProblem(
        objective=[1.0, 0.0],
        columns=[([0], [1.0]), ([0], [1.0])],
        senses=[">="],
        rhs=[1.0],
        lower=[0.0, 0.0],
        upper=[math.inf, 1.0],
        names=["F", "a"],
    )
    text = problem.to_lp_format()
    assert text.startswith("Minimize\n obj: 1 F\n")
    assert " r0: 1 F + 1 a >= 1" in text
    assert " 0 <= F <= +inf" in text
    assert text.endswith("End\n")
