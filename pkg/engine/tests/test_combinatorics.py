from collections import Counter
from itertools import combinations, permutations

import pytest

from schubert.exceptions import InvalidBracketError, InvalidPartitionError, InvalidProblemError
from schubert.models.schubert_types import Bracket, CohomologyClass, Partition, SchubertProblem
from schubert.services.combinatorics import (
    bracket_dimension,
    bracket_to_partition,
    codimension,
    condition_order,
    dual_bracket,
    dual_problem,
    format_lr_rule,
    from_multiplicity_matrix,
    is_simple_problem,
    lr_coefficient,
    lr_number,
    multiply_class,
    parse_conditions,
    partition_to_bracket,
    point_bracket,
    richardson_dimension,
    sorting_advice,
    to_multiplicity_matrix,
    trivial_bracket,
    validate_problem,
)


# Schur polynomial oracle: expand each class into monomials in k variables
# via semistandard tableaux and read the box coefficient off the bialternant.


def schur_monomials(shape, k):
    cells = [(r, c) for r, length in enumerate(shape) for c in range(length)]
    result = Counter()
    filling = {}

    def fill(index):
        if index == len(cells):
            exponent = [0] * k
            for value in filling.values():
                exponent[value - 1] += 1
            result[tuple(exponent)] += 1
            return
        r, c = cells[index]
        low = max(filling.get((r, c - 1), 1), filling.get((r - 1, c), 0) + 1)
        for value in range(low, k + 1):
            filling[(r, c)] = value
            fill(index + 1)
            del filling[(r, c)]

    fill(0)
    return result


def multiply(a, b):
    product = Counter()
    for ea, ca in a.items():
        for eb, cb in b.items():
            product[tuple(x + y for x, y in zip(ea, eb))] += ca * cb
    return product


def permutation_sign(p):
    sign = 1
    p = list(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


def oracle_count(problem: SchubertProblem) -> int:
    k, n = problem.k, problem.n
    poly = Counter({(0,) * k: 1})
    for bracket in problem.conditions:
        poly = multiply(poly, schur_monomials(bracket_to_partition(bracket).parts, k))
    delta = tuple(range(k - 1, -1, -1))
    target = tuple(n - k + d for d in delta)
    total = 0
    for sigma in permutations(range(k)):
        shifted = tuple(target[i] - delta[sigma[i]] for i in range(k))
        if min(shifted) >= 0:
            total += permutation_sign(sigma) * poly.get(shifted, 0)
    return total


def all_problems(k, n):
    brackets = [Bracket(entries, n) for entries in combinations(range(1, n + 1), k)]
    brackets = [b for b in brackets if codimension(b) > 0]
    goal = k * (n - k)

    def extend(start, remaining, chosen):
        if remaining == 0:
            yield SchubertProblem(k, n, tuple(chosen))
            return
        for index in range(start, len(brackets)):
            d = codimension(brackets[index])
            if d <= remaining:
                yield from extend(index, remaining - d, chosen + [brackets[index]])

    yield from extend(0, goal, [])


class TestBrackets:
    def test_invalid_brackets_name_the_rule(self):
        with pytest.raises(InvalidBracketError) as e:
            Bracket((2, 2), 4)
        assert e.value.invariant == "increasing"
        with pytest.raises(InvalidBracketError) as e:
            Bracket((0, 3), 4)
        assert e.value.invariant == "range"
        with pytest.raises(InvalidBracketError) as e:
            Bracket((1, 2, 3, 4), 4)
        assert e.value.invariant == "length"

    def test_partition_padding_and_box(self):
        assert Partition((1,), 3, 6).parts == (1, 0, 0)
        assert Partition((2, 1, 0, 0), 2, 5).parts == (2, 1)
        with pytest.raises(InvalidPartitionError):
            Partition((4,), 3, 6)
        with pytest.raises(InvalidPartitionError):
            Partition((1, 2), 2, 5)

    def test_bracket_partition_correspondence(self):
        for n in range(2, 9):
            for k in range(1, n):
                for entries in combinations(range(1, n + 1), k):
                    bracket = Bracket(entries, n)
                    partition = bracket_to_partition(bracket)
                    assert partition_to_bracket(partition) == bracket
                    assert partition.size == codimension(bracket)

    def test_dimension_and_codimension(self):
        assert bracket_dimension(Bracket((2, 4), 4)) == 3
        assert codimension(Bracket((2, 4), 4)) == 1
        assert codimension(Bracket((3, 5, 6), 6)) == 1
        assert codimension(Bracket((3, 5, 7, 8), 8)) == 3
        assert codimension(trivial_bracket(3, 6)) == 0
        assert codimension(point_bracket(3, 6)) == 9

    def test_dual_bracket_keeps_codimension(self):
        for entries in combinations(range(1, 7), 2):
            bracket = Bracket(entries, 6)
            dual = dual_bracket(bracket)
            assert dual.k == 4
            assert codimension(dual) == codimension(bracket)
            assert dual_bracket(dual) == bracket


class TestProblems:
    def test_validate_rejects_wrong_sum(self):
        problem = SchubertProblem.from_brackets(2, 4, [(2, 4)] * 3)
        with pytest.raises(InvalidProblemError) as e:
            validate_problem(problem)
        assert e.value.invariant == "codimension-sum"

    def test_validate_rejects_empty(self):
        with pytest.raises(InvalidProblemError) as e:
            validate_problem(SchubertProblem(2, 4, ()))
        assert e.value.invariant == "nonempty"

    def test_from_brackets_reports_index(self):
        with pytest.raises(InvalidProblemError) as e:
            SchubertProblem.from_brackets(2, 4, [(2, 4), (2, 4), (4, 2), (2, 4)])
        assert e.value.index == 2

    def test_condition_order_is_stable(self, gr48_problem):
        shuffled = SchubertProblem(4, 8, gr48_problem.conditions[::-1])
        order = condition_order(shuffled)
        codims = [codimension(shuffled.conditions[i]) for i in order]
        assert codims == sorted(codims, reverse=True)
        assert order[0] < order[1]

    def test_simple_problem_and_sorting_advice(self, four_lines, gr48_problem):
        assert is_simple_problem(four_lines)
        assert sorting_advice(four_lines)
        assert not is_simple_problem(gr48_problem)
        assert sorting_advice(gr48_problem)
        reversed_problem = SchubertProblem(4, 8, gr48_problem.conditions[::-1])
        assert not sorting_advice(reversed_problem)
        assert sorting_advice(reversed_problem.reordered(condition_order(reversed_problem)))

    def test_richardson_dimension_formula(self):
        for n in range(2, 7):
            for k in range(1, n):
                brackets = [Bracket(e, n) for e in combinations(range(1, n + 1), k)]
                for a in brackets:
                    for b in brackets:
                        dimension = richardson_dimension(a, b)
                        if dimension is not None:
                            assert dimension == k * (n - k) - codimension(a) - codimension(b)
                            assert dimension >= 0

    def test_richardson_examples(self):
        assert richardson_dimension(Bracket((3, 5, 6), 6), Bracket((3, 5, 6), 6)) == 7
        assert richardson_dimension(Bracket((1, 2), 4), Bracket((1, 2), 4)) is None
        assert richardson_dimension(Bracket((1, 2), 4), Bracket((3, 4), 4)) == 0


class TestLittlewoodRichardson:
    def test_small_coefficients(self):
        assert lr_coefficient((2,), (1,), (1,)) == 1
        assert lr_coefficient((1, 1), (1,), (1,)) == 1
        assert lr_coefficient((3, 2, 1), (2, 1), (2, 1)) == 2
        assert lr_coefficient((2, 2), (1,), (2,)) == 0

    def test_benchmark_counts(self, four_lines, gr36_problem, gr48_problem):
        assert lr_number(four_lines) == 2
        assert lr_number(gr36_problem) == 42
        assert lr_number(gr48_problem) == 1530

    def test_single_point_condition(self):
        problem = SchubertProblem(2, 4, (point_bracket(2, 4),))
        assert lr_number(problem) == 1

    def test_order_invariance(self, gr48_problem):
        reversed_problem = SchubertProblem(4, 8, gr48_problem.conditions[::-1])
        assert lr_number(reversed_problem) == 1530

    def test_duality(self):
        problem = SchubertProblem.from_brackets(2, 5, [(3, 5)] * 6)
        assert lr_number(dual_problem(problem)) == lr_number(problem) == 5

    @pytest.mark.parametrize("k,n", [(2, 4), (2, 5), (3, 6)])
    def test_against_schur_oracle(self, k, n):
        checked = 0
        for problem in all_problems(k, n):
            assert lr_number(problem) == oracle_count(problem), problem
            checked += 1
        assert checked > 0

    def test_multiply_class_in_gr24(self):
        sigma1 = Partition((1,), 2, 4)
        square = multiply_class(multiply_class(CohomologyClass.identity(2, 4), sigma1), sigma1)
        assert square.terms == {(2, 0): 1, (1, 1): 1}

    def test_multiply_class_drops_shapes_outside_the_box(self):
        # sigma_21 * sigma_1 = sigma_31 + sigma_22, and (3,1) does not fit in 2x2
        start = CohomologyClass(2, 4, {(2, 1): 1})
        assert multiply_class(start, Partition((1,), 2, 4)).terms == {(2, 2): 1}

    def test_multiply_class_by_empty_partition(self):
        start = CohomologyClass(2, 4, {(1, 0): 3})
        assert multiply_class(start, Partition((), 2, 4)) == start


class TestFormats:
    def test_lr_rule_strings(self, four_lines, gr36_problem, gr48_problem):
        assert format_lr_rule(four_lines) == "[ 2 4 ]^4 = +2[1 2]"
        assert format_lr_rule(gr36_problem) == "[ 3 5 6 ]^9 = +42[1 2 3]"
        assert format_lr_rule(gr48_problem) == "[ 3 5 7 8 ]^2*[ 3 6 7 8 ]^1*[ 4 6 7 8 ]^8 = +1530[1 2 3 4]"

    def test_multiplicity_matrix(self, gr48_problem):
        rows = to_multiplicity_matrix(gr48_problem)
        assert rows == [[2, 3, 5, 7, 8], [1, 3, 6, 7, 8], [8, 4, 6, 7, 8]]
        assert from_multiplicity_matrix(rows, 8).conditions == gr48_problem.conditions

    def test_parse_detects_notation(self):
        from_partitions = parse_conditions([[1]] * 4, 2, 4)
        from_brackets = parse_conditions([[2, 4]] * 4, 2, 4)
        from_rows = parse_conditions([[4, 2, 4]], 2, 4)
        from_dicts = parse_conditions([{"multiplicity": 4, "bracket": [2, 4]}], 2, 4)
        assert from_partitions.conditions == from_brackets.conditions
        assert from_rows.conditions == from_brackets.conditions
        assert from_dicts.conditions == from_brackets.conditions

    def test_parse_zero_padded_partitions(self):
        # length k+1 rows that are no [m, bracket] row are partitions
        padded = parse_conditions([[1, 0, 0]] * 4, 2, 4)
        assert padded.conditions == parse_conditions([[2, 4]] * 4, 2, 4).conditions
        mixed = parse_conditions([[2, 0, 0], [1, 1, 0]], 2, 4)
        assert mixed.conditions == (Bracket((1, 4), 4), Bracket((2, 3), 4))
        assert parse_conditions([[2, 1, 3]], 2, 4).conditions == (Bracket((1, 3), 4),) * 2

    def test_parse_reports_bad_row(self):
        with pytest.raises(InvalidProblemError) as e:
            parse_conditions([[2, 4], [2, 4], [5, 1]], 2, 4, "bracket")
        assert e.value.index == 2
