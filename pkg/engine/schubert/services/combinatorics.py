"""
Schubert conditions as brackets and partitions, problem validation and
counting of solutions with the Littlewood-Richardson rule.
"""

import logging
from collections import Counter
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from schubert.exceptions import (
    InvalidBracketError,
    InvalidPartitionError,
    InvalidProblemError,
    ShapeMismatchError,
)
from schubert.models.schubert_types import Bracket, CohomologyClass, Partition, SchubertProblem

logger = logging.getLogger(__name__)


def bracket_dimension(b: Bracket) -> int:
    """Dimension |a| = sum(a_i - i) of the Schubert variety of b"""
    return sum(entry - i for i, entry in enumerate(b.entries, start=1))


def codimension(b: Bracket) -> int:
    """Codimension ||a|| = k(n-k) - |a|"""
    return b.k * (b.n - b.k) - bracket_dimension(b)


def bracket_to_partition(b: Bracket) -> Partition:
    parts = tuple(b.n - b.k - entry + i for i, entry in enumerate(b.entries, start=1))
    return Partition(parts, b.k, b.n)


def partition_to_bracket(p: Partition) -> Bracket:
    entries = tuple(p.n - p.k - part + i for i, part in enumerate(p.parts, start=1))
    return Bracket(entries, p.n)


def trivial_bracket(k: int, n: int) -> Bracket:
    """The condition {n-k+1, ..., n}, satisfied by every k-plane"""
    return Bracket(tuple(range(n - k + 1, n + 1)), n)


def point_bracket(k: int, n: int) -> Bracket:
    """The condition {1, ..., k}: H = F_k"""
    return Bracket(tuple(range(1, k + 1)), n)


def dual_bracket(b: Bracket) -> Bracket:
    """Bracket on Gr(n-k, n) of the same codimension (complement, reflected)"""
    complement = [j for j in range(1, b.n + 1) if j not in b.entries]
    return Bracket(tuple(sorted(b.n + 1 - j for j in complement)), b.n)


def dual_problem(p: SchubertProblem) -> SchubertProblem:
    return SchubertProblem(p.n - p.k, p.n, tuple(dual_bracket(b) for b in p.conditions))


def validate_problem(p: SchubertProblem) -> None:
    """
    Raise InvalidProblemError unless every bracket lives on Gr(k, n) and the
    codimensions add up to k(n-k).
    """
    if p.k <= 0 or p.n <= p.k:
        raise InvalidProblemError(f"need 0 < k < n, got k={p.k}, n={p.n}", invariant="dimensions")
    if not p.conditions:
        raise InvalidProblemError("a Schubert problem needs at least one condition", invariant="nonempty")
    for index, bracket in enumerate(p.conditions):
        if bracket.k != p.k or bracket.n != p.n:
            raise InvalidProblemError(
                f"condition {index} {bracket} is not a bracket on Gr({p.k},{p.n})",
                invariant="bracket",
                index=index,
            )
    total = sum(codimension(b) for b in p.conditions)
    expected = p.k * (p.n - p.k)
    if total != expected:
        raise InvalidProblemError(
            f"codimensions sum to {total}, but dim Gr({p.k},{p.n}) = {expected}",
            invariant="codimension-sum",
        )


def is_simple_problem(p: SchubertProblem) -> bool:
    """All conditions except possibly the first two have codimension 1"""
    return all(codimension(b) == 1 for b in p.conditions[2:])


def condition_order(p: SchubertProblem) -> List[int]:
    """Indices sorted by decreasing codimension; ties keep the input order"""
    return sorted(range(len(p.conditions)), key=lambda i: (-codimension(p.conditions[i]), i))


def sorting_advice(p: SchubertProblem) -> bool:
    """True when min(||a^1||, ||a^2||) >= max of the remaining codimensions"""
    codims = [codimension(b) for b in p.conditions]
    if len(codims) <= 2:
        return True
    return min(codims[0], codims[1]) >= max(codims[2:])


def richardson_dimension(a: Bracket, b: Bracket) -> Optional[int]:
    """
    Dimension k(n-k) - ||a|| - ||b|| of the intersection of the Schubert
    varieties of a and b for opposite flags, or None when it is empty.
    """
    if a.k != b.k or a.n != b.n:
        raise ShapeMismatchError(f"brackets {a} and {b} live on different Grassmannians")
    k, n = a.k, a.n
    for i in range(k):
        if a.entries[i] + b.entries[k - 1 - i] < n + 1:
            return None
    return k * (n - k) - codimension(a) - codimension(b)


# Littlewood-Richardson rule


@lru_cache(maxsize=None)
def lr_coefficient(outer: Tuple[int, ...], inner: Tuple[int, ...], content: Tuple[int, ...]) -> int:
    """
    Number of LR tableaux of skew shape outer/inner and the given content:
    semistandard fillings whose reverse reading word (rows top to bottom,
    each read right to left) is a lattice word.
    """
    rows = max(len(outer), len(inner))
    outer = tuple(outer) + (0,) * (rows - len(outer))
    inner = tuple(inner) + (0,) * (rows - len(inner))
    content = tuple(c for c in content if c > 0)
    if any(i > o for i, o in zip(inner, outer)):
        return 0
    if sum(outer) - sum(inner) != sum(content):
        return 0
    if not content:
        return 1

    cells = [(r, c) for r in range(rows) for c in reversed(range(inner[r], outer[r]))]
    filling: Dict[Tuple[int, int], int] = {}
    counts = [0] * (len(content) + 1)

    def place(index: int) -> int:
        if index == len(cells):
            return 1
        r, c = cells[index]
        upper = min(len(content), r + 1)
        if (r, c + 1) in filling:
            upper = min(upper, filling[(r, c + 1)])
        lower = filling[(r - 1, c)] + 1 if (r - 1, c) in filling else 1
        total = 0
        for value in range(lower, upper + 1):
            if counts[value] >= content[value - 1]:
                continue
            if value > 1 and counts[value] + 1 > counts[value - 1]:
                continue
            filling[(r, c)] = value
            counts[value] += 1
            total += place(index + 1)
            counts[value] -= 1
            del filling[(r, c)]
        return total

    return place(0)


def _partitions_containing(inner: Tuple[int, ...], cols: int, size: int) -> Iterator[Tuple[int, ...]]:
    """Partitions nu with inner <= nu, nu_1 <= cols and |nu| = size"""
    rows = len(inner)

    def extend(prefix: List[int], remaining: int) -> Iterator[Tuple[int, ...]]:
        r = len(prefix)
        if r == rows:
            if remaining == 0:
                yield tuple(prefix)
            return
        top = cols if r == 0 else prefix[-1]
        # the remaining rows can hold at most top * (rows - r) boxes
        for part in range(min(top, remaining + inner[r]), inner[r] - 1, -1):
            rest = remaining - (part - inner[r])
            if rest > part * (rows - r - 1):
                break
            prefix.append(part)
            yield from extend(prefix, rest)
            prefix.pop()

    yield from extend([], size - sum(inner))


def multiply_class(c: CohomologyClass, p: Partition) -> CohomologyClass:
    """Product c * sigma_p, truncated to partitions fitting in the k x (n-k) box"""
    if p.k != c.k or p.n != c.n:
        raise InvalidPartitionError(
            f"partition {p} is not in the {c.k}x{c.n - c.k} box", invariant="box"
        )
    if p.size == 0:
        return c
    cols = c.n - c.k
    result: Dict[Tuple[int, ...], int] = {}
    for inner, coefficient in c.terms.items():
        for outer in _partitions_containing(inner, cols, sum(inner) + p.size):
            lr = lr_coefficient(outer, inner, p.parts)
            if lr:
                result[outer] = result.get(outer, 0) + coefficient * lr
    return CohomologyClass(c.k, c.n, result)


def lr_number(p: SchubertProblem) -> int:
    """Number of solutions d(a) of the Schubert problem for general flags"""
    validate_problem(p)
    product = CohomologyClass.identity(p.k, p.n)
    for bracket in sorted(p.conditions, key=codimension, reverse=True):
        product = multiply_class(product, bracket_to_partition(bracket))
        if not product.terms:
            break
    count = product.coefficient((p.n - p.k,) * p.k)
    logger.debug(f"LR number of {len(p)} conditions on Gr({p.k},{p.n}) is {count}")
    return count


# Grouping and output formats


def grouped_conditions(p: SchubertProblem) -> List[Tuple[Bracket, int]]:
    """Distinct brackets with multiplicities, by decreasing codimension then lexicographically"""
    counts = Counter(p.conditions)
    return sorted(counts.items(), key=lambda item: (-codimension(item[0]), item[0].entries))


def format_lr_rule(p: SchubertProblem) -> str:
    """Render the product as e.g. '[ 2 4 ]^4 = +2[1 2]'"""
    count = lr_number(p)
    factors = [
        "[ " + " ".join(str(e) for e in bracket.entries) + " ]^" + str(multiplicity)
        for bracket, multiplicity in grouped_conditions(p)
    ]
    point = " ".join(str(i) for i in range(1, p.k + 1))
    return "*".join(factors) + f" = +{count}[{point}]"


def to_multiplicity_matrix(p: SchubertProblem) -> List[List[int]]:
    """Rows [m, b_1, ..., b_k]: bracket b appears m times"""
    return [[multiplicity, *bracket.entries] for bracket, multiplicity in grouped_conditions(p)]


def from_multiplicity_matrix(rows: Sequence[Sequence[int]], n: int) -> SchubertProblem:
    if not rows:
        raise InvalidProblemError("empty multiplicity matrix", invariant="nonempty")
    k = len(rows[0]) - 1
    brackets: List[Sequence[int]] = []
    for index, row in enumerate(rows):
        if len(row) != k + 1:
            raise InvalidProblemError(f"row {index} has length {len(row)}, expected {k + 1}", index=index)
        if int(row[0]) < 1:
            raise InvalidProblemError(f"row {index} has multiplicity {row[0]}", invariant="multiplicity", index=index)
        brackets.extend([tuple(row[1:])] * int(row[0]))
    return SchubertProblem.from_brackets(k, n, brackets)


ConditionRow = Union[Sequence[int], Dict[str, object]]


def _is_bracket_row(values: Sequence[int], n: int) -> bool:
    return all(1 <= a <= n for a in values) and all(a < b for a, b in zip(values, values[1:]))


def _detect_notation(row: ConditionRow, k: int, n: int) -> str:
    if isinstance(row, dict):
        return "multiplicity"
    values = list(row)
    # a partition padded with zeros to length k+1 is never a valid [m, bracket] row
    if len(values) == k + 1 and values[0] >= 1 and _is_bracket_row(values[1:], n):
        return "multiplicity"
    if len(values) == k and all(a < b for a, b in zip(values, values[1:])) and (k == 1 or values[0] >= 1):
        return "bracket"
    return "partition"


def parse_conditions(
    rows: Sequence[ConditionRow], k: int, n: int, notation: Optional[str] = None
) -> SchubertProblem:
    """
    Build a problem from brackets, partitions (trailing zeros may be
    omitted) or multiplicity rows ([m, b...] lists or {"multiplicity", "bracket"}).
    The notation is detected per row when not declared.
    """
    brackets: List[Bracket] = []
    for index, row in enumerate(rows):
        kind = notation or _detect_notation(row, k, n)
        try:
            if kind == "bracket":
                brackets.append(Bracket(tuple(row), n))
            elif kind == "partition":
                brackets.append(partition_to_bracket(Partition(tuple(row), k, n)))
            elif kind == "multiplicity":
                if isinstance(row, dict):
                    multiplicity = int(row.get("multiplicity", 1))
                    entries = tuple(row["bracket"])
                else:
                    multiplicity, entries = int(row[0]), tuple(row[1:])
                if multiplicity < 1:
                    raise InvalidProblemError(
                        f"condition {index} has multiplicity {multiplicity}", invariant="multiplicity", index=index
                    )
                brackets.extend([Bracket(entries, n)] * multiplicity)
            else:
                raise InvalidProblemError(f"unknown notation {kind!r}", invariant="notation", index=index)
        except (InvalidBracketError, InvalidPartitionError) as e:
            raise InvalidProblemError(f"condition {index}: {str(e)}", invariant=e.invariant, index=index)
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidProblemError(f"condition {index} is malformed: {str(e)}", invariant="format", index=index)
    problem = SchubertProblem(k, n, tuple(brackets))
    for index, bracket in enumerate(problem.conditions):
        if bracket.k != k:
            raise InvalidProblemError(
                f"condition {index} {bracket} has length {bracket.k}, expected k={k}", invariant="bracket", index=index
            )
    return problem
