"""
Value types shared by the combinatorial and numerical services.

Brackets and partitions are the two encodings of a Schubert condition on
Gr(k, n); a bracket a_1 < ... < a_k and its partition satisfy
a_i - i + p_i = n - k.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from schubert.exceptions import InvalidBracketError, InvalidPartitionError, InvalidProblemError, ShapeMismatchError


@dataclass(frozen=True, order=True)
class Bracket:
    """Strictly increasing sequence 1 <= a_1 < ... < a_k <= n"""

    entries: Tuple[int, ...]
    n: int

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        k = len(entries)
        if k == 0 or k >= self.n:
            raise InvalidBracketError(
                f"bracket {list(entries)} has length {k}, need 0 < k < n={self.n}", invariant="length"
            )
        if entries[0] < 1 or entries[-1] > self.n:
            raise InvalidBracketError(
                f"bracket {list(entries)} leaves the range [1, {self.n}]", invariant="range"
            )
        for left, right in zip(entries, entries[1:]):
            if left >= right:
                raise InvalidBracketError(
                    f"bracket {list(entries)} is not strictly increasing", invariant="increasing"
                )

    @property
    def k(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: int) -> int:
        return self.entries[index]

    def __str__(self) -> str:
        return "{" + ",".join(str(e) for e in self.entries) + "}"


@dataclass(frozen=True)
class Partition:
    """
    Weakly decreasing sequence n-k >= p_1 >= ... >= p_k >= 0.
    Shorter inputs are padded with trailing zeros to length k.
    """

    parts: Tuple[int, ...]
    k: int
    n: int

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if len(parts) > self.k:
            # trailing zeros beyond k are harmless
            if any(parts[self.k:]):
                raise InvalidPartitionError(
                    f"partition {list(parts)} has more than k={self.k} nonzero parts", invariant="length"
                )
            parts = parts[: self.k]
        parts = parts + (0,) * (self.k - len(parts))
        object.__setattr__(self, "parts", parts)
        if self.k <= 0 or self.k >= self.n:
            raise InvalidPartitionError(f"need 0 < k < n, got k={self.k}, n={self.n}", invariant="length")
        if parts and (parts[0] > self.n - self.k or parts[-1] < 0):
            raise InvalidPartitionError(
                f"partition {list(parts)} does not fit in the {self.k}x{self.n - self.k} box", invariant="box"
            )
        for left, right in zip(parts, parts[1:]):
            if left < right:
                raise InvalidPartitionError(
                    f"partition {list(parts)} is not weakly decreasing", invariant="decreasing"
                )

    @property
    def size(self) -> int:
        return sum(self.parts)

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class SchubertProblem:
    """A list of Schubert conditions on Gr(k, n); repetition allowed"""

    k: int
    n: int
    conditions: Tuple[Bracket, ...]

    def __post_init__(self):
        object.__setattr__(self, "conditions", tuple(self.conditions))

    @classmethod
    def from_brackets(cls, k: int, n: int, rows: Iterable[Sequence[int]]) -> "SchubertProblem":
        conditions = []
        for index, row in enumerate(rows):
            try:
                conditions.append(Bracket(tuple(row), n))
            except InvalidBracketError as e:
                raise InvalidProblemError(f"condition {index}: {str(e)}", invariant=e.invariant, index=index)
        return cls(k, n, tuple(conditions))

    def __len__(self) -> int:
        return len(self.conditions)

    def reordered(self, order: Sequence[int]) -> "SchubertProblem":
        return SchubertProblem(self.k, self.n, tuple(self.conditions[i] for i in order))


@dataclass(frozen=True)
class CohomologyClass:
    """
    Integer combination of Schubert classes of Gr(k, n), keyed by padded
    partition tuples fitting in the k x (n-k) box. Zero coefficients are
    never stored.
    """

    k: int
    n: int
    terms: Dict[Tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        cleaned: Dict[Tuple[int, ...], int] = {}
        for key, value in self.terms.items():
            if value == 0:
                continue
            parts = Partition(key, self.k, self.n).parts
            cleaned[parts] = cleaned.get(parts, 0) + int(value)
        object.__setattr__(self, "terms", {key: value for key, value in cleaned.items() if value != 0})

    @classmethod
    def identity(cls, k: int, n: int) -> "CohomologyClass":
        return cls(k, n, {(0,) * k: 1})

    def coefficient(self, parts: Sequence[int]) -> int:
        return self.terms.get(Partition(tuple(parts), self.k, self.n).parts, 0)


@dataclass
class SchubertInstance:
    """
    An instance of a Schubert problem: one flag (invertible n x n complex
    matrix, F_i = span of the first i columns) per condition.
    """

    k: int
    n: int
    pairs: List[Tuple[Bracket, np.ndarray]]

    def __post_init__(self):
        checked = []
        for index, (bracket, flag) in enumerate(self.pairs):
            flag = np.asarray(flag, dtype=complex)
            if flag.shape != (self.n, self.n):
                raise ShapeMismatchError(f"flag {index} has shape {flag.shape}, expected ({self.n}, {self.n})")
            if bracket.k != self.k or bracket.n != self.n:
                raise ShapeMismatchError(f"bracket {bracket} at {index} does not live on Gr({self.k},{self.n})")
            checked.append((bracket, flag))
        self.pairs = checked

    @property
    def problem(self) -> SchubertProblem:
        return SchubertProblem(self.k, self.n, tuple(bracket for bracket, _ in self.pairs))

    @property
    def brackets(self) -> List[Bracket]:
        return [bracket for bracket, _ in self.pairs]

    @property
    def flags(self) -> List[np.ndarray]:
        return [flag for _, flag in self.pairs]

    def reordered(self, order: Sequence[int]) -> "SchubertInstance":
        return SchubertInstance(self.k, self.n, [self.pairs[i] for i in order])

    def with_flags(self, flags: Sequence[np.ndarray]) -> "SchubertInstance":
        if len(flags) != len(self.pairs):
            raise ShapeMismatchError(f"got {len(flags)} flags for {len(self.pairs)} conditions")
        return SchubertInstance(self.k, self.n, [(bracket, flag) for (bracket, _), flag in zip(self.pairs, flags)])
