"""
On-disk schemas of the command-line tools. Every file is one JSON document;
complex numbers are always [re, im] pairs.

Values that change from run to run (timestamps, timings) live in the `run`
object so everything else is a pure function of the inputs and the seed.
"""

from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field

from schubert.models.schubert_types import SchubertInstance

ComplexPair = List[float]
ComplexMatrix = List[List[ComplexPair]]

PROBLEM_FORMAT = "schubert-problem"
INSTANCE_FORMAT = "schubert-instance"
SOLUTION_FORMAT = "schubert-solutions"


def encode_matrix(m) -> ComplexMatrix:
    a = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def decode_matrix(rows: ComplexMatrix) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    if a.ndim != 3 or a.shape[-1] != 2:
        raise ValueError(f"expected a matrix of [re, im] pairs, got an array of shape {a.shape}")
    return a[..., 0] + 1j * a[..., 1]


class ProblemFile(BaseModel):
    format: str = PROBLEM_FORMAT
    k: int = Field(gt=0)
    n: int = Field(gt=1)
    notation: Optional[str] = None
    conditions: List[Union[List[int], Dict[str, Any]]]


class InstanceFile(BaseModel):
    format: str = INSTANCE_FORMAT
    k: int = Field(gt=0)
    n: int = Field(gt=1)
    conditions: List[List[int]]
    flags: List[ComplexMatrix]
    seed: Optional[int] = None

    @classmethod
    def from_instance(cls, instance: SchubertInstance, seed: Optional[int] = None) -> "InstanceFile":
        return cls(
            k=instance.k,
            n=instance.n,
            conditions=[list(b.entries) for b in instance.brackets],
            flags=[encode_matrix(f) for f in instance.flags],
            seed=seed,
        )


class SolutionMetadata(BaseModel):
    seed: Optional[int] = None
    tool_version: str
    expected: int
    count: int
    complete: bool
    seeding: Optional[str] = None
    path_stats: Dict[str, int] = Field(default_factory=dict)
    failures: List[int] = Field(default_factory=list)


class RunInfo(BaseModel):
    created_at: Optional[str] = None
    timings: Dict[str, float] = Field(default_factory=dict)


class SolutionFile(BaseModel):
    format: str = SOLUTION_FORMAT
    k: int = Field(gt=0)
    n: int = Field(gt=1)
    instance: InstanceFile
    solutions: List[ComplexMatrix]
    residuals: List[float]
    metadata: SolutionMetadata
    run: RunInfo = Field(default_factory=RunInfo)

    def planes(self) -> List[np.ndarray]:
        return [decode_matrix(s) for s in self.solutions]

