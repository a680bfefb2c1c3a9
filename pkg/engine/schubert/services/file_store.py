import json
import logging
import os
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from pydantic import ValidationError as SchemaError

from schubert import __version__
from schubert.exceptions import FileFormatError
from schubert.models.files import (
    INSTANCE_FORMAT,
    InstanceFile,
    ProblemFile,
    RunInfo,
    SolutionFile,
    SolutionMetadata,
    decode_matrix,
    encode_matrix,
)
from schubert.models.schubert_types import SchubertInstance, SchubertProblem
from schubert.services.combinatorics import parse_conditions
from schubert.services.linalg import DEFAULT_RANK_TOL, numerical_rank

logger = logging.getLogger(__name__)


class FileStore:
    """
    Read and write the JSON problem, instance and solution files
    """

    def __init__(self, data_dir: str = "data", rank_tol: float = DEFAULT_RANK_TOL):
        self.data_dir = data_dir
        self.rank_tol = rank_tol

    def _resolve(self, filename: str) -> str:
        if os.path.isabs(filename) or os.path.exists(filename):
            return filename
        return os.path.join(self.data_dir, filename)

    def load_json(self, filename: str) -> Dict[str, Any]:
        filepath = self._resolve(filename)
        if not os.path.exists(filepath):
            raise FileFormatError(f"File {filepath} does not exist")
        try:
            with open(filepath, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise FileFormatError(f"{filepath} is not valid JSON: {str(e)}")
        if not isinstance(data, dict):
            raise FileFormatError(f"{filepath} must hold a JSON object")
        logger.debug(f"Loaded {filepath}")
        return data

    # reading

    def read_problem(self, filename: str) -> SchubertProblem:
        """A problem from a problem file, or the problem of an instance file"""
        data = self.load_json(filename)
        if data.get("format") == INSTANCE_FORMAT or "flags" in data:
            instance, _ = self._instance_from(self._validate(InstanceFile, data, filename))
            return instance.problem
        problem_file = self._validate(ProblemFile, data, filename)
        return parse_conditions(problem_file.conditions, problem_file.k, problem_file.n, problem_file.notation)

    def is_instance_file(self, filename: str) -> bool:
        data = self.load_json(filename)
        return data.get("format") == INSTANCE_FORMAT or "flags" in data

    def read_instance(self, filename: str) -> Tuple[SchubertInstance, Optional[int]]:
        data = self.load_json(filename)
        return self._instance_from(self._validate(InstanceFile, data, filename))

    def read_solutions(self, filename: str) -> SolutionFile:
        return self._validate(SolutionFile, self.load_json(filename), filename)

    def planes_of(self, solutions: SolutionFile) -> List[np.ndarray]:
        try:
            planes = solutions.planes()
        except ValueError as e:
            raise FileFormatError(f"bad solution matrix: {str(e)}")
        for index, h in enumerate(planes):
            if h.shape != (solutions.n, solutions.k):
                raise FileFormatError(
                    f"solution {index} has shape {h.shape}, expected ({solutions.n}, {solutions.k})"
                )
        return planes

    def instance_of(self, solutions: SolutionFile) -> SchubertInstance:
        instance, _ = self._instance_from(solutions.instance)
        return instance

    def _validate(self, model, data: Dict[str, Any], filename: str):
        try:
            return model.model_validate(data)
        except SchemaError as e:
            raise FileFormatError(f"{filename} is not a valid {model.__name__}: {str(e)}")

    def _instance_from(self, data: InstanceFile) -> Tuple[SchubertInstance, Optional[int]]:
        problem = parse_conditions(data.conditions, data.k, data.n, "bracket")
        if len(data.flags) != len(problem.conditions):
            raise FileFormatError(f"{len(problem.conditions)} conditions but {len(data.flags)} flags")
        flags = []
        for index, rows in enumerate(data.flags):
            try:
                flag = decode_matrix(rows)
            except ValueError as e:
                raise FileFormatError(f"flag {index}: {str(e)}")
            if flag.shape != (data.n, data.n):
                raise FileFormatError(f"flag {index} has shape {flag.shape}, expected ({data.n}, {data.n})")
            if numerical_rank(flag, self.rank_tol) < data.n:
                raise FileFormatError(f"flag {index} is not invertible")
            flags.append(flag)
        return SchubertInstance(data.k, data.n, list(zip(problem.conditions, flags))), data.seed

    # writing

    def dumps(self, model: BaseModel) -> str:
        return json.dumps(model.model_dump(), indent=2, ensure_ascii=False) + "\n"

    def save(self, model: BaseModel, filename: Optional[str] = None, prefix: str = "solutions") -> str:
        """Write a file model; without a filename a timestamped one goes to data_dir"""
        if not filename:
            os.makedirs(self.data_dir, exist_ok=True)
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            filename = os.path.join(self.data_dir, f"{prefix}_{timestamp}.json")
        directory = os.path.dirname(filename)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(filename, "w", encoding="utf-8") as f:
            f.write(self.dumps(model))
        logger.info(f"Saved {prefix} to {filename}")
        return filename

    def solution_file(
        self,
        instance: SchubertInstance,
        planes: Sequence[np.ndarray],
        residuals: Sequence[float],
        expected: int,
        seed: Optional[int],
        seeding: Optional[str] = None,
        path_stats: Optional[Dict[str, int]] = None,
        failures: Sequence[int] = (),
        timings: Optional[Dict[str, float]] = None,
    ) -> SolutionFile:
        return SolutionFile(
            k=instance.k,
            n=instance.n,
            instance=InstanceFile.from_instance(instance, seed),
            solutions=[encode_matrix(h) for h in planes],
            residuals=[float(r) for r in residuals],
            metadata=SolutionMetadata(
                seed=seed,
                tool_version=__version__,
                expected=expected,
                count=len(planes),
                complete=len(planes) >= expected,
                seeding=seeding,
                path_stats=path_stats or {},
                failures=list(failures),
            ),
            run=RunInfo(created_at=datetime.now().isoformat(timespec="seconds"), timings=timings or {}),
        )
