import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError as SchemaError

from schubert import __version__
from schubert.config import Settings, load_settings
from schubert.exceptions import (
    DegenerateFlagsError,
    FileFormatError,
    PatchMissError,
    PreconditionError,
    SchubertError,
    ShapeMismatchError,
    SingularMatrixError,
    ValidationError,
)
from schubert.models.files import InstanceFile
from schubert.services.combinatorics import format_lr_rule, lr_number, validate_problem
from schubert.services.file_store import FileStore
from schubert.services.geometry import (
    check_incidence,
    max_incidence_residual,
    random_instance,
    worst_incidence_residual,
)
from schubert.services.homotopy import change_flags
from schubert.services.linalg import RandomSource
from schubert.services.solver import SchubertSolver, SolveOptions, SolveReport

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_INCOMPLETE = 3

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

INPUT_ERRORS = (ValidationError, FileFormatError, ShapeMismatchError, DegenerateFlagsError, PreconditionError)
NUMERICAL_ERRORS = (SingularMatrixError, PatchMissError)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default: SCHUBERT_SEED or OS entropy)")
    common.add_argument("--tol", type=float, default=None, help="incidence tolerance (default 1e-8)")
    common.add_argument("--threads", type=int, default=None, help="worker threads for path tracking")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")

    parser = argparse.ArgumentParser(
        prog="schubert", description="Count and numerically solve Schubert problems on Grassmannians"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    count = commands.add_parser("count", parents=[common], help="number of solutions (Littlewood-Richardson rule)")
    count.add_argument("problem", help="problem or instance file")

    solve = commands.add_parser("solve", parents=[common], help="solve a random or given instance")
    solve.add_argument("input", help="problem file (a random instance is drawn) or instance file")
    solve.add_argument("--simple", action="store_true", help="require simple trailing conditions")

    verify = commands.add_parser("verify", parents=[common], help="check solutions against an instance")
    verify.add_argument("instance", help="instance file")
    verify.add_argument("solutions", help="solution file")

    change = commands.add_parser("change-flags", parents=[common], help="move solutions to another instance")
    change.add_argument("solutions", help="solution file (carries its own instance)")
    change.add_argument("target", help="instance file with the new flags")

    instance = commands.add_parser("instance", parents=[common], help="write a random instance of a problem")
    instance.add_argument("problem", help="problem file")
    return parser


def configure_logging(args: argparse.Namespace, settings: Settings):
    level = getattr(logging, settings.log_level.upper(), logging.INFO)
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


class CommandLine:
    """The schubert commands over one set of parsed arguments"""

    def __init__(self, args: argparse.Namespace, settings: Settings):
        self.args = args
        self.settings = settings
        self.store = FileStore(settings.data_dir, settings.rank_tol)
        seed = args.seed if args.seed is not None else settings.seed
        self.rng = RandomSource(seed)
        self.tol = args.tol if args.tol is not None else settings.incidence_tol
        self.threads = args.threads if args.threads is not None else settings.threads
        if self.threads < 1:
            raise ValidationError(f"--threads must be at least 1, got {self.threads}", invariant="threads")
        if self.tol <= 0:
            raise ValidationError(f"--tol must be positive, got {self.tol}", invariant="tol")

    def solve_options(self) -> SolveOptions:
        return SolveOptions(
            bezout_cap=self.settings.bezout_cap,
            monodromy_loops=self.settings.monodromy_loops,
            threads=self.threads,
            incidence_tol=self.tol,
        )

    def emit(self, model, prefix: str):
        if self.args.out:
            self.store.save(model, self.args.out, prefix)
        else:
            sys.stdout.write(self.store.dumps(model))

    # commands

    def count(self) -> int:
        problem = self.store.read_problem(self.args.problem)
        count = lr_number(problem)
        print(count)
        print(format_lr_rule(problem))
        return EXIT_OK

    def instance(self) -> int:
        problem = self.store.read_problem(self.args.problem)
        validate_problem(problem)
        instance = random_instance(problem, self.rng.substream(0))
        self.emit(InstanceFile.from_instance(instance, self.rng.seed), "instance")
        return EXIT_OK

    def solve(self) -> int:
        solver = SchubertSolver(self.solve_options(), self.rng.substream(1))
        if self.store.is_instance_file(self.args.input):
            instance, _ = self.store.read_instance(self.args.input)
            validate_problem(instance.problem)
            if self.args.simple:
                report = solver.solve_simple(instance)
            else:
                report = solver.solve_via_known_instance(instance.problem, instance.flags)
        else:
            problem = self.store.read_problem(self.args.input)
            validate_problem(problem)
            instance = random_instance(problem, self.rng.substream(0))
            report = solver.solve_simple(instance) if self.args.simple else solver.solve(instance)
        self.emit(self._solution_file(instance, report), "solutions")
        if report.incomplete:
            logger.warning(f"Only {report.count} of {report.expected} solutions found; rerun with another --seed")
            return EXIT_INCOMPLETE
        return EXIT_OK

    def _solution_file(self, instance, report: SolveReport):
        return self.store.solution_file(
            instance,
            report.solutions,
            report.residuals,
            report.expected,
            self.rng.seed,
            report.seeding,
            report.path_stats.as_dict(),
            report.failures,
            report.timings,
        )

    def verify(self) -> int:
        instance, _ = self.store.read_instance(self.args.instance)
        solutions = self.store.read_solutions(self.args.solutions)
        if (solutions.k, solutions.n) != (instance.k, instance.n):
            raise ShapeMismatchError(
                f"solutions live on Gr({solutions.k},{solutions.n}), instance on Gr({instance.k},{instance.n})"
            )
        failed = 0
        for index, plane in enumerate(self.store.planes_of(solutions)):
            worst = worst_incidence_residual(plane, instance)
            residual = worst.value if worst is not None else 0.0
            if residual <= self.tol:
                print(f"{index}\t{residual:.3e}\tPASS")
                continue
            failed += 1
            print(f"{index}\t{residual:.3e}\tFAIL\tcondition {worst.condition} i={worst.index}")
        if failed:
            logger.warning(f"{failed} solution(s) failed verification")
            return EXIT_VERIFY_FAILED
        return EXIT_OK

    def change_flags(self) -> int:
        solutions = self.store.read_solutions(self.args.solutions)
        source = self.store.instance_of(solutions)
        target, _ = self.store.read_instance(self.args.target)
        if target.brackets != source.brackets:
            raise ShapeMismatchError("target instance must have the same conditions, in the same order, as the source")
        planes = self.store.planes_of(solutions)
        for index, plane in enumerate(planes):
            if not check_incidence(plane, source, self.tol):
                raise PreconditionError(f"solution {index} does not satisfy its own instance", index=index)

        result = change_flags(
            source.problem,
            planes,
            source.flags,
            target.flags,
            self.rng.substream(2),
            threads=self.threads,
            incidence_tol=self.tol,
        )
        moved = result.succeeded
        residuals = [max_incidence_residual(h, target) for h in moved]
        output = self.store.solution_file(
            target,
            moved,
            residuals,
            lr_number(target.problem),
            self.rng.seed,
            "change-flags",
            result.stats.as_dict(),
            result.failures,
        )
        self.emit(output, "solutions")
        if result.failures:
            logger.warning(f"Paths failed for solutions {result.failures}")
            return EXIT_INCOMPLETE
        return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = load_settings()
    except SchemaError as e:
        logger.error(f"Invalid settings: {str(e)}")
        return EXIT_INVALID_INPUT
    configure_logging(args, settings)
    try:
        cli = CommandLine(args, settings)
        handlers = {
            "count": cli.count,
            "solve": cli.solve,
            "verify": cli.verify,
            "change-flags": cli.change_flags,
            "instance": cli.instance,
        }
        return handlers[args.command]()
    except SchemaError as e:
        logger.error(f"Invalid options: {str(e)}")
        return EXIT_INVALID_INPUT
    except INPUT_ERRORS as e:
        invariant = getattr(e, "invariant", None)
        label = f"Invalid input ({invariant})" if invariant else "Invalid input"
        logger.error(f"{label}: {str(e)}")
        return EXIT_INVALID_INPUT
    except NUMERICAL_ERRORS as e:
        logger.error(f"Numerical failure: {str(e)}; try another --seed")
        return EXIT_INCOMPLETE
    except SchubertError as e:
        logger.error(f"Error: {str(e)}")
        return EXIT_INCOMPLETE


if __name__ == "__main__":
    sys.exit(main())
