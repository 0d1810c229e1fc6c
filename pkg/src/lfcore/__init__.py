"""A core calculus for multi-party smart contracts with ledger semantics.

Typical use::

    world = check_packages([parse_package(text, "iou.lf")])
    report, ledger = run_scenario(world, parse_scenario(script))
"""

from .errors import AuthorizationError, EvalError, LfError, LfTypeError, ParseError, UpdateError, ValidationError
from .interpreter import Evaluator, Interpreter, UpdateResult, eval_expr, interpret_update, run_command
from .ledger import Ledger, Violation, check_authorization, informees, project, validate
from .packages import World, hash_package
from .parser import parse_package, parse_scenario, pretty_package
from .scenario import RunReport, run_scenario
from .state import ContractInfo, LedgerState
from .transaction import CreateA, ExerciseA, FetchA, render_tree
from .typecheck import Context, check_package, check_packages, is_serializable, kind_of, type_of

__all__ = [
    "AuthorizationError",
    "Context",
    "ContractInfo",
    "CreateA",
    "EvalError",
    "Evaluator",
    "ExerciseA",
    "FetchA",
    "Interpreter",
    "Ledger",
    "LedgerState",
    "LfError",
    "LfTypeError",
    "ParseError",
    "RunReport",
    "UpdateError",
    "UpdateResult",
    "ValidationError",
    "Violation",
    "World",
    "check_authorization",
    "check_package",
    "check_packages",
    "eval_expr",
    "hash_package",
    "informees",
    "interpret_update",
    "is_serializable",
    "kind_of",
    "parse_package",
    "parse_scenario",
    "pretty_package",
    "project",
    "render_tree",
    "run_command",
    "run_scenario",
    "type_of",
    "validate",
]
