"""Type signatures of the saturated builtin functions.

Runtime behaviour lives in the interpreter; the parser only needs arities.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    BOOL_T,
    DECIMAL_T,
    INT64_T,
    PARTY_T,
    STAR,
    TEXT_T,
    Kind,
    TVar,
    Type,
    fns,
    list_of,
)


@dataclass(frozen=True)
class Signature:
    type_params: tuple[tuple[str, Kind], ...]
    arg_types: tuple[Type, ...]
    result: Type


def _mono(args, result) -> Signature:
    return Signature((), tuple(args), result)


_a, _b = TVar("a"), TVar("b")
_A = (("a", STAR),)
_AB = (("a", STAR), ("b", STAR))

SIGNATURES: dict[str, Signature] = {
    **{op: _mono([INT64_T, INT64_T], INT64_T) for op in ("ADD_INT64", "SUB_INT64", "MUL_INT64", "DIV_INT64", "MOD_INT64")},
    **{op: _mono([DECIMAL_T, DECIMAL_T], DECIMAL_T) for op in ("ADD_DECIMAL", "SUB_DECIMAL", "MUL_DECIMAL", "DIV_DECIMAL")},
    "INT64_TO_DECIMAL": _mono([INT64_T], DECIMAL_T),
    "DECIMAL_TO_INT64": _mono([DECIMAL_T], INT64_T),
    **{op: Signature(_A, (_a, _a), BOOL_T) for op in ("EQUAL", "LESS", "LESS_EQ", "GREATER", "GREATER_EQ")},
    "NOT": _mono([BOOL_T], BOOL_T),
    "AND": _mono([BOOL_T, BOOL_T], BOOL_T),
    "OR": _mono([BOOL_T, BOOL_T], BOOL_T),
    "APPEND_TEXT": _mono([TEXT_T, TEXT_T], TEXT_T),
    "INT64_TO_TEXT": _mono([INT64_T], TEXT_T),
    "DECIMAL_TO_TEXT": _mono([DECIMAL_T], TEXT_T),
    "PARTY_TO_TEXT": _mono([PARTY_T], TEXT_T),
    "NIL": Signature(_A, (), list_of(_a)),
    "CONS": Signature(_A, (_a, list_of(_a)), list_of(_a)),
    "APPEND_LIST": Signature(_A, (list_of(_a), list_of(_a)), list_of(_a)),
    "FOLDL": Signature(_AB, (fns(_b, _a, _b), _b, list_of(_a)), _b),
    "FOLDR": Signature(_AB, (fns(_a, _b, _b), _b, list_of(_a)), _b),
    "ERROR": Signature(_A, (TEXT_T,), _a),
}


def arity(name: str) -> tuple[int, int]:
    sig = SIGNATURES[name]
    return len(sig.type_params), len(sig.arg_types)
