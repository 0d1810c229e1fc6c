"""Fixed-point decimals: 28 integer digits and exactly 10 fractional digits.

A ``Numeric`` is a signed integer scaled by 10**10. Results whose magnitude
needs more than 38 significant digits raise ``EvalError``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import EvalError

SCALE_DIGITS = 10
SCALE = 10**SCALE_DIGITS
MAX_SCALED = 10**38 - 1

_LITERAL = re.compile(r"^(-?)(\d+)\.(\d+)$")

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


def check_int64(n: int) -> int:
    if not INT64_MIN <= n <= INT64_MAX:
        raise EvalError(f"Int64 overflow: {n}")
    return n


def _round_half_even(num: int, den: int) -> int:
    """Round num/den to the nearest integer, ties to even. den > 0."""
    q, r = divmod(num, den)
    twice = 2 * r
    if twice > den or (twice == den and q % 2 == 1):
        q += 1
    return q


@dataclass(frozen=True, order=True)
class Numeric:
    scaled: int

    def __post_init__(self) -> None:
        if abs(self.scaled) > MAX_SCALED:
            raise EvalError("Decimal overflow")

    @classmethod
    def parse(cls, text: str) -> Numeric:
        m = _LITERAL.match(text)
        if m is None:
            raise ValueError(f"not a decimal literal: {text!r}")
        sign, whole, frac = m.groups()
        if len(frac) > SCALE_DIGITS:
            # trailing zeros beyond the scale are harmless
            if frac[SCALE_DIGITS:].strip("0"):
                raise ValueError(f"more than {SCALE_DIGITS} fractional digits: {text!r}")
            frac = frac[:SCALE_DIGITS]
        scaled = int(whole) * SCALE + int(frac.ljust(SCALE_DIGITS, "0"))
        return cls(-scaled if sign else scaled)

    @classmethod
    def from_int(cls, n: int) -> Numeric:
        return cls(n * SCALE)

    def to_int(self) -> int:
        # truncate toward zero
        q = abs(self.scaled) // SCALE
        return -q if self.scaled < 0 else q

    def __add__(self, other: Numeric) -> Numeric:
        return Numeric(self.scaled + other.scaled)

    def __sub__(self, other: Numeric) -> Numeric:
        return Numeric(self.scaled - other.scaled)

    def __mul__(self, other: Numeric) -> Numeric:
        return Numeric(_round_half_even(self.scaled * other.scaled, SCALE))

    def __truediv__(self, other: Numeric) -> Numeric:
        if other.scaled == 0:
            raise EvalError("Decimal division by zero")
        num, den = self.scaled * SCALE, other.scaled
        if den < 0:
            num, den = -num, -den
        return Numeric(_round_half_even(num, den))

    def __str__(self) -> str:
        sign = "-" if self.scaled < 0 else ""
        whole, frac = divmod(abs(self.scaled), SCALE)
        digits = str(frac).rjust(SCALE_DIGITS, "0").rstrip("0") or "0"
        return f"{sign}{whole}.{digits}"
