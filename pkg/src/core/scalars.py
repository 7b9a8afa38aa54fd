# scalars.py
import logging
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Any, Iterable, List, Union

import mpmath
from sympy import Rational
from sympy.polys.domains import QQ
from sympy.polys.fields import FracElement, FracField, field

from src.core.errors import ConfigurationError

logger = logging.getLogger(__name__)

ScalarInput = Union[int, str, Fraction, Any]


def parse_rational(value: ScalarInput):
    """Parse an int, "a/b" string, decimal string or Fraction into an exact QQ element.

    Decimal strings are converted exactly (``"0.25"`` -> 1/4).
    """
    if isinstance(value, bool):
        raise ConfigurationError(f"not a scalar: {value!r}")
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        try:
            r = Rational(text)
        except (TypeError, ValueError, SyntaxError) as exc:
            raise ConfigurationError(f"cannot parse scalar {value!r}") from exc
        return QQ(int(r.p), int(r.q))
    if isinstance(value, Rational):
        return QQ(int(value.p), int(value.q))
    try:
        return QQ.convert(value)
    except Exception as exc:
        raise ConfigurationError(f"cannot parse scalar {value!r}") from exc


def is_decimal_literal(value: ScalarInput) -> bool:
    return isinstance(value, str) and ("." in value or "e" in value.lower())


def rational_to_str(value) -> str:
    q = QQ.convert(value)
    num, den = int(q.numerator), int(q.denominator)
    return str(num) if den == 1 else f"{num}/{den}"


class ScalarField(ABC):
    """Strategy for the coefficient field every series and rational function lives over."""

    exact: bool = True

    @property
    @abstractmethod
    def zero(self):
        pass

    @property
    @abstractmethod
    def one(self):
        pass

    @abstractmethod
    def convert(self, value):
        pass

    def is_zero(self, value) -> bool:
        return not value

    def is_negligible(self, value, scale=None) -> bool:
        """Zero test tolerant to rounding; exact fields fall back to `is_zero`."""
        return self.is_zero(value)

    def magnitude(self, value) -> float:
        return float(abs(value)) if value else 0.0

    def sum(self, values: Iterable):
        total = self.zero
        for value in values:
            total = total + value
        return total

    def root_of_unity(self, m: int, j: int):
        """exp(2πi·j/m); exact fields only contain ±1."""
        j %= m
        if j == 0:
            return self.one
        if 2 * j == m:
            return -self.one
        raise ValueError(f"{self!r} has no primitive {m}-th roots of unity")

    @abstractmethod
    def to_json(self, value):
        pass


class RationalField(ScalarField):
    """Exact rationals (sympy ``QQ``); elements are always in lowest terms."""

    exact = True

    def __repr__(self) -> str:
        return "RationalField()"

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalField)

    def __hash__(self) -> int:
        return hash("QQ")

    @property
    def zero(self):
        return QQ.zero

    @property
    def one(self):
        return QQ.one

    def convert(self, value):
        if isinstance(value, (FracElement, complex, float)) or hasattr(value, "_mpc_") or hasattr(value, "_mpf_"):
            raise TypeError(f"cannot embed {type(value).__name__} into the rationals")
        return parse_rational(value)

    def magnitude(self, value) -> float:
        return float(abs(value)) if value else 0.0

    def to_json(self, value) -> str:
        return rational_to_str(value)


class ComplexField(ScalarField):
    """Arbitrary precision complex numbers on a private mpmath context.

    Every element carries ``dps`` decimal digits; values coming from another
    context are rounded on conversion.
    """

    exact = False

    def __init__(self, dps: int = 60):
        self.dps = dps
        self.ctx = mpmath.MPContext()
        self.ctx.dps = dps
        self._zero = self.ctx.mpc(0)
        self._one = self.ctx.mpc(1)

    def __repr__(self) -> str:
        return f"ComplexField(dps={self.dps})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ComplexField) and other.dps == self.dps

    def __hash__(self) -> int:
        return hash(("CC", self.dps))

    @property
    def zero(self):
        return self._zero

    @property
    def one(self):
        return self._one

    @property
    def tolerance(self):
        return self.ctx.mpf(10) ** (-(self.dps // 2))

    def convert(self, value):
        ctx = self.ctx
        # mpmath values from any context expose _mpc_ or _mpf_
        if isinstance(value, complex) or hasattr(value, "_mpc_"):
            return ctx.mpc(ctx.mpf(value.real), ctx.mpf(value.imag))
        if isinstance(value, float) or hasattr(value, "_mpf_"):
            return ctx.mpc(ctx.mpf(value))
        if isinstance(value, str) and not is_decimal_literal(value):
            value = parse_rational(value)
        if isinstance(value, str):
            return ctx.mpc(ctx.mpf(value.strip()))
        if isinstance(value, int):
            return ctx.mpc(value)
        q = parse_rational(value)
        return ctx.mpc(ctx.mpf(int(q.numerator)) / int(q.denominator))

    def is_zero(self, value) -> bool:
        return value == 0

    def is_negligible(self, value, scale=None) -> bool:
        bound = self.tolerance * (1 if scale is None else max(1, scale))
        return abs(value) <= bound

    def magnitude(self, value) -> float:
        return float(abs(value))

    def to_json(self, value) -> List[str]:
        digits = max(15, self.dps // 2)
        return [self.ctx.nstr(value.real, digits), self.ctx.nstr(value.imag, digits)]

    def roots(self, coeffs_high_first: List) -> List:
        """All complex roots of a polynomial given highest degree first."""
        converted = [self.convert(c) for c in coeffs_high_first]
        return [self.ctx.mpc(r) for r in self.ctx.polyroots(converted, maxsteps=200, extraprec=4 * self.dps)]

    def root_of_unity(self, m: int, j: int):
        return self.ctx.mpc(self.ctx.expjpi(self.ctx.mpf(2 * (j % m)) / m))


class FunctionField(ScalarField):
    """Rational functions QQ(z_1, ..., z_n) as sympy sparse fraction field elements."""

    exact = True

    def __init__(self, names: Union[str, List[str]]):
        if isinstance(names, str):
            names = [n.strip() for n in names.split(",") if n.strip()]
        self.names = tuple(names)
        built = field(",".join(self.names), QQ)
        self.K: FracField = built[0]
        self.gens = tuple(built[1:])

    def __repr__(self) -> str:
        return f"FunctionField({','.join(self.names)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FunctionField) and other.names == self.names

    def __hash__(self) -> int:
        return hash(("QQ(z)", self.names))

    @property
    def ngens(self) -> int:
        return len(self.gens)

    @property
    def zero(self):
        return self.K.zero

    @property
    def one(self):
        return self.K.one

    def gen(self, index: int):
        return self.gens[index]

    def convert(self, value):
        if isinstance(value, FracElement):
            if value.field == self.K:
                return value
            raise TypeError(f"element of {value.field} is not in {self}")
        if isinstance(value, (str, Fraction)):
            value = parse_rational(value)
        return self.K.ground_new(value)

    def is_zero(self, value) -> bool:
        return not value

    def magnitude(self, value) -> float:
        return 0.0 if not value else 1.0

    def to_json(self, value) -> str:
        return str(value.as_expr())
