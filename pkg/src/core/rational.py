# rational.py
import logging
from functools import lru_cache
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Matrix, Poly
from sympy.integrals.rationaltools import ratint_ratpart
from sympy.polys.domains import QQ
from sympy.polys.fields import FracElement, FracField, field

from src.core.errors import LogTermError, PadeError, TruncationError
from src.core.scalars import RationalField, ScalarField, parse_rational
from src.core.series import RATIONALS, TruncSeries

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def univariate_field(name: str = "z") -> Tuple[FracField, FracElement]:
    K, gen = field(name, QQ)
    return K, gen


def dense_coefficients(poly) -> List:
    """Coefficients of a univariate PolyElement, lowest degree first."""
    if not poly:
        return []
    deg = poly.degree()
    out = [QQ.zero] * (deg + 1)
    for (e,), c in poly.terms():
        out[e] = c
    return out


def taylor_shift(coeffs: Sequence, point, scalars: ScalarField) -> List:
    """Coefficients of ``P(point + t)`` from those of ``P(z)`` (lowest degree first)."""
    a = [scalars.convert(c) for c in coeffs]
    p = scalars.convert(point)
    n = len(a)
    powers = [scalars.one]
    for _ in range(1, n):
        powers.append(powers[-1] * p)
    out = []
    for j in range(n):
        acc = scalars.zero
        for i in range(j, n):
            if not scalars.is_zero(a[i]):
                acc = acc + a[i] * comb(i, j) * powers[i - j]
        out.append(acc)
    return out


def _leading_index(coeffs: List, scalars: ScalarField, known_zeros: int = 0) -> int:
    scale = max((scalars.magnitude(c) for c in coeffs), default=0.0)
    for j, c in enumerate(coeffs):
        if j < known_zeros:
            continue
        if scalars.exact:
            if not scalars.is_zero(c):
                return j
        elif not scalars.is_negligible(c, scale):
            return j
    return len(coeffs)


class RationalFunction:
    """Univariate rational function over QQ, kept coprime with monic denominator."""

    __slots__ = ("frac",)

    def __init__(self, frac: FracElement):
        if frac.field.ngens != 1:
            raise ValueError("RationalFunction is univariate")
        num, den = frac.numer, frac.denom
        lc = den.LC
        if lc != 1:
            num, den = num.quo_ground(lc), den.quo_ground(lc)
        self.frac = frac.field.raw_new(num, den)

    # ------------------------------------------------------------------ builders
    @classmethod
    def from_coeffs(cls, numerator: Sequence, denominator: Optional[Sequence] = None, var: str = "z") -> "RationalFunction":
        K, _ = univariate_field(var)
        ring = K.ring
        num = ring.from_dict({(i,): c for i, c in enumerate(map(parse_rational, numerator)) if c})
        den = ring.from_dict({(i,): c for i, c in enumerate(map(parse_rational, denominator or [1])) if c})
        if not den:
            raise ZeroDivisionError("zero denominator")
        return cls(K.new(num, den))

    @classmethod
    def constant(cls, value, var: str = "z") -> "RationalFunction":
        K, _ = univariate_field(var)
        return cls(K.ground_new(QQ.convert(value)))

    @classmethod
    def variable(cls, var: str = "z") -> "RationalFunction":
        return cls(univariate_field(var)[1])

    @classmethod
    def from_frac(cls, frac: FracElement, index: int = 0, var: str = "z") -> "RationalFunction":
        """Restrict a multivariate fraction depending only on generator ``index``."""
        K, _ = univariate_field(var)

        def project(poly):
            data = {}
            for exps, c in poly.terms():
                if any(e for j, e in enumerate(exps) if j != index):
                    raise ValueError("fraction depends on more than one variable")
                data[(exps[index],)] = c
            return K.ring.from_dict(data)

        return cls(K.new(project(frac.numer), project(frac.denom)))

    # ------------------------------------------------------------------ data
    @property
    def var(self) -> str:
        return str(self.frac.field.symbols[0])

    @property
    def numerator(self) -> List:
        return dense_coefficients(self.frac.numer)

    @property
    def denominator(self) -> List:
        return dense_coefficients(self.frac.denom)

    @property
    def numerator_poly(self):
        return self.frac.numer

    @property
    def denominator_poly(self):
        return self.frac.denom

    def is_zero(self) -> bool:
        return not self.frac

    def is_constant(self) -> bool:
        return self.frac.numer.is_ground and self.frac.denom.is_ground

    def is_polynomial(self) -> bool:
        return self.frac.denom.is_ground

    def pole_order_at_infinity(self) -> int:
        """deg(num) − deg(den); positive values are poles at infinity."""
        if self.is_zero():
            return -10 ** 9
        return self.frac.numer.degree() - self.frac.denom.degree()

    def __repr__(self) -> str:
        return f"RationalFunction({self.frac.as_expr()})"

    def __eq__(self, other) -> bool:
        if isinstance(other, RationalFunction):
            return self.frac == other.frac
        return self.frac == other

    def __hash__(self) -> int:
        return hash(self.frac)

    # ------------------------------------------------------------------ arithmetic
    def _wrap(self, other) -> FracElement:
        if isinstance(other, RationalFunction):
            return other.frac
        return self.frac.field.ground_new(QQ.convert(other))

    def __add__(self, other) -> "RationalFunction":
        return RationalFunction(self.frac + self._wrap(other))

    __radd__ = __add__

    def __sub__(self, other) -> "RationalFunction":
        return RationalFunction(self.frac - self._wrap(other))

    def __rsub__(self, other) -> "RationalFunction":
        return RationalFunction(self._wrap(other) - self.frac)

    def __mul__(self, other) -> "RationalFunction":
        return RationalFunction(self.frac * self._wrap(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        return RationalFunction(self.frac / self._wrap(other))

    def __rtruediv__(self, other) -> "RationalFunction":
        return RationalFunction(self._wrap(other) / self.frac)

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.frac)

    def __pow__(self, n: int) -> "RationalFunction":
        return RationalFunction(self.frac ** n)

    def derivative(self) -> "RationalFunction":
        return RationalFunction(self.frac.diff(self.frac.field.gens[0]))

    def euler(self) -> "RationalFunction":
        """z·d/dz."""
        return RationalFunction(self.frac.diff(self.frac.field.gens[0]) * self.frac.field.gens[0])

    def compose(self, inner: "RationalFunction") -> "RationalFunction":
        """``self(inner(z))``; the result lives in ``inner``'s variable."""
        g = inner.frac

        def horner(coeffs: List) -> FracElement:
            acc = g.field.zero
            for c in reversed(coeffs):
                acc = acc * g + g.field.ground_new(c)
            return acc

        return RationalFunction(horner(self.numerator) / horner(self.denominator))

    def lift(self, target: FracField, index: int) -> FracElement:
        """Embed into a multivariate fraction field as a function of generator ``index``."""
        n = target.ngens

        def place(poly):
            return target.ring.from_dict(
                {tuple(e[0] if j == index else 0 for j in range(n)): c for e, c in poly.terms()}
            )

        return target.raw_new(place(self.frac.numer), place(self.frac.denom))

    # ------------------------------------------------------------------ evaluation and expansion
    def evaluate(self, point, scalars: ScalarField = RATIONALS):
        num = self._horner(self.numerator, point, scalars)
        den = self._horner(self.denominator, point, scalars)
        if scalars.is_zero(den):
            raise ZeroDivisionError(f"pole of {self} at {point}")
        return num / den

    @staticmethod
    def _horner(coeffs: List, point, scalars: ScalarField):
        p = scalars.convert(point)
        acc = scalars.zero
        for c in reversed(coeffs):
            acc = acc * p + scalars.convert(c)
        return acc

    def laurent_at(
        self,
        point,
        order: int,
        scalars: ScalarField = RATIONALS,
        var: str = "t",
        den_zeros: int = 0,
        num_zeros: int = 0,
    ) -> TruncSeries:
        """Expansion in ``t = z − point`` with every coefficient below ``t**order`` known.

        ``den_zeros``/``num_zeros`` declare zeros of known multiplicity at
        ``point`` so that numeric round-off there is discarded.
        """
        num = taylor_shift(self.numerator, point, scalars)
        den = taylor_shift(self.denominator, point, scalars)
        v_num = _leading_index(num, scalars, num_zeros)
        v_den = _leading_index(den, scalars, den_zeros)
        if v_den >= len(den):
            raise ZeroDivisionError("denominator vanishes identically")
        if v_num >= len(num):
            return TruncSeries.zero(scalars, (var,), (order,))
        rel = order - v_num + v_den
        if rel <= 0:
            return TruncSeries.zero(scalars, (var,), (order,))
        den_series = TruncSeries(
            scalars, (var,), (v_den + rel,), {(j,): c for j, c in enumerate(den) if j >= v_den}
        )
        num_series = TruncSeries(scalars, (var,), (None,), {(j,): c for j, c in enumerate(num) if j >= v_num})
        return (num_series * den_series.inverse()).truncate(0, order)

    def series_at_zero(self, order: int, scalars: ScalarField = RATIONALS, var: str = "t") -> TruncSeries:
        return self.laurent_at(0, order, scalars, var)

    def principal_part_at(self, point, scalars: ScalarField = RATIONALS) -> Dict[int, object]:
        """Negative-power coefficients ``{k: [t^k]}`` of the expansion at ``point``."""
        series = self.laurent_at(point, 0, scalars)
        return {e[0]: c for e, c in series.terms() if e[0] < 0}

    def principal_parts(self, poles: Sequence, scalars: ScalarField = RATIONALS) -> Dict[object, Dict[int, object]]:
        return {p: self.principal_part_at(p, scalars) for p in poles}

    def polynomial_part(self) -> List:
        q, _ = self.frac.numer.div(self.frac.denom)
        return dense_coefficients(q)


def pade_reconstruct(series: TruncSeries, deg_num: int, deg_den: int, guard: int = 3, var: str = "z") -> RationalFunction:
    """Rational function N/D (deg N ≤ deg_num, deg D ≤ deg_den, D(0) = 1) matching ``series``.

    The ``guard`` coefficients beyond the interpolation window must also be
    reproduced, otherwise `PadeError` is raised.
    """
    if not isinstance(series.field, RationalField):
        raise PadeError("Padé reconstruction runs in exact mode only")
    needed = deg_num + deg_den + 1 + guard
    if series.order() is not None and series.order() < needed:
        raise TruncationError(f"Padé ({deg_num},{deg_den}) with guard {guard} needs {needed} coefficients",
                              required_order=needed)
    if series.coeffs and series.valuation() < 0:
        raise PadeError("series has a pole at 0")
    c = [series[k] for k in range(needed)]
    q = [QQ.one]
    if deg_den:
        rows = []
        rhs = []
        for k in range(deg_num + 1, deg_num + deg_den + 1):
            rows.append([QQ.to_sympy(c[k - j]) if k - j >= 0 else 0 for j in range(1, deg_den + 1)])
            rhs.append(-QQ.to_sympy(c[k]))
        try:
            solution, params = Matrix(rows).gauss_jordan_solve(Matrix(rhs))
        except ValueError as exc:
            raise PadeError(f"Padé ({deg_num},{deg_den}) system is inconsistent") from exc
        if params.shape[0]:
            solution = solution.subs({p: 0 for p in params})
        q += [QQ.from_sympy(solution[i]) for i in range(deg_den)]
    p = []
    for k in range(deg_num + 1):
        acc = QQ.zero
        for j in range(0, min(k, deg_den) + 1):
            acc += q[j] * c[k - j]
        p.append(acc)
    candidate = RationalFunction.from_coeffs(p, q, var)
    check = candidate.series_at_zero(needed)
    for k in range(needed):
        if check[k] != c[k]:
            raise PadeError(f"Padé ({deg_num},{deg_den}) guard mismatch at order {k}")
    return candidate


def reconstruct_rational(series: TruncSeries, guard: int = 3, max_total: Optional[int] = None, var: str = "z") -> RationalFunction:
    """Try Padé degrees of increasing total until one certifies."""
    available = series.order()
    if available is None:
        raise TruncationError("reconstruction needs a truncated series")
    limit = available - guard - 1 if max_total is None else min(max_total, available - guard - 1)
    for total in range(0, limit + 1):
        for deg_den in range(0, total + 1):
            try:
                return pade_reconstruct(series, total - deg_den, deg_den, guard, var)
            except PadeError:
                continue
    raise PadeError(f"no rational function of total degree ≤ {limit} reproduces the series")


def integrate_rational(f: RationalFunction) -> RationalFunction:
    """Antiderivative vanishing at 0; a logarithmic part raises `LogTermError`."""
    K = f.frac.field
    x = K.symbols[0]
    quotient, remainder = f.frac.numer.div(f.frac.denom)
    primitive = K.zero
    if quotient:
        poly = Poly(quotient.as_expr(), x, domain=QQ).integrate()
        primitive = K.from_expr(poly.as_expr())
    if remainder:
        rational_part, log_part = ratint_ratpart(
            Poly(remainder.as_expr(), x, domain=QQ), Poly(f.frac.denom.as_expr(), x, domain=QQ), x
        )
        if log_part != 0:
            raise LogTermError(f"integral of {f} has a logarithmic part {log_part}")
        if rational_part != 0:
            primitive = primitive + K.from_expr(rational_part)
    result = RationalFunction(primitive) if primitive else RationalFunction.constant(0, f.var)
    return result - result.evaluate(0)
