# series.py
import logging
from functools import lru_cache
from math import factorial
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy.polys.domains import QQ

from src.core.errors import ComputationError, DegenerateCurveError, LogTermError, TruncationError
from src.core.scalars import RationalField, ScalarField

logger = logging.getLogger(__name__)

Exponents = Tuple[int, ...]
Order = Optional[int]

RATIONALS = RationalField()


def _plus(a: Order, b: Order) -> Order:
    # None stands for "known exactly" (+infinity)
    if a is None or b is None:
        return None
    return a + b


def _lower(a: Order, b: Order) -> Order:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class TruncSeries:
    """Sparse truncated multivariate Laurent series.

    ``orders[i]`` is the truncation in ``variables[i]``: every coefficient with
    exponent ``< orders[i]`` is known, everything at or above it is unknown.
    An order of ``None`` means the series is exact (polynomial) in that variable.
    Exact zeros are never stored.
    """

    __slots__ = ("field", "variables", "orders", "coeffs")

    def __init__(
        self,
        field: ScalarField,
        variables: Sequence[str],
        orders: Sequence[Order],
        coeffs: Optional[Dict[Exponents, object]] = None,
    ):
        self.field = field
        self.variables = tuple(variables)
        self.orders = tuple(orders)
        if len(self.orders) != len(self.variables):
            raise ValueError("one truncation order per variable is required")
        clean: Dict[Exponents, object] = {}
        for exps, c in (coeffs or {}).items():
            if self._outside(exps) or field.is_zero(c):
                continue
            clean[tuple(exps)] = c
        self.coeffs = clean

    def _outside(self, exps: Exponents) -> bool:
        for e, o in zip(exps, self.orders):
            if o is not None and e >= o:
                return True
        return False

    # ------------------------------------------------------------------ builders
    @classmethod
    def zero(cls, field: ScalarField, variables: Sequence[str], orders: Sequence[Order]) -> "TruncSeries":
        return cls(field, variables, orders)

    @classmethod
    def constant(cls, field: ScalarField, variables: Sequence[str], orders: Sequence[Order], value=1) -> "TruncSeries":
        return cls(field, variables, orders, {(0,) * len(variables): field.convert(value)})

    @classmethod
    def monomial(
        cls, field: ScalarField, variables: Sequence[str], orders: Sequence[Order], exps: Exponents, value=1
    ) -> "TruncSeries":
        return cls(field, variables, orders, {tuple(exps): field.convert(value)})

    @classmethod
    def from_list(
        cls, field: ScalarField, coeffs: Sequence, var: str = "t", order: Order = None, offset: int = 0
    ) -> "TruncSeries":
        """Univariate series from a dense coefficient list starting at ``t**offset``."""
        data = {(offset + i,): field.convert(c) for i, c in enumerate(coeffs)}
        return cls(field, (var,), (order,), data)

    @classmethod
    def variable(cls, field: ScalarField, variables: Sequence[str], orders: Sequence[Order], name: str) -> "TruncSeries":
        idx = list(variables).index(name)
        exps = tuple(1 if i == idx else 0 for i in range(len(variables)))
        return cls(field, variables, orders, {exps: field.one})

    # ------------------------------------------------------------------ access
    def index(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError as exc:
            raise KeyError(f"series has no variable {var!r}") from exc

    def order(self, var: Optional[str] = None) -> Order:
        if var is None:
            self._require_univariate()
            return self.orders[0]
        return self.orders[self.index(var)]

    def valuation(self, var: Optional[str] = None) -> Order:
        """Lowest stored exponent in ``var``; the truncation order when nothing is stored."""
        i = 0 if var is None else self.index(var)
        if not self.coeffs:
            return self.orders[i]
        return min(e[i] for e in self.coeffs)

    def degree(self, var: Optional[str] = None) -> int:
        i = 0 if var is None else self.index(var)
        return max((e[i] for e in self.coeffs), default=-1)

    def is_zero(self) -> bool:
        return not self.coeffs

    def terms(self) -> Iterable[Tuple[Exponents, object]]:
        return self.coeffs.items()

    def __getitem__(self, exps: Union[int, Exponents]):
        if isinstance(exps, int):
            exps = (exps,)
        if self._outside(exps):
            raise TruncationError(
                f"coefficient {exps} of {self.variables} lies beyond the truncation {self.orders}",
                required_order=max(exps) + 1,
            )
        return self.coeffs.get(tuple(exps), self.field.zero)

    def coeff_list(self, start: int, stop: int) -> List:
        """Dense coefficients ``[t^start, ..., t^(stop-1)]`` of a univariate series."""
        self._require_univariate()
        return [self[k] for k in range(start, stop)]

    def scalar(self):
        if self.variables:
            return self[(0,) * len(self.variables)]
        return self.coeffs.get((), self.field.zero)

    def _require_univariate(self) -> None:
        if len(self.variables) != 1:
            raise ValueError(f"operation needs a univariate series, got {self.variables}")

    def __repr__(self) -> str:
        shown = ", ".join(f"{e}: {c}" for e, c in sorted(self.coeffs.items())[:8])
        more = " ..." if len(self.coeffs) > 8 else ""
        return f"TruncSeries({self.variables}, orders={self.orders}, {{{shown}{more}}})"

    # ------------------------------------------------------------------ structure
    def _like(self, coeffs: Dict[Exponents, object], orders: Optional[Sequence[Order]] = None) -> "TruncSeries":
        return TruncSeries(self.field, self.variables, self.orders if orders is None else orders, coeffs)

    def _compatible(self, other: "TruncSeries") -> None:
        if other.variables != self.variables:
            raise ValueError(f"variable mismatch {self.variables} vs {other.variables}")

    def truncate(self, var: Union[str, int], order: Order) -> "TruncSeries":
        i = var if isinstance(var, int) else self.index(var)
        orders = list(self.orders)
        orders[i] = _lower(orders[i], order)
        return self._like(self.coeffs, orders)

    def map_coefficients(self, fn: Callable, field: Optional[ScalarField] = None) -> "TruncSeries":
        target = field or self.field
        return TruncSeries(target, self.variables, self.orders, {e: fn(c) for e, c in self.coeffs.items()})

    def to_field(self, field: ScalarField) -> "TruncSeries":
        return self.map_coefficients(field.convert, field)

    def embed(self, variables: Sequence[str], orders: Sequence[Order]) -> "TruncSeries":
        """Re-express over a superset of variables; orders of known variables are kept when tighter."""
        positions = [list(variables).index(v) for v in self.variables]
        new_orders = list(orders)
        for src, dst in enumerate(positions):
            new_orders[dst] = _lower(new_orders[dst], self.orders[src])
        data = {}
        for exps, c in self.coeffs.items():
            full = [0] * len(variables)
            for src, dst in enumerate(positions):
                full[dst] = exps[src]
            data[tuple(full)] = c
        return TruncSeries(self.field, variables, new_orders, data)

    def rename(self, mapping: Dict[str, str]) -> "TruncSeries":
        return TruncSeries(self.field, [mapping.get(v, v) for v in self.variables], self.orders, self.coeffs)

    def shift(self, var: str, k: int) -> "TruncSeries":
        """Multiply by ``var**k`` exactly."""
        i = self.index(var)
        orders = list(self.orders)
        orders[i] = _plus(orders[i], k)
        data = {}
        for exps, c in self.coeffs.items():
            e = list(exps)
            e[i] += k
            data[tuple(e)] = c
        return self._like(data, orders)

    def coefficient(self, var: str, k: int) -> "TruncSeries":
        """Coefficient of ``var**k`` as a series in the remaining variables."""
        i = self.index(var)
        if self.orders[i] is not None and k >= self.orders[i]:
            raise TruncationError(
                f"[{var}^{k}] requested but {var} is truncated at {self.orders[i]}", required_order=k + 1
            )
        data = {}
        for exps, c in self.coeffs.items():
            if exps[i] == k:
                data[exps[:i] + exps[i + 1:]] = c
        return TruncSeries(
            self.field, self.variables[:i] + self.variables[i + 1:], self.orders[:i] + self.orders[i + 1:], data
        )

    def split(self, var: str) -> Dict[int, "TruncSeries"]:
        """All nonzero ``[var^k]`` coefficients at once."""
        i = self.index(var)
        buckets: Dict[int, Dict[Exponents, object]] = {}
        for exps, c in self.coeffs.items():
            buckets.setdefault(exps[i], {})[exps[:i] + exps[i + 1:]] = c
        rest_vars = self.variables[:i] + self.variables[i + 1:]
        rest_orders = self.orders[:i] + self.orders[i + 1:]
        return {k: TruncSeries(self.field, rest_vars, rest_orders, d) for k, d in sorted(buckets.items())}

    def substitute(self, var: str, value) -> "TruncSeries":
        """Set an exactly known variable to a scalar."""
        i = self.index(var)
        if self.orders[i] is not None and not self.field.is_zero(self.field.convert(value)):
            raise TruncationError(f"cannot evaluate truncated variable {var} at a nonzero value")
        value = self.field.convert(value)
        data: Dict[Exponents, object] = {}
        for exps, c in self.coeffs.items():
            e = exps[i]
            if e < 0 and self.field.is_zero(value):
                raise ComputationError(f"negative power of {var} evaluated at zero")
            term = c * value ** e if e else c
            key = exps[:i] + exps[i + 1:]
            data[key] = data[key] + term if key in data else term
        return TruncSeries(
            self.field, self.variables[:i] + self.variables[i + 1:], self.orders[:i] + self.orders[i + 1:], data
        )

    # ------------------------------------------------------------------ arithmetic
    def __neg__(self) -> "TruncSeries":
        return self._like({e: -c for e, c in self.coeffs.items()})

    def __add__(self, other) -> "TruncSeries":
        if not isinstance(other, TruncSeries):
            other = TruncSeries.constant(self.field, self.variables, self.orders, other)
        self._compatible(other)
        orders = [_lower(a, b) for a, b in zip(self.orders, other.orders)]
        data = dict(self.coeffs)
        for e, c in other.coeffs.items():
            data[e] = data[e] + c if e in data else c
        return self._like(data, orders)

    __radd__ = __add__

    def __sub__(self, other) -> "TruncSeries":
        if not isinstance(other, TruncSeries):
            other = TruncSeries.constant(self.field, self.variables, self.orders, other)
        return self + (-other)

    def __rsub__(self, other) -> "TruncSeries":
        return (-self) + other

    def scale(self, value) -> "TruncSeries":
        value = self.field.convert(value)
        if self.field.is_zero(value):
            return self._like({})
        return self._like({e: c * value for e, c in self.coeffs.items()})

    def __mul__(self, other) -> "TruncSeries":
        if not isinstance(other, TruncSeries):
            return self.scale(other)
        self._compatible(other)
        orders = []
        for i, (ta, tb) in enumerate(zip(self.orders, other.orders)):
            va, vb = self.valuation_index(i), other.valuation_index(i)
            orders.append(_lower(_plus(ta, vb), _plus(tb, va)))
        box = TruncSeries(self.field, self.variables, orders)
        data: Dict[Exponents, object] = {}
        for ea, ca in self.coeffs.items():
            for eb, cb in other.coeffs.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                if box._outside(e):
                    continue
                term = ca * cb
                data[e] = data[e] + term if e in data else term
        return TruncSeries(self.field, self.variables, orders, data)

    __rmul__ = __mul__

    def valuation_index(self, i: int) -> Order:
        if not self.coeffs:
            return self.orders[i]
        return min(e[i] for e in self.coeffs)

    def __truediv__(self, other) -> "TruncSeries":
        if isinstance(other, TruncSeries):
            return self * other.inverse()
        value = self.field.convert(other)
        return self.scale(self.field.one / value)

    def __pow__(self, n: int) -> "TruncSeries":
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return TruncSeries.constant(self.field, self.variables, self.orders, 1)
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # ------------------------------------------------------------------ inverse, exp, log
    def inverse(self) -> "TruncSeries":
        if len(self.variables) == 1:
            return self._univariate_inverse()
        return self._multivariate_inverse()

    def _univariate_inverse(self) -> "TruncSeries":
        if not self.coeffs:
            raise ZeroDivisionError("inverse of a series with no known nonzero coefficient")
        order = self.orders[0]
        if order is None:
            raise TruncationError("inverse of an exact polynomial needs a truncation order")
        v = self.valuation()
        lead = self.coeffs[(v,)]
        rel = order - v
        inv_lead = self.field.one / lead
        g = [inv_lead]
        for k in range(1, rel):
            acc = self.field.zero
            for i in range(1, k + 1):
                a = self.coeffs.get((v + i,))
                if a is not None:
                    acc = acc + a * g[k - i]
            g.append(-(acc * inv_lead))
        return TruncSeries(self.field, self.variables, (order - 2 * v,), {(-v + k,): c for k, c in enumerate(g)})

    def _multivariate_inverse(self) -> "TruncSeries":
        zero_exps = (0,) * len(self.variables)
        c0 = self.coeffs.get(zero_exps)
        if c0 is None:
            raise ComputationError("multivariate inverse requires an invertible constant term")
        inv_c0 = self.field.one / c0
        h = self.scale(inv_c0) - 1
        total = _geometric(h, lambda k: (-1) ** k)
        return total.scale(inv_c0)

    def exp(self) -> "TruncSeries":
        zero_exps = (0,) * len(self.variables)
        if zero_exps in self.coeffs:
            raise ComputationError("exp of a series with nonzero constant term")
        if len(self.variables) == 1:
            return self._univariate_exp()
        return _power_sum(self, lambda k: QQ(1, factorial(k)), start=0)

    def _univariate_exp(self) -> "TruncSeries":
        order = self.orders[0]
        if self.coeffs and self.valuation() < 1:
            raise ComputationError("exp of a Laurent series with negative powers")
        if order is None:
            raise TruncationError("exp of an exact polynomial needs a truncation order")
        e = [self.field.one]
        for n in range(1, order):
            acc = self.field.zero
            for k in range(1, n + 1):
                f = self.coeffs.get((k,))
                if f is not None:
                    acc = acc + f * e[n - k] * k
            e.append(acc / n)
        return TruncSeries(self.field, self.variables, (order,), {(k,): c for k, c in enumerate(e)})

    def log(self) -> "TruncSeries":
        zero_exps = (0,) * len(self.variables)
        c0 = self.coeffs.get(zero_exps, self.field.zero)
        if not self.field.is_negligible(c0 - self.field.one):
            raise ComputationError("log of a series whose constant term is not 1")
        if len(self.variables) == 1:
            return self._univariate_log()
        h = TruncSeries(self.field, self.variables, self.orders, {e: c for e, c in self.coeffs.items() if e != zero_exps})
        return _power_sum(h, lambda k: QQ((-1) ** (k + 1), k), start=1)

    def _univariate_log(self) -> "TruncSeries":
        order = self.orders[0]
        if order is None:
            raise TruncationError("log of an exact polynomial needs a truncation order")
        if self.coeffs and self.valuation() < 0:
            raise ComputationError("log of a Laurent series with negative powers")
        f = [self.coeffs.get((k,), self.field.zero) for k in range(order)]
        g = [self.field.zero] * order
        for n in range(1, order):
            acc = f[n] * n
            for k in range(1, n):
                if not self.field.is_zero(f[n - k]):
                    acc = acc - g[k] * f[n - k] * k
            g[n] = acc / n
        return TruncSeries(self.field, self.variables, (order,), {(k,): c for k, c in enumerate(g)})

    def power(self, exponent) -> "TruncSeries":
        """``self**exponent`` for a rational exponent; the constant term must be 1."""
        return (self.log().scale(exponent)).exp()

    # ------------------------------------------------------------------ calculus
    def derivative(self, var: Optional[str] = None) -> "TruncSeries":
        i = 0 if var is None else self.index(var)
        orders = list(self.orders)
        orders[i] = _plus(orders[i], -1)
        data = {}
        for exps, c in self.coeffs.items():
            if exps[i] == 0:
                continue
            e = list(exps)
            e[i] -= 1
            data[tuple(e)] = c * exps[i]
        return self._like(data, orders)

    def integrate(self, var: Optional[str] = None) -> "TruncSeries":
        """Formal antiderivative vanishing at 0; a ``var**-1`` term raises `LogTermError`."""
        i = 0 if var is None else self.index(var)
        orders = list(self.orders)
        orders[i] = _plus(orders[i], 1)
        data = {}
        for exps, c in self.coeffs.items():
            if exps[i] == -1:
                raise LogTermError(f"integration of {self.variables[i]}^-1 would produce a logarithm")
            e = list(exps)
            e[i] += 1
            data[tuple(e)] = c / e[i]
        return self._like(data, orders)

    def compose(self, inner: "TruncSeries") -> "TruncSeries":
        """``self(inner)`` for univariate ``self``.

        A truncated ``self`` needs a univariate ``inner`` with positive
        valuation; negative powers of ``self`` need ``inner`` invertible.
        """
        self._require_univariate()
        field = self.field
        exact = [None] * len(inner.variables)
        truncated = self.orders[0] is not None
        v_inner = None
        if truncated:
            inner._require_univariate()
            v_inner = inner.valuation()
            if inner.coeffs and v_inner < 1:
                raise ComputationError("composition with a series that does not vanish at 0")
        result = TruncSeries.zero(field, inner.variables, exact)
        if self.coeffs:
            lo, hi = self.valuation(), self.degree()
            if hi >= 0:
                power = TruncSeries.constant(field, inner.variables, exact, 1)
                for k in range(0, hi + 1):
                    c = self.coeffs.get((k,))
                    if c is not None:
                        result = result + power.scale(c)
                    if k < hi:
                        power = power * inner
            if lo < 0:
                inv = inner.inverse()
                power = inv
                for k in range(-1, lo - 1, -1):
                    c = self.coeffs.get((k,))
                    if c is not None:
                        result = result + power.scale(c)
                    if k > lo:
                        power = power * inv
        if truncated and v_inner is not None:
            result = result.truncate(0, self.orders[0] * v_inner)
        elif truncated:
            result = result.truncate(0, self.orders[0] if self.orders[0] > 0 else None)
        return result

    # ------------------------------------------------------------------ comparison
    def equals(self, other: "TruncSeries", tolerance=None) -> bool:
        """Coefficientwise equality on the common known window."""
        self._compatible(other)
        orders = [_lower(a, b) for a, b in zip(self.orders, other.orders)]
        a = TruncSeries(self.field, self.variables, orders, self.coeffs)
        b = TruncSeries(self.field, self.variables, orders, other.coeffs)
        diff = a - b
        if tolerance is None:
            return all(self.field.is_negligible(c) for c in diff.coeffs.values())
        return all(abs(c) <= tolerance for c in diff.coeffs.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return (
            self.variables == other.variables
            and self.orders == other.orders
            and self.coeffs == other.coeffs
        )

    __hash__ = None


def _geometric(h: TruncSeries, sign: Callable[[int], int]) -> TruncSeries:
    return _power_sum(h, lambda k: QQ(sign(k)), start=0)


def _power_sum(h: TruncSeries, weight: Callable[[int], object], start: int) -> TruncSeries:
    """Σ_{k≥start} weight(k)·h^k, stopping once h^k has no known nonzero term."""
    field = h.field
    if any(o is None for o in h.orders) and h.coeffs:
        truncated = [i for i, o in enumerate(h.orders) if o is not None]
        for exps in h.coeffs:
            if not any(exps[i] > 0 for i in truncated):
                raise ComputationError("series term without a positive power of a truncated variable")
    total = TruncSeries.zero(field, h.variables, h.orders)
    power = TruncSeries.constant(field, h.variables, [None] * len(h.variables), 1)
    k = 0
    limit = 1 + sum(o for o in h.orders if o is not None and o > 0)
    while True:
        if k >= start:
            w = weight(k)
            if w:
                total = total + power.scale(field.convert(w))
        k += 1
        power = power * h
        power = TruncSeries(field, h.variables, [_lower(a, b) for a, b in zip(power.orders, h.orders)], power.coeffs)
        if power.is_zero():
            break
        if k > limit:
            raise TruncationError("power series in a truncated ring did not terminate")
    return TruncSeries(field, h.variables, [_lower(a, b) for a, b in zip(total.orders, h.orders)], total.coeffs)


def series_reversion(f: TruncSeries, order: int, var: Optional[str] = None) -> TruncSeries:
    """Compositional inverse g with f(g(X)) = X, by Lagrange inversion.

    ``[X^k] g = (1/k) [t^(k-1)] (t/f(t))^k``.
    """
    f._require_univariate()
    field = f.field
    if f.coeffs and f.valuation() < 1:
        raise ComputationError("series reversion needs f(0) = 0")
    lin = f.coeffs.get((1,), field.zero)
    if field.is_negligible(lin):
        raise DegenerateCurveError("series reversion: vanishing linear coefficient")
    if f.orders[0] is not None and f.orders[0] < order:
        raise TruncationError(f"reversion to order {order} needs f known to order {order}", required_order=order)
    quotient = f.shift(f.variables[0], -1).truncate(0, order - 1)
    phi = quotient.inverse().truncate(0, order - 1)
    coeffs = {}
    power = TruncSeries.constant(field, phi.variables, phi.orders, 1)
    for k in range(1, order):
        power = (power * phi).truncate(0, order - 1)
        c = power.coeffs.get((k - 1,))
        if c is not None:
            coeffs[(k,)] = c / k
    name = var or f.variables[0]
    return TruncSeries(field, (name,), (order,), coeffs)


# ---------------------------------------------------------------------- S-operator calculus
@lru_cache(maxsize=None)
def s_coefficients(count: int) -> Tuple:
    """[t^(2m)] S(t) = 1/(4^m (2m+1)!) for m < count, with S(t) = (e^(t/2) - e^(-t/2))/t."""
    return tuple(QQ(1, 4 ** m * factorial(2 * m + 1)) for m in range(count))


@lru_cache(maxsize=None)
def sigma_coefficients(count: int) -> Tuple:
    """[t^(2m)] 1/S(t) for m < count."""
    s = s_coefficients(count)
    sigma = [QQ(1)]
    for m in range(1, count):
        acc = QQ(0)
        for i in range(1, m + 1):
            acc += s[i] * sigma[m - i]
        sigma.append(-acc)
    return tuple(sigma)


def s_operator_series(order: int, field: ScalarField = RATIONALS, var: str = "t", reciprocal: bool = False) -> TruncSeries:
    """S(t) (or 1/S(t)) truncated at ``t**order``."""
    if order < 1:
        raise ValueError("order must be at least 1")
    count = (order + 1) // 2
    coeffs = sigma_coefficients(count) if reciprocal else s_coefficients(count)
    return TruncSeries(field, (var,), (order,), {(2 * m,): field.convert(c) for m, c in enumerate(coeffs)})


def s_operator_reciprocal(order: int, field: ScalarField = RATIONALS, var: str = "t") -> TruncSeries:
    return s_operator_series(order, field, var, reciprocal=True)


def apply_S_of_euler(
    f: TruncSeries,
    z_var: str,
    h_var: str,
    weight: Union[str, object] = 1,
    inverse: bool = False,
) -> TruncSeries:
    """Apply S(w·ħ·z∂_z)^{±1} to ``f``; on ``z^k`` it acts by the scalar series S(w ħ k)^{±1}.

    ``weight`` is either a scalar or the name of a variable of ``f`` (the u-monomial case).
    """
    zi, hi = f.index(z_var), f.index(h_var)
    h_order = f.orders[hi]
    if h_order is None:
        raise TruncationError(f"{h_var} must be truncated to apply S(ħ z∂z)")
    ui = f.index(weight) if isinstance(weight, str) else None
    scalar_weight = None if ui is not None else f.field.convert(weight)
    count = (h_order + 1) // 2 + 1
    coeffs = sigma_coefficients(count) if inverse else s_coefficients(count)
    data: Dict[Exponents, object] = {}
    for exps, c in f.coeffs.items():
        k = exps[zi]
        for m, sm in enumerate(coeffs):
            a = exps[hi] + 2 * m
            if a >= h_order:
                break
            if m and k == 0:
                break
            e = list(exps)
            e[hi] = a
            factor = f.field.convert(sm * QQ(k) ** (2 * m))
            if ui is not None:
                e[ui] += 2 * m
            else:
                factor = factor * scalar_weight ** (2 * m)
            key = tuple(e)
            term = c * factor
            data[key] = data[key] + term if key in data else term
    return TruncSeries(f.field, f.variables, f.orders, data)
