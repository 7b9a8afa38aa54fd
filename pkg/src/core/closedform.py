# closedform.py
import logging
import random
from functools import lru_cache
from math import factorial, prod
from typing import Dict, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

from src.core.errors import ComputationError, UnsupportedCurveError
from src.core.graphs import connected_graphs
from src.core.model import HypergeometricModel, SpectralCurve
from src.core.operators import OperatorSpace, function_field
from src.core.oracle import decreasing_tuples
from src.core.rational import RationalFunction, integrate_rational
from src.core.scalars import FunctionField
from src.core.series import RATIONALS, TruncSeries, sigma_coefficients

logger = logging.getLogger(__name__)

REPRESENTATIONS = ("rational", "pinned", "series")
PIN_ATTEMPTS = 25


class NPointResult:
    """One n-point quantity produced by an engine.

    ``value`` depends on ``representation``:
      rational -> FracElement in QQ(z1..zn)
      pinned   -> RationalFunction in z (= z1) with z2..zn set to ``pins``
      series   -> {k tuple: h} X-expansion coefficients
    """

    def __init__(self, engine: str, kind: str, g: int, n: int, representation: str, value,
                 r: Optional[int] = None, pins: Optional[List] = None, meta: Optional[Dict] = None):
        self.engine = engine
        self.kind = kind
        self.g = g
        self.n = n
        self.r = r
        self.representation = representation
        self.value = value
        self.pins = pins or []
        self.meta = meta or {}

    @property
    def label(self) -> str:
        base = f"{self.kind}_{{{self.g},{self.n}}}"
        return base if self.r is None else f"{base}^({self.r})"

    def __repr__(self) -> str:
        return f"NPointResult({self.engine}, {self.label}, {self.representation})"


# ---------------------------------------------------------------------- multivariate helpers
def canonical_names(n: int) -> Tuple[str, ...]:
    return tuple(f"z{i + 1}" for i in range(n))


def specialise(frac, target: FunctionField, images: Sequence):
    """Substitute every generator of ``frac``'s field by the matching element of ``images``."""
    K = target.K

    def evaluate(poly):
        acc = K.zero
        for exps, c in poly.terms():
            term = K.ground_new(c)
            for image, e in zip(images, exps):
                if e:
                    term = term * image ** e
            acc = acc + term
        return acc

    den = evaluate(frac.denom)
    if not den:
        raise ComputationError("specialisation hits a pole of the denominator")
    return evaluate(frac.numer) / den


def apply_D(frac, space_field: FunctionField, model: HypergeometricModel, i: int, times: int = 1):
    """D_i^times on an element of QQ(z1..zn)."""
    if not times:
        return frac
    gen = space_field.gen(i)
    phi = (RationalFunction.variable("z") / model.Q).lift(space_field.K, i)
    for _ in range(times):
        frac = phi * frac.diff(gen)
    return frac


def pin_values(n: int, seed: int, attempt: int = 0) -> List:
    """Small distinct nonzero rationals for z2..zn, reproducible from ``seed``."""
    rng = random.Random(seed * 1009 + attempt)
    values: List = []
    while len(values) < n - 1:
        candidate = QQ(rng.randint(-9, 9), rng.randint(1, 9))
        if candidate and candidate not in values:
            values.append(candidate)
    return values


def subs_checked(frac, pairs: Sequence):
    """Substitute (generator, value) pairs; ZeroDivisionError when the denominator vanishes."""
    if not pairs:
        return frac
    den = frac.denom.subs([(g.to_poly(), p) for g, p in pairs])
    if not den:
        raise ZeroDivisionError(f"substitution {pairs} hits a pole")
    return frac.subs(list(pairs))


def pin_fraction(frac, field: FunctionField, pins: Sequence) -> RationalFunction:
    """Set z2..zn to ``pins``; the result is a RationalFunction of z1."""
    pairs = [(field.gen(i + 1), p) for i, p in enumerate(pins)]
    return RationalFunction.from_frac(subs_checked(frac, pairs), 0, "z")


# ---------------------------------------------------------------------- X-expansion
def _poly_series(poly, names: Sequence[str], order: int) -> TruncSeries:
    return TruncSeries(RATIONALS, names, (order,) * len(names), {tuple(e): c for e, c in poly.terms()})


def series_at_origin(frac, names: Sequence[str], order: int) -> TruncSeries:
    """Multivariate Taylor series in z1..zn, every variable truncated at ``order``."""
    num = _poly_series(frac.numer, names, order)
    den = _poly_series(frac.denom, names, order)
    if not den.coeffs.get((0,) * len(names)):
        raise ComputationError("function has a pole at the origin")
    return num * den.inverse()


def substitute_z_of_X(series: TruncSeries, z_of_X: TruncSeries) -> TruncSeries:
    """Replace every z_i by z(X_i); the variable names become X1..Xn."""
    order = series.orders[0]
    powers = [TruncSeries.constant(RATIONALS, ("X",), (order,))]
    data = dict(series.coeffs)
    for i in range(len(series.variables)):
        top = max((e[i] for e in data), default=0)
        while len(powers) <= top:
            powers.append((powers[-1] * z_of_X).truncate(0, order))
        out: Dict[Tuple[int, ...], object] = {}
        for exps, c in data.items():
            for (k,), pc in powers[exps[i]].terms():
                key = exps[:i] + (k,) + exps[i + 1:]
                term = c * pc
                out[key] = out[key] + term if key in out else term
        data = out
    names = tuple(f"X{i + 1}" for i in range(len(series.variables)))
    return TruncSeries(RATIONALS, names, series.orders, data)


def coefficient_table(x_series: TruncSeries, k_max: int, divide_by_k: bool) -> Dict[Tuple[int, ...], object]:
    """{k: [X^k]} for weakly decreasing k with parts in 1..k_max, optionally divided by ∏k_i."""
    n = len(x_series.variables)
    out = {}
    for k in decreasing_tuples(n, k_max):
        value = x_series.coeffs.get(tuple(k), QQ.zero)
        out[k] = value / prod(k) if divide_by_k else value
    return out


def origin_chart(model: HypergeometricModel) -> SpectralCurve:
    """A curve without critical point data, enough for expansions at z = 0."""
    return SpectralCurve(model, RATIONALS, [])


def x_expansion(frac, n: int, model: HypergeometricModel, k_max: int, divide_by_k: bool = True):
    order = k_max + 1
    names = canonical_names(n)
    z_of_X = origin_chart(model).z_of_X(order)
    series = series_at_origin(frac, names, order)
    return coefficient_table(substitute_z_of_X(series, z_of_X), k_max, divide_by_k)


def unstable_01_series(model: HypergeometricModel, k_max: int) -> Dict[Tuple[int, ...], object]:
    """h_{0;k} = [X^k] y(z(X)) / k."""
    chart = origin_chart(model)
    order = k_max + 1
    y = chart.y_series(order)
    composed = y.compose(chart.z_of_X(order)).truncate(0, order)
    return {(k,): composed[k] / k for k in range(1, k_max + 1)}


def h02_series(model: HypergeometricModel, k_max: int) -> TruncSeries:
    """H_{0,2} = log((z(X1) − z(X2))/(X1 − X2)) at the origin, in (X1, X2)."""
    order = k_max + 1
    # X1^i X2^j with i, j < order needs z up to X^(2 order - 1)
    zX = origin_chart(model).z_of_X(2 * order)
    data: Dict[Tuple[int, int], object] = {}
    for (k,), c in zX.terms():
        for i in range(k):
            key = (i, k - 1 - i)
            data[key] = data[key] + c if key in data else c
    quotient = TruncSeries(RATIONALS, ("X1", "X2"), (order, order), data)
    return quotient.log()


def unstable_02_series(model: HypergeometricModel, k_max: int) -> Dict[Tuple[int, ...], object]:
    series = h02_series(model, k_max)
    out = {}
    for i in range(1, k_max + 1):
        for j in range(1, i + 1):
            out[(i, j)] = series.coeffs.get((i, j), QQ.zero)
    return out


# ---------------------------------------------------------------------- regularised diagonal W_{0,2}
def _taylor_at_z(f: RationalFunction, order: int, field: FunctionField) -> List:
    """[f(z), f′(z), f″(z)/2, …] as elements of QQ(z)."""
    out = []
    for k in range(order):
        out.append(field.convert(f.frac) * QQ(1, factorial(k)))
        f = f.derivative()
    return out


@lru_cache(maxsize=None)
def _reg02_cached(model: HypergeometricModel, a: int, b: int):
    # D1 D2 H_{0,2} = −D1 D2 log((e^{Δ(s1)} − e^{Δ(s2)})/((s1 − s2) x′(z))), Δ(s) = x(z+s) − x(z)
    Kz = function_field(("z",))
    variables = ("s1", "s2")
    orders = (a + 2, b + 2)
    order = a + b + 4
    xp = model.Q / RationalFunction.variable("z")
    x_taylor = _taylor_at_z(xp, order - 1, Kz)
    delta = TruncSeries(Kz, ("s",), (order,), {(k + 1,): c * QQ(1, k + 1) for k, c in enumerate(x_taylor)})
    data: Dict[Tuple[int, int], object] = {}
    for (k,), E in delta.exp().terms():
        for i in range(k):
            key = (i, k - 1 - i)
            data[key] = data[key] + E if key in data else E
    quotient = TruncSeries(Kz, variables, orders, data).scale(Kz.one / x_taylor[0])
    f = quotient.log()

    phi_taylor = _taylor_at_z(RationalFunction.variable("z") / model.Q, max(a, b) + 2, Kz)
    phi1 = TruncSeries(Kz, variables, orders, {(k, 0): c for k, c in enumerate(phi_taylor)})
    phi2 = TruncSeries(Kz, variables, orders, {(0, k): c for k, c in enumerate(phi_taylor)})
    for _ in range(a + 1):
        f = phi1 * f.derivative("s1")
    for _ in range(b + 1):
        f = phi2 * f.derivative("s2")
    return -f.coeffs.get((0, 0), Kz.zero)


def reg02(model: HypergeometricModel, a: int, b: int, target: FunctionField, index: int = 0):
    """D1^a D2^b (D1 D2 H_{0,2}) restricted to z1 = z2 = z_index, in ``target``."""
    value = _reg02_cached(model, a, b)
    return RationalFunction(value).lift(target.K, index)


# ---------------------------------------------------------------------- engines
class ClosedFormEngine:
    """W_{g,n} and H_{g,n} from the graph sums over connected simple graphs."""

    def __init__(self, model: HypergeometricModel, seed: int = 2024):
        self.model = model
        self.seed = seed
        self._W: Dict[Tuple[int, int], object] = {}
        self._H: Dict[Tuple[int, int], object] = {}

    # ------------------------------------------------------------------ W
    def W_rational(self, g: int, n: int):
        """W_{g,n} as an element of QQ(z1..zn)."""
        key = (g, n)
        if key not in self._W:
            logger.info("closed form W_{%d,%d} for %s", g, n, self.model.name or self.model.fingerprint)
            self._W[key] = self._compute_W(g, n, pins=None)
        return self._W[key]

    def _unstable_W(self, g: int, n: int, field: FunctionField):
        if (g, n) == (0, 1):
            y = self.model.y_rational
            if y is None:
                raise UnsupportedCurveError("W_{0,1} = y(z) is not rational for this model")
            return y.lift(field.K, 0)
        z1, z2 = field.gen(0), field.gen(1)
        inv_Q = (1 / self.model.Q)
        return inv_Q.lift(field.K, 0) * inv_Q.lift(field.K, 1) * z1 * z2 / (z1 - z2) ** 2

    def _compute_W(self, g: int, n: int, pins: Optional[Sequence]):
        if n < 1 or g < 0:
            raise ValueError(f"invalid (g, n) = ({g}, {n})")
        if (g, n) in ((0, 1), (0, 2)):
            field = function_field(canonical_names(n))
            value = self._unstable_W(g, n, field)
            return value if pins is None else subs_checked(value, [(field.gen(i + 1), p) for i, p in enumerate(pins)])
        if n == 1:
            space = OperatorSpace(self.model, 1, 2 * g + 1)
            total = space.apply_U(space.one(), 0, "W") + self._n1_tail(space, first=0)
            return space.extract(total, 2 * g)
        power = 2 * g - 2 + 2 * n
        space = OperatorSpace(self.model, n, power + 1)
        total = self.graph_sum(space, g, n)
        for i in range(n - 1, 0, -1):
            total = space.apply_U(total, i, "W")
        if pins is not None:
            pairs = [(space.gen(i + 1), p) for i, p in enumerate(pins)]
            total = total.map_coefficients(lambda c: subs_checked(c, pairs))
        total = space.apply_U(total, 0, "W")
        return space.extract(total, power)

    def _n1_tail(self, space: OperatorSpace, first: int) -> TruncSeries:
        """Σ_{j≥first} D^{j−first} L^{j+1}_0 · Dy."""
        Dy = (RationalFunction.variable("z") * self.model.y_prime / self.model.Q).lift(space.K, 0)
        total = space.zero()
        for j in range(first, space.L_degree("W", 0)):
            L = space.L_at("W", j + 1, 0, 0)
            if L.is_zero():
                continue
            total = total + space.map_D(L.map_coefficients(lambda c: c * Dy), 0, j - first)
        return total

    @staticmethod
    def graph_sum(space: OperatorSpace, g: int, n: int) -> TruncSeries:
        """Σ_γ ∏_{edges} w, over graphs with at most g − 1 + n edges."""
        max_edges = g - 1 + n
        edges: Dict[Tuple[int, int], TruncSeries] = {}
        total = space.zero()
        count = 0
        for graph in connected_graphs(n):
            if len(graph.edges) > max_edges:
                continue
            term = space.one()
            for k, l in sorted(graph.edges):
                if (k, l) not in edges:
                    edges[(k, l)] = space.w_edge(k, l)
                term = term * edges[(k, l)]
            total = total + term
            count += 1
        logger.debug("graph sum over %d graphs on %d vertices", count, n)
        return total

    def compute_W(self, g: int, n: int, representation: str = "rational", k_max: int = 6,
                  pins: Optional[Sequence] = None) -> NPointResult:
        if representation not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {representation!r}")
        if representation == "series":
            return NPointResult("closedform", "W", g, n, "series", self.W_series(g, n, k_max), meta={"k_max": k_max})
        if representation == "rational":
            return NPointResult("closedform", "W", g, n, "rational", self.W_rational(g, n))
        value, used = self.pinned(lambda p: self._compute_W(g, n, p), n, pins)
        return NPointResult("closedform", "W", g, n, "pinned", value, pins=used)

    def pinned(self, compute, n: int, pins: Optional[Sequence]):
        attempts = [list(pins)] if pins is not None else [pin_values(n, self.seed, a) for a in range(PIN_ATTEMPTS)]
        field = function_field(canonical_names(n))
        for candidate in attempts:
            try:
                value = compute(candidate)
                return pin_fraction(value, field, candidate), candidate
            except ZeroDivisionError:
                logger.debug("pins %s hit a pole, re-pinning", candidate)
        raise ComputationError(f"could not find pins avoiding the poles after {len(attempts)} attempts")

    def W_series(self, g: int, n: int, k_max: int) -> Dict[Tuple[int, ...], object]:
        """Hurwitz numbers h_{g;k} read off the X-expansion of W_{g,n}."""
        if (g, n) == (0, 1):
            return unstable_01_series(self.model, k_max)
        if (g, n) == (0, 2):
            return unstable_02_series(self.model, k_max)
        return x_expansion(self.W_rational(g, n), n, self.model, k_max)

    # ------------------------------------------------------------------ H
    def H_rational(self, g: int, n: int):
        """H_{g,n} in QQ(z1..zn), normalised by H(0, …, 0) = 0."""
        if 2 * g - 2 + n <= 0:
            raise ValueError("H_{g,n} is computed for stable (g, n) only")
        key = (g, n)
        if key not in self._H:
            logger.info("closed form H_{%d,%d} for %s", g, n, self.model.name or self.model.fingerprint)
            value = self._compute_H(g, n)
            field = function_field(canonical_names(n))
            constant = value
            for i in range(n - 1, -1, -1):
                try:
                    constant = subs_checked(constant, [(field.gen(i), 0)])
                except ZeroDivisionError as exc:
                    raise ComputationError(f"H_{{{g},{n}}} has a pole at the origin") from exc
            self._H[key] = value - constant
        return self._H[key]

    def _compute_H(self, g: int, n: int):
        if n == 1:
            space = OperatorSpace(self.model, 1, 2 * g + 1)
            total = space.apply_U(space.one(), 0, "H") + self._n1_tail(space, first=1)
            return space.extract(total, 2 * g) + self._n1_integrals(g, space)
        power = 2 * g - 2 + 2 * n
        space = OperatorSpace(self.model, n, power + 1)
        if n == 2:
            total = space.apply_U(space.apply_U(space.w_edge(0, 1), 1, "H"), 0, "H")
            total = total + space.apply_U(space.leaf_term(1, 0), 0, "H")
            total = total + space.apply_U(space.leaf_term(0, 1), 1, "H")
            return space.extract(total, power)
        max_edges = g - 1 + n
        edges: Dict[Tuple[int, int], TruncSeries] = {}
        leaves: Dict[Tuple[int, int], TruncSeries] = {}
        total = space.zero()
        for graph in connected_graphs(n):
            if len(graph.edges) > max_edges:
                continue
            term = space.one()
            for k, l in graph.inner_edges:
                if (k, l) not in edges:
                    edges[(k, l)] = space.w_edge(k, l)
                term = term * edges[(k, l)]
            for leaf, inner in graph.leaf_edges:
                if (leaf, inner) not in leaves:
                    w = space.w_edge(min(leaf, inner), max(leaf, inner))
                    leaves[(leaf, inner)] = space.apply_U(w, leaf, "H") + space.leaf_term(leaf, inner)
                term = term * leaves[(leaf, inner)]
            for v in graph.inner_vertices:
                term = space.apply_U(term, v, "H")
            total = total + term
        return space.extract(total, power)

    def _n1_integrals(self, g: int, space: OperatorSpace):
        """∫_0^z (ŷ − y)/s ds + ∫_0^z y′·(S(ħ∂_y)^{-1}ψ̂ − ψ)(y(s)) ds at ħ^{2g}."""
        out = space.field.zero
        y_g = self.model.y_hat_term(g)
        if not y_g.is_zero():
            out = out + integrate_rational(y_g / RationalFunction.variable("z")).lift(space.K, 0)
        sigma = sigma_coefficients(g + 1)
        for a in range(0, g + 1):
            b = g - a
            if b == 0:
                if a == 0:
                    continue
                # ∫ y′ ∂^{2a}ψ(y) ds = ∂^{2a−1}ψ(y(z)) + const
                primitive = self.model.psi_derivative(2 * a - 1)
            else:
                term = self.model.psi_hat_term(b)
                if term.is_zero():
                    continue
                if a == 0:
                    primitive = integrate_rational(term)
                else:
                    primitive = term
                    for _ in range(2 * a - 1):
                        primitive = primitive.derivative()
            if primitive.is_constant():
                continue
            y = self.model.y_rational
            if y is None:
                raise UnsupportedCurveError("ψ-side integral needs a rational y(z)")
            out = out + (primitive.compose(y) * sigma[a]).lift(space.K, 0)
        return out

    def compute_H(self, g: int, n: int, representation: str = "rational", k_max: int = 6,
                  pins: Optional[Sequence] = None) -> NPointResult:
        if representation not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {representation!r}")
        value = self.H_rational(g, n)
        if representation == "rational":
            return NPointResult("closedform", "H", g, n, "rational", value)
        if representation == "series":
            table = x_expansion(value, n, self.model, k_max, divide_by_k=False)
            return NPointResult("closedform", "H", g, n, "series", table, meta={"k_max": k_max})
        pinned, used = self.pinned(lambda p: value, n, pins)
        return NPointResult("closedform", "H", g, n, "pinned", pinned, pins=used)

    def D_all(self, frac, n: int):
        """D_1 … D_n applied to an element of QQ(z1..zn)."""
        field = function_field(canonical_names(n))
        for i in range(n):
            frac = apply_D(frac, field, self.model, i)
        return frac


def compute_W(model: HypergeometricModel, g: int, n: int, representation: str = "rational",
              k_max: int = 6, seed: int = 2024) -> NPointResult:
    return ClosedFormEngine(model, seed).compute_W(g, n, representation, k_max)


def compute_H(model: HypergeometricModel, g: int, n: int, representation: str = "rational",
              k_max: int = 6, seed: int = 2024) -> NPointResult:
    return ClosedFormEngine(model, seed).compute_H(g, n, representation, k_max)
