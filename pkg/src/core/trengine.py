# trengine.py
import logging
from itertools import combinations, product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

from src.core.closedform import NPointResult, unstable_01_series, unstable_02_series
from src.core.errors import ComputationError, DegenerateCurveError, TruncationError, UnsupportedCurveError
from src.core.graphs import compositions, set_partitions
from src.core.model import SpectralCurve
from src.core.oracle import decreasing_tuples
from src.core.rational import RationalFunction
from src.core.series import TruncSeries, series_reversion

logger = logging.getLogger(__name__)

Key = Tuple[int, int]  # (critical point index a, pole order d)
Tensor = Dict[Tuple[Key, ...], object]
Labelled = Tuple[Tuple[int, Key], ...]  # ((slot, key), ...) sorted by slot
Partial = Dict[Labelled, TruncSeries]
Lookup = Callable[[int, int], "MultiDifferential"]

MAX_DOUBLINGS = 4
METHODS = ("auto", "ceo", "be")


def initial_order(g: int, n: int) -> int:
    return 4 * (2 * g - 2 + n) + 8


class MultiDifferential:
    """ω_{g,n} = Σ C[(a_1,d_1),…,(a_n,d_n)] ∏ dz_i/(z_i − p_{a_i})^{d_i}.

    ω_{0,1} = y dx and ω_{0,2} = dz_1dz_2/(z_1 − z_2)² carry no tensor and are
    marked by ``special``.
    """

    def __init__(self, g: int, n: int, scalars, coeffs: Optional[Tensor] = None, special: Optional[str] = None):
        self.g = g
        self.n = n
        self.scalars = scalars
        self.coeffs: Tensor = dict(coeffs or {})
        self.special = special

    @property
    def is_unstable(self) -> bool:
        return self.special is not None

    def __repr__(self) -> str:
        if self.special:
            return f"MultiDifferential({self.g},{self.n}, {self.special})"
        return f"MultiDifferential({self.g},{self.n}, {len(self.coeffs)} terms)"

    def max_pole_order(self) -> int:
        return max((d for key in self.coeffs for _, d in key), default=0)

    def add(self, key: Tuple[Key, ...], value) -> None:
        if key in self.coeffs:
            value = self.coeffs[key] + value
        if self.scalars.is_zero(value):
            self.coeffs.pop(key, None)
        else:
            self.coeffs[key] = value

    def magnitude(self) -> float:
        return max((self.scalars.magnitude(c) for c in self.coeffs.values()), default=0.0)

    def difference(self, other: "MultiDifferential") -> float:
        """Largest coefficientwise deviation from ``other``."""
        worst = 0.0
        for key in set(self.coeffs) | set(other.coeffs):
            delta = self.coeffs.get(key, self.scalars.zero) - other.coeffs.get(key, self.scalars.zero)
            worst = max(worst, self.scalars.magnitude(delta))
        return worst

    def agrees_with(self, other: "MultiDifferential") -> bool:
        scale = max(self.magnitude(), other.magnitude(), 1.0)
        for key in set(self.coeffs) | set(other.coeffs):
            delta = self.coeffs.get(key, self.scalars.zero) - other.coeffs.get(key, self.scalars.zero)
            if not self.scalars.is_negligible(delta, scale):
                return False
        return True

    def is_symmetric(self) -> bool:
        """Invariance under every transposition of adjacent slots."""
        scale = max(self.magnitude(), 1.0)
        for key, c in self.coeffs.items():
            for i in range(self.n - 1):
                swapped = key[:i] + (key[i + 1], key[i]) + key[i + 2:]
                other = self.coeffs.get(swapped, self.scalars.zero)
                if not self.scalars.is_negligible(c - other, scale):
                    return False
        return True

    def residue_sum(self) -> object:
        """Largest total residue in the first variable over all poles (d = 1 terms)."""
        totals: Dict[Tuple[Key, ...], object] = {}
        for key, c in self.coeffs.items():
            if key[0][1] == 1:
                rest = key[1:]
                totals[rest] = totals[rest] + c if rest in totals else c
        return max((self.scalars.magnitude(v) for v in totals.values()), default=0.0)

    def has_pole_at_infinity(self) -> bool:
        return any(d < 2 for key in self.coeffs for _, d in key)

    def pinned_W(self, curve: SpectralCurve, pins: Sequence) -> RationalFunction:
        """W = ω/∏dx_i as a rational function of z_1 with z_2..z_n set to ``pins`` (exact mode)."""
        if self.is_unstable or not curve.scalars.exact:
            raise UnsupportedCurveError("pinned W needs a stable differential on an exact curve")
        z = RationalFunction.variable("z")
        Q = curve.model.Q
        points = [cp.point for cp in curve.critical_points]
        weights: Dict[Key, object] = {}
        for key, c in self.coeffs.items():
            w = c
            for (a, d), pin in zip(key[1:], pins):
                w = w * pin / (Q.evaluate(pin) * (pin - points[a]) ** d)
            weights[key[0]] = weights[key[0]] + w if key[0] in weights else w
        total = RationalFunction.constant(0)
        for (a, d), w in sorted(weights.items()):
            total = total + z / (Q * (z - points[a]) ** d) * w
        return total

    def to_json(self) -> Dict:
        if self.special:
            return {"g": self.g, "n": self.n, "special": self.special}
        return {
            "g": self.g,
            "n": self.n,
            "coefficients": [
                {"key": [list(k) for k in key], "value": self.scalars.to_json(c)}
                for key, c in sorted(self.coeffs.items())
            ],
        }


def _merge(left: Partial, right: Partial) -> Partial:
    out: Partial = {}
    for lk, ls in left.items():
        for rk, rs in right.items():
            key = tuple(sorted(lk + rk))
            term = ls * rs
            out[key] = out[key] + term if key in out else term
    return out


def _accumulate(target: Partial, source: Partial) -> None:
    for key, series in source.items():
        target[key] = target[key] + series if key in target else series


def residue_of_product(f: TruncSeries, g: TruncSeries):
    """[t^-1](f·g), raising TruncationError when a needed coefficient is unknown."""
    vf, vg = f.valuation(), g.valuation()
    for series, needed in ((f, -1 - vg), (g, -1 - vf)):
        if series.orders[0] is not None and series.orders[0] <= needed:
            raise TruncationError(f"residue needs [t^{needed}] beyond the chart order", required_order=needed + 1)
    acc = f.field.zero
    for (i,), c in f.terms():
        d = g.coeffs.get((-1 - i,))
        if d is not None:
            acc = acc + c * d
    return acc


class LocalChart:
    """Expansions at the critical point p_a in t = z − p_a, known below t^order.

    ``sheets[j]`` is ζ_j(t), the j-th preimage of x(p_a + t) near p_a, with
    ζ_0 = t; sheets come from the normalising coordinate ξ with x = c·ξ^m.
    """

    def __init__(self, curve: SpectralCurve, a: int, order: int):
        cp = curve.critical_points[a]
        self.curve = curve
        self.a = a
        self.order = order
        self.m = cp.multiplicity
        self.point = cp.point
        self.scalars = curve.scalars
        if self.m > 2 and self.scalars.exact:
            raise UnsupportedCurveError(f"critical point p{a} has m = {self.m}; its sheets need numeric mode")
        self.x_prime = curve.local_x_prime(a, order)
        self.y = curve.local_y(a, order + 1)
        self.sheets = self._sheets()
        self.dsheets = [s.derivative() for s in self.sheets]
        self._basis: Dict[Tuple[int, Key], TruncSeries] = {}
        self._partials: Dict[Tuple, Dict[Tuple[Key, ...], TruncSeries]] = {}
        self._powers: Dict[Tuple[int, int], TruncSeries] = {}
        self._denominators: Dict[Tuple[int, ...], TruncSeries] = {}

    def _sheets(self) -> List[TruncSeries]:
        x = self.curve.local_x(self.a, self.order + self.m + 1)
        lead = x[self.m]
        if self.scalars.is_negligible(lead):
            raise DegenerateCurveError(f"x has a zero of order > {self.m} at p{self.a}")
        ratio = x.shift("t", -self.m).scale(self.scalars.one / lead)
        xi = ratio.power(QQ(1, self.m)).shift("t", 1).truncate(0, self.order + 1)
        inverse = series_reversion(xi, self.order + 1, var="t")
        sheets = [TruncSeries.variable(self.scalars, ("t",), (self.order,), "t")]
        for j in range(1, self.m):
            rotated = xi.scale(self.scalars.root_of_unity(self.m, j))
            sheets.append(inverse.compose(rotated).truncate(0, self.order))
        return sheets

    @property
    def deck(self) -> TruncSeries:
        if self.m != 2:
            raise UnsupportedCurveError(f"p{self.a} is not a simple critical point (m = {self.m}); use the BE step")
        return self.sheets[1]

    def sheet_defect(self) -> float:
        """Largest coefficient of x(ζ_j(t)) − x(t) over the sheets."""
        x = self.curve.local_x(self.a, self.order)
        worst = 0.0
        for zeta in self.sheets[1:]:
            diff = x.compose(zeta) - x
            worst = max([worst] + [self.scalars.magnitude(c) for c in diff.coeffs.values()])
        return worst

    def involution_defect(self) -> float:
        sigma = self.deck
        diff = sigma.compose(sigma) - self.sheets[0]
        return max((self.scalars.magnitude(c) for c in diff.coeffs.values()), default=0.0)

    # ------------------------------------------------------------------ pulled back differentials
    def sheet_power(self, j: int, k: int) -> TruncSeries:
        key = (j, k)
        if key not in self._powers:
            if k == 0:
                self._powers[key] = TruncSeries.constant(self.scalars, ("t",), (self.order,))
            else:
                self._powers[key] = self.sheet_power(j, k - 1) * self.sheets[j]
        return self._powers[key]

    def basis_on_sheet(self, j: int, key: Key) -> TruncSeries:
        """ζ_j′(t) / (p_a + ζ_j(t) − p_{a′})^d."""
        cache = (j, key)
        if cache not in self._basis:
            a2, d = key
            zeta = self.sheets[j]
            if a2 != self.a:
                zeta = zeta + (self.point - self.curve.critical_points[a2].point)
            self._basis[cache] = zeta.inverse() ** d * self.dsheets[j]
        return self._basis[cache]

    def on_sheets(self, omega: MultiDifferential, sheets: Tuple[int, ...], slots: Tuple[int, ...]) -> Partial:
        """ω with its first slots on ``sheets``, the remaining ones labelled by ``slots``."""
        cache = (omega.g, omega.n, sheets)
        if cache not in self._partials:
            s = len(sheets)
            grouped: Dict[Tuple[Key, ...], TruncSeries] = {}
            for full, c in omega.coeffs.items():
                series = None
                for j, key in zip(sheets, full[:s]):
                    e = self.basis_on_sheet(j, key)
                    series = e if series is None else series * e
                series = series.scale(c)
                tail = full[s:]
                grouped[tail] = grouped[tail] + series if tail in grouped else series
            self._partials[cache] = grouped
        return {tuple(zip(slots, tail)): series for tail, series in self._partials[cache].items()}

    def bergman_on_sheets(self, i: int, j: int) -> TruncSeries:
        diff = self.sheets[i] - self.sheets[j]
        return self.dsheets[i] * self.dsheets[j] * (diff * diff).inverse()

    def bergman_to_slot(self, i: int, slot: int) -> Partial:
        """ω_{0,2}(ζ_i, z) = Σ_k (k+1) ζ_i^k ζ_i′ dz/(z − p_a)^{k+2}."""
        out: Partial = {}
        for k in range(self.order):
            series = (self.sheet_power(i, k) * self.dsheets[i]).scale(k + 1)
            if series.is_zero():
                break
            out[((slot, (self.a, k + 2)),)] = series
        return out

    def ydx_on_sheet(self, j: int) -> TruncSeries:
        """(y(ζ_j) − y(p_a))·x′(t), using dx(ζ_j) = dx(t)."""
        return self.y.compose(self.sheets[j]) * self.x_prime

    def partial(self, lookup: Lookup, g: int, sheets: Tuple[int, ...], slots: Tuple[int, ...]) -> Partial:
        size = len(sheets) + len(slots)
        if (g, size) == (0, 2):
            if len(sheets) == 2:
                return {(): self.bergman_on_sheets(*sheets)}
            return self.bergman_to_slot(sheets[0], slots[0])
        if (g, size) == (0, 1):
            raise ValueError("ω_{0,1} is excluded from recursion brackets")
        return self.on_sheets(lookup(g, size), sheets, slots)

    def kernel_denominator(self, sheets: Tuple[int, ...]) -> TruncSeries:
        """∏_{i} 1/((y(t) − y(ζ_i))·x′(t))."""
        if sheets not in self._denominators:
            out = None
            for i in sheets:
                factor = ((self.y - self.y.compose(self.sheets[i])) * self.x_prime).inverse()
                out = factor if out is None else out * factor
            self._denominators[sheets] = out
        return self._denominators[sheets]


# ---------------------------------------------------------------------- recursion steps
def tr_step(curve: SpectralCurve, g: int, n: int, lookup: Lookup, chart: Callable[[int], LocalChart]) -> MultiDifferential:
    """ω_{g,n+1}(z_0, z_1..z_n) by the residue formula at simple critical points."""
    field = curve.scalars
    half = field.convert(QQ(1, 2))
    slots = tuple(range(1, n + 1))
    out = MultiDifferential(g, n + 1, field)
    for a in range(len(curve.critical_points)):
        local = chart(a)
        if local.m != 2:
            raise UnsupportedCurveError(f"p{a} is not a simple critical point (m = {local.m}); use the BE step")
        bracket: Partial = {}
        if g >= 1:
            _accumulate(bracket, local.partial(lookup, g - 1, (0, 1), slots))
        for g1 in range(g + 1):
            for size in range(n + 1):
                for I1 in combinations(slots, size):
                    I2 = tuple(s for s in slots if s not in I1)
                    if (g1, len(I1)) == (0, 0) or (g - g1, len(I2)) == (0, 0):
                        continue
                    left = local.partial(lookup, g1, (0,), I1)
                    right = local.partial(lookup, g - g1, (1,), I2)
                    _accumulate(bracket, _merge(left, right))
        D = local.kernel_denominator((1,))
        for rest, b in bracket.items():
            if b.is_zero():
                continue
            P = D * b
            tail = tuple(key for _, key in rest)
            for k in range(1, -P.valuation()):
                value = (P[-1 - k] - residue_of_product(local.sheet_power(1, k), P)) * half
                out.add(((a, k + 1),) + tail, value)
    return out


def be_step(
    curve: SpectralCurve,
    g: int,
    n: int,
    lookup: Lookup,
    chart: Callable[[int], LocalChart],
    reverse_sheets: bool = False,
) -> MultiDifferential:
    """ω_{g,n+1}(z_0, z_1..z_n) summing over subsets of the local sheets and their set partitions."""
    field = curve.scalars
    slots = tuple(range(1, n + 1))
    out = MultiDifferential(g, n + 1, field)
    for a in range(len(curve.critical_points)):
        local = chart(a)
        m = local.m
        label = (lambda j: 0 if j == 0 else m - j) if reverse_sheets else (lambda j: j)
        for size in range(1, m):
            for I in combinations(range(1, m), size):
                bracket: Partial = {}
                for partition in set_partitions((0,) + I):
                    length = len(partition)
                    total = g + length - size - 1
                    if total < 0:
                        continue
                    for assignment in product(range(length), repeat=n):
                        blocks = [tuple(s for s, b in zip(slots, assignment) if b == i) for i in range(length)]
                        for genera in compositions(total, length):
                            if any((gi, len(J) + len(N)) == (0, 1) for gi, J, N in zip(genera, partition, blocks)):
                                continue
                            term: Optional[Partial] = None
                            for gi, J, N in zip(genera, partition, blocks):
                                piece = local.partial(lookup, gi, tuple(label(j) for j in J), N)
                                term = piece if term is None else _merge(term, piece)
                            _accumulate(bracket, term)
                D = local.kernel_denominator(tuple(label(i) for i in I))
                sign = -1 if size % 2 == 0 else 1
                for rest, b in bracket.items():
                    if b.is_zero():
                        continue
                    P = D * b
                    tail = tuple(key for _, key in rest)
                    for k in range(1, -P.valuation()):
                        out.add(((a, k + 1),) + tail, P[-1 - k] * sign)
    return out


# ---------------------------------------------------------------------- driver
class TopologicalRecursion:
    """The ω_{g,n} table of a spectral curve, filled in order of 2g − 2 + n.

    ``method`` is "ceo" (simple critical points only), "be", or "auto".
    """

    def __init__(self, curve: SpectralCurve, method: str = "auto", check_labelling: bool = False):
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")
        if method == "auto":
            method = "ceo" if curve.all_simple else "be"
        if method == "ceo" and not curve.all_simple:
            raise UnsupportedCurveError("the CEO step needs simple critical points; use method 'be'")
        if not curve.critical_points:
            raise DegenerateCurveError("the curve has no critical points")
        self.curve = curve
        self.method = method
        self.check_labelling = check_labelling
        field = curve.scalars
        self._table: Dict[Tuple[int, int], MultiDifferential] = {
            (0, 1): MultiDifferential(0, 1, field, special="ydx"),
            (0, 2): MultiDifferential(0, 2, field, special="bergman"),
        }
        self._charts: Dict[Tuple[int, int], LocalChart] = {}

    def chart(self, a: int, order: int) -> LocalChart:
        key = (a, order)
        if key not in self._charts:
            logger.debug("chart at p%d to order %d", a, order)
            self._charts[key] = LocalChart(self.curve, a, order)
        return self._charts[key]

    def omega(self, g: int, n: int) -> MultiDifferential:
        if (g, n) in self._table:
            return self._table[(g, n)]
        if g < 0 or n < 1:
            raise ValueError(f"invalid (g, n) = ({g}, {n})")
        order = initial_order(g, n)
        for _ in range(MAX_DOUBLINGS + 1):
            try:
                result = self._step(g, n - 1, order)
                break
            except TruncationError as exc:
                logger.debug("chart order %d too small for ω_{%d,%d} (%s), doubling", order, g, n, exc)
                order *= 2
        else:
            raise TruncationError(f"ω_{{{g},{n}}} needs a chart order beyond {order // 2}", required_order=order)
        self._table[(g, n)] = result
        logger.info("ω_{%d,%d} computed by %s: %d terms, chart order %d", g, n, self.method, len(result.coeffs), order)
        return result

    def _step(self, g: int, n: int, order: int) -> MultiDifferential:
        chart = lambda a: self.chart(a, order)
        if self.method == "ceo":
            return tr_step(self.curve, g, n, self.omega, chart)
        result = be_step(self.curve, g, n, self.omega, chart)
        if self.check_labelling:
            relabelled = be_step(self.curve, g, n, self.omega, chart, reverse_sheets=True)
            if not result.agrees_with(relabelled):
                raise ComputationError(
                    f"BE output for ({g},{n + 1}) depends on the sheet labelling "
                    f"(deviation {result.difference(relabelled):.3e})"
                )
        return result

    def table(self, g_max: int, n_max: int) -> Dict[Tuple[int, int], MultiDifferential]:
        cells = sorted(
            ((g, n) for g in range(g_max + 1) for n in range(1, n_max + 1) if 2 * g - 2 + n > 0),
            key=lambda c: (2 * c[0] - 2 + c[1], c),
        )
        return {cell: self.omega(*cell) for cell in cells}

    def expand(self, g: int, n: int, k_max: int) -> Dict[Tuple[int, ...], object]:
        return expand_at_origin(self.omega(g, n), self.curve, k_max)

    def compute(self, g: int, n: int, representation: str = "pole_basis", k_max: int = 6) -> NPointResult:
        if representation == "series":
            return NPointResult("trengine", "omega", g, n, "series", self.expand(g, n, k_max),
                                meta={"k_max": k_max, "method": self.method})
        if representation != "pole_basis":
            raise ValueError(f"unknown representation {representation!r}")
        return NPointResult("trengine", "omega", g, n, "pole_basis", self.omega(g, n), meta={"method": self.method})

    # ------------------------------------------------------------------ in-chart checks
    def _check_order(self, g: int, n: int) -> int:
        return 2 * initial_order(g, n)

    def linear_loop_defect(self, g: int, n: int, a: int) -> float:
        """Largest coefficient of Σ_j ω_{g,n}(ζ_j, ·) below t^{m−1}."""
        omega = self.omega(g, n)
        local = self.chart(a, self._check_order(g, n))
        slots = tuple(range(1, n))
        total: Partial = {}
        for j in range(local.m):
            _accumulate(total, local.on_sheets(omega, (j,), slots))
        return self._defect(total, local.m - 1)

    def quadratic_loop_defect(self, g: int, n: int, a: int) -> float:
        """Largest coefficient of ω_{g−1,n+1}(t,σ,·) + Σ ω(t,·)ω(σ,·), (0,1) included, below t²."""
        local = self.chart(a, self._check_order(g, n))
        if local.m != 2:
            raise UnsupportedCurveError(f"p{a} is not a simple critical point (m = {local.m})")
        slots = tuple(range(1, n))
        total: Partial = {}
        if g >= 1:
            _accumulate(total, local.partial(self.omega, g - 1, (0, 1), slots))
        for g1 in range(g + 1):
            for size in range(n):
                for I1 in combinations(slots, size):
                    I2 = tuple(s for s in slots if s not in I1)
                    left = self._with_ydx(local, g1, 0, I1)
                    right = self._with_ydx(local, g - g1, 1, I2)
                    _accumulate(total, _merge(left, right))
        return self._defect(total, 2)

    def _with_ydx(self, local: LocalChart, g: int, sheet: int, slots: Tuple[int, ...]) -> Partial:
        if (g, len(slots)) == (0, 0):
            return {(): local.ydx_on_sheet(sheet)}
        return local.partial(self.omega, g, (sheet,), slots)

    def _defect(self, total: Partial, below: int) -> float:
        scalars = self.curve.scalars
        worst = 0.0
        for series in total.values():
            for (k,), c in series.terms():
                if k < below:
                    worst = max(worst, scalars.magnitude(c))
        return worst


def deck_series(curve: SpectralCurve, a: int, order: int) -> TruncSeries:
    return LocalChart(curve, a, order).deck


def expand_at_origin(omega: MultiDifferential, curve: SpectralCurve, k_max: int) -> Dict[Tuple[int, ...], object]:
    """h_{g;k} from ω = Σ h ∏ k_i X_i^{k_i − 1} dX_i, for weakly decreasing k."""
    scalars = curve.scalars
    model = curve.model
    if omega.special == "ydx":
        return {k: scalars.convert(v) for k, v in unstable_01_series(model, k_max).items()}
    if omega.special == "bergman":
        return {k: scalars.convert(v) for k, v in unstable_02_series(model, k_max).items()}
    order = k_max + 1
    zX = curve.z_of_X(order).to_field(scalars)
    zQ = (RationalFunction.variable("z") / model.Q).laurent_at(0, order, scalars, var="z")
    basis: Dict[Key, List] = {}
    for key in {k for full in omega.coeffs for k in full}:
        a, d = key
        p = curve.critical_points[a].point
        linear = TruncSeries(scalars, ("z",), (order,), {(0,): -p, (1,): scalars.one})
        E = (zQ * (linear ** d).inverse()).compose(zX)
        basis[key] = [E.coeffs.get((k,), scalars.zero) for k in range(order)]
    # contract one slot at a time: (k so far, remaining keys) -> value
    table: Dict[Tuple[Tuple[int, ...], Tuple[Key, ...]], object] = {((), full): c for full, c in omega.coeffs.items()}
    for _ in range(omega.n):
        contracted: Dict[Tuple[Tuple[int, ...], Tuple[Key, ...]], object] = {}
        for (ks, keys), c in table.items():
            row = basis[keys[0]]
            for k in range(1, order):
                if scalars.is_zero(row[k]):
                    continue
                index = (ks + (k,), keys[1:])
                term = c * row[k]
                contracted[index] = contracted[index] + term if index in contracted else term
        table = contracted
    values = {ks: c for (ks, _), c in table.items()}
    out = {}
    for ks in decreasing_tuples(omega.n, k_max):
        denominator = 1
        for k in ks:
            denominator *= k
        out[ks] = values.get(ks, scalars.zero) * scalars.convert(QQ(1, denominator))
    return out
