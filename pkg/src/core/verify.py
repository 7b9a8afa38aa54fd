# verify.py
import logging
from itertools import product
from math import prod
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy import Matrix
from sympy.polys.domains import QQ
from sympy.polys.rings import ring

from src.core.closedform import (
    ClosedFormEngine,
    canonical_names,
    origin_chart,
    pin_values,
    specialise,
    subs_checked,
)
from src.core.errors import ComputationError, ConfigurationError, EngineError, TruncationError, UnsupportedCurveError
from src.core.higher_loops import HigherLoopEngine
from src.core.model import Family, HypergeometricModel, SpectralCurve
from src.core.operators import function_field, rho_coefficients
from src.core.oracle import TauFunctionOracle
from src.core.rational import RationalFunction
from src.core.series import RATIONALS, TruncSeries
from src.core.trengine import LocalChart, TopologicalRecursion
from src.models.run_models import CheckReport, Verdict

logger = logging.getLogger(__name__)

PINNINGS = 3
CHART_ORDER = 12
BASES = ("xi", "xi_tilde")


def make_report(check: str, model: HypergeometricModel, verdict: Verdict, reason: Optional[str] = None,
            witness: Optional[Dict] = None, **scope) -> CheckReport:
    report = CheckReport(check=check, model=model.fingerprint, verdict=verdict, reason=reason,
                         witness=witness or {}, **scope)
    log = logger.warning if verdict is Verdict.SKIPPED else logger.info
    log("%s %s %s: %s%s", check, model.name or model.fingerprint, scope, verdict.value,
        f" ({reason})" if reason else "")
    return report


def skip_report(check: str, model: HypergeometricModel, exc: Exception, **scope) -> CheckReport:
    return make_report(check, model, Verdict.SKIPPED, reason=f"{type(exc).__name__}: {exc}", **scope)


def merge_verdicts(reports: Iterable[CheckReport]) -> Verdict:
    verdicts = [r.verdict for r in reports]
    if Verdict.FAIL in verdicts:
        return Verdict.FAIL
    if verdicts and all(v is Verdict.SKIPPED for v in verdicts):
        return Verdict.SKIPPED
    return Verdict.PASS


# ---------------------------------------------------------------------- Ξ̂ membership
def _pole_order(f: RationalFunction, point, scalars) -> int:
    return max([-k for k in f.principal_part_at(point, scalars)] + [0])


def principal_defect(f: Union[RationalFunction, TruncSeries], chart: LocalChart) -> Dict:
    """Negative powers of Σ_j f(ζ_j(t)) at the chart's critical point.

    Returns ``{}`` when the sum is holomorphic at t = 0.
    """
    scalars = chart.scalars
    local = f if isinstance(f, TruncSeries) else f.laurent_at(chart.point, chart.order, scalars)
    total = local
    for zeta in chart.sheets[1:]:
        total = total + local.compose(zeta)
    if total.orders[0] is not None and total.orders[0] < 0:
        raise TruncationError("principal part beyond the chart order", required_order=2 * chart.order)
    scale = max([scalars.magnitude(c) for (k,), c in local.terms() if k < 0] + [1.0])
    out = {}
    for (k,), c in sorted(total.terms()):
        if k >= 0:
            break
        if scalars.exact and not scalars.is_zero(c):
            out[k] = c
        elif not scalars.exact and not scalars.is_negligible(c, scale):
            out[k] = c
    return out


class ChartCache:
    """Local charts per critical point, rebuilt at a larger order when a pole needs it."""

    def __init__(self, curve: SpectralCurve, order: int = CHART_ORDER):
        self.curve = curve
        self.order = order
        self._charts: Dict[int, LocalChart] = {}

    def get(self, a: int, pole: int = 0) -> LocalChart:
        needed = max(self.order, 2 * pole + 4)
        chart = self._charts.get(a)
        if chart is None or chart.order < needed:
            chart = LocalChart(self.curve, a, needed)
            self._charts[a] = chart
        return chart


def check_xihat(f: Union[RationalFunction, TruncSeries], curve: SpectralCurve, a: int,
                charts: Optional[ChartCache] = None, **scope) -> CheckReport:
    """Odd principal part at p_a: f(t) + f(σ_a(t)) holomorphic at t = 0."""
    model = curve.model
    charts = charts or ChartCache(curve)
    try:
        pole = 0 if isinstance(f, TruncSeries) else _pole_order(f, curve.critical_points[a].point, curve.scalars)
        chart = charts.get(a, pole)
        defect = principal_defect(f, chart)
    except (TruncationError, UnsupportedCurveError) as exc:
        return skip_report("xihat", model, exc, a=a, **scope)
    if not defect:
        return make_report("xihat", model, Verdict.PASS, a=a, **scope)
    k, c = min(defect.items())
    witness = {"power": k, "coefficient": curve.scalars.to_json(c), "point": curve.scalars.to_json(chart.point)}
    return make_report("xihat", model, Verdict.FAIL, witness=witness, a=a, **scope)


def _pinned_in_z1(frac, n: int, pins: Sequence) -> RationalFunction:
    field = function_field(canonical_names(n))
    pairs = [(field.gen(i + 1), p) for i, p in enumerate(pins)]
    return RationalFunction.from_frac(subs_checked(frac, pairs), 0, "z")


def _pinnings(n: int, seed: int, frac) -> List[Tuple[List, RationalFunction]]:
    """Up to PINNINGS distinct pinnings of z2..zn that avoid the poles of ``frac``."""
    out = []
    attempt = 0
    while len(out) < (PINNINGS if n > 1 else 1) and attempt < 10 * PINNINGS:
        pins = pin_values(n, seed, attempt)
        attempt += 1
        try:
            out.append((pins, _pinned_in_z1(frac, n, pins)))
        except ZeroDivisionError:
            continue
    if not out:
        raise ComputationError("no pinning avoids the poles")
    return out


def _xihat_all_points(frac, nvars: int, curve: SpectralCurve, seed: int, charts: ChartCache,
                      check: str, **scope) -> List[CheckReport]:
    """check_xihat at every critical point; all pinnings must pass."""
    model = curve.model
    reports = []
    pinnings = _pinnings(nvars, seed, frac)
    for a in range(len(curve.critical_points)):
        runs = [check_xihat(f, curve, a, charts) for _, f in pinnings]
        witness = {"pins": [[str(p) for p in pins] for pins, _ in pinnings]}
        for run in runs:
            if run.verdict is not Verdict.PASS:
                witness.update(run.witness)
                break
        reason = next((r.reason for r in runs if r.reason), None)
        reports.append(make_report(check, model, merge_verdicts(runs), reason=reason, witness=witness, a=a, **scope))
    return reports


# ---------------------------------------------------------------------- loop equations
def check_wr_agreement(engine: HigherLoopEngine, r: int, g: int, n: int) -> CheckReport:
    """Definitional and closed form 𝒲^{(r)}_{g,n} coincide as elements of QQ(z1..zn)."""
    model = engine.model
    try:
        closed = engine.closed_form(r, g, n)
        definitional = engine.definitional(r, g, n)
    except EngineError as exc:
        return skip_report("wr_agreement", model, exc, g=g, n=n, r=r)
    if closed == definitional:
        return make_report("wr_agreement", model, Verdict.PASS, g=g, n=n, r=r)
    witness = {"difference": str((closed - definitional).as_expr())}
    return make_report("wr_agreement", model, Verdict.FAIL, witness=witness, g=g, n=n, r=r)


def stable_range(g_max: int, n_max: int, include_unstable_r: bool = False) -> List[Tuple[int, int]]:
    cells = [(g, n) for g in range(g_max + 1) for n in range(1, n_max + 1)
             if include_unstable_r or 2 * g - 2 + n > 0]
    return sorted(cells, key=lambda c: (2 * c[0] - 2 + c[1], c))


def check_loop_equations(
    model: HypergeometricModel,
    curve: SpectralCurve,
    g_max: int,
    n_max: int,
    r_max: int,
    seed: int = 2024,
    corrupt: Optional[Callable[[object, int], object]] = None,
) -> List[CheckReport]:
    """𝒲^{(r)}_{g,n} ∈ Ξ̂(z1) for r ≤ r_max, after the definitional/closed form agreement.

    ``corrupt(value, n)`` perturbs every tested function; it exists for negative controls.
    """
    engine = HigherLoopEngine(model, seed)
    charts = ChartCache(curve)
    reports: List[CheckReport] = []
    for r in range(1, r_max + 1):
        for g, n in stable_range(g_max, n_max, include_unstable_r=True):
            stable = 2 * g - 2 + n > 0
            if r >= 2 and model.y_rational is None:
                reports.append(make_report("loop_equation", model, Verdict.SKIPPED,
                                       reason="higher loop quantities need a rational y", g=g, n=n, r=r))
                continue
            if r >= 2 and stable and corrupt is None:
                agreement = check_wr_agreement(engine, r, g, n)
                reports.append(agreement)
                if agreement.failed:
                    continue
            try:
                value = engine.closed.W_rational(g, n) if r == 1 else engine.closed_form(r, g, n)
                if corrupt is not None:
                    value = corrupt(value, n)
                reports.extend(_xihat_all_points(value, n, curve, seed, charts, "loop_equation", g=g, n=n, r=r))
            except EngineError as exc:
                reports.append(skip_report("loop_equation", model, exc, g=g, n=n, r=r))
    return reports


def corrupt_with_pole(point) -> Callable[[object, int], object]:
    """Adds 1/(z1 − point)², an even principal part."""

    def corrupt(value, n: int):
        field = function_field(canonical_names(n))
        z1 = field.gen(0)
        return value + 1 / (z1 - field.convert(point)) ** 2

    return corrupt


def _bivariate_on_chart(frac, chart: LocalChart, i: int, j: int) -> TruncSeries:
    """A function of (z1, z2) evaluated at z1 = p + ζ_i(t), z2 = p + ζ_j(t)."""
    scalars = chart.scalars
    left = chart.sheets[i] + chart.point
    right = chart.sheets[j] + chart.point
    powers_l: Dict[int, TruncSeries] = {}
    powers_r: Dict[int, TruncSeries] = {}

    def evaluate(poly):
        acc = TruncSeries.zero(scalars, ("t",), (chart.order,))
        for (e1, e2), c in poly.terms():
            if e1 not in powers_l:
                powers_l[e1] = left ** e1
            if e2 not in powers_r:
                powers_r[e2] = right ** e2
            acc = acc + (powers_l[e1] * powers_r[e2]).scale(scalars.convert(c))
        return acc

    return evaluate(frac.numer) * evaluate(frac.denom).inverse()


def check_quadratic_loop(model: HypergeometricModel, curve: SpectralCurve, g: int, n: int,
                         seed: int = 2024, order: int = CHART_ORDER) -> List[CheckReport]:
    """W_{g−1,n+2}(z,σz,J) + Σ W_{g1,1+|I|}(z,I) W_{g2,1+|J∖I|}(σz,J∖I) holomorphic at every p_a.

    J holds ``n`` pinned variables; the products run over g1 + g2 = g and all
    splittings I ⊔ I′ = J, W_{0,1} = y included.
    """
    closed = ClosedFormEngine(model, seed)
    scalars = curve.scalars
    if model.y_rational is None:
        return [make_report("quadratic_loop", model, Verdict.SKIPPED, reason="W_{0,1} is not rational", g=g, n=n)]
    pins = pin_values(n + 1, seed)
    reports = []
    for a, cp in enumerate(curve.critical_points):
        try:
            if not cp.is_simple:
                raise UnsupportedCurveError(f"p{a} is not a simple critical point")
            total = _qle_bracket(closed, LocalChart(curve, a, order), g, n, pins)
        except (TruncationError, UnsupportedCurveError, ZeroDivisionError) as exc:
            reports.append(skip_report("quadratic_loop", model, exc, g=g, n=n, a=a))
            continue
        scale = max([scalars.magnitude(c) for c in total.coeffs.values()] + [1.0])
        bad = [(k, c) for (k,), c in sorted(total.terms())
               if k < 0 and (scalars.exact or not scalars.is_negligible(c, scale))]
        witness = {"pins": [str(p) for p in pins]}
        if bad:
            witness.update(power=bad[0][0], coefficient=scalars.to_json(bad[0][1]))
        reports.append(make_report("quadratic_loop", model, Verdict.FAIL if bad else Verdict.PASS,
                               witness=witness, g=g, n=n, a=a))
    return reports


def _qle_bracket(closed: ClosedFormEngine, chart: LocalChart, g: int, n: int, pins: Sequence) -> TruncSeries:
    slots = tuple(range(n))
    total = TruncSeries.zero(chart.scalars, ("t",), (chart.order,))
    if g >= 1:
        field = function_field(canonical_names(n + 2))
        pairs = [(field.gen(i + 2), p) for i, p in enumerate(pins[:n])]
        pinned = subs_checked(closed.W_rational(g - 1, n + 2), pairs)
        two = function_field(canonical_names(2))
        images = [two.gen(0), two.gen(1)] + [two.zero] * n
        total = total + _bivariate_on_chart(specialise(pinned, two, images), chart, 0, 1)
    for g1 in range(g + 1):
        for mask in product((0, 1), repeat=n):
            I1 = tuple(s for s, m in zip(slots, mask) if m == 0)
            I2 = tuple(s for s, m in zip(slots, mask) if m == 1)
            left = _one_free(closed, chart, g1, I1, pins, 0)
            right = _one_free(closed, chart, g - g1, I2, pins, 1)
            total = total + left * right
    if total.orders[0] is not None and total.orders[0] < 0:
        raise TruncationError("bracket known only below a negative power", required_order=2 * chart.order)
    return total


def _one_free(closed: ClosedFormEngine, chart: LocalChart, g: int, slots: Tuple[int, ...], pins: Sequence,
              sheet: int) -> TruncSeries:
    size = 1 + len(slots)
    f = _pinned_in_z1(closed.W_rational(g, size), size, [pins[s] for s in slots])
    local = f.laurent_at(chart.point, chart.order, chart.scalars)
    return local if sheet == 0 else local.compose(chart.sheets[sheet])


def check_tr_loop_equations(tr: TopologicalRecursion, g_max: int, n_max: int) -> List[CheckReport]:
    """Linear and quadratic loop equations of the ω_{g,n} inside each chart, plus their residues."""
    curve = tr.curve
    model = curve.model
    reports = []
    for g, n in stable_range(g_max, n_max):
        try:
            omega = tr.omega(g, n)
        except EngineError as exc:
            reports.append(skip_report("tr_residues", model, exc, g=g, n=n))
            continue
        residue = omega.residue_sum()
        clean = not omega.has_pole_at_infinity() and curve.scalars.is_negligible(residue)
        reports.append(make_report("tr_residues", model, Verdict.PASS if clean else Verdict.FAIL,
                               witness={"residue": float(residue), "symmetric": omega.is_symmetric()}, g=g, n=n))
        for a, cp in enumerate(curve.critical_points):
            checks = [("tr_linear_loop", tr.linear_loop_defect)]
            if cp.is_simple:
                checks.append(("tr_quadratic_loop", tr.quadratic_loop_defect))
            for name, defect_of in checks:
                try:
                    defect = defect_of(g, n, a)
                except EngineError as exc:
                    reports.append(skip_report(name, model, exc, g=g, n=n, a=a))
                    continue
                passed = defect == 0.0 if curve.scalars.exact else curve.scalars.is_negligible(defect)
                reports.append(make_report(name, model, Verdict.PASS if passed else Verdict.FAIL,
                                       witness={"defect": float(defect)}, g=g, n=n, a=a))
    return reports


# ---------------------------------------------------------------------- projection property
def undeformed_variant(model: HypergeometricModel) -> HypergeometricModel:
    """ψ̂ replaced by ψ: a Family I model with polynomial ψ becomes a raw model without corrections."""
    if model.family is not Family.FAMILY_I or any(c != 0 for c in model.P2[1:] + model.P3[1:]):
        raise ConfigurationError("an undeformed variant exists for Family I models with polynomial psi only")
    return HypergeometricModel.raw(psi=model.P1, R1=model.R1, R2=model.R2, name=f"{model.name} undeformed")


def foreign_denominator(f: RationalFunction, model: HypergeometricModel) -> int:
    """Degree of the part of f's denominator coprime to Q̌."""
    den = f.denominator_poly
    q = den.ring.from_dict(dict(model.Q_check.numerator_poly.terms()))
    while True:
        common = den.gcd(q)
        if common.is_ground:
            break
        den = den.quo(common)
    return den.degree()


def check_projection(model: HypergeometricModel, curve: SpectralCurve, g: int, n: int,
                     seed: int = 2024) -> List[CheckReport]:
    """H_{g,n} ∈ Θ in z1: poles only at the p_a, none at ∞, odd principal parts."""
    closed = ClosedFormEngine(model, seed)
    try:
        value = closed.H_rational(g, n)
        pinnings = _pinnings(n, seed, value)
    except EngineError as exc:
        return [skip_report("projection", model, exc, g=g, n=n)]
    reports = []
    foreign = max(foreign_denominator(f, model) for _, f in pinnings)
    at_infinity = max(f.pole_order_at_infinity() for _, f in pinnings)
    witness = {"foreign_pole_degree": foreign, "pole_order_at_infinity": at_infinity,
               "pins": [[str(p) for p in pins] for pins, _ in pinnings]}
    verdict = Verdict.PASS if foreign == 0 and at_infinity <= 0 else Verdict.FAIL
    reports.append(make_report("projection_poles", model, verdict, witness=witness, g=g, n=n))
    reports.extend(_xihat_all_points(value, n, curve, seed, ChartCache(curve), "projection_odd", g=g, n=n))
    return reports


def check_projection_control(model: HypergeometricModel, curve: SpectralCurve, g: int, n: int,
                             seed: int = 2024) -> CheckReport:
    """The undeformed variant of ``model`` must leave Θ; passes when it does."""
    try:
        variant = undeformed_variant(model)
    except ConfigurationError as exc:
        return skip_report("projection_control", model, exc, g=g, n=n)
    runs = check_projection(variant, curve, g, n, seed)
    failed = any(r.failed for r in runs)
    witness = next((r.witness for r in runs if r.failed), {})
    return make_report("projection_control", model, Verdict.PASS if failed else Verdict.FAIL,
                   witness=witness, g=g, n=n)


# ---------------------------------------------------------------------- three engines
def _residual(a, b, scalars) -> float:
    if scalars.exact:
        return 0.0 if QQ.convert(a) == QQ.convert(b) else float("inf")
    a, b = scalars.convert(a), scalars.convert(b)
    return scalars.magnitude(a - b) / max(scalars.magnitude(a), scalars.magnitude(b), 1.0)


def cross_check(model: HypergeometricModel, curve: SpectralCurve, g: int, n: int, k_max: int,
                tol: Optional[float] = None, tr: Optional[TopologicalRecursion] = None,
                oracle: Optional[TauFunctionOracle] = None) -> CheckReport:
    """Oracle, closed form and TR agree on h_{g;k} for decreasing k with parts ≤ k_max.

    Pairs of exact engines compare exactly; pairs involving a numeric TR table
    compare by relative residual against ``tol``.
    """
    scalars = curve.scalars
    if tol is None:
        tol = 0.0 if scalars.exact else float(scalars.tolerance)
    tables: Dict[str, Dict] = {}
    skipped: Dict[str, str] = {}
    sources = {
        "oracle": lambda: (oracle or TauFunctionOracle(model)).hurwitz_table(g, n, k_max),
        "closedform": lambda: ClosedFormEngine(model).W_series(g, n, k_max),
        "trengine": lambda: (tr or TopologicalRecursion(curve)).expand(g, n, k_max),
    }
    for name, compute in sources.items():
        try:
            tables[name] = compute()
        except EngineError as exc:
            skipped[name] = f"{type(exc).__name__}: {exc}"
    if len(tables) < 2:
        reason = "; ".join(f"{k}: {v}" for k, v in skipped.items())
        return make_report("cross_check", model, Verdict.SKIPPED, reason=reason, g=g, n=n)
    names = sorted(tables)
    worst = 0.0
    witness: Dict = {"engines": names, "skipped": skipped, "k_max": k_max}
    for i, first in enumerate(names):
        for second in names[i + 1:]:
            field = scalars if "trengine" in (first, second) else RATIONALS
            for k in sorted(set(tables[first]) & set(tables[second])):
                residual = _residual(tables[first][k], tables[second][k], field)
                if residual > worst:
                    worst = residual
                    witness.update(pair=[first, second], k=list(k),
                                   values=[str(tables[first][k]), str(tables[second][k])])
    witness["max_residual"] = worst
    return make_report("cross_check", model, Verdict.PASS if worst <= tol else Verdict.FAIL, witness=witness, g=g, n=n)


# ---------------------------------------------------------------------- quasi-polynomiality
def basis_functions(model: HypergeometricModel, curve: SpectralCurve, basis: str) -> List[RationalFunction]:
    """(z − p_i)^{-1} for ``xi``; z^α/Q̌(z), α < N, for ``xi_tilde``."""
    if basis not in BASES:
        raise ConfigurationError(f"unknown basis {basis!r}, expected one of {BASES}")
    z = RationalFunction.variable("z")
    if basis == "xi":
        points = [cp.exact_point for cp in curve.critical_points]
        if any(p is None for p in points):
            raise UnsupportedCurveError("the xi basis needs rational critical points")
        return [1 / (z - p) for p in points]
    q = model.Q_check
    return [z ** alpha / q for alpha in range(q.numerator_poly.degree())]


def x_coefficients(f: RationalFunction, model: HypergeometricModel, k_max: int) -> List:
    """[X^k] f(z(X)) for k = 0..k_max."""
    order = k_max + 1
    chart = origin_chart(model)
    series = f.series_at_zero(order, var="z").compose(chart.z_of_X(order))
    return [series[k] for k in range(order)]


def _monomials(n: int, degree: int) -> List[Tuple[int, ...]]:
    return [e for e in product(range(degree + 1), repeat=n) if sum(e) <= degree]


def quasipoly_fit(
    model: HypergeometricModel,
    curve: SpectralCurve,
    g: int,
    n: int,
    k_max: int,
    basis: str = "xi",
    values: Optional[Dict[Tuple[int, ...], object]] = None,
    degree: Optional[int] = None,
) -> Tuple[CheckReport, Optional[Dict]]:
    """Fit h_{g;k} = Σ_i A_i(k) ∏_j [X^{k_j}] ξ^{i_j} with deg A ≤ 3g − 3 + n.

    Parts ≤ k_max − 1 fit the polynomials, tuples containing k_max verify them.
    Returns the report and ``{index tuple: {exponent tuple: coefficient}}``.
    """
    scope = dict(g=g, n=n)
    degree = 3 * g - 3 + n if degree is None else degree
    if degree < 0:
        return make_report("quasipoly", model, Verdict.SKIPPED, reason="unstable (g, n)", **scope), None
    try:
        functions = basis_functions(model, curve, basis)
        values = values if values is not None else ClosedFormEngine(model).W_series(g, n, k_max)
    except EngineError as exc:
        return skip_report("quasipoly", model, exc, **scope), None
    columns = [x_coefficients(f, model, k_max) for f in functions]
    monomials = _monomials(n, degree)
    indices = list(product(range(len(functions)), repeat=n))
    unknowns = [(i, e) for i in indices for e in monomials]

    def row(k: Tuple[int, ...]) -> List:
        out = []
        for i, e in unknowns:
            out.append(prod(QQ(kj) ** ej for kj, ej in zip(k, e)) * prod(columns[ij][kj] for ij, kj in zip(i, k)))
        return out

    def value(k: Tuple[int, ...]):
        return QQ.convert(values[tuple(sorted(k, reverse=True))])

    train = list(product(range(1, k_max), repeat=n))
    held = [k for k in product(range(1, k_max + 1), repeat=n) if max(k) == k_max]
    A = Matrix([[QQ.to_sympy(c) for c in row(k)] for k in train])
    b = Matrix([QQ.to_sympy(value(k)) for k in train])
    try:
        solution, params = A.gauss_jordan_solve(b)
    except ValueError:
        witness = {"basis": basis, "degree": degree, "rows": len(train), "unknowns": len(unknowns)}
        return make_report("quasipoly", model, Verdict.FAIL, reason="no polynomial of this degree fits",
                       witness=witness, **scope), None
    if params.shape[0]:
        solution = solution.subs({p: 0 for p in params})
    coeffs = [QQ.from_sympy(c) for c in solution]
    for k in held:
        predicted = sum((c * t for c, t in zip(coeffs, row(k))), QQ.zero)
        if predicted != value(k):
            witness = {"basis": basis, "degree": degree, "k": list(k), "predicted": str(predicted),
                       "actual": str(value(k))}
            return make_report("quasipoly", model, Verdict.FAIL, reason="held-out value mismatch",
                           witness=witness, **scope), None
    polynomials: Dict[Tuple[int, ...], Dict[Tuple[int, ...], object]] = {}
    for (i, e), c in zip(unknowns, coeffs):
        if c:
            polynomials.setdefault(i, {})[e] = c
    fitted = max((sum(e) for poly in polynomials.values() for e in poly), default=0)
    witness = {"basis": basis, "degree_bound": degree, "fitted_degree": fitted, "held_out": len(held),
               "free_parameters": int(params.shape[0])}
    return make_report("quasipoly", model, Verdict.PASS, witness=witness, **scope), polynomials


# ---------------------------------------------------------------------- deformation lemmata
def _deformation_coefficients(k_max: int, parameter: str, euler: bool, point=QQ(3, 2)):
    """[ħ^{2k}] exp(v(S(vħ∂)/S(ħ∂) − 1) log w) for k ≤ k_max, as polynomials in (v, q) with q = 1/w.

    ``euler`` selects ∂ = z∂_z with w = z − point, otherwise ∂ = ∂_w.
    """
    R, v, q = ring(f"{parameter},q", QQ)
    if euler:
        derivatives = [R.zero, 1 + q * point]
        step = -(q + q ** 2 * point)
    else:
        derivatives = [R.zero, q]
        step = -(q ** 2)
    for _ in range(2, 2 * k_max + 1):
        derivatives.append(step * derivatives[-1].diff(q))
    exponent = [R.zero]
    for i in range(1, k_max + 1):
        rho = sum((c * v ** power for power, c in rho_coefficients(i).items()), R.zero)
        exponent.append(v * rho * derivatives[2 * i])
    coefficients = [R.one]
    for k in range(1, k_max + 1):
        acc = R.zero
        for i in range(1, k + 1):
            acc += exponent[i] * coefficients[k - i] * i
        coefficients.append(acc * QQ(1, k))
    return R, v, coefficients


def _falling(R, v, factors: int):
    """(v + 1) v (v − 1) … with ``factors`` linear factors."""
    out = R.one
    for j in range(factors):
        out *= v + 1 - j
    return out


def _q_part(poly, R, power: int):
    return R.from_dict({(e[0], 0): c for e, c in poly.terms() if e[1] == power})


def check_lemma_divisibility(psi_k_max: int = 2, z_k_max: int = 1,
                             model: Optional[HypergeometricModel] = None) -> List[CheckReport]:
    """Divisibility of the ħ-deformation coefficients by falling products in the weight.

    y side: (y − A)^{2k} c_{2k}(v, y) is divisible by (v+1)v(v−1)…(v−2k+1).
    z side: [(z − A)^{−l}] c_{2k}(u, z) is divisible by (u+1)u(u−1)…(u−l+1).
    """
    label = model or HypergeometricModel.family_one(P1=(0, 1), name="lemma")
    reports = []
    R, v, c = _deformation_coefficients(psi_k_max, "v", euler=False)
    for k in range(1, psi_k_max + 1):
        stray = sorted({e[1] for e, _ in c[k].terms() if e[1] != 2 * k})
        top = _q_part(c[k], R, 2 * k)
        remainder = top.rem(_falling(R, v, 2 * k + 1))
        witness = {"k": k, "coefficient": str(top.as_expr()), "remainder": str(remainder.as_expr())}
        if stray:
            witness["stray_powers"] = stray
        verdict = Verdict.FAIL if stray or remainder else Verdict.PASS
        reports.append(make_report("lemma_psi", label, verdict, witness=witness, r=k))
    R, u, c = _deformation_coefficients(z_k_max, "u", euler=True)
    for k in range(1, z_k_max + 1):
        parts = {l: _q_part(c[k], R, l) for l in range(1, 2 * k + 1)}
        failing = [l for l, d in parts.items() if d.rem(_falling(R, u, l + 1))]
        witness = {"k": k, "coefficients": {str(l): str(d.as_expr()) for l, d in parts.items()}}
        if failing:
            witness["failing_l"] = failing
        reports.append(make_report("lemma_z", label, Verdict.FAIL if failing else Verdict.PASS, witness=witness, r=k))
    return reports
