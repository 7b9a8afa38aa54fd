# model.py
import hashlib
import json
import logging
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

from src.core.errors import (
    ConfigurationError,
    CurveAssumptionError,
    DegenerateCurveError,
    UnsupportedCurveError,
)
from src.core.rational import RationalFunction, dense_coefficients
from src.core.scalars import ComplexField, RationalField, ScalarField, parse_rational, rational_to_str
from src.core.series import RATIONALS, TruncSeries, s_coefficients, series_reversion, sigma_coefficients

logger = logging.getLogger(__name__)

Coeffs = List


class Family(str, Enum):
    FAMILY_I = "I"
    FAMILY_II = "II"
    RAW = "raw"


def _poly(coeffs: Optional[Sequence], var: str, default=(1,)) -> RationalFunction:
    return RationalFunction.from_coeffs(list(coeffs if coeffs is not None else default), None, var)


def _log_derivative(p: RationalFunction) -> RationalFunction:
    return p.derivative() / p


class HypergeometricModel:
    """The (ψ̂, ŷ) data of a hypergeometric tau function.

    Polynomials are coefficient lists, lowest degree first.

    Family I:  ψ̂ = S(ħ∂_y)P1 + log P2 − log P3,  ŷ = R1/R2.
    Family II: ψ̂ = αy,  ŷ = R1/R2 + S(ħz∂_z)^{-1}(log R3 − log R4).
    Raw:       ψ̂ = ψ + Σ_b ħ^{2b} ψ̂_b with polynomial ψ, ψ̂_b;  ŷ = R1/R2 + Σ_b ħ^{2b} ŷ_b.
    """

    def __init__(
        self,
        family: Family,
        name: str = "",
        P1: Optional[Coeffs] = None,
        P2: Optional[Coeffs] = None,
        P3: Optional[Coeffs] = None,
        R1: Optional[Coeffs] = None,
        R2: Optional[Coeffs] = None,
        R3: Optional[Coeffs] = None,
        R4: Optional[Coeffs] = None,
        alpha=None,
        psi: Optional[Coeffs] = None,
        psi_corrections: Optional[List[Coeffs]] = None,
        y_corrections: Optional[List[Tuple[Coeffs, Coeffs]]] = None,
    ):
        self.family = Family(family)
        self.name = name
        to_q = lambda cs: None if cs is None else [parse_rational(c) for c in cs]
        self.P1 = to_q(P1) if P1 is not None else [QQ(0)]
        self.P2 = to_q(P2) or [QQ(1)]
        self.P3 = to_q(P3) or [QQ(1)]
        self.R1 = to_q(R1) if R1 is not None else [QQ(0), QQ(1)]
        self.R2 = to_q(R2) or [QQ(1)]
        self.R3 = to_q(R3) or [QQ(1)]
        self.R4 = to_q(R4) or [QQ(1)]
        self.alpha = parse_rational(alpha) if alpha is not None else None
        self.psi_poly = to_q(psi)
        self.psi_corrections = [to_q(c) for c in (psi_corrections or [])]
        self.y_corrections = [(to_q(n), to_q(d)) for n, d in (y_corrections or [])]
        self.validate()

    # ------------------------------------------------------------------ builders
    @classmethod
    def family_one(cls, P1=(0,), P2=(1,), P3=(1,), R1=(0, 1), R2=(1,), name: str = "") -> "HypergeometricModel":
        return cls(Family.FAMILY_I, name, P1=list(P1), P2=list(P2), P3=list(P3), R1=list(R1), R2=list(R2))

    @classmethod
    def family_two(cls, alpha, R1=(0,), R2=(1,), R3=(1,), R4=(1,), name: str = "") -> "HypergeometricModel":
        return cls(Family.FAMILY_II, name, alpha=alpha, R1=list(R1), R2=list(R2), R3=list(R3), R4=list(R4))

    @classmethod
    def raw(cls, psi, R1=(0, 1), R2=(1,), psi_corrections=None, y_corrections=None, name: str = "") -> "HypergeometricModel":
        return cls(
            Family.RAW, name, psi=list(psi), R1=list(R1), R2=list(R2),
            psi_corrections=psi_corrections, y_corrections=y_corrections,
        )

    # ------------------------------------------------------------------ validation
    def validate(self) -> None:
        def nonzero_at_zero(label: str, coeffs: Coeffs) -> None:
            if not coeffs or not coeffs[0]:
                raise ConfigurationError(f"{label} violates the 'nonzero at zero' invariant")

        nonzero_at_zero("R2", self.R2)
        if self.R1 and self.R1[0]:
            raise ConfigurationError("y(z) violates the 'vanishing at zero' invariant (R1(0) != 0)")
        if self.family is Family.FAMILY_I:
            for label, coeffs in (("P2", self.P2), ("P3", self.P3)):
                if not coeffs or not coeffs[0]:
                    raise ConfigurationError(f"psi(y) violates the 'vanishing at zero' invariant ({label}(0) = 0)")
            if self.P1 and self.P1[0]:
                raise ConfigurationError("psi(y) violates the 'vanishing at zero' invariant (P1(0) != 0)")
            if self.P2[0] != self.P3[0]:
                raise ConfigurationError("psi(y) violates the 'vanishing at zero' invariant (P2(0) != P3(0))")
            if self.psi_prime.is_zero():
                raise ConfigurationError("psi(y) violates the 'nonzero' invariant")
            if not any(self.R1):
                raise ConfigurationError("y(z) violates the 'nonzero' invariant")
        elif self.family is Family.FAMILY_II:
            nonzero_at_zero("R3", self.R3)
            nonzero_at_zero("R4", self.R4)
            if not self.alpha:
                raise ConfigurationError("Family II needs alpha != 0")
            if self.R3[0] != self.R4[0]:
                raise ConfigurationError("y(z) violates the 'vanishing at zero' invariant (R3(0) != R4(0))")
            if self.y_prime.is_zero():
                raise ConfigurationError("y(z) violates the 'nonzero' invariant")
        else:
            if not self.psi_poly or not any(self.psi_poly):
                raise ConfigurationError("psi(y) violates the 'nonzero' invariant")
            if self.psi_poly[0]:
                raise ConfigurationError("psi(y) violates the 'vanishing at zero' invariant")
            if not any(self.R1):
                raise ConfigurationError("y(z) violates the 'nonzero' invariant")
            for num, den in self.y_corrections:
                if not den or not den[0]:
                    raise ConfigurationError("y correction denominator violates the 'nonzero at zero' invariant")
                if num and num[0]:
                    raise ConfigurationError("y correction violates the 'vanishing at zero' invariant")
            for correction in self.psi_corrections:
                if correction and correction[0]:
                    raise ConfigurationError("psi correction violates the 'vanishing at zero' invariant")

    # ------------------------------------------------------------------ identity
    def to_dict(self) -> Dict:
        enc = lambda cs: None if cs is None else [rational_to_str(c) for c in cs]
        data = {"family": self.family.value, "name": self.name}
        if self.family is Family.FAMILY_I:
            data.update(P1=enc(self.P1), P2=enc(self.P2), P3=enc(self.P3), R1=enc(self.R1), R2=enc(self.R2))
        elif self.family is Family.FAMILY_II:
            data.update(alpha=rational_to_str(self.alpha), R1=enc(self.R1), R2=enc(self.R2),
                        R3=enc(self.R3), R4=enc(self.R4))
        else:
            data.update(psi=enc(self.psi_poly), R1=enc(self.R1), R2=enc(self.R2),
                        psi_corrections=[enc(c) for c in self.psi_corrections],
                        y_corrections=[[enc(n), enc(d)] for n, d in self.y_corrections])
        return data

    @cached_property
    def fingerprint(self) -> str:
        payload = {k: v for k, v in self.to_dict().items() if k != "name"}
        return hashlib.sha1(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]

    def __repr__(self) -> str:
        return f"HypergeometricModel({self.name or self.family.value}, {self.fingerprint})"

    # ------------------------------------------------------------------ psi side (variable y)
    @cached_property
    def psi_prime(self) -> RationalFunction:
        if self.family is Family.FAMILY_I:
            p1 = _poly(self.P1, "y")
            return p1.derivative() + _log_derivative(_poly(self.P2, "y")) - _log_derivative(_poly(self.P3, "y"))
        if self.family is Family.FAMILY_II:
            return RationalFunction.constant(self.alpha, "y")
        return _poly(self.psi_poly, "y").derivative()

    def psi_derivative(self, k: int) -> RationalFunction:
        """∂_y^k ψ for k ≥ 1."""
        out = self.psi_prime
        for _ in range(k - 1):
            out = out.derivative()
        return out

    def psi_hat_term(self, b: int) -> RationalFunction:
        """[ħ^{2b}] ψ̂ for b ≥ 1."""
        if self.family is Family.FAMILY_I:
            p1 = _poly(self.P1, "y")
            for _ in range(2 * b):
                p1 = p1.derivative()
            return p1 * s_coefficients(b + 1)[b]
        if self.family is Family.RAW and b <= len(self.psi_corrections):
            return _poly(self.psi_corrections[b - 1], "y", default=(0,))
        return RationalFunction.constant(0, "y")

    def psi_hat_degree(self) -> int:
        """Largest b with a nonzero [ħ^{2b}] ψ̂ term (0 when undeformed)."""
        if self.family is Family.FAMILY_I:
            return (len(self.P1) - 1) // 2
        if self.family is Family.RAW:
            return len(self.psi_corrections)
        return 0

    # ------------------------------------------------------------------ y side (variable z)
    @cached_property
    def y_rational(self) -> Optional[RationalFunction]:
        base = RationalFunction.from_coeffs(self.R1, self.R2, "z")
        if self.family is Family.FAMILY_II and _poly(self.R3, "z") != _poly(self.R4, "z"):
            return None
        return base

    @cached_property
    def y_prime(self) -> RationalFunction:
        base = RationalFunction.from_coeffs(self.R1, self.R2, "z").derivative()
        if self.family is Family.FAMILY_II:
            base = base + _log_derivative(_poly(self.R3, "z")) - _log_derivative(_poly(self.R4, "z"))
        return base

    def y_hat_term(self, b: int) -> RationalFunction:
        """[ħ^{2b}] ŷ for b ≥ 1."""
        if self.family is Family.FAMILY_II:
            z_log = (self.y_prime - RationalFunction.from_coeffs(self.R1, self.R2, "z").derivative()) * RationalFunction.variable("z")
            out = z_log
            for _ in range(2 * b - 1):
                out = out.euler()
            return out * sigma_coefficients(b + 1)[b]
        if self.family is Family.RAW and b <= len(self.y_corrections):
            num, den = self.y_corrections[b - 1]
            return RationalFunction.from_coeffs(num or [0], den, "z")
        return RationalFunction.constant(0, "z")

    def y_hat_degree(self, h_order: int) -> int:
        if self.family is Family.FAMILY_II:
            return max(0, (h_order - 1) // 2)
        if self.family is Family.RAW:
            return len(self.y_corrections)
        return 0

    def euler_y_hat(self, m: int, b: int) -> RationalFunction:
        """(z∂_z)^{2m} ŷ_b, with ŷ_0 = y; for b = 0 only m ≥ 1 is allowed when y is not rational."""
        if b == 0:
            if m == 0:
                if self.y_rational is None:
                    raise UnsupportedCurveError("y(z) is not rational")
                return self.y_rational
            out = self.y_prime * RationalFunction.variable("z")
            for _ in range(2 * m - 1):
                out = out.euler()
            return out
        out = self.y_hat_term(b)
        for _ in range(2 * m):
            out = out.euler()
        return out

    # ------------------------------------------------------------------ spectral data
    @cached_property
    def psi_prime_of_z(self) -> RationalFunction:
        """ψ′(y(z))."""
        if self.psi_prime.is_constant():
            return RationalFunction.constant(self.psi_prime.evaluate(0), "z")
        if self.y_rational is None:
            raise UnsupportedCurveError("ψ′ is not constant and y(z) is not rational")
        return self.psi_prime.compose(self.y_rational)

    @cached_property
    def Q(self) -> RationalFunction:
        """Q(z) = 1 − z y′(z) ψ′(y(z)), so that dx = Q dz / z."""
        return 1 - RationalFunction.variable("z") * self.y_prime * self.psi_prime_of_z

    @cached_property
    def Q_check(self) -> RationalFunction:
        num = self.Q.numerator_poly
        if not num:
            raise DegenerateCurveError("Q vanishes identically")
        return RationalFunction.from_coeffs(
            [c / num.LC for c in self.Q.numerator], None, "z"
        )

    def general_position(self) -> Dict[str, bool]:
        """Simplicity of the zeros of the defining polynomials and of Q̌."""
        report = {}
        names = {
            Family.FAMILY_I: ("P2", "P3", "R2"),
            Family.FAMILY_II: ("R2", "R3", "R4"),
            Family.RAW: ("R2",),
        }[self.family]
        for label in names:
            report[label] = _squarefree(getattr(self, label))
        report["Q_check"] = _squarefree(self.Q_check.numerator)
        return report

    # ------------------------------------------------------------------ series
    def psi_hat_series(self, h_order: int, y_order: int) -> TruncSeries:
        """ψ̂(ħ², y) as a series in (y, hbar) truncated at y^y_order, ħ^h_order."""
        data = {}
        psi = self.psi_prime.series_at_zero(y_order, var="y").integrate().truncate(0, y_order)
        for (k,), c in psi.terms():
            data[(k, 0)] = c
        for b in range(1, (h_order + 1) // 2):
            term = self.psi_hat_term(b)
            if term.is_zero():
                continue
            for (k,), c in term.series_at_zero(y_order, var="y").terms():
                data[(k, 2 * b)] = data.get((k, 2 * b), QQ.zero) + c
        return TruncSeries(RATIONALS, ("y", "hbar"), (y_order, h_order), data)

    def y_hat_series(self, h_order: int, z_order: int) -> TruncSeries:
        """ŷ(ħ², z) as a series in (z, hbar)."""
        data = {}
        y = self.y_prime.series_at_zero(z_order, var="z").integrate().truncate(0, z_order)
        for (k,), c in y.terms():
            data[(k, 0)] = c
        for b in range(1, (h_order + 1) // 2):
            term = self.y_hat_term(b)
            if term.is_zero():
                continue
            for (k,), c in term.series_at_zero(z_order, var="z").terms():
                data[(k, 2 * b)] = data.get((k, 2 * b), QQ.zero) + c
        return TruncSeries(RATIONALS, ("z", "hbar"), (z_order, h_order), data)


def _squarefree(coeffs: Coeffs) -> bool:
    p = RationalFunction.from_coeffs(coeffs, None, "z").numerator_poly
    if not p or p.is_ground:
        return True
    _, factors = p.sqf_list()
    return all(k == 1 for _, k in factors)


class CriticalPoint:
    """A zero of dx: ``point`` in the curve's scalar field, ``multiplicity`` m_a = (order of the zero of Q) + 1."""

    def __init__(self, index: int, point, multiplicity: int, exact_point=None):
        self.index = index
        self.point = point
        self.multiplicity = multiplicity
        self.exact_point = exact_point

    @property
    def is_simple(self) -> bool:
        return self.multiplicity == 2

    def __repr__(self) -> str:
        return f"CriticalPoint(p{self.index}={self.point}, m={self.multiplicity})"


class SpectralCurve:
    """Derived geometry of a model: x = log z − ψ(y(z)), y(z), critical points and local data."""

    def __init__(self, model: HypergeometricModel, scalars: ScalarField, critical_points: List[CriticalPoint]):
        self.model = model
        self.scalars = scalars
        self.critical_points = critical_points
        self._x_cache: Dict[int, TruncSeries] = {}

    @property
    def mode(self) -> str:
        return "exact" if self.scalars.exact else "numeric"

    @property
    def Q(self) -> RationalFunction:
        return self.model.Q

    @property
    def Q_check(self) -> RationalFunction:
        return self.model.Q_check

    @cached_property
    def x_prime(self) -> RationalFunction:
        """dx/dz = Q(z)/z."""
        return self.model.Q / RationalFunction.variable("z")

    @property
    def all_simple(self) -> bool:
        return all(cp.is_simple for cp in self.critical_points)

    def X_series(self, order: int) -> TruncSeries:
        """X(z) = z·exp(−∫_0^z (1 − Q(s))/s ds), exact, truncated at z^order."""
        if order not in self._x_cache:
            integrand = (self.model.y_prime * self.model.psi_prime_of_z).series_at_zero(order, var="z")
            exponent = -integrand.integrate().truncate(0, order)
            self._x_cache[order] = exponent.exp().shift("z", 1).truncate(0, order)
        return self._x_cache[order]

    def z_of_X(self, order: int) -> TruncSeries:
        return series_reversion(self.X_series(order), order, var="X")

    def y_series(self, order: int) -> TruncSeries:
        return self.model.y_prime.series_at_zero(order, var="z").integrate().truncate(0, order)

    # ------------------------------------------------------------------ local expansions at critical points
    def local_x_prime(self, a: int, order: int) -> TruncSeries:
        """x′(p_a + t), a power series with a zero of order m_a − 1."""
        cp = self.critical_points[a]
        return self.x_prime.laurent_at(cp.point, order, self.scalars, num_zeros=cp.multiplicity - 1)

    def local_x(self, a: int, order: int) -> TruncSeries:
        """x(p_a + t) − x(p_a)."""
        return self.local_x_prime(a, order - 1).integrate().truncate(0, order)

    def local_y(self, a: int, order: int) -> TruncSeries:
        """y(p_a + t) − y(p_a)."""
        cp = self.critical_points[a]
        return self.model.y_prime.laurent_at(cp.point, order - 1, self.scalars).integrate().truncate(0, order)

    def describe(self) -> Dict:
        return {
            "mode": self.mode,
            "critical_points": [
                {"index": cp.index, "point": self.scalars.to_json(cp.point), "multiplicity": cp.multiplicity}
                for cp in self.critical_points
            ],
            "general_position": self.model.general_position(),
        }


def build_curve(
    model: HypergeometricModel,
    mode: str = "exact",
    precision: int = 60,
    allow_numeric_fallback: bool = False,
) -> SpectralCurve:
    """Find the critical points of x and validate the local assumptions of topological recursion.

    Exact mode needs every critical point rational; with ``allow_numeric_fallback``
    an irrational one switches the whole curve to numeric mode.
    """
    Q = model.Q
    if Q.is_zero():
        raise DegenerateCurveError("Q vanishes identically")
    numerator = model.Q_check.numerator_poly
    rational_roots: List[Tuple[object, int]] = []
    irrational: List[Tuple[List, int]] = []
    if not numerator.is_ground:
        _, sqf = numerator.sqf_list()
        for factor, mult in sqf:
            _, irreducibles = factor.factor_list()
            for piece, _ in irreducibles:
                coeffs = dense_coefficients(piece)
                if len(coeffs) == 2:
                    rational_roots.append((-coeffs[0] / coeffs[1], mult))
                else:
                    irrational.append((coeffs, mult))

    if mode == "exact" and irrational:
        if not allow_numeric_fallback:
            raise UnsupportedCurveError("exact mode: some critical points are irrational")
        logger.info("irrational critical points, falling back to numeric mode")
        mode = "numeric"
    scalars: ScalarField = RationalField() if mode == "exact" else ComplexField(precision)

    points: List[CriticalPoint] = []
    for value, mult in sorted(rational_roots, key=lambda r: r[0]):
        points.append(CriticalPoint(len(points), scalars.convert(value), mult + 1, exact_point=value))
    numeric_points = []
    for coeffs, mult in irrational:
        for root in scalars.roots(list(reversed(coeffs))):
            numeric_points.append((root, mult))
    for root, mult in sorted(numeric_points, key=lambda r: (float(r[0].real), float(r[0].imag))):
        points.append(CriticalPoint(len(points), root, mult + 1))

    for cp in points:
        try:
            dy = model.y_prime.evaluate(cp.point, scalars)
        except ZeroDivisionError as exc:
            raise CurveAssumptionError(f"y is not holomorphic at critical point {cp.point}") from exc
        if scalars.is_negligible(dy):
            raise CurveAssumptionError(f"dy vanishes at critical point {cp.point}")

    curve = SpectralCurve(model, scalars, points)
    logger.info(
        "curve built for %s: mode=%s, critical points=%s",
        model.name or model.fingerprint, curve.mode, [(str(cp.point), cp.multiplicity) for cp in points],
    )
    return curve
