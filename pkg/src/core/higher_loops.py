# higher_loops.py
import logging
from math import factorial
from typing import Dict, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

from src.core.closedform import (
    REPRESENTATIONS,
    ClosedFormEngine,
    NPointResult,
    apply_D,
    canonical_names,
    reg02,
    specialise,
    x_expansion,
)
from src.core.errors import ConfigurationError, UnsupportedCurveError
from src.core.graphs import compositions, ordered_splits
from src.core.model import HypergeometricModel
from src.core.operators import OperatorSpace, function_field
from src.core.rational import RationalFunction
from src.core.series import s_coefficients, sigma_coefficients

logger = logging.getLogger(__name__)

METHODS = ("definitional", "closedform", "explicit")

# (u power, weight) -> coefficient; weight = k + Σm + g' − 1 for one T factor
Graded = Dict[Tuple[int, int], object]


def _convolve(left: Graded, right: Graded, r: int, g: int) -> Graded:
    out: Graded = {}
    for (u1, w1), a in left.items():
        for (u2, w2), b in right.items():
            key = (u1 + u2, w1 + w2)
            if key[0] > r or key[1] > g:
                continue
            out[key] = out[key] + a * b if key in out else a * b
    return out


class HigherLoopEngine:
    """The higher loop quantities 𝒲^{(r)}_{g,n} in QQ(z1..zn).

    Three independent routes: the definition through the T-functions, the
    closed operator formula with Ũ_1, and the expanded formulas for r = 2, 3.
    Restrictions of W_{0,2} to the diagonal use D_1 D_2 H_{0,2}.
    """

    def __init__(self, model: HypergeometricModel, seed: int = 2024, closed: Optional[ClosedFormEngine] = None):
        self.model = model
        self.closed = closed or ClosedFormEngine(model, seed)
        self._restricted: Dict[Tuple, object] = {}

    # ------------------------------------------------------------------ building blocks
    def restricted(self, g: int, derivs: Tuple[int, ...], others: Tuple[int, ...], n: int):
        """D^{derivs[i]} on slot i of W_{g,k+|others|}, slots 0..k−1 then set to z1.

        ``others`` are 0-based indices of the remaining variables in QQ(z1..zn).
        """
        key = (g, derivs, others, n)
        if key in self._restricted:
            return self._restricted[key]
        k = len(derivs)
        size = k + len(others)
        target = function_field(canonical_names(n))
        if (g, size) == (0, 2) and k == 2:
            value = reg02(self.model, derivs[0], derivs[1], target, 0)
        else:
            source = function_field(canonical_names(size))
            value = self.closed.W_rational(g, size)
            for i, d in enumerate(derivs):
                value = apply_D(value, source, self.model, i, d)
            images = [target.gen(0)] * k + [target.gen(j) for j in others]
            value = specialise(value, target, images)
        self._restricted[key] = value
        return value

    def _T(self, others: Tuple[int, ...], n: int, r: int, g: int) -> Graded:
        """T_{|J|+1}(z1; z_J) graded by u power and weight, both capped."""
        s = s_coefficients(r + 1)
        out: Graded = {}
        for k in range(1, r + 1):
            for m_total in range(0, (r - k) // 2 + 1):
                for g_inner in range(0, g - k - m_total + 2):
                    key = (k + 2 * m_total, k + m_total + g_inner - 1)
                    for ms in compositions(m_total, k):
                        weight = QQ(1, factorial(k))
                        for m in ms:
                            weight *= s[m]
                        value = self.restricted(g_inner, tuple(2 * m for m in ms), others, n) * weight
                        out[key] = out[key] + value if key in out else value
        return out

    # ------------------------------------------------------------------ three methods
    def definitional(self, r: int, g: int, n: int):
        """r! [ħ^{2g−2+n} u^r] S(uħD_1)/(ħS(uħ)) Σ_l 1/l! Σ_{J_1⊔…⊔J_l} ∏ T_{|J_i|+1}."""
        target = function_field(canonical_names(n))
        others = tuple(range(1, n))
        blocks: Dict[Tuple[int, ...], Graded] = {}
        total: Graded = {}
        for l in range(1, r + 1):
            for split in ordered_splits(others, l):
                term: Graded = {(0, 0): target.one}
                for J in split:
                    if J not in blocks:
                        blocks[J] = self._T(J, n, r, g)
                    term = _convolve(term, blocks[J], r, g)
                    if not term:
                        break
                for key, value in term.items():
                    value = value * QQ(1, factorial(l))
                    total[key] = total[key] + value if key in total else value
        s, sigma = s_coefficients(r + 1), sigma_coefficients(r + 1)
        result = target.zero
        for e in range(0, r // 2 + 1):
            F = total.get((r - 2 * e, g - e))
            if F is None:
                continue
            for p in range(e + 1):
                result = result + apply_D(F, target, self.model, 0, 2 * p) * (s[p] * sigma[e - p])
        return result * factorial(r)

    def explicit(self, r: int, g: int, n: int):
        target = function_field(canonical_names(n))
        others = tuple(range(1, n))
        if r == 0:
            return target.zero
        if r == 1:
            return self.closed.W_rational(g, n)
        if r == 2:
            total = target.zero
            if g >= 1:
                total = total + self.restricted(g - 1, (0, 0), others, n)
            for I, J in ordered_splits(others, 2):
                for g1 in range(g + 1):
                    total = total + self.restricted(g1, (0,), I, n) * self.restricted(g - g1, (0,), J, n)
            return total
        if r == 3:
            total = target.zero
            if g >= 2:
                total = total + self.restricted(g - 2, (0, 0, 0), others, n)
            if g >= 1:
                for J1, J2 in ordered_splits(others, 2):
                    for g1 in range(g):
                        pair = self.restricted(g1, (0,), J1, n) * self.restricted(g - 1 - g1, (0, 0), J2, n)
                        total = total + pair * 3
            for J1, J2, J3 in ordered_splits(others, 3):
                for g1 in range(g + 1):
                    for g2 in range(g - g1 + 1):
                        total = total + (
                            self.restricted(g1, (0,), J1, n)
                            * self.restricted(g2, (0,), J2, n)
                            * self.restricted(g - g1 - g2, (0,), J3, n)
                        )
            if g >= 1:
                W = self.closed.W_rational(g - 1, n)
                total = total + apply_D(W, target, self.model, 0, 2) * QQ(1, 2) - W * QQ(1, 4)
            return total
        raise ConfigurationError(f"expanded formulas exist for r ≤ 3, got r = {r}")

    def closed_form(self, r: int, g: int, n: int):
        """r! [u^r][ħ^{2g−2+2n}] U_n…U_2 Ũ_1 Σ_γ ∏ w."""
        target = function_field(canonical_names(n))
        if r == 0:
            return target.zero
        if r == 1:
            return self.closed.W_rational(g, n)
        y = self.model.y_rational
        if (g, n) == (0, 1):
            return (y ** r).lift(target.K, 0)
        if (g, n) == (0, 2):
            return (y ** (r - 1)).lift(target.K, 0) * self.closed.W_rational(0, 2) * r
        if n == 1:
            space = OperatorSpace(self.model, 1, 2 * g + 1, u_order=r + 1)
            total = space.apply_U(space.one(), 0, "tilde") + self._tilde_tail(space)
            return space.extract_u(total, 2 * g, r) * factorial(r)
        power = 2 * g - 2 + 2 * n
        space = OperatorSpace(self.model, n, power + 1, u_order=r + 1)
        total = ClosedFormEngine.graph_sum(space, g, n)
        for i in range(n - 1, 0, -1):
            total = space.apply_U(total, i, "W")
        total = space.apply_U(total, 0, "tilde")
        return space.extract_u(total, power, r) * factorial(r)

    def _tilde_tail(self, space: OperatorSpace):
        """Σ_{j≥0} D^j L̃^{j+1}_0 · Dy."""
        Dy = (RationalFunction.variable("z") * self.model.y_prime / self.model.Q).lift(space.K, 0)
        total = space.zero()
        for j in range(0, space.L_degree("tilde", 0)):
            L = space.L_at("tilde", j + 1, 0, 0)
            if L.is_zero():
                continue
            total = total + space.map_D(L.map_coefficients(lambda c: c * Dy), 0, j)
        return total

    # ------------------------------------------------------------------ entry point
    def compute(self, r: int, g: int, n: int, method: str = "closedform", representation: str = "rational",
                k_max: int = 6, pins: Optional[Sequence] = None) -> NPointResult:
        if method not in METHODS:
            raise ConfigurationError(f"unknown method {method!r}, expected one of {METHODS}")
        if representation not in REPRESENTATIONS:
            raise ConfigurationError(f"unknown representation {representation!r}")
        if r < 0 or g < 0 or n < 1:
            raise ConfigurationError(f"invalid (r, g, n) = ({r}, {g}, {n})")
        if r >= 2 and self.model.y_rational is None:
            raise UnsupportedCurveError("higher loop quantities need a rational y(z)")
        logger.info("𝒲^(%d)_{%d,%d} by %s for %s", r, g, n, method,
                    self.model.name or self.model.fingerprint)
        value = getattr(self, {"closedform": "closed_form"}.get(method, method))(r, g, n)
        meta = {"method": method}
        if representation == "rational":
            return NPointResult("closedform", "Wr", g, n, "rational", value, r=r, meta=meta)
        if representation == "series":
            table = x_expansion(value, n, self.model, k_max, divide_by_k=False)
            return NPointResult("closedform", "Wr", g, n, "series", table, r=r, meta=dict(meta, k_max=k_max))
        pinned, used = self.closed.pinned(lambda p: value, n, pins)
        return NPointResult("closedform", "Wr", g, n, "pinned", pinned, r=r, pins=used, meta=meta)


def compute_Wr(model: HypergeometricModel, r: int, g: int, n: int, method: str = "closedform",
               representation: str = "rational", k_max: int = 6, seed: int = 2024) -> NPointResult:
    return HigherLoopEngine(model, seed).compute(r, g, n, method, representation, k_max)
