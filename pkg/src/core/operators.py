# operators.py
import logging
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

from src.core.errors import TruncationError, UnsupportedCurveError
from src.core.model import HypergeometricModel
from src.core.rational import RationalFunction
from src.core.scalars import FunctionField
from src.core.series import TruncSeries, s_coefficients, sigma_coefficients

logger = logging.getLogger(__name__)

VARIANTS = ("W", "H", "tilde")


@lru_cache(maxsize=None)
def function_field(names: Tuple[str, ...]) -> FunctionField:
    return FunctionField(list(names))


def rho_coefficients(a: int) -> Dict[int, object]:
    """ρ_a(v) = Σ_{m+k=a} s_m σ_k v^{2m} as {power of v: coefficient}."""
    s = s_coefficients(a + 1)
    sigma = sigma_coefficients(a + 1)
    return {2 * m: s[m] * sigma[a - m] for m in range(a + 1)}


class LTable:
    """The y-side operator coefficients L^j_r (and L̃^j_r) over QQ(y).

    G_0 = exp(v·E(v, ħ)),  G_{r+1} = ∂_y G_r + v ψ′ G_r,  L^j_r = [v^j] G_r,
    where E collects S(vħ∂)/S(ħ∂)·ψ̂ − ψ.  The tilde table starts from
    G̃_0 = G_0 · u S(vuħ) e^{uy} and uses ∂_y + vψ′ + u instead, with u
    truncated at ``u_order``.
    """

    def __init__(self, model: HypergeometricModel, h_order: int, u_order: Optional[int] = None):
        self.model = model
        self.h_order = h_order
        self.u_order = u_order
        self.field = function_field(("y",))
        self.y = self.field.gen(0)
        if u_order is None:
            self.variables: Tuple[str, ...] = ("v", "hbar")
            self.orders: Tuple = (None, h_order)
        else:
            if model.y_rational is None:
                raise UnsupportedCurveError("the higher loop operator needs a rational y(z)")
            self.variables = ("v", "u", "hbar")
            self.orders = (None, u_order, h_order)
        self._psi_prime = self.field.convert(model.psi_prime.frac)
        self._G: List[TruncSeries] = [self._initial()]
        self._L: Dict[Tuple[int, int], TruncSeries] = {}

    def _term(self, exps: Dict[str, int], value) -> TruncSeries:
        key = tuple(exps.get(v, 0) for v in self.variables)
        return TruncSeries(self.field, self.variables, self.orders, {key: self.field.convert(value)})

    def exponent(self) -> TruncSeries:
        """E = Σ_{(a,b) ≠ (0,0)} ρ_a(v) ħ^{2a+2b} ∂^{2a} ψ̂_b."""
        total = TruncSeries.zero(self.field, self.variables, self.orders)
        top = (self.h_order + 1) // 2
        for b in range(0, top):
            base = None if b == 0 else self.model.psi_hat_term(b)
            if base is not None and base.is_zero():
                continue
            for a in range(0, top - b):
                if a == 0 and b == 0:
                    continue
                if 2 * (a + b) >= self.h_order:
                    break
                if b == 0:
                    piece = self.model.psi_derivative(2 * a)
                else:
                    piece = base
                    for _ in range(2 * a):
                        piece = piece.derivative()
                if piece.is_zero():
                    continue
                value = self.field.convert(piece.frac)
                for power, coeff in rho_coefficients(a).items():
                    total = total + self._term({"v": power + 1, "hbar": 2 * (a + b)}, value * coeff)
        return total

    def _initial(self) -> TruncSeries:
        exponent = self.exponent()
        g0 = exponent.exp() if not exponent.is_zero() else TruncSeries.constant(self.field, self.variables, self.orders)
        if self.u_order is None:
            return g0
        # u S(vuħ) e^{uy}
        factor = TruncSeries.zero(self.field, self.variables, self.orders)
        for m, sm in enumerate(s_coefficients(self.h_order // 2 + 1)):
            factor = factor + self._term({"v": 2 * m, "u": 2 * m + 1, "hbar": 2 * m}, sm)
        euy = self._term({"u": 1}, self.y).exp()
        return g0 * factor * euy

    def _step(self, g: TruncSeries) -> TruncSeries:
        derived = g.map_coefficients(lambda c: c.diff(self.y))
        shift = self._term({"v": 1}, self._psi_prime)
        if self.u_order is not None:
            shift = shift + self._term({"u": 1}, 1)
        return derived + shift * g

    def G(self, r: int) -> TruncSeries:
        while len(self._G) <= r:
            self._G.append(self._step(self._G[-1]))
        return self._G[r]

    def L(self, j: int, r: int) -> TruncSeries:
        """[v^j] G_r as a series in the remaining variables over QQ(y)."""
        key = (j, r)
        if key not in self._L:
            self._L[key] = self.G(r).coefficient("v", j)
        return self._L[key]

    def v_degree(self, r: int) -> int:
        return self.G(r).degree("v")


class OperatorSpace:
    """Series in (ħ, u_1..u_n[, u]) with coefficients in QQ(z_1..z_n).

    Every U-type operator is applied in the ħ-normalised form ħ·U, so all
    ħ exponents stay non-negative and truncating ħ at ``h_order`` is exact
    below it.
    """

    def __init__(
        self,
        model: HypergeometricModel,
        n: int,
        h_order: int,
        u_order: Optional[int] = None,
        names: Optional[Sequence[str]] = None,
    ):
        self.model = model
        self.n = n
        self.h_order = h_order
        self.u_order = u_order
        self.names = tuple(names) if names is not None else tuple(f"z{i + 1}" for i in range(n))
        self.field = function_field(self.names)
        self.K = self.field.K
        self.u_names = tuple(f"u{i + 1}" for i in range(n))
        self.variables = ("hbar",) + self.u_names + (("u",) if u_order is not None else ())
        self.orders = (h_order,) + (None,) * n + ((u_order,) if u_order is not None else ())
        self._l_table = LTable(model, h_order)
        self._l_tilde = LTable(model, h_order, u_order) if u_order is not None else None
        self._phi = [self.lift(RationalFunction.variable("z") / model.Q, i) for i in range(n)]
        self._inv_Q = [self.lift(1 / model.Q, i) for i in range(n)]
        self._kernels: Dict[int, TruncSeries] = {}
        self._L_at_z: Dict[Tuple[str, int, int, int], TruncSeries] = {}

    # ------------------------------------------------------------------ scalars
    def gen(self, i: int):
        return self.field.gen(i)

    def lift(self, f: RationalFunction, i: int):
        return f.lift(self.K, i)

    def D(self, c, i: int):
        """D_i = z_i/Q(z_i) ∂_{z_i} on a coefficient."""
        return self._phi[i] * c.diff(self.gen(i))

    def euler(self, c, i: int):
        return self.gen(i) * c.diff(self.gen(i))

    def _y_to_z(self, c, i: int):
        if c.numer.is_ground and c.denom.is_ground:
            return self.field.convert(c.numer.LC / c.denom.LC)
        y = self.model.y_rational
        if y is None:
            raise UnsupportedCurveError("ψ-side coefficient depends on y but y(z) is not rational")
        return self.lift(RationalFunction(c).compose(y), i)

    # ------------------------------------------------------------------ series builders
    def zero(self) -> TruncSeries:
        return TruncSeries.zero(self.field, self.variables, self.orders)

    def one(self) -> TruncSeries:
        return TruncSeries.constant(self.field, self.variables, self.orders)

    def term(self, exps: Dict[str, int], value) -> TruncSeries:
        key = tuple(exps.get(v, 0) for v in self.variables)
        return TruncSeries(self.field, self.variables, self.orders, {key: self.field.convert(value)})

    def map_D(self, f: TruncSeries, i: int, times: int = 1) -> TruncSeries:
        for _ in range(times):
            f = f.map_coefficients(lambda c: self.D(c, i))
        return f

    # ------------------------------------------------------------------ building blocks
    def kernel(self, i: int) -> TruncSeries:
        """ħ·e^{u(S(uħ z∂)ŷ − y)}/(uħ S(uħ)) multiplied by u, i.e. exp(u·A)·Σσ_k(uħ)^{2k}."""
        if i in self._kernels:
            return self._kernels[i]
        u = self.u_names[i]
        H = self.h_order
        top = (H + 1) // 2
        A = self.zero()
        for b in range(1, top):
            y_b = self.model.y_hat_term(b)
            if not y_b.is_zero():
                A = A + self.term({"hbar": 2 * b}, self.lift(y_b, i))
        s = s_coefficients(top + 1)
        for m in range(1, top):
            for b in range(0, top - m):
                if b >= 1 and self.model.y_hat_term(b).is_zero():
                    continue
                piece = self.model.euler_y_hat(m, b)
                if piece.is_zero():
                    continue
                A = A + self.term({u: 2 * m, "hbar": 2 * m + 2 * b}, self.lift(piece, i) * s[m])
        uA = A * self.term({u: 1}, 1)
        K = uA.exp() if not uA.is_zero() else self.one()
        sigma = sigma_coefficients(top + 1)
        tail = self.zero()
        for k in range(0, top):
            tail = tail + self.term({u: 2 * k, "hbar": 2 * k}, sigma[k])
        self._kernels[i] = K * tail
        return self._kernels[i]

    def L_at(self, variant: str, j: int, r: int, i: int) -> TruncSeries:
        """L^j_r (or L̃^j_r) at y = y(z_i), embedded in this space's variables."""
        key = (variant, j, r, i)
        if key not in self._L_at_z:
            table = self._l_tilde if variant == "tilde" else self._l_table
            if table is None:
                raise ValueError("this operator space has no higher loop parameter u")
            raw = table.L(j, r)
            mapped = TruncSeries(
                self.field, raw.variables, raw.orders,
                {e: self._y_to_z(c, i) for e, c in raw.terms()},
            )
            self._L_at_z[key] = mapped.embed(self.variables, self.orders)
        return self._L_at_z[key]

    def L_degree(self, variant: str, r: int) -> int:
        table = self._l_tilde if variant == "tilde" else self._l_table
        return table.v_degree(r)

    def apply_U(self, f: TruncSeries, i: int, variant: str = "W") -> TruncSeries:
        """ħ·U_i f (variant "W"), ħ·Ū_i f ("H") or ħ·Ũ_i f ("tilde").

        Σ_{j,r} D_i^{j'} (L^j_r/Q_i · [u_i^{r+1}](K_i f)), with j' = j for
        W and tilde, j' = j − 1 and j ≥ 1 for H.
        """
        if variant not in VARIANTS:
            raise ValueError(f"unknown operator variant {variant!r}")
        u = self.u_names[i]
        product = self.kernel(i) * f
        channels: Dict[int, TruncSeries] = {}
        for k, piece in product.split(u).items():
            if k >= 1:
                channels[k - 1] = piece.embed(self.variables, self.orders)
        if not channels:
            return self.zero()
        j_max = max(self.L_degree(variant, r) for r in channels)
        first = 1 if variant == "H" else 0
        total = self.zero()
        for j in range(first, j_max + 1):
            inner = self.zero()
            for r, F in channels.items():
                L = self.L_at(variant, j, r, i)
                if L.is_zero():
                    continue
                inner = inner + L * F
            if inner.is_zero():
                continue
            inner = inner.map_coefficients(lambda c: c * self._inv_Q[i])
            total = total + self.map_D(inner, i, j - first)
        return total

    def w_edge(self, k: int, l: int) -> TruncSeries:
        """w_{k,l} = exp(ħ² u_k u_l S(u_kħ z_k∂_k) S(u_lħ z_l∂_l) z_k z_l/(z_k − z_l)²) − 1."""
        if k == l:
            raise ValueError("w_edge needs two distinct vertices")
        zk, zl = self.gen(k), self.gen(l)
        base = zk * zl / (zk - zl) ** 2
        top = (self.h_order + 1) // 2
        s = s_coefficients(top + 1)
        uk, ul = self.u_names[k], self.u_names[l]
        exponent = self.zero()
        left = base
        for m in range(0, top):
            right = left
            for mm in range(0, top - m):
                e = 2 + 2 * m + 2 * mm
                if e >= self.h_order:
                    break
                exponent = exponent + self.term({uk: 2 * m + 1, ul: 2 * mm + 1, "hbar": e}, right * s[m] * s[mm])
                right = self.euler(self.euler(right, l), l)
            left = self.euler(self.euler(left, k), k)
        if exponent.is_zero():
            return self.zero()
        return exponent.exp() - 1

    def leaf_term(self, leaf: int, inner: int) -> TruncSeries:
        """ħ² u_k S(u_kħ z_k∂_k) z_i/(z_k − z_i) for the leaf i attached to k."""
        zi, zk = self.gen(leaf), self.gen(inner)
        value = zi / (zk - zi)
        uk = self.u_names[inner]
        top = (self.h_order + 1) // 2
        s = s_coefficients(top + 1)
        total = self.zero()
        for m in range(0, top):
            if 2 + 2 * m >= self.h_order:
                break
            total = total + self.term({uk: 2 * m + 1, "hbar": 2 + 2 * m}, value * s[m])
            value = self.euler(self.euler(value, inner), inner)
        return total

    def extract(self, f: TruncSeries, power: int):
        """[ħ^power] at u_1 = … = u_n = 0, as a coefficient in QQ(z)."""
        if power >= self.h_order:
            raise TruncationError(f"[ħ^{power}] requested with ħ truncated at {self.h_order}", required_order=power + 1)
        key = tuple(power if v == "hbar" else 0 for v in self.variables)
        return f.coeffs.get(key, self.field.zero)

    def extract_u(self, f: TruncSeries, power: int, r: int):
        key = tuple(power if v == "hbar" else (r if v == "u" else 0) for v in self.variables)
        return f.coeffs.get(key, self.field.zero)
