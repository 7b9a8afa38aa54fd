# oracle.py
import logging
from functools import lru_cache
from itertools import product
from math import factorial
from typing import Dict, Iterable, List, Optional, Tuple

from sympy.polys.domains import QQ
from sympy.utilities.iterables import partitions as _sympy_partitions

from src.core.errors import PartitionBoundError
from src.core.model import HypergeometricModel
from src.core.series import RATIONALS, TruncSeries

logger = logging.getLogger(__name__)

Partition = Tuple[int, ...]

DEFAULT_PARTITION_BOUND = 12


# ---------------------------------------------------------------------- partitions
@lru_cache(maxsize=None)
def partitions_of(n: int) -> Tuple[Partition, ...]:
    """All partitions of n as weakly decreasing tuples."""
    out = []
    for p in _sympy_partitions(n):
        parts: List[int] = []
        for part, mult in sorted(p.items(), reverse=True):
            parts.extend([part] * mult)
        out.append(tuple(parts))
    return tuple(out) if n else ((),)


def transpose(partition: Partition) -> Partition:
    if not partition:
        return ()
    return tuple(sum(1 for part in partition if part > j) for j in range(partition[0]))


def contents(partition: Partition) -> List[int]:
    """Contents (column − row) of the cells; the row (2) has contents 0, 1."""
    return [j - i for i, row in enumerate(partition) for j in range(row)]


def content_power_sums(partition: Partition, top: int) -> List[int]:
    """Σ_cells c^k for k = 0..top."""
    cs = contents(partition)
    return [sum(c ** k for c in cs) for k in range(top + 1)]


def multiplicities(parts: Iterable[int]) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for part in parts:
        out[part] = out.get(part, 0) + 1
    return out


def centralizer_order(mu: Partition) -> int:
    """z_μ = ∏ j^{m_j} m_j!."""
    z = 1
    for part, mult in multiplicities(mu).items():
        z *= part ** mult * factorial(mult)
    return z


# ---------------------------------------------------------------------- characters
@lru_cache(maxsize=None)
def _murnaghan_nakayama(beta: Tuple[int, ...], mu: Partition) -> int:
    if not mu:
        return 1
    r, rest = mu[0], mu[1:]
    present = set(beta)
    total = 0
    for b in beta:
        t = b - r
        if t < 0 or t in present:
            continue
        height = sum(1 for c in beta if t < c < b)
        reduced = tuple(sorted((present - {b}) | {t}, reverse=True))
        total += (-1) ** height * _murnaghan_nakayama(reduced, rest)
    return total


def character(partition: Partition, mu: Partition) -> int:
    """χ^λ(μ) by rim hook removal on the beta-set of λ."""
    if sum(partition) != sum(mu):
        raise ValueError(f"character of {partition} at {mu}: sizes differ")
    length = len(partition)
    beta = tuple(part + length - 1 - i for i, part in enumerate(partition))
    return _murnaghan_nakayama(beta, tuple(sorted(mu, reverse=True)))


def dimension(partition: Partition) -> int:
    return character(partition, (1,) * sum(partition))


class SchurPolynomial:
    """s_λ = Σ_μ χ^λ(μ)/z_μ · p_μ."""

    def __init__(self, partition: Partition, terms: Dict[Partition, object]):
        self.partition = partition
        self.terms = terms

    @property
    def size(self) -> int:
        return sum(self.partition)

    def coefficient(self, mu: Partition):
        return self.terms.get(tuple(sorted(mu, reverse=True)), QQ.zero)

    def evaluate(self, power_sums: Dict[int, object]):
        total = QQ.zero
        for mu, c in self.terms.items():
            value = c
            for part in mu:
                value = value * power_sums.get(part, 0)
            total = total + value
        return total

    def __repr__(self) -> str:
        shown = " + ".join(f"{c}*p{list(mu)}" for mu, c in sorted(self.terms.items()))
        return f"s{list(self.partition)} = {shown}"


@lru_cache(maxsize=None)
def schur_in_powersums(partition: Partition, bound: int = DEFAULT_PARTITION_BOUND) -> SchurPolynomial:
    partition = tuple(partition)
    n = sum(partition)
    if n > bound:
        raise PartitionBoundError(f"|λ| = {n} exceeds the partition bound {bound}")
    terms = {}
    for mu in partitions_of(n):
        chi = character(partition, mu)
        if chi:
            terms[mu] = QQ(chi, centralizer_order(mu))
    return SchurPolynomial(partition, terms)


# ---------------------------------------------------------------------- tau function
class TauFunctionOracle:
    """Brute force expansion of Z = Σ_λ s_λ(p) s_λ(ŷ/ħ) exp(Σ_cells ψ̂(ħ², ħc)).

    Everything is exact. Work is shared between calls: content exponentials per
    λ, specialised Schur functions per λ and the p_μ coefficients of Z per μ.
    """

    def __init__(self, model: HypergeometricModel, bound: int = DEFAULT_PARTITION_BOUND):
        self.model = model
        self.bound = bound
        self._h_order = 0
        self._content_cache: Dict[Partition, TruncSeries] = {}
        self._y_hat: Dict[int, TruncSeries] = {}
        self._z_mu: Dict[Partition, TruncSeries] = {}

    # ------------------------------------------------------------------ caches
    def _ensure_order(self, h_order: int) -> None:
        if h_order > self._h_order:
            self._h_order = h_order
            self._content_cache.clear()
            self._y_hat.clear()
            self._z_mu.clear()

    def _hbar(self, data: Dict[int, object], order: Optional[int] = None) -> TruncSeries:
        return TruncSeries(RATIONALS, ("hbar",), (self._h_order if order is None else order,),
                           {(k,): c for k, c in data.items()})

    def content_factor(self, partition: Partition) -> TruncSeries:
        """exp(Σ_cells ψ̂(ħ², ħc)) as a power series in ħ."""
        if partition not in self._content_cache:
            H = self._h_order
            psi = self.model.psi_hat_series(H, H)
            sums = content_power_sums(partition, H)
            exponent: Dict[int, object] = {}
            for (k, two_b), c in psi.terms():
                e = k + two_b
                if e < H and sums[k]:
                    exponent[e] = exponent.get(e, QQ.zero) + c * sums[k]
            self._content_cache[partition] = self._hbar(exponent).exp()
        return self._content_cache[partition]

    def y_hat_coefficient(self, j: int) -> TruncSeries:
        """[z^j] ŷ(ħ², z) as a series in ħ."""
        if not self._y_hat:
            series = self.model.y_hat_series(self._h_order, self.bound + 1)
            for k, coeff in series.split("z").items():
                self._y_hat[k] = self._hbar({e[0]: c for e, c in coeff.terms()})
        return self._y_hat.get(j, self._hbar({}))

    def schur_at_y_hat(self, partition: Partition) -> TruncSeries:
        """ħ^{|λ|}·s_λ(ŷ_1/ħ, ŷ_2/ħ, ...), a power series in ħ."""
        schur = schur_in_powersums(partition, self.bound)
        total = self._hbar({})
        for nu, c in schur.terms.items():
            term = self._hbar({sum(nu) - len(nu): c})
            for part in nu:
                term = term * self.y_hat_coefficient(part)
                if term.is_zero():
                    break
            total = total + term
        return total

    def z_mu(self, mu: Partition) -> TruncSeries:
        """ħ^{|μ|}·[p_μ] Z, a power series in ħ."""
        mu = tuple(sorted(mu, reverse=True))
        if mu not in self._z_mu:
            total = self._hbar({})
            for lam in partitions_of(sum(mu)):
                chi = character(lam, mu)
                if not chi:
                    continue
                specialised = self.schur_at_y_hat(lam)
                if specialised.is_zero():
                    continue
                total = total + (specialised * self.content_factor(lam)).scale(QQ(chi, centralizer_order(mu)))
            self._z_mu[mu] = total
        return self._z_mu[mu]

    # ------------------------------------------------------------------ public operations
    def tau_log_coefficient(self, k: List[int], hbar_window: Optional[Tuple[int, int]] = None) -> TruncSeries:
        """a(ħ) = ∂^n log Z / ∂p_{k_1}…∂p_{k_n} at p = 0, as a Laurent series in ħ.

        ``hbar_window`` = (lo, hi) asks for the coefficients ħ^lo..ħ^hi; the
        result is truncated at ħ^(hi+1).
        """
        k = sorted((int(part) for part in k), reverse=True)
        if not k or any(part < 1 for part in k):
            raise ValueError("k must be a nonempty list of positive integers")
        n, d = len(k), sum(k)
        if d > self.bound:
            raise PartitionBoundError(f"Σk = {d} exceeds the partition bound {self.bound}")
        lo, hi = hbar_window if hbar_window is not None else (n - 2, n - 2)
        if not any(lo <= 2 * g - 2 + n <= hi for g in range(0, max(0, hi) // 2 + 2)):
            logger.warning("ħ window %s contains no exponent 2g-2+%d with g >= 0", (lo, hi), n)
        H = hi + 1 + d
        self._ensure_order(max(H, 1))
        mult = multiplicities(k)
        distinct = sorted(mult)
        variables = tuple(f"p{j}" for j in distinct) + ("hbar",)
        orders = tuple(mult[j] + 1 for j in distinct) + (H,)

        data = {}
        for exps in product(*(range(mult[j] + 1) for j in distinct)):
            if not any(exps):
                continue
            mu: List[int] = []
            for j, e in zip(distinct, exps):
                mu.extend([j] * e)
            for (e,), c in self.z_mu(tuple(mu)).terms():
                if e < H:
                    data[tuple(exps) + (e,)] = c
        z_series = TruncSeries(RATIONALS, variables, orders, data)
        log_z = (z_series + 1).log()
        coeff = log_z
        for j in distinct:
            coeff = coeff.coefficient(f"p{j}", mult[j])
        norm = 1
        for m in mult.values():
            norm *= factorial(m)
        shifted = {(e[0] - d,): c * norm for e, c in coeff.terms()}
        return TruncSeries(RATIONALS, ("hbar",), (hi + 1,), shifted)

    def hurwitz_number(self, g: int, k: List[int]):
        """h_{g;k} = [ħ^{2g−2+n}] a(ħ)."""
        e = 2 * g - 2 + len(k)
        value = self.tau_log_coefficient(k, (e, e))[e]
        logger.debug("oracle h_{%d;%s} = %s", g, k, value)
        return value

    def hurwitz_table(self, g: int, n: int, k_max: int) -> Dict[Tuple[int, ...], object]:
        """h_{g;k} for all weakly decreasing k of length n with parts ≤ k_max."""
        out = {}
        for k in decreasing_tuples(n, k_max):
            if sum(k) <= self.bound:
                out[k] = self.hurwitz_number(g, list(k))
        return out


def decreasing_tuples(n: int, k_max: int) -> List[Tuple[int, ...]]:
    if n == 0:
        return [()]
    out = []
    for first in range(k_max, 0, -1):
        for rest in decreasing_tuples(n - 1, first):
            out.append((first,) + rest)
    return out
