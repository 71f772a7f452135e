"""Scalar-valued maps on forests and their tree expansions.

The linearizing armoulds are products over vertices of ``1/(q^{σ̂} - 1)``
(diffeomorphisms) or ``1/(λ·σ̂)`` (vector fields) on F⁺ forests and 0
elsewhere.  A :class:`Spectrum` carries the eigenvalues, the non-resonance
test and a per-tree cache of those products.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

from . import scalars
from .coarmould import Coarmould, apply, generic_coarmould
from .forests import Forest, Tree, as_forest, enumerate_forests
from .series import N_ball, SeriesTuple, TruncatedSeries

FLOAT_GUARD = 1e-300


class ResonanceError(ArithmeticError):
    """A small divisor is exactly zero (or below the float guard)."""


def _monomial_value(values, n):
    """``∏ values_j ** n_j`` (negative powers allowed)."""
    out = 1
    for v, e in zip(values, n):
        if e:
            out = out * v ** e
    return out


def is_zero_divisor(d) -> bool:
    if scalars.is_exact(d):
        return d == 0
    return abs(d) < FLOAT_GUARD


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Diagonal linear part: ``q`` for ``kind="diffeo"``, ``λ`` for ``kind="field"``.

    For diffeomorphisms ``lambdas`` holds the principal-branch logarithms
    ``Log(q_j)/(2πi)`` as complex floats.
    """

    kind: str
    values: tuple
    _tree_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in ("diffeo", "field"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if not self.values:
            raise ValueError("empty spectrum")
        vals = tuple(scalars.to_exact(v) if scalars.is_exact(v) else complex(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if self.kind == "diffeo" and any(v == 0 for v in self.values):
            raise ValueError("diffeomorphism eigenvalues must be nonzero")

    @property
    def dimension(self) -> int:
        return len(self.values)

    @property
    def is_exact(self) -> bool:
        return all(scalars.is_exact(v) for v in self.values)

    @property
    def lambdas(self) -> tuple:
        if self.kind == "field":
            return tuple(complex(v) for v in self.values)
        return tuple(cmath.log(complex(v)) / (2j * math.pi) for v in self.values)

    def divisor(self, n):
        """``q^n - 1`` or ``λ·n``."""
        if self.kind == "diffeo":
            return _monomial_value(self.values, n) - 1
        acc = 0
        for v, e in zip(self.values, n):
            if e:
                acc = acc + v * e
        return acc

    def check_nonresonant(self, cap: int) -> None:
        """Raise :class:`ResonanceError` if some ``n ∈ N`` with ``|n| <= cap`` is resonant."""
        for n in N_ball(self.dimension, cap):
            if is_zero_divisor(self.divisor(n)):
                raise ResonanceError(f"resonance at n={n}")

    def tree_value(self, t: Tree):
        """Armould value on the single tree ``t`` (memoized)."""
        v = self._tree_cache.get(t)
        if v is None:
            if not t.fplus:
                v = 0
            else:
                d = self.divisor(t.weight)
                if is_zero_divisor(d):
                    raise ResonanceError(f"resonant vertex weight {t.weight}")
                v = 1
                for c in t.children.trees:
                    v = v * self.tree_value(c)
                v = scalars.div(v, d)
            self._tree_cache[t] = v
        return v

    def armould(self, F):
        F = as_forest(F)
        v = 1
        for t in F.trees:
            v = v * self.tree_value(t)
            if v == 0:
                return 0
        return v


def S_diffeo(F, q: Spectrum):
    """``∏_σ 1/(q^{σ̂} - 1)`` on F⁺ forests, 0 otherwise."""
    if q.kind != "diffeo":
        raise ValueError("S_diffeo needs a diffeomorphism spectrum")
    return q.armould(F)


def S_field(F, lam: Spectrum):
    """``∏_σ 1/(λ·σ̂)`` on F⁺ forests, 0 otherwise."""
    if lam.kind != "field":
        raise ValueError("S_field needs a vector field spectrum")
    return lam.armould(F)


def geometric_armould(F, A, B):
    """``A^{#F} B^{|‖F‖|}``."""
    if B == 0:
        raise ValueError("B must be nonzero")
    F = as_forest(F)
    return A ** F.size * B ** F.abs_weight


def geometric(A, B) -> Callable:
    if B == 0:
        raise ValueError("B must be nonzero")
    return lambda F: geometric_armould(F, A, B)


def elementary_armoulds(F) -> tuple[int, int]:
    """``(I^F, J^F)``: I is 1 on forests of height <= 1, J is 1 on single vertices."""
    F = as_forest(F)
    return (1 if F.height <= 1 else 0, 1 if F.size == 1 else 0)


def I_armould(F) -> int:
    return elementary_armoulds(F)[0]


def J_armould(F) -> int:
    return elementary_armoulds(F)[1]


def is_separative_on(armould: Callable, pairs) -> bool:
    """``A^{F'F''} = A^{F'} A^{F''}`` on each given pair (exact equality or 1e-12 relative)."""
    for F1, F2 in pairs:
        lhs, rhs = armould(F1 * F2), armould(F1) * armould(F2)
        if not _close(lhs, rhs):
            return False
    return True


def _close(x, y, rtol=1e-12):
    if scalars.is_exact(x) and scalars.is_exact(y):
        return x == y
    return abs(complex(x) - complex(y)) <= rtol * (1 + max(abs(complex(x)), abs(complex(y))))


class TreeExpansion:
    """``Σ_F A^F D_F(a)`` over the forests with decorations in ``support(a)``
    and ``|‖F‖| <= K``, materialized as a list of (value, operator) terms."""

    def __init__(self, terms: list, dimension: int, cap: int):
        self.terms = terms
        self.dimension = dimension
        self.cap = cap

    def __len__(self):
        return len(self.terms)

    def apply(self, phi: TruncatedSeries) -> TruncatedSeries:
        acc = TruncatedSeries.zero(phi.dimension, phi.cap)
        for val, op in self.terms:
            if sum(op.weight) <= phi.cap:
                acc = acc + apply(op, phi).scale(val)
        return acc

    __call__ = apply


def tree_expand(armould: Callable, a: SeriesTuple, K: int | None = None, filter: str = "nv") -> TreeExpansion:
    """Materialize the action of ``Σ A^F D_F(a)``.

    Homogeneity makes forests with ``|‖F‖| > K`` irrelevant for coefficients
    of degree ``<= K``.  With ``filter="nv"`` universally vanishing forests
    are skipped, which is exact; ``"all"`` sums over every forest.
    """
    K = a.cap if K is None else K
    co = Coarmould.from_series(a)
    gen = generic_coarmould(a.dimension)
    support = a.support()
    terms = []
    forests = enumerate_forests(support, K, filter=filter, dimension=a.dimension) if support else [Forest.empty(a.dimension)]
    for F in forests:
        if filter == "nv" and F and not gen.table(F):
            continue
        val = armould(F)
        if val == 0:
            continue
        op = co.operator(F)
        if op.is_zero():
            continue
        terms.append((val, op))
    return TreeExpansion(terms, a.dimension, K)


def rescaled_inverse_map(a: SeriesTuple, A, B) -> SeriesTuple:
    """``g_i(z) = z_i - (A/B) a_i(Bz)``, whose inverse the geometric expansion composes with."""
    nu, cap = a.dimension, a.cap
    comps = []
    for i, comp in enumerate(a):
        r = scalars.div(A, B)
        terms = {m: -r * c * B ** sum(m) for m, c in comp.terms.items()}
        terms[tuple(1 if j == i else 0 for j in range(nu))] = 1
        comps.append(TruncatedSeries(nu, cap, terms))
    return SeriesTuple(comps)
