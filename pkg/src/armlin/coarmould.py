"""The operators ``D_F(a)`` attached to decorated forests.

``D_F(a)`` is a homogeneous differential operator of weight ``‖F‖`` and order
``deg F``.  It is stored as ``z^{‖F‖} Σ_p c_p δ^p`` where ``p`` runs over
derivative profiles ``(d_1, ..., d_ν)`` with ``Σ d_j = deg F`` and ``δ^p``
acts on monomials by ``z^m ↦ Γ(p, m) z^m`` (falling factorials).

Two independent constructions are provided:

* :func:`D_recursive` builds the operator bottom-up.  A tree ``n◁F`` acts as
  the derivation ``Σ_i β_{i,T} z^{‖T‖+e_i} ∂_i`` with
  ``β_{i,T} = a_{i,n} (D_F z^{n+e_i}) / z^{n+e_i+‖F‖}``, and a forest
  ``U_1...U_d`` has as profile table the product of the linear forms
  ``Σ_i β_{i,U_j} x_i`` divided by ``∏ d_k!``.
* :func:`D_closed` sums over all colourings ``j: vertices → [ν]``.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from . import scalars
from .forests import Forest, Tree, admissible_cuts, as_forest, enumerate_forests, vertices
from .series import SeriesTuple, TruncatedSeries, madd, monomials, unit, zero_index


def gamma(p, m) -> int:
    """``∏_j m_j! / (m_j - p_j)!``, or 0 when some ``p_j > m_j``."""
    g = 1
    for pj, mj in zip(p, m):
        if pj > mj:
            return 0
        for t in range(pj):
            g *= mj - t
    return g


class HomogeneousOperator:
    """``z^{weight} Σ_p terms[p] δ^p`` with every profile of total ``degree``."""

    __slots__ = ("dimension", "weight", "degree", "terms")

    def __init__(self, dimension: int, weight, degree: int, terms: dict):
        weight = tuple(int(x) for x in weight)
        if len(weight) != dimension:
            raise ValueError("weight has the wrong dimension")
        clean = {}
        for p, c in terms.items():
            p = tuple(int(x) for x in p)
            if len(p) != dimension or min(p) < 0 or sum(p) != degree:
                raise ValueError(f"profile {p} incompatible with degree {degree}")
            if c != 0:
                clean[p] = c
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    def __setattr__(self, name, value):
        raise AttributeError("HomogeneousOperator is immutable")

    @classmethod
    def identity(cls, dimension: int) -> "HomogeneousOperator":
        z = zero_index(dimension)
        return cls(dimension, z, 0, {z: 1})

    def is_zero(self) -> bool:
        return not self.terms

    def eigenvalue(self, m):
        """Coefficient ``c`` in ``self(z^m) = c z^{m+weight}``."""
        acc = 0
        for p, c in self.terms.items():
            g = gamma(p, m)
            if g:
                acc = acc + c * g
        return acc

    def scale(self, c) -> "HomogeneousOperator":
        return HomogeneousOperator(
            self.dimension, self.weight, self.degree, {p: c * x for p, x in self.terms.items()}
        )

    def __eq__(self, other):
        if not isinstance(other, HomogeneousOperator):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return self.dimension == other.dimension
        return (self.dimension, self.weight, self.degree, self.terms) == (
            other.dimension, other.weight, other.degree, other.terms)

    def __hash__(self):
        return hash((self.weight, self.degree, tuple(self.terms.items())))

    def __repr__(self):
        return f"HomogeneousOperator(weight={self.weight}, degree={self.degree}, terms={self.terms})"

    def to_json(self) -> dict:
        return {
            "weight": list(self.weight),
            "degree": self.degree,
            "terms": [{"profile": list(p), **scalars.encode(c)} for p, c in self.terms.items()],
        }


def apply(op: HomogeneousOperator, phi: TruncatedSeries) -> TruncatedSeries:
    """Monomial-wise action of ``op`` on ``phi``, truncated at the cap.

    A result monomial with a negative exponent is structurally zero; exact
    coefficients there must cancel and are checked.
    """
    if op.dimension != phi.dimension:
        raise ValueError("operator and series dimensions differ")
    out = {}
    shift = sum(op.weight)
    for m, c in phi.terms.items():
        if sum(m) + shift > phi.cap:
            continue
        ev = op.eigenvalue(m)
        if ev == 0:
            continue
        target = madd(m, op.weight)
        if min(target) < 0:
            if scalars.is_exact(ev):
                raise ValueError(f"operator maps z^{m} outside the power series ring")
            continue
        out[target] = out.get(target, 0) + c * ev
    exact = min(phi.cap, phi.exact_through + max(shift, 0))
    return TruncatedSeries(phi.dimension, phi.cap, out, exact_through=exact)


# ---------------------------------------------------------------------------


def _mul_linear(poly: dict, beta: tuple) -> dict:
    out: dict = {}
    for p, c in poly.items():
        for i, b in enumerate(beta):
            if b:
                q = p[:i] + (p[i] + 1,) + p[i + 1:]
                out[q] = out.get(q, 0) + c * b
    return out


class Coarmould:
    """Memoized ``D_•(a)`` for one nonlinear part.

    ``coefficient(i, n)`` returns ``a_{i,n}`` (0-based ``i``).  Tree vectors
    ``β_{·,T}`` and forest profile tables are cached by canonical value.
    """

    def __init__(self, dimension: int, coefficient: Callable):
        self.dimension = dimension
        self.coefficient = coefficient
        self._beta: dict[Tree, tuple] = {}
        self._table: dict[Forest, dict] = {}

    @classmethod
    def from_series(cls, a: SeriesTuple) -> "Coarmould":
        if not a.is_nonlinear_part():
            raise ValueError("a must be a nonlinear part (every component of order >= 2)")
        coeffs = a.coefficients()
        return cls(a.dimension, lambda i, n: coeffs.get((i, n), 0))

    def beta(self, t: Tree) -> tuple:
        """``(β_{1,T}, ..., β_{ν,T})`` with ``D_T z_i = β_{i,T} z^{‖T‖+e_i}``."""
        b = self._beta.get(t)
        if b is None:
            table = self.table(t.children)
            vals = []
            for i in range(self.dimension):
                a = self.coefficient(i, t.decoration)
                if a == 0:
                    vals.append(0)
                    continue
                target = madd(t.decoration, unit(self.dimension, i))
                s = 0
                for p, c in table.items():
                    g = gamma(p, target)
                    if g:
                        s = s + c * g
                vals.append(a * s)
            b = tuple(vals)
            self._beta[t] = b
        return b

    def table(self, F: Forest) -> dict:
        tab = self._table.get(F)
        if tab is None:
            tab = {zero_index(self.dimension): Fraction(1)}
            denom = 1
            for t, d in F.multiplicities():
                beta = self.beta(t)
                for _ in range(d):
                    tab = _mul_linear(tab, beta)
                denom *= math.factorial(d)
            if denom != 1:
                inv = Fraction(1, denom)
                tab = {p: c * inv for p, c in tab.items()}
            tab = {p: c for p, c in tab.items() if c != 0}
            self._table[F] = tab
        return tab

    def operator(self, F) -> HomogeneousOperator:
        F = as_forest(F)
        return HomogeneousOperator(self.dimension, F.weight, F.degree, self.table(F))


@lru_cache(maxsize=64)
def _coarmould_for(a: SeriesTuple) -> Coarmould:
    return Coarmould.from_series(a)


def _generic_coefficient(i, n):
    return 1 if n[i] >= -1 and min(n[:i] + n[i + 1:], default=0) >= 0 else 0


@lru_cache(maxsize=8)
def generic_coarmould(dimension: int) -> Coarmould:
    """``D_•`` at ``a_{i,n} = 1`` on every admissible pair ``(i, n)``.

    The only coefficients read by ``D_F`` are those with ``n`` a decoration
    of ``F``, so one instance serves every forest of the given dimension.
    """
    return Coarmould(dimension, _generic_coefficient)


def D_recursive(F, a: SeriesTuple) -> HomogeneousOperator:
    F = as_forest(F)
    if F.dimension != a.dimension:
        raise ValueError("forest and nonlinear part dimensions differ")
    return _coarmould_for(a).operator(F)


def D_closed(F, a: SeriesTuple) -> HomogeneousOperator:
    """Colouring sum ``(1/sym F) Σ_j ∏_σ Γ(j|children(σ), N(σ)+e_{j(σ)}) a_{j(σ),N(σ)} δ^{j|roots}``."""
    F = as_forest(F)
    nu = a.dimension
    coeffs = a.coefficients()
    verts = list(vertices(F))
    index = {path: k for k, (path, _) in enumerate(verts)}
    children = [[index[path + (c,)] for c in range(len(t.children.trees))] for path, t in verts]
    roots = [index[(r,)] for r in range(F.degree)]
    decs = [t.decoration for _, t in verts]
    # only colours with a nonzero coefficient can contribute
    choices = [[i for i in range(nu) if coeffs.get((i, n), 0) != 0] for n in decs]
    terms: dict = {}
    for j in itertools.product(*choices):
        w = 1
        for k, n in enumerate(decs):
            prof = [0] * nu
            for c in children[k]:
                prof[j[c]] += 1
            g = gamma(prof, madd(n, unit(nu, j[k])))
            if not g:
                w = 0
                break
            w = w * g * coeffs[(j[k], n)]
        if w == 0:
            continue
        prof = [0] * nu
        for r in roots:
            prof[j[r]] += 1
        p = tuple(prof)
        terms[p] = terms.get(p, 0) + w
    inv = Fraction(1, F.sym)
    return HomogeneousOperator(nu, F.weight, F.degree, {p: c * inv for p, c in terms.items()})


def is_universally_vanishing(F, support=None) -> bool:
    """Exact test of ``D_F(a) = 0`` for every admissible ``a``.

    Evaluates at ``a_{i,n} = 1`` on the admissible pairs (restricted to
    ``support`` when given).  Every ``β`` is a polynomial in the ``a_{i,n}``
    with non-negative coefficients, so it vanishes identically iff it
    vanishes at that point.
    """
    F = as_forest(F)
    if support is None:
        co = generic_coarmould(F.dimension)
    else:
        pairs = {(int(i), tuple(n)) for i, n in support}
        co = Coarmould(F.dimension, lambda i, n: 1 if (i, n) in pairs and _generic_coefficient(i, n) else 0)
    return not co.table(F)


# ---------------------------------------------------------------------------
# structural identities


def factorizations(F) -> list[tuple[Forest, Forest]]:
    """Distinct ordered pairs ``(F', F'')`` with ``F'F'' = F``."""
    F = as_forest(F)
    mult = F.multiplicities()
    out = []
    for counts in itertools.product(*(range(d + 1) for _, d in mult)):
        left, right = [], []
        for (t, d), c in zip(mult, counts):
            left += [t] * c
            right += [t] * (d - c)
        out.append((Forest(left, F.dimension), Forest(right, F.dimension)))
    return out


def verify_coseparativity(F, a: SeriesTuple, phi: TruncatedSeries, psi: TruncatedSeries, rtol: float = 1e-10) -> bool:
    """``D_F(φψ) = Σ_{F'F''=F} (D_{F'}φ)(D_{F''}ψ)`` through the cap."""
    F = as_forest(F)
    co = _coarmould_for(a)
    lhs = apply(co.operator(F), phi * psi)
    rhs = TruncatedSeries.zero(phi.dimension, phi.cap)
    for F1, F2 in factorizations(F):
        rhs = rhs + apply(co.operator(F1), phi) * apply(co.operator(F2), psi)
    return series_close(lhs, rhs, rtol)


def series_close(x: TruncatedSeries, y: TruncatedSeries, rtol: float = 1e-10) -> bool:
    """Exact equality for exact series, relative closeness otherwise."""
    if x.is_exact and y.is_exact:
        return x == y
    keys = set(x.terms) | set(y.terms)
    for m in keys:
        u, v = complex(x[m]), complex(y[m])
        if abs(u - v) > rtol * (1 + max(abs(u), abs(v))):
            return False
    return True


def product_rule_multiplicities(F1, F2, cap: int | None = None) -> dict:
    """``F ↦ k(F1, F2, F)``: number of admissible cuts of ``F`` with
    pruned part ``F1`` and remainder ``F2``.

    Only forests with the combined decoration multiset and weight can
    contribute; those with ``|‖F‖| > cap`` are omitted.
    """
    F1, F2 = as_forest(F1), as_forest(F2)
    w = F1.abs_weight + F2.abs_weight
    if cap is not None and w > cap:
        return {}
    if not F1:
        return {F2: 1}
    if not F2:
        return {F1: 1}
    decs = Counter(F1.decorations()) + Counter(F2.decorations())
    target = tuple(sorted(decs.elements()))
    out = {}
    for F in enumerate_forests(set(decs), w, dimension=F1.dimension):
        if F.abs_weight != w or F.decorations() != target:
            continue
        k = sum(1 for c in admissible_cuts(F) if c.pruned == F1 and c.remainder == F2)
        if k:
            out[F] = k
    return out


def cut_table(forests) -> dict:
    """``(P, R) ↦ {F: k(P, R, F)}`` over every admissible cut of every given forest.

    For a sweep closed under taking sub-forests (all forests over an
    alphabet up to a weight cap) this yields every multiplicity at once.
    """
    table: dict = {}
    for F in forests:
        for c in admissible_cuts(F):
            row = table.setdefault((c.pruned, c.remainder), {})
            row[F] = row.get(F, 0) + 1
    return table


def verify_product_rule(F1, F2, a: SeriesTuple, degree: int | None = None, ks: dict | None = None) -> bool:
    """``D_{F1} ∘ D_{F2} = Σ_F k(F1,F2,F) D_F`` on every monomial ``z^m``
    with ``|m| <= degree`` (default: the cap of ``a``).

    ``ks`` may carry precomputed multiplicities, e.g. a row of :func:`cut_table`.
    """
    co = _coarmould_for(a)
    F1, F2 = as_forest(F1), as_forest(F2)
    nu, cap = a.dimension, a.cap
    degree = cap if degree is None else degree
    big = cap + F1.abs_weight + F2.abs_weight
    if ks is None:
        ks = product_rule_multiplicities(F1, F2)
    o1, o2 = co.operator(F1), co.operator(F2)
    ops = [(k, co.operator(F)) for F, k in ks.items()]
    for m in monomials(nu, degree):
        z = TruncatedSeries.monomial(nu, big, m)
        lhs = apply(o1, apply(o2, z))
        rhs = TruncatedSeries.zero(nu, big)
        for k, op in ops:
            rhs = rhs + apply(op, z).scale(k)
        if not series_close(lhs, rhs):
            return False
    return True
