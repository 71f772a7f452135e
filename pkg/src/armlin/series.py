"""Truncated multivariate power series over exact or floating coefficients.

A :class:`TruncatedSeries` stores the coefficients of total degree ``<= cap``
in a sparse dict keyed by exponent tuples, kept in lexicographic order.  The
truncation contract of every operation here is the same: if all inputs are
exact through degree ``cap`` and every substituted series has no constant
term, then every output coefficient of degree ``<= cap`` is exact.  Where an
operation can lose degrees (a derivation along a field with a constant
term) the result records the highest exact degree in ``exact_through``.

Multi-indices are plain tuples of ints.
"""

from __future__ import annotations

from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

from . import scalars

MultiIndex = tuple


class StructureError(ValueError):
    """Operands disagree on dimension or truncation cap."""


class SubstitutionError(ValueError):
    """A substituted series has a constant term."""


# ---------------------------------------------------------------------------
# multi-index helpers


def total_degree(m: Sequence[int]) -> int:
    return sum(m)


def unit(dim: int, i: int) -> MultiIndex:
    """``e_i`` with a 0-based index ``i``."""
    return tuple(1 if k == i else 0 for k in range(dim))


def zero_index(dim: int) -> MultiIndex:
    return (0,) * dim


def madd(m, n) -> MultiIndex:
    return tuple(x + y for x, y in zip(m, n))


def msub(m, n) -> MultiIndex:
    return tuple(x - y for x, y in zip(m, n))


def in_N(n: Sequence[int]) -> bool:
    """Membership in the decoration set ``{m - e_i : m >= 0, |m| >= 2}``.

    Closed form: ``|n| >= 1``, every entry ``>= -1`` and at most one entry
    equal to ``-1``.
    """
    neg = 0
    for x in n:
        if x < -1:
            return False
        if x == -1:
            neg += 1
    return neg <= 1 and sum(n) >= 1


def compositions(total: int, parts: int) -> Iterator[MultiIndex]:
    """All non-negative integer tuples of length ``parts`` summing to ``total``,
    in lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def monomials(dim: int, max_degree: int, min_degree: int = 0) -> Iterator[MultiIndex]:
    for d in range(min_degree, max_degree + 1):
        yield from compositions(d, dim)


def N_shell(dim: int, s: int) -> list[MultiIndex]:
    """Elements of the decoration set with ``|n| == s``, sorted."""
    if s < 1:
        return []
    out = set(compositions(s, dim))
    if dim > 1:
        for j in range(dim):
            for rest in compositions(s + 1, dim - 1):
                out.add(rest[:j] + (-1,) + rest[j:])
    return sorted(out)


def N_ball(dim: int, k: int) -> list[MultiIndex]:
    """Elements of the decoration set with ``|n| <= k``."""
    out = []
    for s in range(1, k + 1):
        out.extend(N_shell(dim, s))
    return out


# ---------------------------------------------------------------------------


def _check_exponent(m, dim):
    if len(m) != dim:
        raise StructureError(f"exponent {m} has length {len(m)}, expected {dim}")
    if any(x < 0 for x in m):
        raise ValueError(f"negative exponent {m} in a power series")


class TruncatedSeries:
    """Power series in ``dimension`` variables, truncated at total degree ``cap``.

    Terms above the cap are dropped on construction and exact zeros are
    removed, so two series compare equal iff their stored coefficients do.
    Instances are immutable and hashable.
    """

    __slots__ = ("dimension", "cap", "_terms", "exact_through", "_hash")

    def __init__(self, dimension: int, cap: int, terms: Mapping | Iterable = (), exact_through=None):
        if dimension < 1:
            raise StructureError("dimension must be >= 1")
        if cap < 0:
            raise StructureError("cap must be >= 0")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc = {}
        for m, c in items:
            m = tuple(int(x) for x in m)
            _check_exponent(m, dimension)
            if sum(m) > cap:
                continue
            acc[m] = acc.get(m, 0) + c
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "cap", cap)
        object.__setattr__(self, "_terms", {m: acc[m] for m in sorted(acc) if acc[m] != 0})
        et = cap if exact_through is None else min(cap, exact_through)
        object.__setattr__(self, "exact_through", et)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedSeries is immutable")

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, dimension, cap):
        return cls(dimension, cap)

    @classmethod
    def constant(cls, dimension, cap, c=1):
        return cls(dimension, cap, {zero_index(dimension): c})

    @classmethod
    def monomial(cls, dimension, cap, exponent, coeff=1):
        return cls(dimension, cap, {tuple(exponent): coeff})

    @classmethod
    def variable(cls, dimension, cap, i, coeff=1):
        """``coeff * z_i`` (0-based ``i``)."""
        return cls(dimension, cap, {unit(dimension, i): coeff})

    # -- inspection --------------------------------------------------------
    @property
    def terms(self) -> Mapping:
        return MappingProxyType(self._terms)

    def __getitem__(self, m):
        return self._terms.get(tuple(m), 0)

    coefficient = __getitem__

    def __iter__(self):
        return iter(self._terms.items())

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    @property
    def order(self):
        """Minimal total degree of a nonzero term; ``inf`` for the zero series."""
        if not self._terms:
            return float("inf")
        return min(sum(m) for m in self._terms)

    @property
    def is_exact(self) -> bool:
        return all(scalars.is_exact(c) for c in self._terms.values())

    def homogeneous_part(self, d: int) -> "TruncatedSeries":
        return self._new({m: c for m, c in self._terms.items() if sum(m) == d})

    def truncate(self, cap: int) -> "TruncatedSeries":
        return TruncatedSeries(self.dimension, cap, self._terms, min(self.exact_through, cap))

    def with_cap(self, cap: int) -> "TruncatedSeries":
        """Same terms under a different cap (terms above the new cap dropped)."""
        return TruncatedSeries(self.dimension, cap, self._terms)

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def _new(self, terms, exact_through=None):
        return TruncatedSeries(self.dimension, self.cap, terms, exact_through)

    def _check_same(self, other):
        if not isinstance(other, TruncatedSeries):
            raise TypeError(f"expected TruncatedSeries, got {type(other).__name__}")
        if other.dimension != self.dimension or other.cap != self.cap:
            raise StructureError(
                f"series mismatch: (nu={self.dimension}, K={self.cap}) vs "
                f"(nu={other.dimension}, K={other.cap})"
            )

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self + TruncatedSeries.constant(self.dimension, self.cap, other)
        self._check_same(other)
        acc = dict(self._terms)
        for m, c in other._terms.items():
            acc[m] = acc.get(m, 0) + c
        return self._new(acc, min(self.exact_through, other.exact_through))

    __radd__ = __add__

    def __neg__(self):
        return self._new({m: -c for m, c in self._terms.items()}, self.exact_through)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        return self._new({m: c * v for m, v in self._terms.items()}, self.exact_through)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.dimension == other.dimension
            and self.cap == other.cap
            and self._terms == other._terms
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.dimension, self.cap, tuple(self._terms.items())))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        if not self._terms:
            body = "0"
        else:
            parts = []
            for m, c in self._terms.items():
                mono = "*".join(
                    f"z{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(m) if e
                )
                parts.append(f"({c})" + (f"*{mono}" if mono else ""))
            body = " + ".join(parts)
        return f"TruncatedSeries(nu={self.dimension}, K={self.cap}: {body})"

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "dimension": self.dimension,
            "cap": self.cap,
            "terms": [
                {"exponent": list(m), **scalars.encode(c)} for m, c in self._terms.items()
            ],
        }
        if self.exact_through < self.cap:
            out["exact_through"] = self.exact_through
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "TruncatedSeries":
        terms = [
            (tuple(t["exponent"]), scalars.decode(t.get("re", 0), t.get("im", 0)))
            for t in obj["terms"]
        ]
        return cls(int(obj["dimension"]), int(obj["cap"]), terms, obj.get("exact_through"))


def _mul_terms(a: Mapping, b: Mapping, cap: int) -> dict:
    out: dict = {}
    bl = sorted(((sum(m), m, c) for m, c in b.items()), key=lambda t: t[0])
    for m1, c1 in a.items():
        room = cap - sum(m1)
        for d2, m2, c2 in bl:
            if d2 > room:
                break
            key = tuple(x + y for x, y in zip(m1, m2))
            out[key] = out.get(key, 0) + c1 * c2
    return out


def mul(phi: TruncatedSeries, psi: TruncatedSeries) -> TruncatedSeries:
    """Product truncated at the common cap."""
    phi._check_same(psi)
    exact = min(phi.exact_through + min(psi.order, phi.cap), psi.exact_through + min(phi.order, phi.cap))
    return phi._new(_mul_terms(phi._terms, psi._terms, phi.cap), exact)


class SeriesTuple:
    """A ν-tuple of truncated series sharing dimension and cap.

    Used for maps ``C^ν -> C^ν`` (``h``, ``g``, ``w``) and for nonlinear
    parts ``a``.
    """

    __slots__ = ("components", "_hash")

    def __init__(self, components: Sequence[TruncatedSeries]):
        comps = tuple(components)
        if not comps:
            raise StructureError("empty SeriesTuple")
        nu, cap = comps[0].dimension, comps[0].cap
        if len(comps) != nu:
            raise StructureError(f"{len(comps)} components for dimension {nu}")
        for c in comps:
            if c.dimension != nu or c.cap != cap:
                raise StructureError("components must share dimension and cap")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("SeriesTuple is immutable")

    @classmethod
    def identity(cls, dimension, cap):
        return cls([TruncatedSeries.variable(dimension, cap, i) for i in range(dimension)])

    @classmethod
    def zero(cls, dimension, cap):
        return cls([TruncatedSeries.zero(dimension, cap) for _ in range(dimension)])

    @classmethod
    def from_terms(cls, dimension, cap, terms):
        """Build from ``(component, exponent, coeff)`` triples (0-based component)."""
        buckets = [[] for _ in range(dimension)]
        for i, m, c in terms:
            buckets[i].append((tuple(m), c))
        return cls([TruncatedSeries(dimension, cap, b) for b in buckets])

    @property
    def dimension(self):
        return self.components[0].dimension

    @property
    def cap(self):
        return self.components[0].cap

    @property
    def order(self):
        return min(c.order for c in self.components)

    @property
    def is_exact(self):
        return all(c.is_exact for c in self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __eq__(self, other):
        if not isinstance(other, SeriesTuple):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.components)
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return "SeriesTuple(" + ", ".join(repr(c) for c in self.components) + ")"

    def __add__(self, other):
        return SeriesTuple([x + y for x, y in zip(self, other)])

    def __sub__(self, other):
        return SeriesTuple([x - y for x, y in zip(self, other)])

    def __neg__(self):
        return SeriesTuple([-x for x in self])

    def scale(self, c):
        return SeriesTuple([x.scale(c) for x in self])

    def truncate(self, cap):
        return SeriesTuple([x.truncate(cap) for x in self])

    def with_cap(self, cap):
        return SeriesTuple([x.with_cap(cap) for x in self])

    def max_abs(self):
        return max(c.max_abs() for c in self.components)

    def is_nonlinear_part(self) -> bool:
        """Every component has order >= 2 (so ``id + self`` is tangent to identity)."""
        return all(c.order >= 2 for c in self.components)

    def is_tangent_to_identity(self) -> bool:
        return (self - SeriesTuple.identity(self.dimension, self.cap)).is_nonlinear_part()

    def coefficients(self) -> dict:
        """``{(i, n): a_{i,n}}`` with ``n = m - e_i`` for each stored ``z^m`` of component ``i``."""
        out = {}
        for i, comp in enumerate(self.components):
            e = unit(self.dimension, i)
            for m, c in comp:
                out[(i, msub(m, e))] = c
        return out

    def support(self) -> list:
        """Sorted decorations ``n`` carrying a nonzero ``a_{i,n}`` for some ``i``."""
        return sorted({n for (_, n) in self.coefficients()})

    def then(self, v: "SeriesTuple") -> "SeriesTuple":
        """Composition ``self ∘ v``."""
        cache: dict = {}
        return SeriesTuple([compose(c, v, _cache=cache) for c in self.components])

    def to_json(self) -> list:
        return [c.to_json() for c in self.components]

    @classmethod
    def from_json(cls, obj) -> "SeriesTuple":
        return cls([TruncatedSeries.from_json(c) for c in obj])


def _check_tuple(phi: TruncatedSeries, v: SeriesTuple):
    if v.dimension != phi.dimension or v.cap != phi.cap:
        raise StructureError(
            f"series (nu={phi.dimension}, K={phi.cap}) vs tuple (nu={v.dimension}, K={v.cap})"
        )


def compose(phi: TruncatedSeries, v: SeriesTuple, _cache=None) -> TruncatedSeries:
    """``phi ∘ v`` truncated at the cap; requires ``ord(v_i) >= 1``."""
    _check_tuple(phi, v)
    for i, c in enumerate(v):
        if c.order < 1:
            raise SubstitutionError(f"component {i + 1} of the substitution has a constant term")
    nu, cap = phi.dimension, phi.cap
    powers = _cache if _cache is not None else {}
    if not powers:
        powers[zero_index(nu)] = {zero_index(nu): Fraction(1)}

    def power(m):
        p = powers.get(m)
        if p is None:
            j = max(k for k in range(nu) if m[k])
            prev = power(m[:j] + (m[j] - 1,) + m[j + 1:])
            p = _mul_terms(prev, v[j]._terms, cap)
            powers[m] = p
        return p

    acc: dict = {}
    for m, c in phi._terms.items():
        for k, x in power(m).items():
            acc[k] = acc.get(k, 0) + c * x
    exact = min([phi.exact_through] + [c.exact_through for c in v])
    return phi._new(acc, exact)


def partial(phi: TruncatedSeries, i: int) -> TruncatedSeries:
    """``∂φ/∂z_i`` (0-based); the top degree becomes unknown."""
    out = {}
    for m, c in phi._terms.items():
        if m[i]:
            out[m[:i] + (m[i] - 1,) + m[i + 1:]] = m[i] * c
    return phi._new(out, phi.exact_through - 1)


def derive(v: SeriesTuple, phi: TruncatedSeries) -> TruncatedSeries:
    """``X_v φ = Σ v_i ∂φ/∂z_i`` capped at K.

    ``exact_through`` of the result is ``K`` when every ``v_i`` has order
    ``>= 1`` and lower otherwise.
    """
    _check_tuple(phi, v)
    cap = phi.cap
    acc: dict = {}
    exact = cap
    for i, vi in enumerate(v):
        d = partial(phi, i)
        for k, x in _mul_terms(vi._terms, d._terms, cap).items():
            acc[k] = acc.get(k, 0) + x
        exact = min(exact, d.exact_through + vi.order, vi.exact_through + d.order)
    return phi._new(acc, int(exact))


def invert_tangent_identity(f: SeriesTuple) -> SeriesTuple:
    """Composition inverse of a tangent-to-identity map, through the cap.

    Iterates ``w <- id - a∘w`` with ``a = f - id``; each pass fixes one more
    degree because ``ord(a) >= 2``.
    """
    if not f.is_tangent_to_identity():
        raise ValueError("map is not tangent to the identity")
    ident = SeriesTuple.identity(f.dimension, f.cap)
    a = f - ident
    w = ident
    for _ in range(max(f.cap - 1, 0)):
        w = ident - a.then(w)
    return w


def majorizes(psi: TruncatedSeries, phi: TruncatedSeries) -> bool:
    """True iff ``|φ_n| <= ψ_n`` for every ``|n| <= K``.

    ``psi`` must have real non-negative coefficients.
    """
    phi._check_same(psi)
    for m, c in psi._terms.items():
        re, im = scalars.real_imag(c)
        if im != 0 or re < 0:
            raise ValueError(f"majorant coefficient at {m} is not real non-negative: {c!r}")
    for m, c in phi._terms.items():
        bound = scalars.real_imag(psi[m])[0]
        if scalars.is_exact(c) and scalars.is_exact(bound):
            if scalars.abs2(c) > bound * bound:
                return False
        elif abs(complex(c)) > float(bound):
            return False
    return True
