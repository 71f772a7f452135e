"""Decorated rooted forests as canonical immutable values.

A forest is a multiset of trees; a tree is a decoration (a multi-index in the
decoration set, see :func:`armlin.series.in_N`) grafted on a forest of
children.  Trees are totally ordered by the recursive key
``(decoration, child keys)`` and a forest keeps its trees sorted by that key,
so equal forests are equal values regardless of how they were built.

Every node caches its statistics (size, weight, height, symmetry factor and
the F⁺ / NV-candidate flags) at construction.

Text notation::

    [1,0]                    leaf decorated by (1,0)
    (2,-1)<([2,0]*[2,0])     root (2,-1) grafted on the forest [2,0]*[2,0]
    {}                       empty forest (``∅`` is accepted when parsing)
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .series import in_N


class DecorationError(ValueError):
    """A decoration is not in the decoration set."""


class Tree:
    __slots__ = (
        "decoration", "children", "key", "_hash", "dimension", "weight",
        "abs_weight", "size", "height", "sym", "fplus", "nv_candidate",
    )

    def __init__(self, decoration, children: "Forest"):
        n = tuple(int(x) for x in decoration)
        if not in_N(n):
            raise DecorationError(f"decoration {n} is not in N")
        if children.dimension != len(n):
            raise DecorationError(
                f"decoration {n} has dimension {len(n)}, children have {children.dimension}"
            )
        s = object.__setattr__
        s(self, "decoration", n)
        s(self, "children", children)
        s(self, "key", (n, children.key))
        s(self, "_hash", hash(self.key))
        s(self, "dimension", len(n))
        w = tuple(a + b for a, b in zip(n, children.weight))
        s(self, "weight", w)
        s(self, "abs_weight", sum(n) + children.abs_weight)
        s(self, "size", 1 + children.size)
        s(self, "height", 1 + children.height)
        s(self, "sym", children.sym)
        s(self, "fplus", children.fplus and in_N(w))
        s(self, "nv_candidate", children.nv_candidate and in_N(w) and sum(n) >= children.degree - 1)

    def __setattr__(self, name, value):
        raise AttributeError("Tree is immutable")

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return self._hash == other._hash and self.key == other.key

    def __lt__(self, other):
        return self.key < other.key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Tree({to_text(self)})"

    def as_forest(self) -> "Forest":
        return Forest([self])


class Forest:
    __slots__ = (
        "trees", "key", "_hash", "dimension", "weight", "abs_weight", "size",
        "degree", "height", "sym", "fplus", "nv_candidate",
    )

    def __init__(self, trees: Iterable[Tree] = (), dimension: int | None = None):
        ts = tuple(sorted(trees, key=lambda t: t.key))
        if ts:
            dims = {t.dimension for t in ts}
            if len(dims) != 1 or (dimension is not None and dims != {dimension}):
                raise DecorationError("trees of a forest must share the dimension")
            dimension = ts[0].dimension
        elif dimension is None:
            raise ValueError("the empty forest needs an explicit dimension")
        s = object.__setattr__
        s(self, "trees", ts)
        s(self, "dimension", dimension)
        s(self, "key", tuple(t.key for t in ts))
        s(self, "_hash", hash((dimension, self.key)))
        w = [0] * dimension
        for t in ts:
            for k, x in enumerate(t.weight):
                w[k] += x
        s(self, "weight", tuple(w))
        s(self, "abs_weight", sum(t.abs_weight for t in ts))
        s(self, "size", sum(t.size for t in ts))
        s(self, "degree", len(ts))
        s(self, "height", max((t.height for t in ts), default=0))
        sym = 1
        for _, d in self.multiplicities():
            sym *= math.factorial(d)
        for t in ts:
            sym *= t.sym
        s(self, "sym", sym)
        s(self, "fplus", all(t.fplus for t in ts))
        s(self, "nv_candidate", all(t.nv_candidate for t in ts))

    def __setattr__(self, name, value):
        raise AttributeError("Forest is immutable")

    @classmethod
    def empty(cls, dimension: int) -> "Forest":
        return cls((), dimension)

    def multiplicities(self) -> list[tuple[Tree, int]]:
        """The decomposition ``T_1^{d_1} ... T_s^{d_s}`` in canonical order."""
        return [(t, len(list(g))) for t, g in itertools.groupby(self.trees)]

    def __mul__(self, other: "Forest") -> "Forest":
        if not isinstance(other, Forest):
            return NotImplemented
        if other.dimension != self.dimension:
            raise DecorationError("forest product across dimensions")
        return Forest(self.trees + other.trees, self.dimension)

    def __eq__(self, other):
        if not isinstance(other, Forest):
            return NotImplemented
        return self._hash == other._hash and self.dimension == other.dimension and self.key == other.key

    def __lt__(self, other):
        return (self.abs_weight, self.key) < (other.abs_weight, other.key)

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.trees)

    def __iter__(self):
        return iter(self.trees)

    def __bool__(self):
        return bool(self.trees)

    def __repr__(self):
        return f"Forest({to_text(self)})"

    def decorations(self) -> tuple:
        """Sorted multiset of vertex decorations."""
        return tuple(sorted(t.decoration for _, t in vertices(self)))

    def is_tree(self) -> bool:
        return self.degree == 1


def as_forest(x) -> Forest:
    return x if isinstance(x, Forest) else Forest([x])


# ---------------------------------------------------------------------------


def graft(n, F: Forest) -> Tree:
    """``n ◁ F``: a new root decorated by ``n`` carrying ``F`` as children."""
    return Tree(n, F)


def leaf(n) -> Tree:
    return Tree(n, Forest.empty(len(n)))


def bamboo(*decorations) -> Tree:
    """``[n_1, ..., n_r] = n_1 ◁ (n_2 ◁ (... (n_r ◁ ∅)))``."""
    if not decorations:
        raise ValueError("a bamboo needs at least one vertex")
    dim = len(decorations[0])
    F = Forest.empty(dim)
    for n in reversed(decorations):
        F = Forest([Tree(n, F)])
    return F.trees[0]


def forest(*trees) -> Forest:
    return Forest(trees)


def vertices(F) -> Iterator[tuple[tuple, Tree]]:
    """Pre-order ``(path, subtree)`` pairs; a path is root index + child indices."""
    F = as_forest(F)
    stack = [((r,), t) for r, t in reversed(list(enumerate(F.trees)))]
    while stack:
        path, t = stack.pop()
        yield path, t
        for k in range(len(t.children.trees) - 1, -1, -1):
            stack.append((path + (k,), t.children.trees[k]))


@dataclass(frozen=True)
class ForestStats:
    size: int
    degree: int
    height: int
    weight: tuple
    hat: dict  # path -> weight of the subtree rooted there


def forest_stats(F) -> ForestStats:
    F = as_forest(F)
    hat = {path: t.weight for path, t in vertices(F)}
    return ForestStats(F.size, F.degree, F.height, F.weight, hat)


def is_Fplus(F) -> bool:
    """Every vertex's subtree weight lies in N (true for the empty forest)."""
    return as_forest(F).fplus


def symmetry_factor(F) -> int:
    """Product over the top level and every vertex's child forest of the
    factorials of the tree multiplicities."""
    return as_forest(F).sym


# ---------------------------------------------------------------------------
# admissible cuts


@dataclass(frozen=True)
class Cut:
    selected: tuple  # sorted vertex paths
    pruned: Forest  # P^c(F)
    remainder: Forest  # R^c(F)

    def __len__(self):
        return len(self.selected)


def _tree_cuts(t: Tree, path: tuple):
    # yields (selected paths, pruned trees, remainder trees)
    yield (path,), (t,), ()
    child_cuts = [
        list(_tree_cuts(c, path + (k,))) for k, c in enumerate(t.children.trees)
    ]
    for combo in itertools.product(*child_cuts):
        sel = tuple(p for c in combo for p in c[0])
        pruned = tuple(x for c in combo for x in c[1])
        rest = tuple(x for c in combo for x in c[2])
        yield sel, pruned, (Tree(t.decoration, Forest(rest, t.dimension)),)


def admissible_cuts(F) -> list[Cut]:
    """All admissible cuts of ``F``, ordered by number of vertices then paths.

    Repeated trees are distinct vertex sets, so ``[n]*[n]`` has four cuts.
    """
    F = as_forest(F)
    per_tree = [list(_tree_cuts(t, (r,))) for r, t in enumerate(F.trees)]
    out = []
    for combo in itertools.product(*per_tree):
        sel = tuple(sorted(p for c in combo for p in c[0]))
        pruned = Forest([x for c in combo for x in c[1]], F.dimension)
        rest = Forest([x for c in combo for x in c[2]], F.dimension)
        out.append(Cut(sel, pruned, rest))
    out.sort(key=lambda c: (len(c.selected), c.selected))
    return out


# ---------------------------------------------------------------------------
# enumeration

FILTERS = ("all", "fplus", "nv")


class _Enumerator:
    def __init__(self, decorations: tuple, dimension: int, kind: str):
        self.decorations = decorations
        self.dimension = dimension
        self.kind = kind
        self._trees: dict[int, list[Tree]] = {}
        self._forests: dict[int, list[Forest]] = {0: [Forest.empty(dimension)]}

    def _keep(self, t: Tree) -> bool:
        if self.kind == "fplus":
            return t.fplus
        if self.kind == "nv":
            return t.nv_candidate
        return True

    def trees(self, w: int) -> list[Tree]:
        if w not in self._trees:
            out = []
            for n in self.decorations:
                s = sum(n)
                if s <= w:
                    for F in self.forests(w - s):
                        t = Tree(n, F)
                        if self._keep(t):
                            out.append(t)
            out.sort(key=lambda t: t.key)
            self._trees[w] = out
        return self._trees[w]

    def forests(self, w: int) -> list[Forest]:
        if w not in self._forests:
            pool = [(v, t) for v in range(1, w + 1) for t in self.trees(v)]
            pool.sort(key=lambda p: p[1].key)
            out = []

            def rec(start, remaining, chosen):
                if remaining == 0:
                    out.append(Forest(chosen, self.dimension))
                    return
                for k in range(start, len(pool)):
                    v, t = pool[k]
                    if v <= remaining:
                        chosen.append(t)
                        rec(k, remaining - v, chosen)
                        chosen.pop()

            rec(0, w, [])
            out.sort(key=lambda F: F.key)
            self._forests[w] = out
        return self._forests[w]


@lru_cache(maxsize=32)
def _enumerator(decorations: tuple, dimension: int, kind: str) -> _Enumerator:
    return _Enumerator(decorations, dimension, kind)


def _prepare(decorations, dimension):
    decs = tuple(sorted({tuple(int(x) for x in n) for n in decorations}))
    for n in decs:
        if not in_N(n):
            raise DecorationError(f"decoration {n} is not in N")
    dims = {len(n) for n in decs}
    if dimension is None:
        if len(dims) != 1:
            raise ValueError("cannot infer the dimension from the decorations")
        dimension = dims.pop()
    elif dims - {dimension}:
        raise DecorationError("decorations do not match the dimension")
    return decs, dimension


def enumerate_forests(decorations, weight_cap: int, filter: str = "all", dimension: int | None = None) -> Iterator[Forest]:
    """Every canonical forest over ``decorations`` with ``|‖F‖| <= weight_cap``.

    Emitted by increasing weight, then canonical order, each exactly once.
    ``filter="fplus"`` keeps F⁺ forests; ``filter="nv"`` additionally
    requires ``|n| >= deg - 1`` at every graft (a necessary condition for a
    forest to be non-vanishing).
    """
    if filter not in FILTERS:
        raise ValueError(f"unknown filter {filter!r}; expected one of {FILTERS}")
    if weight_cap < 0:
        raise ValueError("weight_cap must be >= 0")
    decs, dim = _prepare(decorations, dimension)
    en = _enumerator(decs, dim, filter)
    for w in range(weight_cap + 1):
        yield from en.forests(w)


def enumerate_trees(decorations, weight_cap: int, filter: str = "all", dimension: int | None = None) -> Iterator[Tree]:
    if filter not in FILTERS:
        raise ValueError(f"unknown filter {filter!r}; expected one of {FILTERS}")
    decs, dim = _prepare(decorations, dimension)
    en = _enumerator(decs, dim, filter)
    for w in range(1, weight_cap + 1):
        yield from en.trees(w)


# ---------------------------------------------------------------------------
# text notation


def _fmt_index(n):
    return ",".join(str(x) for x in n)


def to_text(x) -> str:
    if isinstance(x, Tree):
        if not x.children:
            return f"[{_fmt_index(x.decoration)}]"
        return f"({_fmt_index(x.decoration)})<({to_text(x.children)})"
    if not x.trees:
        return "{}"
    return "*".join(to_text(t) for t in x.trees)


_TOKEN = re.compile(r"\s*(?:(-?\d+)|(.))")


class ForestSyntaxError(ValueError):
    pass


def parse_forest(text: str, dimension: int | None = None) -> Forest:
    """Inverse of :func:`to_text`."""
    toks = []
    for m in _TOKEN.finditer(text):
        if m.group(1) is not None:
            toks.append(int(m.group(1)))
        elif m.group(2) and not m.group(2).isspace():
            toks.append(m.group(2))
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def expect(tok):
        nonlocal pos
        if peek() != tok:
            raise ForestSyntaxError(f"expected {tok!r} at token {pos} in {text!r}, got {peek()!r}")
        pos += 1

    def ints(close):
        nonlocal pos
        vals = []
        while True:
            t = peek()
            if not isinstance(t, int):
                raise ForestSyntaxError(f"expected integer at token {pos} in {text!r}")
            vals.append(t)
            pos += 1
            if peek() == ",":
                pos += 1
                continue
            expect(close)
            return tuple(vals)

    def parse_tree():
        nonlocal pos
        t = peek()
        if t == "[":
            pos += 1
            return leaf(ints("]"))
        if t == "(":
            pos += 1
            n = ints(")")
            expect("<")
            expect("(")
            F = parse_forest_inner(len(n))
            expect(")")
            return Tree(n, F)
        raise ForestSyntaxError(f"unexpected token {t!r} in {text!r}")

    def parse_forest_inner(dim):
        nonlocal pos
        t = peek()
        if t == "{":
            pos += 1
            expect("}")
            if dim is None:
                raise ForestSyntaxError("empty forest needs a dimension")
            return Forest.empty(dim)
        if t == "∅":
            pos += 1
            if dim is None:
                raise ForestSyntaxError("empty forest needs a dimension")
            return Forest.empty(dim)
        trees = [parse_tree()]
        while peek() == "*":
            pos += 1
            trees.append(parse_tree())
        return Forest(trees, dim)

    F = parse_forest_inner(dimension)
    if pos != len(toks):
        raise ForestSyntaxError(f"trailing input in {text!r}")
    return F
