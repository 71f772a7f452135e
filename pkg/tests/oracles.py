"""Reference implementations that share no code with the package.

Series work goes through sympy polynomials; forests are plain nested tuples
``(decoration, [children...])`` and operators act on sympy expressions.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import sympy as sp


def symbols(nu):
    return sp.symbols(f"z1:{nu + 1}")


def truncate(expr, zs, K):
    poly = sp.Poly(sp.expand(expr), *zs)
    return sp.Add(*[c * sp.Mul(*[z ** e for z, e in zip(zs, m)])
                    for m, c in poly.terms() if sum(m) <= K])


def sym_scalar(c):
    if isinstance(c, complex):
        return sp.Float(c.real) + sp.I * sp.Float(c.imag)
    if hasattr(c, "im"):
        return sp.Rational(c.re) + sp.I * sp.Rational(c.im)
    return sp.Rational(c)


def to_expr(series, zs):
    """Package series -> sympy expression."""
    return sp.expand(sum(
        (sym_scalar(c) * sp.Mul(*[z ** e for z, e in zip(zs, m)]) for m, c in series.terms.items()),
        sp.Integer(0),
    ))


def coeff_dict(expr, zs):
    poly = sp.Poly(sp.expand(expr), *zs)
    return {m: c for m, c in poly.terms() if c != 0}


def compose_oracle(phi, vs, zs, K):
    return truncate(phi.subs(dict(zip(zs, vs)), simultaneous=True), zs, K)


def invert_oracle(fs, zs, K):
    """Undetermined-coefficient inversion of a tangent-to-identity map."""
    nu = len(zs)
    unknowns = []
    ws = []
    for i in range(nu):
        w = zs[i]
        for d in range(2, K + 1):
            for m in itertools.product(range(d + 1), repeat=nu):
                if sum(m) == d:
                    c = sp.Symbol(f"c_{i}_{'_'.join(map(str, m))}")
                    unknowns.append(c)
                    w += c * sp.Mul(*[z ** e for z, e in zip(zs, m)])
        ws.append(w)
    eqs = []
    for i in range(nu):
        comp = truncate(fs[i].subs(dict(zip(zs, ws)), simultaneous=True), zs, K) - zs[i]
        eqs += list(coeff_dict(comp, zs).values())
    sol = sp.solve(eqs, unknowns, dict=True)[0]
    return [sp.expand(w.subs(sol)) for w in ws]


# -- decoration set -------------------------------------------------------


def N_generative(nu, max_abs):
    """``{m - e_i : m >= 0, |m| >= 2}`` restricted to ``|n| <= max_abs``."""
    out = set()
    for s in range(2, max_abs + 2):
        for m in itertools.product(range(s + 1), repeat=nu):
            if sum(m) == s:
                for i in range(nu):
                    out.add(tuple(x - (1 if j == i else 0) for j, x in enumerate(m)))
    return out


# -- forests as parent arrays ------------------------------------------------


def ahu(children, v, labels):
    return "(" + str(labels[v]) + "".join(sorted(ahu(children, c, labels) for c in children[v])) + ")"


def unlabeled_forest_count(w):
    """Distinct unlabeled rooted forests on ``w`` vertices, by brute force over
    parent arrays (vertex ``v`` hangs below some ``u < v`` or is a root)."""
    seen = set()
    for parents in itertools.product(*[range(v + 1) for v in range(w)]):
        children = {v: [] for v in range(w)}
        roots = []
        for v, p in enumerate(parents):
            # p == v marks a root, otherwise parent is p
            if p == v:
                roots.append(v)
            else:
                children[p].append(v)
        labels = {v: "" for v in range(w)}
        seen.add("".join(sorted(ahu(children, r, labels) for r in roots)))
    return len(seen)


# -- operators on sympy expressions ----------------------------------------


def D_oracle(forest, a_coeff, zs):
    """``D_F`` as a Python function on sympy expressions.

    ``forest`` is a list of trees ``(n, [subtrees])``; ``a_coeff(i, n)`` is
    ``a_{i,n}``.  Direct transcription of the three defining rules.
    """
    nu = len(zs)

    def mono(m):
        return sp.Mul(*[z ** e for z, e in zip(zs, m)])

    def D_tree(tree):
        n, kids = tree

        def op(phi):
            out = 0
            for i in range(nu):
                c = a_coeff(i, n)
                if c == 0:
                    continue
                m = tuple(x + (1 if j == i else 0) for j, x in enumerate(n))
                out += D_forest(kids)(c * mono(m)) * sp.diff(phi, zs[i])
            return sp.expand(out)
        return op

    def D_forest(trees):
        if not trees:
            return lambda phi: phi
        if len(trees) == 1:
            return D_tree(trees[0])
        keys = [repr(_canon(t)) for t in trees]
        denom = 1
        for k in set(keys):
            denom *= math.factorial(keys.count(k))
        ops = [D_tree(t) for t in trees]

        def op(phi):
            out = 0
            for idx in itertools.product(range(nu), repeat=len(trees)):
                term = 1
                for o, i in zip(ops, idx):
                    term *= o(zs[i])
                d = phi
                for i in idx:
                    d = sp.diff(d, zs[i])
                out += term * d
            return sp.expand(out / denom)
        return op

    return D_forest(forest)


def _canon(tree):
    n, kids = tree
    return (tuple(n), tuple(sorted(_canon(k) for k in kids)))
