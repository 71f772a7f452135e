"""Decorated forests, their operators D_F(a) and two tree-expansion identities.

Run:  python3 demos/forest_operators.py
"""

from fractions import Fraction

from armlin import SeriesTuple, TruncatedSeries, compose, invert_tangent_identity
from armlin.armould import I_armould, geometric, tree_expand
from armlin.coarmould import D_closed, D_recursive, is_universally_vanishing, product_rule_multiplicities
from armlin.forests import enumerate_forests, parse_forest, to_text

a = SeriesTuple.from_terms(2, 5, [(0, (0, 2), 1), (1, (1, 1), Fraction(-1, 2))])
print("a =", a)
print("support decorations:", a.support())

print("\nForests of weight <= 3 over the support:")
for F in enumerate_forests(a.support(), 3, dimension=2):
    op = D_recursive(F, a)
    tag = "universally 0" if is_universally_vanishing(F) else ""
    terms = ", ".join(f"{p}: {c}" for p, c in op.terms.items()) or "0"
    print(f"  {to_text(F):<30} sym={F.sym}  {tag:<14} {terms}")
    assert op == D_closed(F, a)

leaf = parse_forest("[1]", dimension=1)
print("\nCut multiplicities for D_[1] o D_[1]:")
for F, k in product_rule_multiplicities(leaf, leaf).items():
    print(f"  k = {k}  for {to_text(F)}")

phi = TruncatedSeries(2, 5, {(1, 0): 1, (0, 1): 2, (1, 1): 3})
f = SeriesTuple.identity(2, 5) + a
print("\nSum of I^F D_F applied to phi equals phi o (id + a):",
      tree_expand(I_armould, a).apply(phi) == compose(phi, f))
print("Sum of (-1)^#F D_F applied to phi equals phi o (id + a)^-1:",
      tree_expand(geometric(-1, 1), a).apply(phi) == compose(phi, invert_tangent_identity(f)))
