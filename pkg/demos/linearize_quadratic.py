"""Linearize f(z) = 2(z + z^2) with the tree expansion and check it two ways.

Run:  python3 demos/linearize_quadratic.py
"""

from fractions import Fraction

from armlin import (
    ProblemSpec,
    SeriesTuple,
    Spectrum,
    TruncatedSeries,
    conjugacy_residual,
    linearize_recursive,
    linearize_tree,
)
from armlin.forests import enumerate_trees, to_text

K = 8
a = SeriesTuple([TruncatedSeries(1, K, {(2,): 1})])
problem = ProblemSpec("diffeo", Spectrum("diffeo", (2,)), a, K)

print("Trees of weight <= 4 contributing to h:")
for t in enumerate_trees(a.support(), 4, filter="nv", dimension=1):
    s = problem.spectrum.tree_value(t)
    if s:
        print(f"  {to_text(t):<28} S = {s}")

tree = linearize_tree(problem)
rec = linearize_recursive(problem)
print("\nh(z) coefficients, tree expansion vs degree-by-degree recursion:")
for d in range(1, K + 1):
    ct, cr = tree.h[0][(d,)], rec.h[0][(d,)]
    print(f"  z^{d}: {str(ct):>10}  {str(cr):>10}")
assert tree.h == rec.h

print("\nConjugacy residual (exact):", conjugacy_residual(problem, tree.h))
print("Trees used:", tree.diagnostics["trees"])

# the same map viewed as a vector field z' = z + z^2
field = ProblemSpec("field", Spectrum("field", (Fraction(1),)), a, K)
h = linearize_tree(field).h
print("\nVector field z' = z + z^2: h =", " + ".join(f"{h[0][(d,)]}z^{d}" for d in range(1, K + 1)))
