"""Small divisors, Bruno partial sums and an explicit radius for two spectra.

Run:  python3 demos/bruno_radius.py
"""

import cmath
import math

from armlin import Spectrum
from armlin.bruno import diagnostics, radius_lower_bound

golden = (1 + math.sqrt(5)) / 2
cases = {
    "q = 2 (hyperbolic)": Spectrum("diffeo", (2,)),
    "q = exp(2 pi i golden) (unit circle)": Spectrum("diffeo", (cmath.exp(2j * math.pi * golden),)),
    "lambda = (1, golden) (vector field)": Spectrum("field", (1.0, golden)),
}

for label, spectrum in cases.items():
    d = diagnostics(spectrum, 200, with_alpha=False)
    print(label)
    print("  Omega(k), k = 1, 2, 5, 10, 50, 200:", [f"{d.omega[k - 1]:.4g}" for k in (1, 2, 5, 10, 50, 200)])
    print(f"  Bruno partial sum to k=200: {d.bruno_partial:.6f}")
    print(f"  gamma = {d.gamma:.10f},  B = {d.B:.4f}")
    r = radius_lower_bound(1.0, 1.0, spectrum.dimension, d.B)
    print(f"  radius lower bound for b = 1, M = 1: {r:.4e}")
    print()

limit = math.log(2 * math.pi / math.log(2))
print(f"q = 2 has constant Omega, so the full Bruno sum is log(2 pi / log 2) = {limit:.6f}.")
