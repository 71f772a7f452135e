"""One test per acceptance criterion, each reporting a single PASS/FAIL line."""

import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np

from armlin.armould import Spectrum, geometric, rescaled_inverse_map, tree_expand
from armlin.bruno import (
    armould_bound_check,
    counting_check,
    diagnostics,
    gamma_constant,
    kappa,
    max_modulus_check,
    omega_sequence,
    radius_lower_bound,
)
from armlin.coarmould import (
    D_closed,
    D_recursive,
    cut_table,
    is_universally_vanishing,
    verify_coseparativity,
    verify_product_rule,
)
from armlin.forests import admissible_cuts, enumerate_forests
from armlin.linearizer import (
    ProblemSpec,
    conjugacy_residual,
    linearize_recursive,
    linearize_tree,
    majorant_bound,
    relative_discrepancy,
)
from armlin.series import SeriesTuple, TruncatedSeries, compose, invert_tangent_identity, majorizes, monomials

from matrix import MATRIX, float_specs, rational_specs, spec

ALPHABETS = {
    1: [[(1,), (2,), (3,)]],
    2: [[(1, 0), (0, 1), (-1, 2)], [(2, -1), (-1, 2), (1, 1)], [(1, 0), (2, -1), (0, 2)]],
    3: [[(1, 0, 0), (-1, 1, 1), (0, 2, -1)], [(0, 1, 0), (1, 1, -1), (-1, 0, 2)], [(1, 0, 0), (0, 1, 0), (0, 0, 1)]],
}
SWEEPS = [(1, ALPHABETS[1][0]), (2, ALPHABETS[2][1]), (3, ALPHABETS[3][1])]


def full_support_a(nu, decorations, seed):
    """Random nonzero rational ``a_{i,n}`` on every admissible pair of the alphabet."""
    rnd = random.Random(seed)
    cap = max(sum(n) for n in decorations) + 1
    terms = []
    for n in decorations:
        for i in range(nu):
            m = tuple(x + (j == i) for j, x in enumerate(n))
            if min(m) >= 0:
                terms.append((i, m, Fraction(rnd.choice([-3, -2, -1, 1, 2, 3]), rnd.randint(1, 4))))
    return SeriesTuple.from_terms(nu, cap, terms)


def nv_forests(decorations, cap, nu):
    for F in enumerate_forests(decorations, cap, filter="nv", dimension=nu):
        if F and not is_universally_vanishing(F):
            yield F


def test_criterion_01_oracle_equivalence(report):
    t0 = time.perf_counter()
    worst, mismatched = 0.0, []
    for name in MATRIX:
        p = spec(name)
        ht, hr = linearize_tree(p).h, linearize_recursive(p).h
        if name in rational_specs():
            if ht != hr:
                mismatched.append(name)
        else:
            d = relative_discrepancy(ht, hr)
            worst = max(worst, d)
            if d > 1e-9:
                mismatched.append(name)
    elapsed = time.perf_counter() - t0
    ok = not mismatched and elapsed <= 60 and len(MATRIX) >= 10
    report(1, "tree = recursive on the spec matrix", ok,
           f"{len(MATRIX)} specs, rational exact, float max rel {worst:.2e} (tol 1e-9), {elapsed:.1f}s (limit 60s)")
    assert ok, mismatched


def test_criterion_02_residual_and_samples(report):
    nonzero = []
    for name in MATRIX:
        p = spec(name)
        h = linearize_tree(p).h
        r = conjugacy_residual(p, h)
        if name in rational_specs():
            if r != 0:
                nonzero.append((name, r))
        elif r > 1e-9 * (1 + max(c.max_abs() for c in h)):
            nonzero.append((name, r))
    q2 = ProblemSpec("diffeo", Spectrum("diffeo", (2,)), SeriesTuple([TruncatedSeries(1, 3, {(2,): 1})]), 3)
    l1 = ProblemSpec("field", Spectrum("field", (1,)), SeriesTuple([TruncatedSeries(1, 3, {(2,): 1})]), 3)
    hq, hl = linearize_tree(q2).h[0], linearize_tree(l1).h[0]
    samples = hq[(2,)] == 1 and hq[(3,)] == Fraction(2, 3) and hl[(2,)] == 1 and hl[(3,)] == 1
    ok = not nonzero and samples
    report(2, "conjugacy residual and sample coefficients", ok,
           f"residual exactly 0 on {len(rational_specs())} rational specs, float within 1e-9; "
           f"q=2: h2={hq[(2,)]}, h3={hq[(3,)]}; lambda=1: h2={hl[(2,)]}, h3={hl[(3,)]}")
    assert ok, nonzero


def test_criterion_03_closed_formula(report):
    count, bad = 0, []
    for nu, alphabets in ALPHABETS.items():
        for k, decs in enumerate(alphabets):
            a = full_support_a(nu, decs, 7 + k)
            for F in enumerate_forests(decs, 5, dimension=nu):
                count += 1
                if D_closed(F, a) != D_recursive(F, a):
                    bad.append(F)
    ok = not bad
    report(3, "closed colouring formula = recursion", ok,
           f"{count} forests, weight <= 5, {sum(map(len, ALPHABETS.values()))} alphabets of size 3, nu <= 3, "
           f"{len(bad)} mismatches (exact)")
    assert ok, bad[:5]


def test_criterion_04_structural_identities(report):
    totals = dict(cosep=0, product=0, hierarchy=0, cuts=0)
    violations = []
    for nu, decs in SWEEPS:
        a = full_support_a(nu, decs, 3)
        forests = list(enumerate_forests(decs, 5, dimension=nu))
        K = 7
        phi = TruncatedSeries(nu, K, {m: Fraction(k + 1, k + 3) for k, m in enumerate(monomials(nu, 2))})
        psi = TruncatedSeries(nu, K, {m: Fraction(-k - 2, k + 5) for k, m in enumerate(monomials(nu, 2))})
        for F in forests:
            totals["cosep"] += 1
            if not verify_coseparativity(F, a, phi, psi):
                violations.append(("coseparativity", F))
        table = cut_table(forests)
        nonempty = [F for F in forests if F]
        for F1, F2 in itertools.product(nonempty, repeat=2):
            if F1.abs_weight + F2.abs_weight > 5:
                continue
            totals["product"] += 1
            if not verify_product_rule(F1, F2, a, degree=2, ks=table.get((F1, F2), {})):
                violations.append(("product rule", F1, F2))
        for F in forests:
            if is_universally_vanishing(F):
                continue
            totals["hierarchy"] += 1
            if not F.fplus:
                violations.append(("NV in F+", F))
            for c in admissible_cuts(F):
                totals["cuts"] += 1
                if is_universally_vanishing(c.pruned) or is_universally_vanishing(c.remainder):
                    violations.append(("cut closure", F, c.selected))
                if c.remainder.abs_weight < len(c) - F.degree:
                    violations.append(("remainder weight", F, c.selected))
    ok = not violations
    report(4, "coseparativity, product rule, NV in F+, cut closure, remainder weight", ok,
           f"{totals['cosep']} forests, {totals['product']} pairs, {totals['hierarchy']} NV forests, "
           f"{totals['cuts']} cuts, {len(violations)} violations")
    assert ok, violations[:5]


def _spectrum_sweep():
    for name in MATRIX:
        p = spec(name)
        yield name, p.spectrum, p.a.support(), p.dimension


def test_criterion_05_counting_lemma(report):
    forests = violations = 0
    for name, spectrum, support, nu in _spectrum_sweep():
        om = omega_sequence(spectrum, 10)
        for F in nv_forests(support, 6, nu):
            forests += 1
            if not counting_check(F, spectrum, 10, om):
                violations += 1
    ok = violations == 0 and forests > 0
    report(5, "#W_k(F) <= |F|/(k+1)", ok,
           f"{forests} NV forests (weight <= 6) over {len(MATRIX)} spectra, k = 0..10, {violations} violations (integer comparison)")
    assert ok


def test_criterion_06_armould_bound(report):
    forests = violations = 0
    for name, spectrum, support, nu in _spectrum_sweep():
        om = omega_sequence(spectrum, 6)
        for F in nv_forests(support, 6, nu):
            forests += 1
            if not armould_bound_check(F, spectrum, om):
                violations += 1
    q2 = Spectrum("diffeo", (2,))
    bruno_q2 = math.log(2 * math.pi / math.log(2))
    B = math.exp(gamma_constant() + bruno_q2)
    closed = 0
    for F in nv_forests([(1,), (2,), (3,)], 6, 1):
        closed += 1
        if abs(complex(q2.armould(F))) > B ** F.abs_weight:
            violations += 1
    ok = violations == 0 and forests > 0
    report(6, "armould bounds", ok,
           f"finite-K bound on {forests} NV forests, |S^F| <= B^|F| on {closed} q=2 forests with "
           f"B = exp(gamma + log(2pi/log2)) = {B:.6g}, {violations} violations")
    assert ok


def test_criterion_07_majorant(report):
    failures, checked = [], []
    for name in float_specs():
        p = spec(name)
        h = linearize_tree(p).h
        B = diagnostics(p.spectrum, 200, with_alpha=False).B
        w = majorant_bound(p, B)
        checked.append(f"{name}(K={p.cap})")
        if not all(majorizes(w[i], h[i]) for i in range(p.dimension)):
            failures.append(name)
    ok = not failures and all(spec(n).cap == 8 for n in float_specs())
    report(7, "majorant w dominates h", ok,
           f"{len(checked)} float specs through K = 8, B from kmax = 200: {', '.join(checked)}; failures: {failures or 'none'}")
    assert ok


def test_criterion_08_kappa_and_max_modulus(report):
    bad = []
    for beta in np.logspace(-3, 3, 61):
        try:
            kappa(float(beta))
        except AssertionError:
            bad.append(float(beta))
    mm = max_modulus_check(200)
    ok = not bad and mm.passed
    report(8, "kappa sandwich and max-modulus lemma", ok,
           f"61-point log grid on [1e-3, 1e3]: {len(bad)} violations; {mm.checked}-point grid: {len(mm.violations)} violations")
    assert ok


def test_criterion_09_radius(report):
    trivial = radius_lower_bound(1, 1, 1, 1)
    kmax = 100
    d = diagnostics(Spectrum("diffeo", (2,)), kmax, with_alpha=False)
    b, M, nu = 1.0, 1.0, 1
    r = radius_lower_bound(b, M, nu, d.B)
    expected = b * math.exp(-d.gamma - d.bruno_partial) / (nu * (4 * M * nu + 2))
    rel = abs(r - expected) / expected
    partial_ok = abs(d.bruno_partial - math.log(2 * math.pi / math.log(2)) * kmax / (kmax + 1)) <= 1e-12
    ok = trivial == 1 / 6 and rel <= 1e-12 and partial_ok
    report(9, "radius lower bound", ok,
           f"radius(1,1,1,1) = {trivial!r} (1/6 exact); q=2 pipeline radius {r:.12g}, rel err {rel:.1e} (tol 1e-12)")
    assert ok


def _random_a(nu, K, rnd):
    comps = []
    for _ in range(nu):
        mons = rnd.sample(list(monomials(nu, K, 2)), k=min(3, len(list(monomials(nu, K, 2)))))
        comps.append(TruncatedSeries(nu, K, {m: Fraction(rnd.choice([-2, -1, 1, 2]), rnd.randint(1, 3)) for m in mons}))
    return SeriesTuple(comps)


def test_criterion_10_geometric_identity(report):
    K = 6
    rnd = random.Random(2024)
    cases = bad = 0
    for nu in (1, 2):
        for trial in range(3):
            a = _random_a(nu, K, rnd)
            phi = TruncatedSeries(nu, K, {m: Fraction(rnd.randint(-4, 4), rnd.randint(1, 3)) for m in monomials(nu, K)})
            for A, B in ((-1, 1), (1, 2)):
                cases += 1
                w = invert_tangent_identity(rescaled_inverse_map(a, A, B))
                if tree_expand(geometric(A, B), a).apply(phi) != compose(phi, w):
                    bad += 1
    ok = bad == 0
    report(10, "geometric armould expansion = composition with inverse of g", ok,
           f"{cases} cases (nu in {{1,2}}, K = 6, (A,B) in {{(-1,1),(1,2)}}), {bad} mismatches (exact)")
    assert ok
