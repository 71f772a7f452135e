"""Linearizing maps of diffeomorphisms ``R_q∘(id+a)`` and vector fields ``L_λ + a``.

``linearize_tree`` sums armould-weighted tree operators; ``linearize_recursive``
solves the conjugacy equation degree by degree and serves as an oracle.
The module also builds the majorant series used for convergence bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import scalars
from .armould import ResonanceError, Spectrum
from .coarmould import Coarmould, generic_coarmould
from .forests import enumerate_trees
from .series import (
    SeriesTuple,
    TruncatedSeries,
    invert_tangent_identity,
    madd,
    unit,
)


@dataclass
class ProblemSpec:
    kind: str
    spectrum: Spectrum
    a: SeriesTuple
    cap: int = field(default=None)

    def __post_init__(self):
        if self.cap is None:
            self.cap = self.a.cap
        if self.kind != self.spectrum.kind:
            raise ValueError("problem kind and spectrum kind differ")
        if self.a.dimension != self.spectrum.dimension:
            raise ValueError("nonlinear part and spectrum dimensions differ")
        if self.a.cap != self.cap:
            self.a = self.a.with_cap(self.cap)
        if not self.a.is_nonlinear_part():
            raise ValueError("a must have every component of order >= 2")

    @property
    def dimension(self) -> int:
        return self.a.dimension

    @property
    def is_exact(self) -> bool:
        return self.spectrum.is_exact and self.a.is_exact


@dataclass
class LinearizationResult:
    h: SeriesTuple
    method: str
    diagnostics: dict

    def to_json(self) -> dict:
        return {"method": self.method, "h": self.h.to_json(), "diagnostics": self.diagnostics}


def _max_modulus(values) -> float:
    return max((abs(complex(v)) for v in values), default=0.0)


def linearize_tree(spec: ProblemSpec) -> LinearizationResult:
    """``h_i = z_i + Σ_T S^T D_T z_i`` over non-vanishing trees with ``|‖T‖| <= K-1``."""
    nu, K = spec.dimension, spec.cap
    spec.spectrum.check_nonresonant(K)
    co = Coarmould.from_series(spec.a)
    gen = generic_coarmould(nu)
    support = spec.a.support()
    comps = [dict() for _ in range(nu)]
    count, smax = 0, 0.0
    trees = enumerate_trees(support, K - 1, filter="nv", dimension=nu) if support else ()
    for t in trees:
        if not any(gen.beta(t)):
            continue
        beta = co.beta(t)
        if not any(beta):
            continue
        s = spec.spectrum.tree_value(t)
        if s == 0:
            continue
        count += 1
        smax = max(smax, abs(complex(s)))
        for i, b in enumerate(beta):
            if b == 0:
                continue
            m = madd(t.weight, unit(nu, i))
            if min(m) < 0:
                # structurally zero; only float round-off can land here
                continue
            comps[i][m] = comps[i].get(m, 0) + s * b
    for i in range(nu):
        comps[i][unit(nu, i)] = comps[i].get(unit(nu, i), 0) + 1
    h = SeriesTuple([TruncatedSeries(nu, K, c) for c in comps])
    diag = {"trees": count, "max_abs_armould": smax, "residual": conjugacy_residual(spec, h)}
    return LinearizationResult(h, "tree", diag)


def linearize_recursive(spec: ProblemSpec) -> LinearizationResult:
    """Solve the conjugacy equation one total degree at a time.

    diffeo: ``(q^m - q_i) c = q_i [a_i∘h]_m``; field: ``(λ·m - λ_i) c = [a_i∘h]_m``.
    """
    nu, K = spec.dimension, spec.cap
    q = spec.spectrum.values
    diffeo = spec.kind == "diffeo"
    comps = [{unit(nu, i): 1} for i in range(nu)]
    h = SeriesTuple([TruncatedSeries(nu, K, c) for c in comps])
    for d in range(2, K + 1):
        ah = spec.a.then(h)
        for i in range(nu):
            for m, c in ah[i].terms.items():
                if sum(m) != d:
                    continue
                if diffeo:
                    div = _monomial(q, m) - q[i]
                    rhs = q[i] * c
                else:
                    div = sum((v * e for v, e in zip(q, m) if e), 0) - q[i]
                    rhs = c
                if (div == 0) if scalars.is_exact(div) else abs(div) < 1e-300:
                    raise ResonanceError(f"resonant divisor at component {i + 1}, exponent {m}")
                comps[i][m] = scalars.div(rhs, div)
        h = SeriesTuple([TruncatedSeries(nu, K, c) for c in comps])
    diag = {"residual": conjugacy_residual(spec, h)}
    return LinearizationResult(h, "recursive", diag)


def _monomial(values, m):
    out = 1
    for v, e in zip(values, m):
        if e:
            out = out * v ** e
    return out


def residual_series(spec: ProblemSpec, h: SeriesTuple) -> SeriesTuple:
    """diffeo: ``R_q∘(id+a)∘h - h∘R_q``; field: ``λ_i h_i + a_i∘h - L_λ h_i``."""
    nu, K = spec.dimension, spec.cap
    if h.cap != K:
        h = h.with_cap(K)
    q = spec.spectrum.values
    ah = spec.a.then(h)
    out = []
    for i in range(nu):
        if spec.kind == "diffeo":
            lhs = (h[i] + ah[i]).scale(q[i])
        else:
            lhs = h[i].scale(q[i]) + ah[i]
        acc = dict(lhs.terms)
        for m, c in h[i].terms.items():
            if spec.kind == "diffeo":
                f = _monomial(q, m)
            else:
                f = sum((v * e for v, e in zip(q, m) if e), 0)
            acc[m] = acc.get(m, 0) - f * c
        out.append(TruncatedSeries(nu, K, acc))
    return SeriesTuple(out)


def conjugacy_residual(spec: ProblemSpec, h: SeriesTuple):
    """Largest coefficient modulus of :func:`residual_series` (exact 0 when it vanishes)."""
    r = residual_series(spec, h)
    vals = [c for comp in r for _, c in comp]
    if not vals:
        return 0
    return _max_modulus(vals)


def relative_discrepancy(h1: SeriesTuple, h2: SeriesTuple):
    """``max |c1 - c2| / (1 + max(|c1|, |c2|))`` over all coefficients; exact 0 if equal."""
    if h1 == h2:
        return 0
    worst = 0.0
    for p, q in zip(h1, h2):
        for m in set(p.terms) | set(q.terms):
            x, y = complex(p[m]), complex(q[m])
            worst = max(worst, abs(x - y) / (1 + max(abs(x), abs(y))))
    return worst


# ---------------------------------------------------------------------------
# majorants


def sup_bound(a: SeriesTuple, b=1) -> float:
    """``(1/b) max_i Σ_m |a_{i,m}| b^{|m|}``, an upper bound for ``sup |a|/b`` on the closed polydisc."""
    if b <= 0:
        raise ValueError("b must be positive")
    return max(
        (sum(abs(complex(c)) * b ** sum(m) for m, c in comp.terms.items()) for comp in a),
        default=0.0,
    ) / b


def majorant_bound(spec: ProblemSpec, B, b=1, M=None) -> SeriesTuple:
    """Inverse of ``g_i(z) = z_i - (1/B) 𝒜(Bz)`` with ``𝒜 = Σ_{k>=2} M Z^k / b^{k-1}``.

    ``M`` defaults to :func:`sup_bound`.  Each component of the result
    dominates the corresponding component of ``h`` under the convergence
    theorem's hypotheses.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    nu, K = spec.dimension, spec.cap
    M = sup_bound(spec.a, b) if M is None else M
    Z = TruncatedSeries(nu, K, {unit(nu, j): 1 for j in range(nu)})
    A = TruncatedSeries.zero(nu, K)
    P = Z
    for k in range(2, K + 1):
        P = P * Z
        A = A + P.scale(M * B ** (k - 1) / b ** (k - 1))
    g = SeriesTuple([TruncatedSeries.variable(nu, K, i) - A for i in range(nu)])
    return invert_tangent_identity(g)


def _binomial_half(k: int) -> Fraction:
    c = Fraction(1)
    for j in range(k):
        c = c * (Fraction(1, 2) - j) / (j + 1)
    return c


def _psi_1d(alpha, K: int) -> list:
    """Taylor coefficients (index = degree) of ``(1 + z - sqrt(1 - 2(1+2α)z + z²)) / (2(1+α))``."""
    u = [0] * (K + 1)
    u[1] = -2 * (1 + 2 * alpha)
    if K >= 2:
        u[2] = 1
    root = [0] * (K + 1)
    power = [1] + [0] * K
    for k in range(K + 1):
        ck = _binomial_half(k)
        for d in range(K + 1):
            if power[d]:
                root[d] = root[d] + ck * power[d]
        nxt = [0] * (K + 1)
        for i, x in enumerate(power):
            if x:
                for j, y in enumerate(u):
                    if y and i + j <= K:
                        nxt[i + j] = nxt[i + j] + x * y
        power = nxt
    num = [-r for r in root]
    num[0] = num[0] + 1
    if K >= 1:
        num[1] = num[1] + 1
    return [scalars.div(x, 2 * (1 + alpha)) if scalars.is_exact(alpha) else x / (2 * (1 + alpha)) for x in num]


def psi_closed_form(alpha, nu: int, K: int) -> SeriesTuple:
    """Expansion of ``Ψ_{α,ν,i}(z) = z_i + (1/ν)(Ψ_{αν,1}(Z) - Z)``, ``Z = z_1+...+z_ν``.

    This is the inverse of ``φ_{α,ν,i}(z) = z_i - α Σ_{k>=2} Z^k``.  A
    rational ``α`` gives exact coefficients.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if K < 1:
        raise ValueError("K must be >= 1")
    if isinstance(alpha, int):
        alpha = Fraction(alpha)
    coeffs = _psi_1d(alpha * nu, K)
    Z = TruncatedSeries(nu, K, {unit(nu, j): 1 for j in range(nu)})
    extra = TruncatedSeries.zero(nu, K)
    P = Z
    for k in range(2, K + 1):
        P = P * Z
        if coeffs[k]:
            extra = extra + P.scale(scalars.div(coeffs[k], nu) if scalars.is_exact(coeffs[k]) else coeffs[k] / nu)
    return SeriesTuple([TruncatedSeries.variable(nu, K, i) + extra for i in range(nu)])


def phi_alpha(alpha, nu: int, K: int) -> SeriesTuple:
    """``φ_{α,ν,i}(z) = z_i - α Σ_{k=2..K} Z^k``."""
    Z = TruncatedSeries(nu, K, {unit(nu, j): 1 for j in range(nu)})
    S = TruncatedSeries.zero(nu, K)
    P = Z
    for _ in range(2, K + 1):
        P = P * Z
        S = S + P
    return SeriesTuple([TruncatedSeries.variable(nu, K, i) - S.scale(alpha) for i in range(nu)])


def rescale(m, f: SeriesTuple) -> SeriesTuple:
    """``(r_m f)(z) = f(mz)/m``: the coefficient of ``z^n`` is multiplied by ``m^{|n|-1}``."""
    if m <= 0:
        raise ValueError("m must be positive")
    if not f.is_tangent_to_identity():
        raise ValueError("rescale expects a tangent-to-identity map")
    if isinstance(m, int):
        m = Fraction(m)
    return SeriesTuple([
        TruncatedSeries(c.dimension, c.cap, {n: x * m ** (sum(n) - 1) for n, x in c.terms.items()})
        for c in f
    ])
