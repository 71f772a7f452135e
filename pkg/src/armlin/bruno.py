"""Small-divisor diagnostics, Bruno partial sums and explicit radius bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from . import scalars
from .armould import ResonanceError, Spectrum, is_zero_divisor
from .forests import as_forest, vertices


def dist_to_integers(z) -> float:
    """``d(z, Z) = min_p |z - p|`` for complex ``z``."""
    z = complex(z)
    p = math.floor(z.real)
    return min(abs(z - p), abs(z - p - 1))


@lru_cache(maxsize=4096)
def _compositions(total: int, parts: int) -> np.ndarray:
    """All non-negative integer vectors of length ``parts`` summing to ``total`` (read-only)."""
    if parts == 1:
        out = np.array([[total]], dtype=np.int64)
    else:
        blocks = []
        for first in range(total + 1):
            rest = _compositions(total - first, parts - 1)
            blocks.append(np.hstack([np.full((len(rest), 1), first, dtype=np.int64), rest]))
        out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def _shell_values(spectrum: Spectrum, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Divisor sizes over ``{n ∈ N : |n| = s}`` and the matching ``n`` rows.

    ``n = m - e_i`` with ``|m| = s + 1``; the size is ``d(n·λ, Z)`` for
    diffeomorphisms and ``|n·λ|`` for vector fields.
    """
    nu = spectrum.dimension
    lam = np.array(spectrum.lambdas, dtype=complex)
    m = _compositions(s + 1, nu)
    ns = np.vstack([m - np.eye(nu, dtype=np.int64)[i] for i in range(nu)])
    x = ns @ lam
    if spectrum.kind == "diffeo":
        p = np.floor(x.real)
        size = np.minimum(np.abs(x - p), np.abs(x - p - 1))
    else:
        size = np.abs(x)
    return size, ns


def _check_shell_resonance(spectrum: Spectrum, size: np.ndarray, ns: np.ndarray) -> None:
    # float sizes only locate candidates; the divisor itself decides
    for k in np.flatnonzero(size < 1e-9):
        n = tuple(int(v) for v in ns[k])
        if is_zero_divisor(spectrum.divisor(n)):
            raise ResonanceError(f"resonance at n={n}")


def omega_sequence(spectrum: Spectrum, kmax: int) -> np.ndarray:
    """``[Ω(1), ..., Ω(kmax)]`` (``Ω_v.f.`` for vector fields), built shell by shell."""
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    out = np.empty(kmax)
    cur = 1.0
    for s in range(1, kmax + 1):
        size, ns = _shell_values(spectrum, s)
        _check_shell_resonance(spectrum, size, ns)
        if size.size:
            cur = min(cur, float(size.min()))
        out[s - 1] = cur
    return out


def omega(spectrum: Spectrum, k: int) -> float:
    return float(omega_sequence(spectrum, k)[-1])


def alpha_epsilon(spectrum: Spectrum, k: int) -> tuple[float, float]:
    """``α(k) = min{1} ∪ {|e^{m·λ - λ_j} - 1|}`` and ``ε(k) = min{1} ∪ {|q^m - q_j|}``
    over ``2 <= |m| <= k+1``, ``j ∈ [ν]`` (diffeomorphisms only).

    A zero value signals a resonance and is returned, not raised.
    """
    if spectrum.kind != "diffeo":
        raise ValueError("α and ε are defined for diffeomorphism spectra")
    al, ep = _alpha_epsilon_sequence(spectrum, k)
    return al[-1], ep[-1]


def bruno_partial(spectrum: Spectrum, kmax: int, omegas=None) -> float:
    """``Σ_{k=1}^{kmax} (1/k - 1/(k+1)) log(1/Ω(k))``."""
    om = omega_sequence(spectrum, kmax) if omegas is None else np.asarray(omegas, dtype=float)[:kmax]
    k = np.arange(1, len(om) + 1, dtype=float)
    return float(np.sum((1 / k - 1 / (k + 1)) * np.log(1 / om)))


def _gamma_term(k):
    return np.log(k + 2) / (k * (k + 1))


def gamma_constant(tol: float = 1e-12) -> float:
    """``γ = Σ_{k>=1} log(k+2) / (k(k+1))`` to absolute error ``<= tol``.

    With ``f(x) = log(x+2)/(x(x+1))`` convex and decreasing for ``x >= 1``,
    the tail ``Σ_{k>K} f(k)`` lies in ``[∫_K^∞ f - f(K)/2, ∫_{K+1/2}^∞ f]``
    (trapezoid and midpoint comparisons).  ``K`` doubles until half the
    bracket is below ``tol``; the midpoint is returned.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    f = lambda x: math.log(x + 2) / (x * (x + 1))
    K = 64
    while True:
        head = math.fsum(_gamma_term(np.arange(1, K + 1, dtype=float)))
        lo_int, _ = integrate.quad(f, K, np.inf, epsabs=tol / 100, epsrel=1e-14, limit=200)
        hi_int, _ = integrate.quad(f, K + 0.5, np.inf, epsabs=tol / 100, epsrel=1e-14, limit=200)
        lo, hi = lo_int - f(K) / 2, hi_int
        if (hi - lo) / 2 <= tol / 2 or K > 1 << 26:
            return head + (lo + hi) / 2
        K *= 2


def gamma_partial(K: int) -> float:
    return math.fsum(_gamma_term(np.arange(1, K + 1, dtype=float)))


def radius_lower_bound(b: float, M: float, nu: int, B: float) -> float:
    """``b / (B ν (4Mν + 2))``."""
    if b <= 0 or M < 0 or nu < 1 or B < 1:
        raise ValueError("need b > 0, M >= 0, nu >= 1, B >= 1")
    return b / (B * nu * (4 * M * nu + 2))


def kappa(beta: float) -> float:
    """``κ_β = 1 + 2β - 2√(β(1+β))``, evaluated as ``1/(1 + 2β + 2√(β(1+β)))``.

    Raises ``AssertionError`` if the sandwich ``1/(4β+1) > κ_β > 1/(4β+2)`` fails.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    k = 1.0 / (1 + 2 * beta + 2 * math.sqrt(beta * (1 + beta)))
    assert 1 / (4 * beta + 1) > k > 1 / (4 * beta + 2), f"kappa sandwich fails at beta={beta}"
    return k


@dataclass
class BrunoDiagnostics:
    kind: str
    spectrum: list
    kmax: int
    omega: list
    bruno_partial: float
    gamma: float
    B: float
    alpha: list | None = None
    epsilon: list | None = None
    radius: dict | None = None
    tail_note: str = "bruno_partial is a lower bound of the full Bruno series; B uses it as a kmax-truncated surrogate"

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}

    def csv_rows(self) -> list[list]:
        rows = [["k", "omega", "alpha", "epsilon", "partial_sum"]]
        acc = 0.0
        for k, om in enumerate(self.omega, start=1):
            acc += (1 / k - 1 / (k + 1)) * math.log(1 / om)
            a = self.alpha[k - 1] if self.alpha else ""
            e = self.epsilon[k - 1] if self.epsilon else ""
            rows.append([k, repr(om), repr(a) if a != "" else "", repr(e) if e != "" else "", repr(acc)])
        return rows


def diagnostics(spectrum: Spectrum, kmax: int, with_alpha: bool = True, gamma_tol: float = 1e-12) -> BrunoDiagnostics:
    om = omega_sequence(spectrum, kmax)
    part = bruno_partial(spectrum, kmax, om)
    g = gamma_constant(gamma_tol)
    alpha = eps = None
    if with_alpha and spectrum.kind == "diffeo":
        alpha, eps = _alpha_epsilon_sequence(spectrum, kmax)
    values = [list(scalars.real_imag(complex(v))) for v in spectrum.values]
    return BrunoDiagnostics(
        kind=spectrum.kind,
        spectrum=[[float(r), float(i)] for r, i in values],
        kmax=kmax,
        omega=[float(x) for x in om],
        bruno_partial=part,
        gamma=g,
        B=math.exp(g + part),
        alpha=alpha,
        epsilon=eps,
    )


def _alpha_epsilon_sequence(spectrum: Spectrum, kmax: int):
    nu = spectrum.dimension
    lam = np.array(spectrum.lambdas, dtype=complex)
    q = np.array([complex(v) for v in spectrum.values])
    a_min, e_min = 1.0, 1.0
    al, ep = [], []
    for k in range(1, kmax + 1):
        m = _compositions(k + 1, nu)
        ml = m @ lam
        qm = np.prod(q[None, :] ** m, axis=1)
        for j in range(nu):
            a_min = min(a_min, float(np.abs(np.exp(ml - lam[j]) - 1).min()))
            e_min = min(e_min, float(np.abs(qm - q[j]).min()))
        al.append(a_min)
        ep.append(e_min)
    return al, ep


# ---------------------------------------------------------------------------
# verification harnesses


@dataclass
class CheckReport:
    name: str
    passed: bool
    checked: int = 0
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.passed


def _vertex_sizes(F, spectrum: Spectrum) -> list[float]:
    lam = spectrum.lambdas
    out = []
    for _, t in vertices(F):
        x = sum(l * e for l, e in zip(lam, t.weight))
        out.append(dist_to_integers(x) if spectrum.kind == "diffeo" else abs(x))
    return out


def counting_check(F, spectrum: Spectrum, kmax: int, omegas=None) -> CheckReport:
    """``#W_k(F) <= |‖F‖|/(k+1)`` for ``k = 0..kmax``, compared as integers."""
    F = as_forest(F)
    om = omega_sequence(spectrum, kmax) if omegas is None else omegas
    sizes = _vertex_sizes(F, spectrum)
    w = F.abs_weight
    rep = CheckReport("counting", True)
    for k in range(kmax + 1):
        if k == 0:
            count = F.size
        else:
            thr = om[k - 1] / (k + 2)
            count = sum(1 for s in sizes if s < thr)
        rep.checked += 1
        if count * (k + 1) > w:
            rep.passed = False
            rep.violations.append((k, count))
    return rep


def armould_bound_check(F, spectrum: Spectrum, omegas=None) -> CheckReport:
    """``log|S^F| <= |‖F‖| (L_K/K + Σ_{k<K} (1/k - 1/(k+1)) L_k)``,
    ``K = |‖F‖|``, ``L_k = log((k+2)/Ω(k))``."""
    F = as_forest(F)
    rep = CheckReport("armould_bound", True)
    if not F:
        return rep
    K = F.abs_weight
    om = omega_sequence(spectrum, K) if omegas is None else omegas
    L = [math.log((k + 2) / om[k - 1]) for k in range(1, K + 1)]
    bound = L[K - 1] / K + sum((1 / k - 1 / (k + 1)) * L[k - 1] for k in range(1, K))
    s = spectrum.armould(F)
    rep.checked = 1
    if s != 0:
        lhs = math.log(abs(complex(s)))
        if lhs > K * bound * (1 + 1e-12):
            rep.passed = False
            rep.violations.append((lhs, K * bound))
    return rep


def max_modulus_check(n: int = 200) -> CheckReport:
    """On an ``n×n`` grid of ``[-1/2, 1/2] × [-2, 2]``: ``|e^{2iπz} - 1| > 1/3``
    when ``|Im z| > 1/2`` and ``>= d(z, Z)`` otherwise."""
    x = np.linspace(-0.5, 0.5, n)
    y = np.linspace(-2.0, 2.0, n)
    X, Y = np.meshgrid(x, y)
    Z = X + 1j * Y
    lhs = np.abs(np.exp(2j * np.pi * Z) - 1)
    p = np.floor(Z.real)
    d = np.minimum(np.abs(Z - p), np.abs(Z - p - 1))
    far = np.abs(Z.imag) > 0.5
    # rounding slack for points where both sides vanish or touch
    ok = np.where(far, lhs > 1 / 3, lhs >= d - 1e-12)
    bad = np.argwhere(~ok)
    rep = CheckReport("max_modulus", not bad.size, checked=int(ok.size))
    rep.violations = [complex(Z[i, j]) for i, j in bad[:10]]
    return rep
