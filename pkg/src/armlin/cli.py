"""Command-line front end: ``armlin linearize|bruno|verify|forests``.

Exit codes: 0 success, 2 malformed input, 3 resonance, 4 failed check.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import scalars
from .armould import ResonanceError, Spectrum
from .bruno import (
    armould_bound_check,
    counting_check,
    diagnostics,
    omega_sequence,
    radius_lower_bound,
)
from .coarmould import (
    D_closed,
    D_recursive,
    cut_table,
    is_universally_vanishing,
    verify_coseparativity,
    verify_product_rule,
)
from .forests import FILTERS, admissible_cuts, enumerate_forests, to_text
from .linearizer import (
    ProblemSpec,
    conjugacy_residual,
    linearize_recursive,
    linearize_tree,
    majorant_bound,
    relative_discrepancy,
    sup_bound,
)
from .series import SeriesTuple, TruncatedSeries, majorizes, monomials

EXIT_OK, EXIT_PARSE, EXIT_RESONANCE, EXIT_CHECK = 0, 2, 3, 4


class SpecError(ValueError):
    pass


def _scalar(pair, mode, where):
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise SpecError(f"{where}: expected [re, im]")
    try:
        if mode == "rational":
            return scalars.exact(pair[0], pair[1])
        if any(isinstance(x, str) for x in pair):
            raise SpecError(f"{where}: string values need mode 'rational'")
        return complex(float(pair[0]), float(pair[1]))
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise SpecError(f"{where}: {e}") from None


def parse_problem(obj: dict) -> tuple[ProblemSpec, str]:
    """Validate a problem-spec object and build the library value."""
    if not isinstance(obj, dict):
        raise SpecError("top level: expected a JSON object")
    for key in ("kind", "dimension", "spectrum", "nonlinear", "truncation"):
        if key not in obj:
            raise SpecError(f"missing field '{key}'")
    kind = obj["kind"]
    if kind not in ("diffeo", "field"):
        raise SpecError("field 'kind': expected 'diffeo' or 'field'")
    mode = obj.get("mode", "float")
    if mode not in ("float", "rational"):
        raise SpecError("field 'mode': expected 'float' or 'rational'")
    nu = obj["dimension"]
    if not isinstance(nu, int) or nu < 1:
        raise SpecError("field 'dimension': expected a positive integer")
    K = obj["truncation"]
    if not isinstance(K, int) or K < 1:
        raise SpecError("field 'truncation': expected a positive integer")
    spec_vals = obj["spectrum"]
    if not isinstance(spec_vals, list) or len(spec_vals) != nu:
        raise SpecError(f"field 'spectrum': expected {nu} [re, im] pairs")
    values = [_scalar(p, mode, f"spectrum[{k}]") for k, p in enumerate(spec_vals)]
    terms = []
    if not isinstance(obj["nonlinear"], list):
        raise SpecError("field 'nonlinear': expected a list")
    for k, t in enumerate(obj["nonlinear"]):
        where = f"nonlinear[{k}]"
        try:
            i, m, c = t["component"], t["exponent"], t["coeff"]
        except (KeyError, TypeError):
            raise SpecError(f"{where}: needs 'component', 'exponent', 'coeff'") from None
        if not isinstance(i, int) or not 1 <= i <= nu:
            raise SpecError(f"{where}.component: expected 1..{nu}")
        if not isinstance(m, list) or len(m) != nu or any(not isinstance(x, int) or x < 0 for x in m):
            raise SpecError(f"{where}.exponent: expected {nu} non-negative integers")
        if sum(m) < 2:
            raise SpecError(f"{where}.exponent: total degree must be >= 2")
        terms.append((i - 1, tuple(m), _scalar(c, mode, f"{where}.coeff")))
    a = SeriesTuple.from_terms(nu, K, terms)
    try:
        spectrum = Spectrum(kind, tuple(values))
    except ValueError as e:
        raise SpecError(f"field 'spectrum': {e}") from None
    return ProblemSpec(kind, spectrum, a, K), mode


def load_problem(path: str) -> tuple[ProblemSpec, str, dict]:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as e:
        raise SpecError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    except OSError as e:
        raise SpecError(f"{path}: {e.strerror}") from None
    spec, mode = parse_problem(obj)
    return spec, mode, obj


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        return x
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, (complex, scalars.GaussianRational)):
        return scalars.encode(x)
    return x


def _dump(obj, path: str | None):
    text = json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------


def cmd_linearize(args) -> int:
    spec, mode, _ = load_problem(args.spec)
    out = {"kind": spec.kind, "dimension": spec.dimension, "truncation": spec.cap, "mode": mode, "results": {}}
    results = {}
    if args.method in ("tree", "both"):
        results["tree"] = linearize_tree(spec)
    if args.method in ("recursive", "both"):
        results["recursive"] = linearize_recursive(spec)
    for name, r in results.items():
        out["results"][name] = r.to_json()
    if args.method == "both":
        out["discrepancy"] = relative_discrepancy(results["tree"].h, results["recursive"].h)
    _dump(out, args.out)
    return EXIT_OK


def cmd_bruno(args) -> int:
    spec, _, _ = load_problem(args.spec)
    diag = diagnostics(spec.spectrum, args.kmax)
    if args.b is not None or args.M is not None:
        b = 1.0 if args.b is None else args.b
        M = sup_bound(spec.a, b) if args.M is None else args.M
        diag.radius = {
            "b": b,
            "M": M,
            "M_source": "supplied" if args.M is not None else "coefficient-sum bound",
            "kmax": args.kmax,
            "radius_lower_bound": radius_lower_bound(b, M, spec.dimension, diag.B),
        }
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            csv.writer(fh).writerows(diag.csv_rows())
    _dump(diag.to_json(), args.out)
    return EXIT_OK


# -- verify -------------------------------------------------------------------

CHECKS = (
    "closed-vs-recursive",
    "coseparativity",
    "product-rule",
    "vanishing-hierarchy",
    "cut-vanish",
    "counting",
    "armould-bounds",
    "majorant",
    "oracle",
    "residual",
)


def _sweep_alphabet(spec: ProblemSpec):
    return spec.a.support()


def _test_series(nu, cap):
    # all monomials of degree <= 2 with small distinct rational coefficients
    terms = {m: Fraction(k + 1, k + 2) for k, m in enumerate(monomials(nu, 2))}
    return TruncatedSeries(nu, cap, terms)


def _run_check(name: str, obj: dict, weight: int, h_json) -> tuple[str, bool, str]:
    spec, _ = parse_problem(obj)
    nu = spec.dimension
    alphabet = _sweep_alphabet(spec)
    forests = list(enumerate_forests(alphabet, weight, dimension=nu)) if alphabet else []
    nv = [F for F in forests if F.nv_candidate and not is_universally_vanishing(F)]
    if name == "closed-vs-recursive":
        bad = [F for F in forests if D_closed(F, spec.a) != D_recursive(F, spec.a)]
        if not spec.a.is_exact:
            bad = [F for F in bad if not _ops_close(D_closed(F, spec.a), D_recursive(F, spec.a))]
        return name, not bad, f"{len(forests)} forests, {len(bad)} mismatches"
    if name == "coseparativity":
        phi = _test_series(nu, spec.cap)
        psi = phi.scale(Fraction(-1, 3))
        bad = [F for F in forests if not verify_coseparativity(F, spec.a, phi, psi)]
        return name, not bad, f"{len(forests)} forests, {len(bad)} failures"
    if name == "product-rule":
        small = [F for F in forests if F and F.abs_weight <= max(weight - 1, 1)]
        table = cut_table(forests)
        checked = bad = 0
        for F1, F2 in itertools.product(small, repeat=2):
            if F1.abs_weight + F2.abs_weight > weight:
                continue
            checked += 1
            if not verify_product_rule(F1, F2, spec.a, degree=2, ks=table.get((F1, F2), {})):
                bad += 1
        return name, not bad, f"{checked} pairs, {bad} failures"
    if name == "vanishing-hierarchy":
        bad = [F for F in forests if not is_universally_vanishing(F) and not F.fplus]
        return name, not bad, f"{len(forests)} forests, {len(bad)} violations"
    if name == "cut-vanish":
        bad = 0
        for F in nv:
            for c in admissible_cuts(F):
                if is_universally_vanishing(c.pruned) or is_universally_vanishing(c.remainder):
                    bad += 1
                elif c.remainder.abs_weight < len(c) - F.degree:
                    bad += 1
        return name, not bad, f"{len(nv)} NV forests, {bad} violations"
    if name == "counting":
        om = omega_sequence(spec.spectrum, 10)
        bad = [F for F in nv if not counting_check(F, spec.spectrum, 10, om)]
        return name, not bad, f"{len(nv)} NV forests, k<=10, {len(bad)} violations"
    if name == "armould-bounds":
        om = omega_sequence(spec.spectrum, max(weight, 1))
        bad = [F for F in nv if not armould_bound_check(F, spec.spectrum, om)]
        return name, not bad, f"{len(nv)} NV forests, {len(bad)} violations"
    if name == "majorant":
        h = linearize_tree(spec).h if h_json is None else SeriesTuple.from_json(h_json)
        B = diagnostics(spec.spectrum, 200, with_alpha=False).B
        w = majorant_bound(spec, B)
        ok = all(majorizes(w[i], h[i].with_cap(spec.cap)) for i in range(nu))
        return name, ok, f"B={B:.6g}"
    if name == "oracle":
        d = relative_discrepancy(linearize_tree(spec).h, linearize_recursive(spec).h)
        ok = d == 0 if spec.is_exact else d <= 1e-9
        return name, ok, f"discrepancy={d}"
    if name == "residual":
        h = linearize_tree(spec).h if h_json is None else SeriesTuple.from_json(h_json)
        r = conjugacy_residual(spec, h)
        scale = 1 + max(c.max_abs() for c in h)
        ok = r == 0 if (spec.is_exact and h.is_exact) else r <= 1e-9 * scale
        return name, ok, f"residual={r}"
    raise SpecError(f"unknown check {name!r}")


def _ops_close(x, y, rtol=1e-10):
    keys = set(x.terms) | set(y.terms)
    for p in keys:
        u, v = complex(x.terms.get(p, 0)), complex(y.terms.get(p, 0))
        if abs(u - v) > rtol * (1 + max(abs(u), abs(v))):
            return False
    return True


def _threads() -> int:
    raw = os.environ.get("ARMLIN_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise SpecError("ARMLIN_THREADS must be a positive integer") from None


def _load_h(path: str):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise SpecError(f"{path}: {e}") from None
    # accept a bare series tuple or the linearize output
    if isinstance(obj, dict):
        res = obj.get("results", {})
        for key in ("tree", "recursive"):
            if key in res:
                return res[key]["h"]
        if "h" in obj:
            return obj["h"]
        raise SpecError(f"{path}: no 'h' found")
    return obj


def cmd_verify(args) -> int:
    _, _, obj = load_problem(args.spec)
    if args.checks == "all":
        names = list(CHECKS)
    else:
        names = [c.strip() for c in args.checks.split(",") if c.strip()]
        unknown = [c for c in names if c not in CHECKS]
        if unknown:
            raise SpecError(f"unknown checks {unknown}; available: {', '.join(CHECKS)}")
    h_json = _load_h(args.result) if args.result else None
    jobs = [(n, obj, args.weight, h_json) for n in names]
    workers = _threads()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            rows = list(pool.map(_run_check, *zip(*jobs)))
    else:
        rows = [_run_check(*j) for j in jobs]
    width = max(len(r[0]) for r in rows)
    for name, ok, detail in rows:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    return EXIT_OK if all(r[1] for r in rows) else EXIT_CHECK


# -- forests ------------------------------------------------------------------

_GROUP = re.compile(r"[\(\[]([^\)\]]*)[\)\]]")


def parse_decorations(text: str, dim: int) -> list[tuple]:
    if os.path.isfile(text):
        with open(text) as fh:
            text = fh.read()
    groups = _GROUP.findall(text)
    if not groups:
        if dim != 1:
            raise SpecError("decorations: expected tuples like (1,0);(2,-1)")
        groups = [g for g in re.split(r"[\s,;]+", text.strip()) if g]
    out = []
    for g in groups:
        try:
            n = tuple(int(x) for x in g.split(",") if x.strip())
        except ValueError:
            raise SpecError(f"decorations: cannot parse {g!r}") from None
        if len(n) != dim:
            raise SpecError(f"decorations: {n} does not have dimension {dim}")
        out.append(n)
    return out


def cmd_forests(args) -> int:
    decs = parse_decorations(args.decorations, args.dim)
    try:
        stream = enumerate_forests(decs, args.weight, filter=args.filter, dimension=args.dim)
        if args.count_only:
            print(sum(1 for _ in stream))
        else:
            for F in stream:
                print(to_text(F))
    except ValueError as e:
        raise SpecError(str(e)) from None
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="armlin", description="Tree-expansion linearization of germs.")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("linearize", help="compute the linearizing map h")
    q.add_argument("spec")
    q.add_argument("--method", choices=("tree", "recursive", "both"), default="both")
    q.add_argument("--out", default=None, help="output JSON path (default stdout)")
    q.set_defaults(func=cmd_linearize)

    q = sub.add_parser("bruno", help="small-divisor diagnostics and radius bound")
    q.add_argument("spec")
    q.add_argument("--kmax", type=int, default=100)
    q.add_argument("--csv", default=None)
    q.add_argument("--b", type=float, default=None, help="polydisc radius of the nonlinear part")
    q.add_argument("--M", type=float, default=None, help="sup of |a|/b on the closed polydisc")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_bruno)

    q = sub.add_parser("verify", help="run invariant checks")
    q.add_argument("spec")
    q.add_argument("--checks", default="all", help=f"comma list from: {', '.join(CHECKS)}; or 'all'")
    q.add_argument("--weight", type=int, default=4, help="forest weight cap of the sweeps")
    q.add_argument("--result", default=None, help="h to check instead of recomputing it")
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("forests", help="enumerate decorated forests")
    q.add_argument("--dim", type=int, required=True)
    q.add_argument("--decorations", required=True, help="inline like '(1,0);(2,-1)' or a file")
    q.add_argument("--weight", type=int, required=True)
    q.add_argument("--filter", choices=FILTERS, default="all")
    q.add_argument("--count-only", action="store_true")
    q.set_defaults(func=cmd_forests)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecError as e:
        print(f"armlin: input error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ResonanceError as e:
        print(f"armlin: resonance: {e}", file=sys.stderr)
        return EXIT_RESONANCE


if __name__ == "__main__":
    sys.exit(main())
