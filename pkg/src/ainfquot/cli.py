"""Command-line front door.

Loads JSON descriptions of complexes over a quiver algebra, runs the
requested construction or verification, and writes reports (JSON plus a
tab-delimited table; the comparison command also renders a figure).

Exit codes: 0 pass, 1 usage or parse error, 2 mathematical failure,
3 resource or window limit.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

from .ainf_core import check_ainf, check_functor, compose_functors, functors_equal_on, identity_functor
from .complexes_dg import (
    ComplexObject,
    ModuleObject,
    QuiverAlgebra,
    build_dg_category,
    complex_is_injective,
    is_acyclic,
)
from .exact_linalg import field_from_name
from .h0_derived import (
    derived_compare,
    full_and_faithful,
    h0_category,
    pipeline_checks,
    resolution_functor_pipeline,
    write_report,
)
from .quotient import (
    build_quotient,
    concat_functor,
    concat_inverse_functor,
    overline_structure,
    quotient_b_fourterm,
    underline_structure,
)
from .solvers import (
    contractibility_battery,
    quotient_unitality,
    string_length_enforce,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MATH = 2
EXIT_RESOURCE = 3


# ---------------------------------------------------------------------------
# input parsing
# ---------------------------------------------------------------------------


def load_setup(path, field):
    """Parse an algebra/complexes description file.

    Schema: {"algebra": {"vertices": [...], "arrows": [[s, t], ...]},
    "complexes": [{"name": ..., "modules": {"<degree>": {"dims":
    {vertex: n}, "arrows": {"s->t": [[...]]}}}, "diff": {"<degree>":
    {vertex: [[...]]}}}]}
    """
    with open(path) as fh:
        raw = json.load(fh)
    alg_raw = raw["algebra"]
    alg = QuiverAlgebra(
        tuple(alg_raw["vertices"]),
        [tuple(a) for a in alg_raw.get("arrows", [])],
    )
    complexes = []
    for centry in raw["complexes"]:
        modules = {}
        for dstr, mentry in centry.get("modules", {}).items():
            dims = {v: int(n) for v, n in mentry["dims"].items()}
            maps = {}
            for akey, mat in mentry.get("arrows", {}).items():
                s, t = akey.split("->")
                maps[(s, t)] = [[field.coerce(c) for c in row] for row in mat]
            modules[int(dstr)] = ModuleObject(dims, maps)
        diff = {}
        for dstr, by_vertex in centry.get("diff", {}).items():
            diff[int(dstr)] = {
                v: [[field.coerce(c) for c in row] for row in mat]
                for v, mat in by_vertex.items()
            }
        complexes.append(ComplexObject(centry["name"], modules, diff))
    return alg, complexes, raw


def random_point_category(field, rng, n_objects=3, max_dim=3, window=(-3, 3)):
    """Randomized strictly unital dg category of complexes over a point.

    Each object is a sum of degree stalks and contractible identity
    pairs, conjugated by random invertible changes of basis, so the
    differential squares to zero exactly.  The last object is built from
    identity pairs only, hence acyclic.
    """
    alg = QuiverAlgebra(("*",), [])
    lo, hi = window
    # keep supports inside [lo//2 + 1, hi//2] so every genuine hom degree
    # (and shifted degree, off by one) is representable in the window
    s_lo = lo // 2 + 1
    s_hi = hi // 2
    complexes = []
    for k in range(n_objects):
        dims = {}
        pairs = []
        acyclic_only = k == n_objects - 1
        for d in range(s_lo, s_hi + 1):
            if not acyclic_only and rng.random() < 0.5:
                dims[d] = dims.get(d, 0) + rng.randrange(1, 2)
            if d + 1 <= s_hi and rng.random() < 0.5:
                pairs.append(d)
        if acyclic_only and not pairs:
            pairs.append(0)
        degs = dict(dims)
        # each identity pair gets its own fresh slot at both degrees so
        # consecutive pairs never share an index (d squares to zero)
        slots = []
        for d in sorted(pairs):
            si = degs.get(d, 0)
            degs[d] = si + 1
            ti = degs.get(d + 1, 0)
            degs[d + 1] = ti + 1
            slots.append((d, si, ti))
        degs = {d: n for d, n in degs.items() if n}
        modules = {d: ModuleObject({"*": n}, {}) for d, n in degs.items()}
        diff = {}
        for d, si, ti in slots:
            mat = diff.setdefault(
                d,
                {
                    "*": [
                        [field.zero] * degs[d + 1] for _ in range(degs[d])
                    ]
                },
            )
            mat["*"][si][ti] = field.one
        # conjugate each degree by a random invertible matrix
        basis = {}
        for d, n in degs.items():
            basis[d] = _random_invertible(field, rng, n)
        conj_diff = {}
        for d, by_v in diff.items():
            a = basis[d]
            b_inv = _invert(field, basis[d + 1])
            conj_diff[d] = {"*": _mm(field, _mm(field, a, by_v["*"]), b_inv)}
        complexes.append(ComplexObject(f"X{k}", modules, conj_diff))
    cat = build_dg_category(field, alg, complexes, window=window)
    acyclic = [x.name for x in complexes if is_acyclic(field, alg, x)]
    return cat, acyclic


def _random_invertible(field, rng, n):
    while True:
        m = [
            [field.coerce(rng.randrange(0, 7)) for _ in range(n)]
            for _ in range(n)
        ]
        from .exact_linalg import Matrix, rank

        if rank(field, Matrix.from_rows(field, m)) == n:
            return m


def _invert(field, m):
    from .exact_linalg import Matrix, solve_linear

    n = len(m)
    mat = Matrix.from_rows(field, m)
    cols = []
    for i in range(n):
        e = [field.zero] * n
        e[i] = field.one
        cols.append(solve_linear(field, mat, e))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _mm(field, a, b):
    from .complexes_dg import mat_mul

    return mat_mul(field, a, b)


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


def _write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d)
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _emit(args, name, payload, row_lines):
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    _write_atomic(
        os.path.join(out_dir, f"{name}.json"),
        json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n",
    )
    _write_atomic(
        os.path.join(out_dir, f"{name}.tsv"), "\n".join(row_lines) + "\n"
    )


def _common_meta(args):
    return {
        "field": args.field,
        "seed": args.seed,
        "arity": getattr(args, "arity", None),
        "max_len": getattr(args, "max_len", None),
    }


def _parallel_map(workers, fn, items):
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_check_ainf(args):
    field = field_from_name(args.field)
    if args.input:
        alg, complexes, _ = load_setup(args.input, field)
        cat = build_dg_category(field, alg, complexes)
    else:
        rng = random.Random(args.seed)
        cat, _ = random_point_category(field, rng)
    failures = check_ainf(cat, args.arity, max_words=args.max_words)
    payload = {
        "meta": _common_meta(args),
        "objects": list(cat.objects()),
        "arity_bound": args.arity,
        "failures": [str(f) for f in failures],
        "ok": not failures,
    }
    rows = ["status\tfailures", f"{'ok' if not failures else 'FAIL'}\t{len(failures)}"]
    _emit(args, "check_ainf", payload, rows)
    return EXIT_OK if not failures else EXIT_MATH


def cmd_quotient(args):
    field = field_from_name(args.field)
    alg, complexes, raw = load_setup(args.input, field)
    cat = build_dg_category(field, alg, complexes)
    acyclic = raw.get("acyclic") or [
        x.name for x in complexes if is_acyclic(field, alg, x)
    ]
    quot = build_quotient(cat, frozenset(acyclic), max_len=args.max_len)
    failures = check_ainf(quot, min(args.arity, args.max_len), max_words=args.max_words)
    unit_rep = quotient_unitality(quot)
    payload = {
        "meta": _common_meta(args),
        "acyclic": acyclic,
        "relation_failures": [str(f) for f in failures],
        "unitality_ok": unit_rep["ok"],
        "ok": not failures and unit_rep["ok"],
    }
    rows = [
        "check\tresult",
        f"relations\t{'ok' if not failures else 'FAIL'}",
        f"unitality\t{'ok' if unit_rep['ok'] else 'FAIL'}",
    ]
    _emit(args, "quotient", payload, rows)
    return EXIT_OK if payload["ok"] else EXIT_MATH


def cmd_homotopies(args):
    """Two-formula agreement and concatenation-inverse identity suites."""
    field = field_from_name(args.field)
    alg, complexes, raw = load_setup(args.input, field)
    cat = build_dg_category(field, alg, complexes)
    acyclic = raw.get("acyclic") or [
        x.name for x in complexes if is_acyclic(field, alg, x)
    ]
    quot = build_quotient(cat, frozenset(acyclic), max_len=args.max_len)
    rng = random.Random(args.seed)
    mismatches = 0
    tested = 0
    words = []
    for n in range(2, min(4, args.max_len) + 1):
        words.extend(list(quot.iter_words(n))[:40])
    rng.shuffle(words)
    for blocks in words[: args.max_words or 100]:
        direct = quot.b(blocks)
        oracle = quotient_b_fourterm(quot, blocks)
        tested += 1
        if direct != oracle:
            mismatches += 1
    flat = underline_structure(cat, max_len=args.max_len)
    full = overline_structure(cat, max_len=args.max_len)
    m = concat_functor(flat, full)
    minv = concat_inverse_functor(full, flat)
    round1 = compose_functors(m, minv)
    diffs = functors_equal_on(round1, identity_functor(flat), max_arity=min(3, args.max_len))
    payload = {
        "meta": _common_meta(args),
        "two_formula_tested": tested,
        "two_formula_mismatches": mismatches,
        "concat_roundtrip_failures": [str(d) for d in diffs],
        "ok": mismatches == 0 and not diffs,
    }
    rows = [
        "check\tresult",
        f"two_formula\t{tested - mismatches}/{tested}",
        f"concat_roundtrip\t{'ok' if not diffs else 'FAIL'}",
    ]
    _emit(args, "homotopies", payload, rows)
    return EXIT_OK if payload["ok"] else EXIT_MATH


def cmd_extend(args):
    field = field_from_name(args.field)
    alg, complexes, _ = load_setup(args.input, field)
    try:
        pipe = resolution_functor_pipeline(
            field, alg, complexes, L=args.max_len, N=args.arity
        )
    except NotImplementedError as exc:
        print(f"resolution limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    checks = pipeline_checks(pipe, max_arity=min(2, args.arity), max_words=args.max_words)
    payload = {
        "meta": _common_meta(args),
        "i_functor_failures": [str(f) for f in checks["i_functor"]],
        "i_bar_functor_failures": [str(f) for f in checks["i_bar_functor"]],
        "e_then_i_identity_failures": [str(f) for f in checks["e_then_i_identity"]],
        "certificate_residuals": {
            k: {kk: str(vv) for kk, vv in v.items()}
            for k, v in checks["certificates"].items()
        },
        "ok": checks["ok"],
    }
    rows = ["check\tresult", f"pipeline\t{'ok' if checks['ok'] else 'FAIL'}"]
    _emit(args, "extend", payload, rows)
    return EXIT_OK if checks["ok"] else EXIT_MATH


def cmd_invert(args):
    field = field_from_name(args.field)
    alg, complexes, _ = load_setup(args.input, field)
    try:
        pipe = resolution_functor_pipeline(
            field, alg, complexes, L=args.max_len, N=args.arity
        )
    except NotImplementedError as exc:
        print(f"resolution limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    bad = {
        x: {k: str(dict(v)) for k, v in cert["residuals"].items() if v}
        for x, cert in pipe["certificates"].items()
    }
    ok = all(not v for v in bad.values())
    payload = {"meta": _common_meta(args), "residuals": bad, "ok": ok}
    rows = ["object\tresiduals"] + [
        f"{x}\t{'0' if not v else 'NONZERO'}" for x, v in bad.items()
    ]
    _emit(args, "invert", payload, rows)
    return EXIT_OK if ok else EXIT_MATH


def cmd_contract(args):
    field = field_from_name(args.field)
    alg, complexes, _ = load_setup(args.input, field)
    cat = build_dg_category(field, alg, complexes)
    full = overline_structure(cat, max_len=args.max_len)
    flat = underline_structure(cat, max_len=args.max_len)

    def run(c):
        return contractibility_battery(c, enforce=string_length_enforce(c))

    reports = _parallel_map(args.workers, run, [full, flat])
    ok = all(r.ok for r in reports)
    payload = {
        "meta": _common_meta(args),
        "full_strings_contractible": reports[0].ok,
        "flat_strings_contractible": reports[1].ok,
        "failed_conditions": [
            str(k) for r in reports for k, v in r.conditions.items() if not v
        ],
        "ok": ok,
    }
    rows = [
        "category\tcontractible",
        f"full_strings\t{'yes' if reports[0].ok else 'no'}",
        f"flat_strings\t{'yes' if reports[1].ok else 'no'}",
    ]
    _emit(args, "contract", payload, rows)
    return EXIT_OK if ok else EXIT_MATH


def cmd_derived_compare(args):
    field = field_from_name(args.field)
    alg, complexes, _ = load_setup(args.input, field)
    cutoffs = tuple(range(args.min_len, args.max_len + 1))
    try:
        report = derived_compare(
            field, alg, complexes, cutoffs=cutoffs, meta=_common_meta(args)
        )
    except NotImplementedError as exc:
        print(f"resolution limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    paths = write_report(report, args.out)
    for p in paths:
        print(p)
    return EXIT_OK if report.ok else EXIT_MATH


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def _window(text):
    lo, hi = text.split(":")
    return (int(lo), int(hi))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ainfquot",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--field", default="GF(7)", help="QQ or GF(p)")
    parser.add_argument("--arity", type=int, default=3)
    parser.add_argument("--max-len", dest="max_len", type=int, default=4)
    parser.add_argument("--min-len", dest="min_len", type=int, default=2)
    parser.add_argument("--window", type=_window, default=None, metavar="LO:HI")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--max-words", dest="max_words", type=int, default=200)
    parser.add_argument("--out", default="reports")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, needs_input in (
        ("check-ainf", cmd_check_ainf, False),
        ("quotient", cmd_quotient, True),
        ("homotopies", cmd_homotopies, True),
        ("extend", cmd_extend, True),
        ("invert", cmd_invert, True),
        ("contract", cmd_contract, True),
        ("derived-compare", cmd_derived_compare, True),
    ):
        p = sub.add_parser(name)
        p.add_argument(
            "input",
            nargs=None if needs_input else "?",
            default=None,
            help="JSON description file",
        )
        p.set_defaults(fn=fn)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        if args.input:
            if not os.path.exists(args.input):
                print(f"no such input file: {args.input}", file=sys.stderr)
                return EXIT_USAGE
    except AttributeError:
        pass
    try:
        return args.fn(args)
    except (json.JSONDecodeError, KeyError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"mathematical failure: {exc}", file=sys.stderr)
        return EXIT_MATH
    except MemoryError:
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
