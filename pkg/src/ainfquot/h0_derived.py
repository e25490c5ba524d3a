"""Zeroth-cohomology categories and the derived-category comparison.

``h0_category`` collapses any of the package's categories (base or
string quotient) to an ordinary category whose homs are degree-zero
cycles modulo boundaries.  ``resolution_functor_pipeline`` runs the
whole resolution story for complexes over a quiver algebra, and
``derived_compare`` scans the length cutoff and compares quotient hom
dimensions against an independent resolution oracle.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field as dc_field

from .ainf_core import (
    AInfFunctor,
    Transformation,
    check_functor,
    compose_functors,
    functors_equal_on,
    identity_functor,
)
from .complexes_dg import (
    ComplexDGCategory,
    build_dg_category,
    cone_maps,
    complex_is_injective,
    injective_resolution,
    invert_qis_in_quotient,
    is_acyclic,
)
from .exact_linalg import Matrix, kernel_basis, rank, solve_linear, sparse_rank
from .graded_quiver import fs_add_into
from .quotient import build_quotient, d_functor, d_transformation
from .solvers import extend_functor


# ---------------------------------------------------------------------------
# H0 of a category
# ---------------------------------------------------------------------------


class _PairH0:
    """Degree-zero cohomology of one hom complex, with fixed representatives."""

    def __init__(self, cat, x, y):
        self.field = cat.field
        self.cat = cat
        self.x, self.y = x, y
        field = cat.field
        self.basis0 = list(cat.hom_basis(x, y, -1))
        basis_m = list(cat.hom_basis(x, y, -2))
        basis_p = list(cat.hom_basis(x, y, 0))
        n0 = len(self.basis0)
        self._index = {a: i for i, a in enumerate(self.basis0)}
        if n0 == 0:
            self.reps = []
            self._boundaries = []
            return
        # cycles: kernel of the differential out of degree zero
        if basis_p:
            out_index = {a: j for j, a in enumerate(basis_p)}
            rows = []
            for a in self.basis0:
                row = [field.zero] * len(basis_p)
                for o, c in cat.b((a,)).items():
                    row[out_index[o]] = c
                rows.append(row)
            cycles = kernel_basis(
                field, Matrix.from_rows(field, rows).transpose()
            )
        else:
            cycles = [
                [field.one if j == i else field.zero for j in range(n0)]
                for i in range(n0)
            ]
        # boundaries: image of the differential into degree zero
        boundaries = []
        for a in basis_m:
            row = [field.zero] * n0
            for o, c in cat.b((a,)).items():
                row[self._index[o]] = c
            if any(not field.is_zero(c) for c in row):
                boundaries.append(row)
        self._boundaries = boundaries
        # representatives: cycles independent modulo boundaries, greedily
        span = [list(r) for r in boundaries]
        base_rank = rank(field, Matrix.from_rows(field, span)) if span else 0
        reps = []
        for v in cycles:
            trial = span + [list(v)]
            r = rank(field, Matrix.from_rows(field, trial))
            if r > base_rank:
                span = trial
                base_rank = r
                reps.append(list(v))
        self.reps = reps

    @property
    def dim(self):
        return len(self.reps)

    def rep_sum(self, i):
        field = self.field
        return {
            a: c
            for a, c in zip(self.basis0, self.reps[i])
            if not field.is_zero(c)
        }

    def reduce(self, fsum):
        """Class coordinates of a degree-zero cycle; None if not a cycle
        representable as representative + boundary."""
        field = self.field
        vec = [field.zero] * len(self.basis0)
        for a, c in fsum.items():
            if a not in self._index:
                return None
            vec[self._index[a]] = c
        span = [list(r) for r in self.reps] + [list(b) for b in self._boundaries]
        if not span:
            return [] if all(field.is_zero(c) for c in vec) else None
        sol = solve_linear(field, Matrix.from_rows(field, span).transpose(), vec)
        if sol is None:
            return None
        return sol[: len(self.reps)]


class OrdinaryCategory:
    """Ordinary category extracted as H0 of hom complexes."""

    def __init__(self, cat, objects=None):
        self.cat = cat
        self.field = cat.field
        self.objects = tuple(objects) if objects is not None else tuple(cat.objects())
        self.pairs = {
            (x, y): _PairH0(cat, x, y)
            for x in self.objects
            for y in self.objects
        }

    def dim(self, x, y):
        return self.pairs[(x, y)].dim

    def hom_dims(self):
        return {(x, y): p.dim for (x, y), p in self.pairs.items()}

    def compose(self, x, y, z, i, j):
        """Coordinates of the composite of class i in (x,y) and class j
        in (y,z)."""
        field = self.field
        a_sum = self.pairs[(x, y)].rep_sum(i)
        b_sum = self.pairs[(y, z)].rep_sum(j)
        acc = {}
        for a, ca in a_sum.items():
            for b, cb in b_sum.items():
                for out, c in self.cat.b((a, b)).items():
                    fs_add_into(field, acc, out, field.mul(field.mul(ca, cb), c))
        return self.pairs[(x, z)].reduce(acc)

    def identity(self, x):
        return self.pairs[(x, x)].reduce(self.cat.unit0(x))

    def check_axioms(self, max_dim=None):
        """Associativity, identity laws, and well-definedness failures."""
        field = self.field
        failures = []
        for x in self.objects:
            if self.identity(x) is None:
                failures.append(("identity-class", x))
        for (x, y), p in self.pairs.items():
            idx = self.identity(x)
            idy = self.identity(y)
            for i in range(p.dim):
                unitvec = [
                    field.one if k == i else field.zero for k in range(p.dim)
                ]
                left = self._compose_class(x, x, y, idx, unitvec)
                right = self._compose_class(x, y, y, unitvec, idy)
                if left != unitvec or right != unitvec:
                    failures.append(("unit-law", x, y, i))
        for x in self.objects:
            for y in self.objects:
                for z in self.objects:
                    for w in self.objects:
                        pxy, pyz, pzw = (
                            self.pairs[(x, y)],
                            self.pairs[(y, z)],
                            self.pairs[(z, w)],
                        )
                        for i in range(pxy.dim):
                            for j in range(pyz.dim):
                                ij = self.compose(x, y, z, i, j)
                                for k in range(pzw.dim):
                                    jk = self.compose(y, z, w, j, k)
                                    lhs = self._compose_class(
                                        x,
                                        z,
                                        w,
                                        ij,
                                        [
                                            field.one if m == k else field.zero
                                            for m in range(pzw.dim)
                                        ],
                                    )
                                    rhs = self._compose_class(
                                        x,
                                        y,
                                        w,
                                        [
                                            field.one if m == i else field.zero
                                            for m in range(pxy.dim)
                                        ],
                                        jk,
                                    )
                                    if lhs != rhs:
                                        failures.append(
                                            ("associativity", x, y, z, w, i, j, k)
                                        )
        return failures

    def _compose_class(self, x, y, z, coeffs_xy, coeffs_yz):
        field = self.field
        pxz = self.pairs[(x, z)]
        acc = [field.zero] * pxz.dim
        for i, ci in enumerate(coeffs_xy or []):
            if field.is_zero(ci):
                continue
            for j, cj in enumerate(coeffs_yz or []):
                if field.is_zero(cj):
                    continue
                comp = self.compose(x, y, z, i, j)
                if comp is None:
                    return None
                for k, ck in enumerate(comp):
                    acc[k] = field.add(acc[k], field.mul(field.mul(ci, cj), ck))
        return acc


def h0_category(cat, objects=None) -> OrdinaryCategory:
    return OrdinaryCategory(cat, objects=objects)


def h0_dim(cat, x, y):
    """Dimension-only fast path: two sparse ranks, no representatives."""
    field = cat.field
    basis0 = list(cat.hom_basis(x, y, -1))
    if not basis0:
        return 0
    basis_p = cat.hom_basis(x, y, 0)
    basis_m = cat.hom_basis(x, y, -2)
    # bypass the per-word memo of string categories: each row is used
    # exactly once, and caching them dominates memory on large scans
    d1 = getattr(cat, "bar_differential", None) or (lambda a: cat.b((a,)))
    rk_out = 0
    if basis_p:
        rk_out = sparse_rank(field, [d1(a) for a in basis0])
    rk_in = 0
    if basis_m:
        rk_in = sparse_rank(field, [d1(a) for a in basis_m])
    return len(basis0) - rk_out - rk_in


# ---------------------------------------------------------------------------
# the resolution pipeline for complexes over a quiver algebra
# ---------------------------------------------------------------------------


@dataclass
class PipelineSetup:
    """Everything the comparison needs about one family of complexes."""

    dg: ComplexDGCategory
    originals: tuple
    resolution_of: dict  # original -> resolution name
    qis_data: dict  # original -> QuasiIsoData (None for injectives)
    acyclic_objects: frozenset
    injective_objects: frozenset


def prepare_complexes(field, alg, complexes, extra_acyclic=()):
    """Close the object set under resolutions and cones.

    Returns a PipelineSetup whose dg category contains the listed
    complexes, an injective resolution for each non-injective one, and
    the cone of each resolution map (which is acyclic by construction).
    """
    dg = build_dg_category(field, alg, list(complexes))
    originals = tuple(x.name for x in complexes)
    resolution_of = {}
    qis_data = {}
    for x in complexes:
        res, qmap, already = injective_resolution(field, alg, x)
        if already:
            resolution_of[x.name] = x.name
            qis_data[x.name] = None
            continue
        if res.name not in dg.complexes:
            dg.add_object(res)
        resolution_of[x.name] = res.name
        data = cone_maps(field, alg, qmap, x, res)
        if data.cone.name not in dg.complexes:
            dg.add_object(data.cone)
        qis_data[x.name] = data
    # every remaining object (cones, resolutions) still needs a target:
    # injectives map to themselves, acyclic ones to the zero complex
    zero_name = None
    for name in list(dg.complexes):
        if name in resolution_of:
            continue
        x = dg.complexes[name]
        if complex_is_injective(field, alg, x):
            resolution_of[name] = name
            qis_data[name] = None
        elif is_acyclic(field, alg, x):
            if zero_name is None:
                zero_name = "Zero"
                from .complexes_dg import ComplexObject

                if zero_name not in dg.complexes:
                    dg.add_object(ComplexObject(zero_name, {}, {}))
            resolution_of[name] = zero_name
            qis_data[name] = None
        else:
            raise ValueError(
                f"object {name} is neither injective nor acyclic; "
                "closure under resolutions failed"
            )
    if zero_name is not None:
        resolution_of[zero_name] = zero_name
        qis_data[zero_name] = None
    acyclic = frozenset(
        name
        for name, x in dg.complexes.items()
        if is_acyclic(field, alg, x)
    )
    injective = frozenset(
        name
        for name, x in dg.complexes.items()
        if complex_is_injective(field, alg, x)
    )
    return PipelineSetup(dg, originals, resolution_of, qis_data, acyclic, injective)


def resolution_functor_pipeline(field, alg, complexes, L=4, N=3):
    """Resolution functor, its string transport, and all certificates.

    Builds: the extension (i, r) of the resolution object map along the
    identity functor; the string quotient of the whole category over its
    acyclic objects and of the injective part over the acyclic
    injectives; the transported functor and its strict partner; and the
    per-object inverse certificates of the resolution maps inside the
    quotient.
    """
    setup = prepare_complexes(field, alg, complexes)
    dg = setup.dg
    idf = identity_functor(dg)
    g_ob = {x: setup.resolution_of.get(x, x) for x in dg.objects()}
    r0 = {}
    for x in dg.objects():
        data = setup.qis_data.get(x)
        if data is not None:
            r0[x] = dg.chain_map_element(data.q)
        elif g_ob[x] == x:
            r0[x] = dg.unit0(x)
        else:
            # acyclic object resolved by the zero complex
            r0[x] = {}
    prefer = frozenset(x for x in dg.objects() if g_ob[x] == x)
    i_fun, r, _ = extend_functor(dg, dg, idf, g_ob, r0, N, prefer_identity_on=prefer)

    quot_c = build_quotient(dg, setup.acyclic_objects, max_len=L)
    inj_cat = build_dg_category(
        field, alg, [dg.complexes[x] for x in sorted(setup.injective_objects)]
    )
    quot_i = build_quotient(
        inj_cat,
        setup.acyclic_objects & setup.injective_objects,
        max_len=L,
    )
    i_bar = d_functor(i_fun, quot_c, quot_i)
    incl = AInfFunctor(
        inj_cat,
        dg,
        {x: x for x in inj_cat.objects()},
        {1: lambda seg, obj: {seg[0]: field.one}},
        name="e",
    )
    e_bar = d_functor(incl, quot_i, quot_c)
    id_c_bar = identity_functor(quot_c)
    r_bar = d_transformation(r, id_c_bar, d_functor(i_fun, quot_c, quot_c))
    certificates = {}
    for x, data in setup.qis_data.items():
        if data is None:
            continue
        certificates[x] = invert_qis_in_quotient(quot_c, dg, data)
    return {
        "setup": setup,
        "i": i_fun,
        "r": r,
        "quot": quot_c,
        "quot_inj": quot_i,
        "i_bar": i_bar,
        "e_bar": e_bar,
        "r_bar": r_bar,
        "certificates": certificates,
    }


def pipeline_checks(pipe, max_arity=2, max_words=60):
    """Verification suite over a pipeline result; returns failure lists."""
    out = {}
    out["i_functor"] = check_functor(pipe["i"], max_arity, max_words=max_words)
    out["i_bar_functor"] = check_functor(
        pipe["i_bar"], max_arity, max_words=max_words
    )
    out["e_bar_functor"] = check_functor(
        pipe["e_bar"], max_arity, max_words=max_words
    )
    roundtrip = compose_functors(pipe["e_bar"], pipe["i_bar"])
    out["e_then_i_identity"] = functors_equal_on(
        roundtrip,
        identity_functor(pipe["quot_inj"]),
        max_arity,
    )
    out["certificates"] = {
        x: {k: dict(v) for k, v in cert["residuals"].items() if v}
        for x, cert in pipe["certificates"].items()
    }
    out["ok"] = (
        not out["i_functor"]
        and not out["i_bar_functor"]
        and not out["e_bar_functor"]
        and not out["e_then_i_identity"]
        and all(not v for v in out["certificates"].values())
    )
    return out


# ---------------------------------------------------------------------------
# the comparison scan
# ---------------------------------------------------------------------------


@dataclass
class ComparisonReport:
    objects: tuple
    cutoffs: tuple
    dims: dict  # (x, y) -> {L: dim}
    oracle: dict  # (x, y) -> dim
    stable: dict  # (x, y) -> bool
    matches: dict  # (x, y) -> bool
    meta: dict = dc_field(default_factory=dict)

    @property
    def ok(self):
        return all(self.stable.values()) and all(self.matches.values())


def derived_compare(field, alg, complexes, cutoffs=(2, 3, 4, 5, 6), meta=None):
    """Quotient hom dimensions against the injective-resolution oracle.

    The oracle for a pair (X, Y) is the dimension of degree-zero chain
    maps X -> (resolution of Y) modulo homotopy, computed directly in
    the base dg category.  Quotient dimensions are computed at every
    cutoff; stability means the two largest cutoffs agree.
    """
    setup = prepare_complexes(field, alg, complexes)
    dg = setup.dg
    originals = setup.originals
    oracle = {}
    for x in originals:
        for y in originals:
            oracle[(x, y)] = h0_dim(dg, x, setup.resolution_of[y])
    dims = {(x, y): {} for x in originals for y in originals}
    for L in cutoffs:
        quot = build_quotient(dg, setup.acyclic_objects, max_len=L)
        for x in originals:
            for y in originals:
                dims[(x, y)][L] = h0_dim(quot, x, y)
                # string bases grow fast with the cutoff; drop each
                # pair's basis once its dimension is recorded
                quot.drop_cached_strings(x, y)
    stable = {}
    matches = {}
    ordered = sorted(cutoffs)
    for key, table in dims.items():
        stable[key] = table[ordered[-1]] == table[ordered[-2]]
        matches[key] = table[ordered[-1]] == oracle[key]
    return ComparisonReport(
        originals,
        tuple(ordered),
        dims,
        oracle,
        stable,
        matches,
        meta=dict(meta or {}),
    )


def h0_functor_matrix(h0_src: OrdinaryCategory, h0_tgt: OrdinaryCategory, fun, x, y):
    """Matrix of the induced map on H0 hom spaces for one object pair."""
    field = h0_src.field
    src_pair = h0_src.pairs[(x, y)]
    tgt_pair = h0_tgt.pairs[(fun.on_object(x), fun.on_object(y))]
    rows = []
    for i in range(src_pair.dim):
        acc = {}
        for a, c in src_pair.rep_sum(i).items():
            for out, c2 in fun.word_image((a,)).items():
                if len(out) != 1:
                    raise ValueError("induced H0 map needs arity-one images")
                fs_add_into(field, acc, out[0], field.mul(c, c2))
        coords = tgt_pair.reduce(acc)
        if coords is None:
            return None
        rows.append(coords if coords else [field.zero] * tgt_pair.dim)
    return rows


def full_and_faithful(h0_src, h0_tgt, fun):
    """Per-pair bijectivity of the induced H0 maps; returns failures."""
    field = h0_src.field
    failures = []
    for x in h0_src.objects:
        for y in h0_src.objects:
            mat = h0_functor_matrix(h0_src, h0_tgt, fun, x, y)
            src_dim = h0_src.dim(x, y)
            tgt_dim = h0_tgt.dim(fun.on_object(x), fun.on_object(y))
            if mat is None:
                failures.append((x, y, "not a cycle-level map"))
                continue
            rk = (
                rank(field, Matrix.from_rows(field, mat))
                if mat and tgt_dim
                else 0
            )
            if rk != src_dim or src_dim != tgt_dim:
                failures.append((x, y, src_dim, tgt_dim, rk))
    return failures


# ---------------------------------------------------------------------------
# report writers
# ---------------------------------------------------------------------------


def report_rows(report: ComparisonReport):
    header = ["source", "target"] + [f"L={L}" for L in report.cutoffs] + [
        "oracle",
        "stable",
        "match",
    ]
    rows = [header]
    for x in report.objects:
        for y in report.objects:
            key = (x, y)
            rows.append(
                [x, y]
                + [str(report.dims[key][L]) for L in report.cutoffs]
                + [
                    str(report.oracle[key]),
                    "yes" if report.stable[key] else "no",
                    "yes" if report.matches[key] else "no",
                ]
            )
    return rows


def write_report(report: ComparisonReport, out_dir, stem="derived_compare"):
    """Write the JSON and tab-delimited forms plus a rendered figure.

    Returns the list of file paths written.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    json_path = os.path.join(out_dir, f"{stem}.json")
    payload = {
        "objects": list(report.objects),
        "cutoffs": list(report.cutoffs),
        "dims": {f"{x}|{y}": v for (x, y), v in report.dims.items()},
        "oracle": {f"{x}|{y}": v for (x, y), v in report.oracle.items()},
        "stable": {f"{x}|{y}": v for (x, y), v in report.stable.items()},
        "matches": {f"{x}|{y}": v for (x, y), v in report.matches.items()},
        "ok": report.ok,
        "meta": report.meta,
    }
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    paths.append(json_path)
    tsv_path = os.path.join(out_dir, f"{stem}.tsv")
    with open(tsv_path, "w") as fh:
        for row in report_rows(report):
            fh.write("\t".join(row) + "\n")
    paths.append(tsv_path)
    paths.append(render_figure(report, os.path.join(out_dir, f"{stem}.png")))
    return paths


def render_figure(report: ComparisonReport, path):
    """Render the cutoff scan: one line per pair, oracle as markers."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 5))
    for (x, y), table in sorted(report.dims.items()):
        values = [table[L] for L in report.cutoffs]
        (line,) = ax.plot(report.cutoffs, values, marker="o", label=f"{x}->{y}")
        ax.axhline(
            report.oracle[(x, y)],
            color=line.get_color(),
            linestyle=":",
            linewidth=0.6,
        )
    ax.set_xlabel("length cutoff L")
    ax.set_ylabel("dim H0 of quotient hom")
    ax.set_title("quotient hom dimensions vs. resolution oracle")
    if len(report.dims) <= 16:
        ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
