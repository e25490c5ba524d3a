"""Inductive lifting solvers, contractibility battery, and certificates."""

import pytest

from ainfquot.ainf_core import (
    AInfFunctor,
    Transformation,
    add_transformations,
    b1_of_transformation,
    b2_of_transformations,
    check_functor,
    transformation_values,
    unit_transformation,
    whisker_left,
    whisker_right,
)
from ainfquot.complexes_dg import (
    A2,
    ChainMap,
    ModuleObject,
    build_dg_category,
    cone_maps,
    identity_matrix,
    injective_resolution,
    invert_qis_in_quotient,
    stalk_complex,
)
from ainfquot.exact_linalg import GF
from ainfquot.quotient import build_quotient, overline_structure, underline_structure
from ainfquot.solvers import (
    ChainComplexView,
    connecting_transformation,
    contractibility_battery,
    contracting_homotopy,
    extend_functor,
    invert_transformation,
    quotient_of_contractible,
    quotient_unitality,
    string_length_enforce,
    uniqueness_witness,
    unitality_witness,
)


@pytest.fixture(scope="module")
def lift(F7):
    """Inclusion of {S2, I2} into the category extended by a resolution."""
    F = F7
    S2m = ModuleObject({"1": 0, "2": 1}, {})
    I2m = ModuleObject({"1": 1, "2": 1}, {("1", "2"): [[F.one]]})
    S2 = stalk_complex(F, A2, "S2", S2m, 0)
    I2 = stalk_complex(F, A2, "I2", I2m, 0)
    res, qmap, already = injective_resolution(F, A2, S2)
    assert not already
    src = build_dg_category(F, A2, [S2, I2])
    tgt = build_dg_category(F, A2, [S2, I2, res])
    f = AInfFunctor(
        src,
        tgt,
        {"S2": "S2", "I2": "I2"},
        {1: lambda seg, obj: {seg[0]: F.one}},
        name="incl",
    )
    r0 = {"S2": tgt.chain_map_element(qmap), "I2": tgt.unit0("I2")}
    g, r, report = extend_functor(
        src, tgt, f, {"S2": res.name, "I2": "I2"}, r0, N=3,
        prefer_identity_on=frozenset({"I2"}),
    )
    return dict(F=F, S2=S2, I2=I2, res=res, qmap=qmap, src=src, tgt=tgt,
                f=f, g=g, r=r, report=report)


def value_pairs(cat, max_arity):
    pairs = [((), x) for x in cat.objects()]
    for n in range(1, max_arity + 1):
        pairs.extend((w, None) for w in cat.iter_words(n))
    return pairs


def assert_transformation_vanishes(t, pairs):
    vals = transformation_values(t, pairs)
    bad = {k: v for k, v in vals.items() if v}
    assert not bad, f"{len(bad)} nonzero components, e.g. {next(iter(bad.items()))}"


# ---------------------------------------------------------------------------
# chain-complex views and contracting homotopies
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def cone_setup(F7):
    F = F7
    S2m = ModuleObject({"1": 0, "2": 1}, {})
    I2m = ModuleObject({"1": 1, "2": 1}, {("1", "2"): [[F.one]]})
    S2 = stalk_complex(F, A2, "S2", S2m, 0)
    I2 = stalk_complex(F, A2, "I2", I2m, 0)
    idm = ChainMap("I2", "I2", 0, {
        0: {"1": identity_matrix(F, 1), "2": identity_matrix(F, 1)}
    })
    K = cone_maps(F, A2, idm, I2, I2, name="K")
    cat = build_dg_category(F, A2, [S2, I2, K.cone])
    return F, cat, K


class TestContractibility:
    def test_view_dims_match_basis(self, cone_setup):
        _, cat, _ = cone_setup
        view = ChainComplexView(cat, "S2", "K")
        for d in view.degrees:
            assert view.dim(d) == len(cat.hom_basis("S2", "K", d))

    def test_cone_of_identity_has_acyclic_homs(self, cone_setup):
        _, cat, _ = cone_setup
        view = ChainComplexView(cat, "S2", "K")
        assert view.is_acyclic()
        h = contracting_homotopy(view)
        assert h is not None

    def test_non_acyclic_hom_has_no_contraction(self, cone_setup):
        _, cat, _ = cone_setup
        view = ChainComplexView(cat, "S2", "S2")
        assert not view.is_acyclic()
        assert contracting_homotopy(view) is None

    def test_battery_accepts_cone_of_identity(self, cone_setup):
        _, cat, _ = cone_setup
        report = contractibility_battery(cat, objects=("K",))
        assert report.ok, {k: v for k, v in report.conditions.items() if not v}

    def test_battery_rejects_non_contractible_object(self, cone_setup):
        _, cat, _ = cone_setup
        report = contractibility_battery(cat, objects=("S2",))
        assert not report.ok

    def test_battery_on_string_categories(self, dg_cat):
        """Both string structures over a contractible object pass the battery."""
        full = overline_structure(dg_cat, max_len=3)
        flat = underline_structure(dg_cat, max_len=3)
        for cat in (full, flat):
            report = contractibility_battery(cat, enforce=string_length_enforce(cat))
            assert report.ok, {k: v for k, v in report.conditions.items() if not v}


# ---------------------------------------------------------------------------
# functor extension along quasi-isomorphisms
# ---------------------------------------------------------------------------


class TestExtendFunctor:
    def test_extension_is_a_functor(self, lift):
        assert check_functor(lift["g"], max_arity=3) == []

    def test_transformation_is_closed(self, lift):
        pairs = value_pairs(lift["src"], 3)
        assert_transformation_vanishes(b1_of_transformation(lift["r"]), pairs)

    def test_all_stages_solved(self, lift):
        assert lift["report"]["stages"] == [1, 2, 3]

    def test_preferred_identity_on_unchanged_objects(self, lift):
        """Words inside the already-resolved object use g = f, r = unit."""
        src, f, g, r = lift["src"], lift["f"], lift["g"], lift["r"]
        F = lift["F"]
        for n in (1, 2, 3):
            for w in src.iter_words(n):
                objs = {w[0].source} | {a.target for a in w}
                if objs != {"I2"}:
                    continue
                gn = g.component(n)
                fn = f.component(n)
                gv = gn(w, None) if gn else {}
                fv = fn(w, None) if fn else {}
                assert gv == fv
                rn = r.component(n)
                assert not rn or not rn(w, None)


class TestConnectingTransformation:
    def test_structural_identity(self, lift):
        f, g, r = lift["f"], lift["g"], lift["r"]
        p, v, _ = connecting_transformation(f, g, g, r, r, N=2)
        pairs = value_pairs(lift["src"], 2)
        # (r (x) p) b2 - r' = b1(v)
        lhs = add_transformations(b2_of_transformations(r, p), r, 1, -1)
        diff = add_transformations(lhs, b1_of_transformation(v), 1, -1)
        assert_transformation_vanishes(diff, pairs)
        assert_transformation_vanishes(b1_of_transformation(p), pairs)

    def test_uniqueness_witness_for_equal_factorizations(self, lift):
        f, g, r = lift["f"], lift["g"], lift["r"]
        p, v, _ = connecting_transformation(f, g, g, r, r, N=2)
        x, z, _ = uniqueness_witness(f, g, g, r, p, p, v, v, N=2)
        pairs = value_pairs(lift["src"], 2)
        # q = p, so the witness must be closed
        assert_transformation_vanishes(b1_of_transformation(x), pairs)

    def test_unitality_witness(self, lift):
        f, g, r = lift["f"], lift["g"], lift["r"]
        src, tgt = lift["src"], lift["tgt"]
        iB = unit_transformation(src)
        iC = unit_transformation(tgt)
        zero_v = Transformation(f, f, -2, {}, name="v0")
        w, x, _ = unitality_witness(f, g, r, zero_v, iB, iC, N=2)
        pairs = value_pairs(src, 2)
        target = add_transformations(whisker_right(iB, g), whisker_left(g, iC), 1, -1)
        diff = add_transformations(b1_of_transformation(w), target, 1, -1)
        assert_transformation_vanishes(diff, pairs)

    def test_invert_transformation(self, lift):
        """A pointwise-invertible transformation (scaled unit) gets a two-sided
        inverse up to the witnessed homotopies."""
        f = lift["f"]
        F = lift["F"]
        unit = unit_transformation(lift["tgt"])
        funit = whisker_left(f, unit)
        scaled = add_transformations(funit, funit, F.coerce(2), F.zero)
        out = invert_transformation(f, f, scaled, unit, N=2)
        pairs = value_pairs(lift["src"], 2)
        # (scaled (x) p) b2 homotopic to the unit on f, witnessed by v_p
        lhs = add_transformations(
            b2_of_transformations(scaled, out["p"]), funit, 1, -1
        )
        assert_transformation_vanishes(
            add_transformations(lhs, b1_of_transformation(out["v_p"]), 1, -1), pairs
        )
        # (p (x) q) b2 homotopic to the unit on f, witnessed by v_q
        lhs2 = add_transformations(
            b2_of_transformations(out["p"], out["q"]), funit, 1, -1
        )
        assert_transformation_vanishes(
            add_transformations(lhs2, b1_of_transformation(out["v_q"]), 1, -1), pairs
        )


# ---------------------------------------------------------------------------
# quotient-level certificates
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def killed_cone(F7):
    F = F7
    S2m = ModuleObject({"1": 0, "2": 1}, {})
    S2 = stalk_complex(F, A2, "S2", S2m, 0)
    res, qmap, _ = injective_resolution(F, A2, S2)
    data = cone_maps(F, A2, qmap, S2, res, name="C")
    dg = build_dg_category(F, A2, [S2, res, data.cone])
    quot = build_quotient(dg, frozenset({"C"}), max_len=3)
    return dg, quot, data


class TestQuotientCertificates:
    def test_inverse_certificate_residuals_vanish(self, killed_cone):
        dg, quot, data = killed_cone
        cert = invert_qis_in_quotient(quot, dg, data)
        for name, res in cert["residuals"].items():
            assert not res, f"{name}: {dict(res)}"

    def test_quotient_unitality(self, killed_cone):
        _, quot, _ = killed_cone
        report = quotient_unitality(quot)
        assert report["ok"]

    def test_quotient_of_contractible(self, F7):
        F = F7
        S2m = ModuleObject({"1": 0, "2": 1}, {})
        I2m = ModuleObject({"1": 1, "2": 1}, {("1", "2"): [[F.one]]})
        S2 = stalk_complex(F, A2, "S2", S2m, 0)
        I2 = stalk_complex(F, A2, "I2", I2m, 0)
        idm = ChainMap("I2", "I2", 0, {
            0: {"1": identity_matrix(F, 1), "2": identity_matrix(F, 1)}
        })
        K = cone_maps(F, A2, idm, I2, I2, name="K")
        dg = build_dg_category(F, A2, [S2, I2, K.cone])
        out = quotient_of_contractible(dg, ["K"], max_len=3, N_max=3)
        assert out["ok"]
        assert not out["higher_ops_on_marked"]
        assert not out["pi_functor_failures"]
        assert not out["roundtrip_identity_failures"]

    def test_quotient_of_non_contractible_rejected(self, F7):
        F = F7
        S2m = ModuleObject({"1": 0, "2": 1}, {})
        S2 = stalk_complex(F, A2, "S2", S2m, 0)
        dg = build_dg_category(F, A2, [S2])
        with pytest.raises(ValueError):
            quotient_of_contractible(dg, ["S2"], max_len=3, N_max=2)
