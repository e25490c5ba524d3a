"""Structure relations, functors, and transformations on small dg categories."""

import itertools

from ainfquot.ainf_core import (
    Transformation,
    add_transformations,
    b1_of_transformation,
    b2_of_transformations,
    b_from_m,
    check_ainf,
    check_functor,
    compose_functors,
    functors_equal_on,
    identity_functor,
    m_from_b,
    transformation_values,
    unit_transformation,
    whisker_left,
    whisker_right,
)
from ainfquot.graded_quiver import fs_combine, fs_is_zero, fs_scale, fs_sub


def all_pairs(cat, max_arity):
    pairs = [((), x) for x in cat.objects()]
    for n in range(1, max_arity + 1):
        pairs.extend((w, None) for w in cat.iter_words(n))
    return pairs


class TestStructureRelations:
    def test_dg_category_satisfies_relations(self, dg_cat):
        assert check_ainf(dg_cat, 3, max_words=400) == []

    def test_differential_squares_to_zero(self, dg_cat):
        F = dg_cat.field
        for w in dg_cat.iter_words(1):
            once = dg_cat.b(w)
            acc = {}
            for a, c in once.items():
                for bb, c2 in dg_cat.b((a,)).items():
                    acc = fs_combine(F, acc, {bb: F.mul(c, c2)})
            assert fs_is_zero(acc), w

    def test_unshifted_composition_associative(self, dg_cat):
        F = dg_cat.field
        m1, m2 = m_from_b(F, dg_cat)
        words = list(dg_cat.iter_words(3))[:60]
        for x, y, z in words:
            left = {}
            for a, c in m2(x, y).items():
                left = fs_combine(F, left, fs_scale(F, m2(a, z), c))
            right = {}
            for a, c in m2(y, z).items():
                right = fs_combine(F, right, fs_scale(F, m2(x, a), c))
            assert fs_is_zero(fs_sub(F, left, right)), (x, y, z)

    def test_b_from_m_round_trip(self, dg_cat):
        F = dg_cat.field
        m1, m2 = m_from_b(F, dg_cat)
        b1, b2 = b_from_m(F, m1, m2)
        for w in itertools.islice(dg_cat.iter_words(2), 40):
            assert fs_is_zero(fs_sub(F, b2(w), dg_cat.b(w)))
        for w in itertools.islice(dg_cat.iter_words(1), 40):
            assert fs_is_zero(fs_sub(F, b1(w), dg_cat.b(w)))


class TestUnits:
    def test_strict_unit_identities(self, dg_cat):
        F = dg_cat.field
        for w in dg_cat.iter_words(1):
            (x,) = w
            # multiply by the unit on both sides via the binary operation
            right_unit = {}
            for u, cu in dg_cat.unit0(x.target).items():
                right_unit = fs_combine(F, right_unit, fs_scale(F, dg_cat.b((x, u)), cu))
            assert right_unit == {x: F.one}, x
            left_unit = {}
            for u, cu in dg_cat.unit0(x.source).items():
                left_unit = fs_combine(F, left_unit, fs_scale(F, dg_cat.b((u, x)), cu))
            # the left insertion carries the sign of the element
            assert left_unit == {x: F.sign_pow(x.sdegree + 1)}, x

    def test_unit_is_closed(self, dg_cat):
        F = dg_cat.field
        for obj in dg_cat.objects():
            acc = {}
            for u, cu in dg_cat.unit0(obj).items():
                acc = fs_combine(F, acc, fs_scale(F, dg_cat.b((u,)), cu))
            assert fs_is_zero(acc), obj


class TestFunctors:
    def test_identity_functor(self, dg_cat):
        f = identity_functor(dg_cat)
        assert check_functor(f, max_arity=3, max_words=200) == []

    def test_composition_with_identity(self, dg_cat):
        f = identity_functor(dg_cat)
        g = compose_functors(f, f)
        assert functors_equal_on(g, f, max_arity=3) == []

    def test_word_image_of_identity(self, dg_cat):
        f = identity_functor(dg_cat)
        for w in itertools.islice(dg_cat.iter_words(2), 20):
            assert f.word_image(w) == {tuple(w): dg_cat.field.one}


class TestTransformations:
    def test_unit_transformation_closed(self, dg_cat):
        iC = unit_transformation(dg_cat)
        vals = transformation_values(b1_of_transformation(iC), all_pairs(dg_cat, 2))
        assert all(not v for v in vals.values())

    def test_unit_absorbs_under_composition(self, dg_cat):
        # (i (x) i)B2 = i for the strict unit of a dg category
        iC = unit_transformation(dg_cat)
        prod = b2_of_transformations(iC, iC)
        diff = add_transformations(prod, iC, 1, -1)
        vals = transformation_values(diff, all_pairs(dg_cat, 2))
        assert all(not v for v in vals.values())

    def test_b1_squares_to_zero(self, dg_cat):
        F = dg_cat.field
        f = identity_functor(dg_cat)

        def comp0(segment, at_obj):
            return dg_cat.unit0(at_obj)

        def comp1(segment, at_obj):
            return dg_cat.b(segment)

        r = Transformation(f, f, -1, {0: comp0, 1: comp1}, name="probe")
        dd = b1_of_transformation(b1_of_transformation(r))
        vals = transformation_values(dd, all_pairs(dg_cat, 2))
        assert all(not v for v in vals.values())

    def test_whiskering_with_identity(self, dg_cat):
        f = identity_functor(dg_cat)
        iC = unit_transformation(dg_cat)
        lw = whisker_left(f, iC)
        rw = whisker_right(iC, f)
        pairs = all_pairs(dg_cat, 2)
        for t in (lw, rw):
            diff = add_transformations(t, iC, 1, -1)
            vals = transformation_values(diff, pairs)
            assert all(not v for v in vals.values())
