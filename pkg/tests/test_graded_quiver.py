"""Graded quivers, formal sums, and JSON round-trips."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ainfquot.exact_linalg import GF, QQ
from ainfquot.graded_quiver import (
    BasisMorphism,
    Element,
    GradedQuiver,
    fs_add_into,
    fs_combine,
    fs_equal,
    fs_is_zero,
    fs_scale,
    fs_sub,
    quiver_from_json,
    quiver_to_json,
)

F = GF(7)


class TestFormalSums:
    def test_zero_pruning(self):
        acc = {}
        fs_add_into(F, acc, "a", 3)
        fs_add_into(F, acc, "a", 4)
        assert acc == {}
        assert fs_is_zero(acc)

    def test_combine_and_sub(self):
        a = {"x": F.coerce(2), "y": F.coerce(3)}
        b = {"y": F.coerce(4), "z": F.coerce(1)}
        s = fs_combine(F, a, b)
        assert s == {"x": 2, "y": 0, "z": 1} or s == {"x": 2, "z": 1}
        assert fs_is_zero(fs_sub(F, a, a))
        assert fs_equal(F, fs_sub(F, s, b), a)

    def test_scale(self):
        a = {"x": F.coerce(2)}
        assert fs_scale(F, a, 0) == {}
        assert fs_scale(F, a, 3) == {"x": 6}

    @given(
        st.dictionaries(st.sampled_from("abcd"), st.integers(-10, 10), max_size=4),
        st.dictionaries(st.sampled_from("abcd"), st.integers(-10, 10), max_size=4),
    )
    @settings(max_examples=50, deadline=None)
    def test_combine_commutes(self, a, b):
        a = {k: F.coerce(v) for k, v in a.items()}
        b = {k: F.coerce(v) for k, v in b.items()}
        assert fs_equal(F, fs_combine(F, a, b), fs_combine(F, b, a))


class TestElement:
    def test_add_scale_eq(self):
        e = Element(F, {"a": 2})
        f = Element(F, {"a": 5})
        assert e.add(f).is_zero()
        assert e.scale(0).is_zero()
        assert Element(F, {"a": 2, "b": 0}) == Element(F, {"a": 2})


def sample_quiver():
    morphisms = [
        BasisMorphism("f", "X", "Y", -1),
        BasisMorphism("g", "Y", "X", 0),
        BasisMorphism("h", "X", "Y", -1),
    ]
    return GradedQuiver(["X", "Y"], morphisms, (-2, 2))


class TestGradedQuiver:
    def test_hom_basis_and_dims(self):
        q = sample_quiver()
        assert q.hom_dim("X", "Y", -1) == 2
        assert q.hom_dim("Y", "X", 0) == 1
        assert q.hom_dim("X", "X", 0) == 0
        assert q.degrees_present("X", "Y") == [-1]

    def test_unknown_object_rejected(self):
        with pytest.raises(ValueError):
            GradedQuiver(["X"], [BasisMorphism("f", "X", "Z", 0)], (-1, 1))

    def test_window_enforced(self):
        with pytest.raises(ValueError):
            GradedQuiver(["X"], [BasisMorphism("f", "X", "X", 5)], (-1, 1))

    def test_duplicate_label_rejected(self):
        ms = [BasisMorphism("f", "X", "X", 0), BasisMorphism("f", "X", "X", 0)]
        with pytest.raises(ValueError):
            GradedQuiver(["X"], ms, (-1, 1))

    def test_json_roundtrip(self):
        q = sample_quiver()
        text = quiver_to_json(F, q)
        field2, q2 = quiver_from_json(text)
        assert field2 == F
        assert q2.objects == q.objects
        assert q2.window == q.window
        assert list(q2.all_morphisms()) == list(q.all_morphisms())

    def test_json_roundtrip_qq(self):
        q = sample_quiver()
        field2, _ = quiver_from_json(quiver_to_json(QQ, q))
        assert field2.characteristic == 0
