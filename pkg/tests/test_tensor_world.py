"""Tensor strings, slot operators, and the sign convention."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ainfquot.exact_linalg import GF
from ainfquot.graded_quiver import BasisMorphism
from ainfquot.tensor_world import (
    BlockedString,
    OperatorSlot,
    TensorString,
    compositions,
    cut_comultiplication,
    eval_homomorphism,
    identity_slots,
    koszul_apply,
    mu,
    sdeg_of,
)

F = GF(7)


def atom(label, src, tgt, sdeg):
    return BasisMorphism(label, src, tgt, sdeg)


def chain(*sdegs):
    """A composable word X0 -> X1 -> ... with prescribed shifted degrees."""
    return tuple(
        atom(f"a{i}", f"X{i}", f"X{i+1}", d) for i, d in enumerate(sdegs)
    )


def relabel_slot(degree, arity=1, marker="*"):
    """Slot that tags consumed atoms, shifting the first one's degree."""

    def fn(segment, at_obj):
        out = []
        for i, a in enumerate(segment):
            d = a.sdegree + (degree if i == 0 else 0)
            out.append(atom(a.label + marker, a.source, a.target, d))
        # collapse to one atom spanning the segment so arities compose
        if len(out) == 1:
            return {tuple(out): F.one}
        merged = atom(
            "".join(a.label for a in out),
            segment[0].source,
            segment[-1].target,
            sum(a.sdegree for a in out) + degree * 0,
        )
        return {(merged,): F.one}

    return OperatorSlot(arity, degree, fn)


class TestTensorString:
    def test_composability_enforced(self):
        a = atom("a", "X", "Y", 0)
        b = atom("b", "Z", "W", 0)
        with pytest.raises(ValueError):
            TensorString((a, b))
        with pytest.raises(ValueError):
            TensorString(())

    def test_source_target_degree(self):
        w = chain(-1, 0, 2)
        s = TensorString(w)
        assert s.source == "X0" and s.target == "X3"
        assert s.sdegree == 1
        assert s.interior_objects == ("X1", "X2")
        assert len(s) == 3

    def test_blocked_string_concat(self):
        w = chain(0, -1, 1)
        b = BlockedString((TensorString(w[:1]), TensorString(w[1:])))
        assert b.lengths == (1, 2)
        assert b.concatenated() == TensorString(w)
        assert mu([TensorString(w[:2]), TensorString(w[2:])]) == TensorString(w)

    def test_cut_comultiplication(self):
        w = chain(0, 0)
        cuts = cut_comultiplication(w)
        assert len(cuts) == 3
        assert cuts[0] == ((), w)
        assert cuts[-1] == (w, ())


class TestCompositions:
    def test_counts(self):
        # compositions of n: 2^(n-1); with k parts: C(n-1, k-1)
        assert len(compositions(4)) == 8
        assert len(compositions(5, 2)) == 4
        assert compositions(3, 1) == [(3,)]
        assert compositions(0) == [()]
        assert compositions(2, 3) == []

    def test_sums(self):
        for comp in compositions(5):
            assert sum(comp) == 5 and all(p >= 1 for p in comp)


class TestKoszulApply:
    def test_identity_slots_are_neutral(self):
        w = chain(-1, 2, 0)
        out = koszul_apply(F, identity_slots(3), w)
        assert out == {w: F.one}

    def test_single_slot_no_sign(self):
        # a lone operator never picks up a sign, whatever its degree
        w = chain(3,)
        out = koszul_apply(F, [relabel_slot(degree=1)], w)
        ((key, coeff),) = out.items()
        assert coeff == F.one

    def test_two_slot_sign_oracle(self):
        # (D ⊗ 1) on u1 ⊗ u2 gives (-1)^(deg D * sdeg u2)
        for d_op, d2 in itertools.product(range(-2, 3), range(-2, 3)):
            w = chain(0, d2)
            out = koszul_apply(F, [relabel_slot(d_op), OperatorSlot.identity()], w)
            ((_, coeff),) = out.items()
            assert coeff == F.sign_pow(d_op * d2), (d_op, d2)
            # (1 ⊗ D) never sees anything to its right: sign +1
            out2 = koszul_apply(F, [OperatorSlot.identity(), relabel_slot(d_op)], w)
            ((_, coeff2),) = out2.items()
            assert coeff2 == F.one

    @given(
        st.integers(-2, 2),
        st.integers(-2, 2),
        st.lists(st.integers(-2, 2), min_size=2, max_size=4),
    )
    @settings(max_examples=60, deadline=None)
    def test_disjoint_slots_commute_with_koszul_sign(self, dF, dG, sdegs):
        # applying F then G equals G then F up to (-1)^(deg F * deg G)
        w = chain(*sdegs)
        n = len(w)
        f_first = {}
        for key, c in koszul_apply(
            F, [relabel_slot(dF, marker="f")] + identity_slots(n - 1), w
        ).items():
            for key2, c2 in koszul_apply(
                F, identity_slots(n - 1) + [relabel_slot(dG, marker="g")], key
            ).items():
                f_first[key2] = F.mul(c, c2)
        g_first = {}
        for key, c in koszul_apply(
            F, identity_slots(n - 1) + [relabel_slot(dG, marker="g")], w
        ).items():
            for key2, c2 in koszul_apply(
                F, [relabel_slot(dF, marker="f")] + identity_slots(n - 1), key
            ).items():
                g_first[key2] = F.mul(c, c2)
        sign = F.sign_pow(dF * dG)
        assert set(f_first) == set(g_first)
        for key in f_first:
            assert f_first[key] == F.mul(sign, g_first[key])

    def test_arity_zero_slot_sees_gap_object(self):
        seen = []

        def fn(segment, at_obj):
            seen.append(at_obj)
            u = atom("u", at_obj, at_obj, -1)
            return {(u,): F.one}

        w = chain(0, 0)
        koszul_apply(F, [OperatorSlot.identity(), OperatorSlot(0, -1, fn), OperatorSlot.identity()], w)
        assert seen == ["X1"]
        seen.clear()
        koszul_apply(F, [OperatorSlot(0, -1, fn)], (), source_obj="Y")
        assert seen == ["Y"]

    def test_arity_mismatch_rejected(self):
        w = chain(0, 0)
        with pytest.raises(ValueError):
            koszul_apply(F, identity_slots(3), w)

    def test_zero_slot_output_kills_term(self):
        dead = OperatorSlot(1, 0, lambda seg, obj: {})
        w = chain(0, 0)
        assert koszul_apply(F, [dead, OperatorSlot.identity()], w) == {}


class TestEvalHomomorphism:
    def test_strict_homomorphism_is_elementwise(self):
        # only an arity-1 component: image of a word relabels each atom
        comps = {1: lambda seg, obj: {atom(seg[0].label + "'", seg[0].source, seg[0].target, seg[0].sdegree): F.one}}
        w = chain(0, -1, 1)
        out = eval_homomorphism(F, comps, w)
        assert len(out) == 1
        ((key, c),) = out.items()
        assert c == F.one
        assert [a.label for a in key] == ["a0'", "a1'", "a2'"]

    def test_empty_word(self):
        assert eval_homomorphism(F, {}, ()) == {(): F.one}

    def test_out_len_filters(self):
        comps = {
            1: lambda seg, obj: {seg[0]: F.one},
            2: lambda seg, obj: {
                atom("m", seg[0].source, seg[1].target, seg[0].sdegree + seg[1].sdegree): F.one
            },
        }
        w = chain(0, 0)
        out1 = eval_homomorphism(F, comps, w, out_len=1)
        out2 = eval_homomorphism(F, comps, w, out_len=2)
        assert all(len(k) == 1 for k in out1)
        assert all(len(k) == 2 for k in out2)
        assert len(out1) == 1 and len(out2) == 1
