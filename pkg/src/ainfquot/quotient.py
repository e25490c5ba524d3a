"""String quotients of truncated homotopy-associative categories.

Given a category C and a full subcategory B, the quotient has the same
objects, and its hom space from X to Y is spanned by strings of
composable C-arrows whose interior objects lie in B, up to a finite
length cutoff.  The structure of arity one is the bar codifferential;
higher arities concatenate the argument blocks and insert one base
operation spanning all junctions.

Two auxiliary structures on strings are used throughout: the "flat"
structure whose only operation is the bar codifferential, and the full
string structure over the whole object set.  A pair of mutually inverse
functors (concatenation with alternating signs) relates them.
"""

from __future__ import annotations

import itertools

from .ainf_core import (
    AInfCategory,
    AInfFunctor,
    Transformation,
    bar_insertions,
    b1_of_transformation,
    b2_of_transformations,
    compose_functors,
    identity_functor,
    memoized,
    theta_image,
    unit_transformation,
    whisker_left,
    whisker_right,
)
from .graded_quiver import fs_add_into, fs_combine, fs_scale, fs_sub
from .tensor_world import OperatorSlot, TensorString, koszul_apply, mu, sdeg_of


class QuotientSpec:
    """Input data for building a string quotient."""

    def __init__(self, base, interior_objects, max_len=4, N_max=None):
        self.base = base
        self.interior_objects = frozenset(interior_objects)
        self.max_len = max_len
        self.N_max = N_max if N_max is not None else getattr(base, "N_max", 4)


class StringCategory(AInfCategory):
    """Common string-quiver layer: hom bases are admissible strings."""

    def __init__(self, spec: QuotientSpec):
        self.spec = spec
        self.base = spec.base
        self.field = spec.base.field
        self.max_len = spec.max_len
        # operation arity is bounded by the total factor count
        self.N_max = spec.max_len
        lo, hi = spec.base.window
        self.window = (min(lo, lo * spec.max_len), max(hi, hi * spec.max_len))
        self._basis_cache = {}
        self._base_op_cache = {}

    def objects(self):
        return self.base.objects()

    def _strings(self, source, target):
        key = (source, target)
        if key in self._basis_cache:
            return self._basis_cache[key]
        interior = sorted(self.spec.interior_objects)
        out = []
        for length in range(1, self.max_len + 1):
            for mids in itertools.product(interior, repeat=length - 1):
                seq = (source,) + mids + (target,)
                pools = [
                    self.base.hom_atoms(seq[i], seq[i + 1]) for i in range(length)
                ]
                if any(not p for p in pools):
                    continue
                for combo in itertools.product(*pools):
                    out.append(TensorString(combo))
        by_deg = {}
        for s in out:
            by_deg.setdefault(s.sdegree, []).append(s)
        result = {d: tuple(v) for d, v in by_deg.items()}
        self._basis_cache[key] = result
        return result

    def hom_basis(self, source, target, sdegree):
        return self._strings(source, target).get(sdegree, ())

    def drop_cached_strings(self, source, target):
        """Free the cached string basis for one pair (large scans only)."""
        self._basis_cache.pop((source, target), None)

    def hom_atoms(self, source, target):
        strings = self._strings(source, target)
        out = []
        for d in sorted(strings):
            out.extend(strings[d])
        return out

    def iter_words(self, length, source=None, target=None, total_max=None):
        """Composable block words whose total factor count fits the cutoff."""
        if total_max is None:
            total_max = self.max_len
        for word in super().iter_words(length, source, target):
            if sum(len(b) for b in word) <= total_max:
                yield word

    def bar_differential(self, string: TensorString):
        """Bar codifferential of one string (arity-one operation).

        Specialized insertion loop equivalent to ``bar_insertions`` on
        the factors; the only sign is the suffix degree behind the
        inserted operation.
        """
        field = self.field
        base = self.base
        factors = string.factors
        n = len(factors)
        cache = self._base_op_cache
        # suffix[i] = total shifted degree of factors[i:]
        suffix = [0] * (n + 1)
        for i in range(n - 1, -1, -1):
            suffix[i] = suffix[i + 1] + factors[i].sdegree
        acc = {}
        for m in range(1, min(n, base.N_max) + 1):
            for q in range(n - m + 1):
                seg = factors[q : q + m]
                out = cache.get(seg)
                if out is None:
                    out = base.b(seg)
                    cache[seg] = out
                if not out:
                    continue
                sign = field.sign_pow(suffix[q + m])
                head, tail = factors[:q], factors[q + m :]
                for o, c in out.items():
                    fs_add_into(
                        field, acc, TensorString(head + (o,) + tail), field.mul(sign, c)
                    )
        return acc

    def unit0(self, obj):
        u = self.base.unit0(obj)
        if u is None:
            return None
        return {TensorString((a,)): c for a, c in u.items()}


class QuotientCategory(StringCategory):
    """Strings with the full quotient structure (all arities)."""

    def __init__(self, spec: QuotientSpec):
        super().__init__(spec)
        self._b_cache = {}

    def b(self, atoms):
        atoms = tuple(atoms)
        if atoms in self._b_cache:
            return self._b_cache[atoms]
        n = len(atoms)
        if n == 1:
            out = self.bar_differential(atoms[0])
        else:
            out = self._b_higher(atoms)
        self._b_cache[atoms] = out
        return out

    def _b_higher(self, blocks):
        """Concatenate and insert one base operation across all junctions."""
        factors = mu(blocks).factors
        total = len(factors)
        k_first = len(blocks[0])
        k_last = len(blocks[-1])
        acc = {}
        bfn = self.base.b_slot_fn()
        for q in range(k_first):
            for t in range(k_last):
                m = total - q - t
                if m < 1 or m > self.base.N_max:
                    continue
                slots = (
                    [OperatorSlot.identity() for _ in range(q)]
                    + [OperatorSlot(m, 1, bfn)]
                    + [OperatorSlot.identity() for _ in range(t)]
                )
                for word, c in koszul_apply(self.field, slots, factors).items():
                    fs_add_into(self.field, acc, TensorString(word), c)
        return acc


class FlatStringCategory(StringCategory):
    """Strings with only the bar codifferential; higher arities vanish."""

    def b(self, atoms):
        atoms = tuple(atoms)
        if len(atoms) == 1:
            return self.bar_differential(atoms[0])
        return {}


def build_quotient(base, interior_objects, max_len=4, N_max=None) -> QuotientCategory:
    return QuotientCategory(QuotientSpec(base, interior_objects, max_len, N_max))


def overline_structure(base, max_len=4, N_max=None) -> QuotientCategory:
    """Quotient of a category by itself (all interior objects allowed)."""
    return build_quotient(base, base.objects(), max_len, N_max)


def underline_structure(base, max_len=4, N_max=None) -> FlatStringCategory:
    return FlatStringCategory(QuotientSpec(base, base.objects(), max_len, N_max))


def quotient_b_fourterm(quot: QuotientCategory, blocks):
    """Alternative four-term formula for the quotient structure.

    Concatenation-after-codifferential, corrected by three terms that
    leave the outermost block(s) untouched.  Independent of the
    junction-spanning formula; used as its oracle.
    """
    field = quot.field
    blocks = tuple(blocks)
    n = len(blocks)

    def codiff_slot_fn(segment, at_obj):
        # full bar codifferential of the concatenation of a block segment
        acc = {}
        factors = mu(segment).factors
        for word, c in bar_insertions(
            quot.base, factors, max_arity=quot.base.N_max
        ).items():
            fs_add_into(field, acc, (TensorString(word),), c)
        return acc

    def run(slots, sign_exp):
        acc = {}
        for word, c in koszul_apply(field, slots, blocks).items():
            joined = mu(word)
            fs_add_into(field, acc, joined, field.mul(field.sign_pow(sign_exp), c))
        return acc

    terms = []
    # full codifferential of the concatenation
    terms.append(run([OperatorSlot(n, 1, codiff_slot_fn)], 0))
    # minus: last n-1 blocks hit, first block untouched
    if n - 1 >= 1:
        terms.append(
            run(
                [OperatorSlot.identity(), OperatorSlot(n - 1, 1, codiff_slot_fn)],
                1,
            )
        )
        terms.append(
            run(
                [OperatorSlot(n - 1, 1, codiff_slot_fn), OperatorSlot.identity()],
                1,
            )
        )
    # plus: middle blocks hit, both outer blocks untouched
    if n - 2 >= 1:
        terms.append(
            run(
                [
                    OperatorSlot.identity(),
                    OperatorSlot(n - 2, 1, codiff_slot_fn),
                    OperatorSlot.identity(),
                ],
                0,
            )
        )
    return fs_combine(field, *terms)


# ---------------------------------------------------------------------------
# concatenation functors between the flat and full string structures
# ---------------------------------------------------------------------------


def concat_functor(flat: FlatStringCategory, full: QuotientCategory) -> AInfFunctor:
    """Concatenation, one component per arity."""

    def make_comp(k):
        def comp(segment, at_obj):
            return {mu(segment): flat.field.one}

        return comp

    comps = {k: make_comp(k) for k in range(1, flat.max_len + 1)}
    return AInfFunctor(flat, full, lambda x: x, comps, name="concat")


def concat_inverse_functor(full: QuotientCategory, flat: FlatStringCategory) -> AInfFunctor:
    """Concatenation with alternating signs; inverse to concatenation."""
    field = full.field

    def make_comp(k):
        sign = field.sign_pow(k - 1)

        def comp(segment, at_obj):
            return {mu(segment): sign}

        return comp

    comps = {k: make_comp(k) for k in range(1, full.max_len + 1)}
    return AInfFunctor(full, flat, lambda x: x, comps, name="concat_inv")


def ju(quot: StringCategory) -> AInfFunctor:
    """Strict inclusion of the base category as length-one strings."""

    def comp1(segment, at_obj):
        return {TensorString(segment): quot.field.one}

    return AInfFunctor(quot.base, quot, lambda x: x, {1: comp1}, name="ju")


# ---------------------------------------------------------------------------
# index words with the forbidden-prefix condition
# ---------------------------------------------------------------------------


def prefix_avoiding_words(block_lengths, n_specials):
    """Integer words covering the concatenated length, avoiding block cuts.

    Entries are positive except for ``n_specials`` designated entries
    (in fixed order) which may be zero.  Every proper prefix sum must
    differ from every partial sum of ``block_lengths`` (including 0 and
    the total).  Yields (values, special_positions) pairs.
    """
    total = sum(block_lengths)
    cuts = {0}
    acc = 0
    for k in block_lengths:
        acc += k
        cuts.add(acc)

    results = []

    def gen(values, positions, cur, used):
        if cur == total and used == n_specials:
            results.append((tuple(values), tuple(positions)))
        if values and cur in cuts:
            return
        # positive entry
        for v in range(1, total - cur + 1):
            values.append(v)
            gen(values, positions, cur + v, used)
            values.pop()
        # special entry, possibly zero
        if used < n_specials:
            for v in range(0, total - cur + 1):
                values.append(v)
                positions.append(len(values) - 1)
                gen(values, positions, cur + v, used + 1)
                positions.pop()
                values.pop()

    gen([], [], 0, 0)
    return results


def index_L(block_lengths):
    """Positive index words for transporting a functor to the quotient."""
    return [values for values, _ in prefix_avoiding_words(block_lengths, 0)]


def index_P(block_lengths):
    """Index words with one flexible slot, for transported transformations."""
    return prefix_avoiding_words(block_lengths, 1)


def index_Q(block_lengths):
    """Index words with two flexible slots, for the composition homotopy."""
    return prefix_avoiding_words(block_lengths, 2)


# ---------------------------------------------------------------------------
# transport of functors and transformations to the quotient
# ---------------------------------------------------------------------------


def _functor_slot(f: AInfFunctor, arity: int):
    fn = f.component(arity)
    if fn is None:
        return None

    def slot_fn(segment, at_obj):
        return {(k,): c for k, c in fn(segment, at_obj).items()}

    return OperatorSlot(arity, 0, slot_fn)


def _transformation_slot(r: Transformation, arity: int):
    fn = r.component(arity)
    if fn is None:
        return None

    def slot_fn(segment, at_obj):
        return {(k,): c for k, c in fn(segment, at_obj).items()}

    return OperatorSlot(arity, r.degree, slot_fn)


def d_functor(f: AInfFunctor, quot_src: StringCategory, quot_tgt: StringCategory) -> AInfFunctor:
    """Transport a functor to the string quotients.

    Component on a block word: concatenate, then sum over positive index
    words avoiding the block cuts, applying one source-functor component
    per entry; the outputs form a single string.
    """
    field = quot_tgt.field

    def make_comp(n):
        def comp(blocks, at_obj):
            lengths = tuple(len(b) for b in blocks)
            factors = mu(blocks).factors
            acc = {}
            for values in index_L(lengths):
                slots = []
                ok = True
                for v in values:
                    s = _functor_slot(f, v)
                    if s is None:
                        ok = False
                        break
                    slots.append(s)
                if not ok:
                    continue
                for word, c in koszul_apply(field, slots, factors).items():
                    fs_add_into(field, acc, TensorString(word), c)
            return acc

        return comp

    comps = {n: make_comp(n) for n in range(1, quot_src.max_len + 1)}
    return AInfFunctor(
        quot_src,
        quot_tgt,
        lambda x: f.on_object(x),
        comps,
        name=f"D({f.name})",
    )


def d_functor_oracle(f: AInfFunctor, quot_src, quot_tgt) -> AInfFunctor:
    """Oracle form: group the blocks, image each group, alternate signs."""
    field = quot_tgt.field

    def group_slot(group_size):
        def slot_fn(segment, at_obj):
            acc = {}
            for word, c in f.word_image(mu(segment).factors).items():
                fs_add_into(field, acc, (TensorString(word),), c)
            return acc

        return OperatorSlot(group_size, 0, slot_fn)

    def make_comp(n):
        def comp(blocks, at_obj):
            acc = {}
            for grouping in _compositions_of(n):
                k = len(grouping)
                slots = [group_slot(g) for g in grouping]
                sign = field.sign_pow(k - 1)
                for word, c in koszul_apply(field, slots, blocks).items():
                    fs_add_into(field, acc, mu(word), field.mul(sign, c))
            return acc

        return comp

    comps = {n: make_comp(n) for n in range(1, quot_src.max_len + 1)}
    return AInfFunctor(quot_src, quot_tgt, lambda x: f.on_object(x), comps)


def _compositions_of(n):
    from .tensor_world import compositions

    return compositions(n)


def d_transformation(
    r: Transformation,
    fbar: AInfFunctor,
    gbar: AInfFunctor,
) -> Transformation:
    """Transport a transformation to the string quotients.

    ``fbar`` and ``gbar`` are the transported source and target
    functors.  The arity-zero component includes the base arity-zero
    component as a length-one string; higher components sum over index
    words with one flexible slot carrying the transformation.
    """
    quot_tgt = fbar.target_cat
    field = quot_tgt.field
    f = r.source_fun
    g = r.target_fun

    def comp0(segment, at_obj):
        return {
            TensorString((a,)): c for a, c in r.component0(at_obj).items()
        }

    def make_comp(n):
        def comp(blocks, at_obj):
            lengths = tuple(len(b) for b in blocks)
            factors = mu(blocks).factors
            acc = {}
            for values, (rpos,) in index_P(lengths):
                slots = []
                ok = True
                for i, v in enumerate(values):
                    if i == rpos:
                        s = _transformation_slot(r, v)
                    elif i < rpos:
                        s = _functor_slot(f, v)
                    else:
                        s = _functor_slot(g, v)
                    if s is None:
                        ok = False
                        break
                    slots.append(s)
                if not ok:
                    continue
                for word, c in koszul_apply(field, slots, factors).items():
                    fs_add_into(field, acc, TensorString(word), c)
            return acc

        return comp

    comps = {0: comp0}
    for n in range(1, fbar.source_cat.max_len + 1):
        comps[n] = make_comp(n)
    return Transformation(fbar, gbar, r.degree, comps, name=f"D({r.name})")


def d_transformation_oracle(r: Transformation, fbar, gbar) -> Transformation:
    """Oracle form via grouped blocks and full coderivation images."""
    quot_tgt = fbar.target_cat
    field = quot_tgt.field
    f = r.source_fun
    g = r.target_fun

    def image_slot(fun: AInfFunctor, group_size):
        def slot_fn(segment, at_obj):
            acc = {}
            for word, c in fun.word_image(mu(segment).factors).items():
                fs_add_into(field, acc, (TensorString(word),), c)
            return acc

        return OperatorSlot(group_size, 0, slot_fn)

    def coder_slot(group_size):
        def slot_fn(segment, at_obj):
            acc = {}
            factors = mu(segment).factors if group_size else ()
            for word, c in r.coderivation_image(
                factors, source_obj=at_obj
            ).items():
                fs_add_into(field, acc, (TensorString(word),), c)
            return acc

        return OperatorSlot(group_size, r.degree, slot_fn)

    def unit_insert_slot():
        def slot_fn(segment, at_obj):
            return {
                (TensorString((a,)),): c for a, c in r.component0(at_obj).items()
            }

        return OperatorSlot(0, r.degree, slot_fn)

    def comp0(segment, at_obj):
        return {TensorString((a,)): c for a, c in r.component0(at_obj).items()}

    def make_comp(n):
        def comp(blocks, at_obj):
            acc = {}
            # terms with an inserted arity-zero string at one gap
            for grouping in _compositions_of(n):
                t = len(grouping)
                for gap in range(t + 1):
                    slots = (
                        [image_slot(f, s) for s in grouping[:gap]]
                        + [unit_insert_slot()]
                        + [image_slot(g, s) for s in grouping[gap:]]
                    )
                    sign = field.sign_pow(t)
                    for word, c in koszul_apply(field, slots, blocks).items():
                        fs_add_into(field, acc, mu(word), field.mul(sign, c))
                # terms with one group carrying the full coderivation image
                for q in range(t):
                    slots = (
                        [image_slot(f, s) for s in grouping[:q]]
                        + [coder_slot(grouping[q])]
                        + [image_slot(g, s) for s in grouping[q + 1 :]]
                    )
                    sign = field.sign_pow(t - 1)
                    for word, c in koszul_apply(field, slots, blocks).items():
                        fs_add_into(field, acc, mu(word), field.mul(sign, c))
            return acc

        return comp

    comps = {0: comp0}
    for n in range(1, fbar.source_cat.max_len + 1):
        comps[n] = make_comp(n)
    return Transformation(fbar, gbar, r.degree, comps)


# ---------------------------------------------------------------------------
# functors and transformations on flat strings
# ---------------------------------------------------------------------------


def flat_functor(f: AInfFunctor, flat_src: FlatStringCategory, flat_tgt: FlatStringCategory) -> AInfFunctor:
    """Strict extension of a functor to flat strings: full word image."""
    field = flat_tgt.field

    def comp1(segment, at_obj):
        acc = {}
        for word, c in f.word_image(segment[0].factors).items():
            fs_add_into(field, acc, TensorString(word), c)
        return acc

    return AInfFunctor(
        flat_src, flat_tgt, lambda x: f.on_object(x), {1: comp1}, name=f"flat({f.name})"
    )


def flat_transformation(
    r: Transformation, flat_f: AInfFunctor, flat_g: AInfFunctor
) -> Transformation:
    """Extension of a transformation to flat strings.

    Arity zero: the base arity-zero component as a length-one string.
    Arity one: the full coderivation image of the string's factors.
    """
    field = flat_f.target_cat.field

    def comp0(segment, at_obj):
        return {TensorString((a,)): c for a, c in r.component0(at_obj).items()}

    def comp1(segment, at_obj):
        acc = {}
        for word, c in r.coderivation_image(segment[0].factors).items():
            fs_add_into(field, acc, TensorString(word), c)
        return acc

    return Transformation(
        flat_f, flat_g, r.degree, {0: comp0, 1: comp1}, name=f"flat({r.name})"
    )


def homotopy_H(r: Transformation, p: Transformation, flat_f, flat_h) -> Transformation:
    """Flat-string homotopy splitting the composition of transformations.

    Arity zero: the pair of arity-zero components as a two-factor
    string.  Arity one: the two-coderivation string operator applied to
    the string's factors.
    """
    field = flat_f.target_cat.field

    def comp0(segment, at_obj):
        acc = {}
        for a, ca in r.component0(at_obj).items():
            for b, cb in p.component0(at_obj).items():
                fs_add_into(field, acc, TensorString((a, b)), field.mul(ca, cb))
        return acc

    def comp1(segment, at_obj):
        acc = {}
        for word, c in theta_image(r, p, segment[0].factors).items():
            fs_add_into(field, acc, TensorString(word), c)
        return acc

    return Transformation(
        flat_f,
        flat_h,
        r.degree + p.degree,
        {0: comp0, 1: comp1},
        name=f"H({r.name},{p.name})",
    )


def homotopy_R(r: Transformation, p: Transformation, fbar, hbar) -> Transformation:
    """Quotient-level homotopy splitting the composition product.

    Components sum over index words with two flexible slots carrying the
    two transformations; the arity-zero component vanishes.
    """
    field = fbar.target_cat.field
    f = r.source_fun
    g = r.target_fun
    h = p.target_fun

    def make_comp(n):
        def comp(blocks, at_obj):
            lengths = tuple(len(b) for b in blocks)
            factors = mu(blocks).factors
            acc = {}
            for values, (rpos, ppos) in index_Q(lengths):
                slots = []
                ok = True
                for i, v in enumerate(values):
                    if i == rpos:
                        s = _transformation_slot(r, v)
                    elif i == ppos:
                        s = _transformation_slot(p, v)
                    elif i < rpos:
                        s = _functor_slot(f, v)
                    elif i < ppos:
                        s = _functor_slot(g, v)
                    else:
                        s = _functor_slot(h, v)
                    if s is None:
                        ok = False
                        break
                    slots.append(s)
                if not ok:
                    continue
                for word, c in koszul_apply(field, slots, factors).items():
                    fs_add_into(field, acc, TensorString(word), c)
            return acc

        return comp

    comps = {n: make_comp(n) for n in range(1, fbar.source_cat.max_len + 1)}
    return Transformation(
        fbar, hbar, r.degree + p.degree, comps, name=f"R({r.name},{p.name})"
    )


# ---------------------------------------------------------------------------
# units
# ---------------------------------------------------------------------------


def quotient_strict_unit(quot: StringCategory) -> Transformation:
    """Strict unit of the quotient: the base unit as a length-one string."""
    return unit_transformation(quot, name="unit_quot")


def underline_unit(flat: FlatStringCategory) -> Transformation:
    """Unit of the flat string structure, with components up to arity two.

    Arity one inserts the base unit string before or after the string;
    arity two inserts it between the two strings.  Signs come from the
    sign authority with the unit slot in degree -1.
    """
    field = flat.field
    base = flat.base

    def unit_slot():
        def slot_fn(segment, at_obj):
            u = base.unit0(at_obj)
            if not u:
                return {}
            return {(TensorString((a,)),): c for a, c in u.items()}

        return OperatorSlot(0, -1, slot_fn)

    def comp0(segment, at_obj):
        u = base.unit0(at_obj)
        if not u:
            return {}
        return {TensorString((a,)): c for a, c in u.items()}

    def make_comp(n):
        def comp(blocks, at_obj):
            acc = {}
            for gap in range(n + 1):
                if n == 1 and gap not in (0, 1):
                    continue
                if n == 2 and gap != 1:
                    continue
                slots = (
                    [OperatorSlot.identity() for _ in range(gap)]
                    + [unit_slot()]
                    + [OperatorSlot.identity() for _ in range(n - gap)]
                )
                for word, c in koszul_apply(
                    field, slots, blocks, source_obj=at_obj
                ).items():
                    fs_add_into(field, acc, mu(word), c)
            return acc

        return comp

    idf = identity_functor(flat)
    return Transformation(
        idf, idf, -1, {0: comp0, 1: make_comp(1), 2: make_comp(2)}, name="unit_flat"
    )


# ---------------------------------------------------------------------------
# plain quotient, splitting, rectification
# ---------------------------------------------------------------------------


class PlainQuotient(AInfCategory):
    """Quotient by simply zeroing every hom touching the subcategory."""

    def __init__(self, base, killed_objects):
        self.base = base
        self.field = base.field
        self.window = base.window
        self.N_max = base.N_max
        self.killed = frozenset(killed_objects)

    def objects(self):
        return self.base.objects()

    def hom_basis(self, source, target, sdegree):
        if source in self.killed or target in self.killed:
            return ()
        return self.base.hom_basis(source, target, sdegree)

    def b(self, atoms):
        atoms = tuple(atoms)
        for a in atoms:
            if a.source in self.killed or a.target in self.killed:
                return {}
        return self.base.b(atoms)

    def unit0(self, obj):
        if obj in self.killed:
            return None
        return self.base.unit0(obj)


def plain_quotient(base, killed_objects):
    """The zeroing quotient together with its strict projection."""
    quot = PlainQuotient(base, killed_objects)

    def comp1(segment, at_obj):
        a = segment[0]
        if a.source in quot.killed or a.target in quot.killed:
            return {}
        return {a: base.field.one}

    e = AInfFunctor(base, quot, lambda x: x, {1: comp1}, name="plain_proj")
    return quot, e


def splitting_pi(quot: StringCategory) -> AInfFunctor:
    """Length-one projection; strict, and a functor once higher
    operations vanish on strings that meet the subcategory."""

    def comp1(segment, at_obj):
        s = segment[0]
        if len(s) == 1:
            return {s.factors[0]: quot.field.one}
        return {}

    return AInfFunctor(quot, quot.base, lambda x: x, {1: comp1}, name="pi")


def word_meets(objs_of_word, killed):
    return any(o in killed for o in objs_of_word)


def word_objects(word):
    objs = [word[0].source]
    for a in word:
        objs.append(a.target)
    return tuple(objs)


def rectify_structure(cat, marked_objects, homotopies, N_max=None):
    """Kill higher operations on words that meet the marked objects.

    ``homotopies`` maps an object pair (X, Y) to a dict sending each
    basis atom of the hom to a formal sum one degree lower, a
    contracting homotopy of the hom complex (needed only when X or Y is
    marked).  Returns (rectified category, invertible functor to it,
    list of per-step functors).  The rectified category has the same
    quiver; its operations of arity 2..N_max vanish on words whose
    object sequence meets the marked set.
    """
    field = cat.field
    if N_max is None:
        N_max = cat.N_max
    marked = frozenset(marked_objects)

    current = _materialize(cat, N_max)
    steps = []
    total = None
    for k in range(1, N_max):
        fk = _rectify_step(current, marked, homotopies, k, N_max)
        nxt = _transport_structure(current, fk, N_max)
        fk_fun = AInfFunctor(current, nxt, lambda x: x, fk, name=f"rect{k}")
        steps.append(fk_fun)
        total = fk_fun if total is None else compose_functors(total, fk_fun)
        current = nxt
    if total is None:
        total = identity_functor(current)
    return current, total, steps


def _materialize(cat, N_max):
    """Snapshot a category's operations into explicit tables."""
    table = {}
    for n in range(1, N_max + 1):
        for word in cat.iter_words(n):
            val = cat.b(word)
            if val:
                table[word] = val
    from .ainf_core import TableCategory
    from .graded_quiver import GradedQuiver

    quiver = getattr(cat, "quiver", None)
    if quiver is None:
        morphs = []
        lo, hi = cat.window
        for x in cat.objects():
            for y in cat.objects():
                for d in range(lo, hi + 1):
                    morphs.extend(cat.hom_basis(x, y, d))
        quiver = GradedQuiver(cat.objects(), morphs, cat.window)
    units = {}
    for x in cat.objects():
        u = cat.unit0(x)
        if u:
            units[x] = u
    return TableCategory(cat.field, quiver, table, N_max=N_max, units=units)


def _rectify_step(cat, marked, homotopies, k, N_max):
    """Components of the step functor: identity plus one corrector."""
    field = cat.field

    def comp1(segment, at_obj):
        return {segment[0]: field.one}

    def comp_corr(segment, at_obj):
        objs = word_objects(segment)
        if not word_meets(objs, marked):
            return {}
        # first marked object index, capped so the homotopy hits a factor
        first = next(i for i, o in enumerate(objs) if o in marked)
        l = min(first, k)
        pair = (objs[l], objs[l + 1])
        hmap = homotopies[pair]

        def h_slot_fn(seg, obj):
            out = hmap.get(seg[0], {})
            return {(a,): c for a, c in out.items()}

        slots = (
            [OperatorSlot.identity() for _ in range(l)]
            + [OperatorSlot(1, -1, h_slot_fn)]
            + [OperatorSlot.identity() for _ in range(k - l)]
        )
        acc = {}
        for word, c in koszul_apply(field, slots, segment).items():
            for out, c2 in cat.b(word).items():
                fs_add_into(field, acc, out, field.neg(field.mul(c, c2)))
        return acc

    return {1: comp1, k + 1: comp_corr}


def _transport_structure(cat, f_comps, N_max):
    """Structure on the same quiver making the step functor strict-unit.

    Solved arity by arity from the functor relation; the identity first
    component makes the top term the unknown.
    """
    from .ainf_core import TableCategory
    from .tensor_world import eval_homomorphism

    field = cat.field
    table = {}
    new_cat_holder = {}

    def new_b(word):
        return table.get(tuple(word), {})

    for n in range(1, N_max + 1):
        for word in cat.iter_words(n):
            # right side: bar insertions then the step functor's component
            rhs = {}
            for w2, c in bar_insertions(cat, word).items():
                fn = f_comps.get(len(w2))
                if fn is None:
                    continue
                for out, c2 in fn(w2, None).items():
                    fs_add_into(field, rhs, out, field.mul(c, c2))
            # subtract images of the word in shorter output lengths
            for w2, c in eval_homomorphism(field, f_comps, word).items():
                if len(w2) == n:
                    continue  # the identity image carries the unknown
                for out, c2 in new_b(w2).items():
                    fs_add_into(field, rhs, out, field.neg(field.mul(c, c2)))
            if rhs:
                table[word] = rhs
    return TableCategory(
        field,
        cat.quiver,
        table,
        N_max=N_max,
        units={x: cat.unit0(x) for x in cat.objects() if cat.unit0(x)},
    )
