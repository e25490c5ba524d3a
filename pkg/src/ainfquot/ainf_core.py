"""Truncated homotopy-associative categories, functors, transformations.

A category here is a graded quiver with structure operations ``b_n``
(degree +1 in the shifted grading) for arities up to a truncation bound,
subject to the componentwise relation

    sum over q + m + t = n of  (1^q (x) b_m (x) 1^t) b_{q+1+t}  =  0 .

Functor components have degree zero; transformation components are
coderivation components of a fixed degree.  All signs come from
:func:`ainfquot.tensor_world.koszul_apply`.
"""

from __future__ import annotations

from .exact_linalg import Field
from .graded_quiver import fs_add_into, fs_combine, fs_scale, fs_sub
from .tensor_world import (
    OperatorSlot,
    eval_coderivation,
    eval_homomorphism,
    koszul_apply,
    theta,
)


class AInfCategory:
    """Base interface; concrete categories implement the raw data."""

    field: Field
    window: tuple
    N_max: int = 4

    # -- raw data ------------------------------------------------------------
    def objects(self):
        raise NotImplementedError

    def hom_basis(self, source, target, sdegree):
        raise NotImplementedError

    def b(self, atoms):
        """Structure operation of arity len(atoms); formal sum of atoms."""
        raise NotImplementedError

    def unit0(self, obj):
        """Strict unit element at obj (sdegree -1), or None."""
        return None

    # -- derived helpers -------------------------------------------------------
    def hom_atoms(self, source, target):
        lo, hi = self.window
        out = []
        for d in range(lo, hi + 1):
            out.extend(self.hom_basis(source, target, d))
        return out

    def b_on_sum(self, fsum):
        """Apply b_1 to a formal sum of single atoms."""
        acc = {}
        for atom, c in fsum.items():
            for out, c2 in self.b((atom,)).items():
                fs_add_into(self.field, acc, out, self.field.mul(c, c2))
        return acc

    def b_slot_fn(self):
        """Slot function computing b on a consumed segment."""

        def fn(segment, at_obj):
            return {(k,): c for k, c in self.b(segment).items()}

        return fn

    def iter_words(self, length, source=None, target=None):
        """All composable words of basis atoms of the given length."""
        objs = list(self.objects())
        sources = [source] if source is not None else objs
        for src in sources:
            yield from self._iter_words_from(src, length, target)

    def _iter_words_from(self, src, length, target):
        if length == 0:
            yield ()
            return
        objs = list(self.objects())
        for nxt in objs:
            if length == 1 and target is not None and nxt != target:
                continue
            for atom in self.hom_atoms(src, nxt):
                for rest in self._iter_words_from(nxt, length - 1, target):
                    yield (atom,) + rest


def bar_insertions(cat: AInfCategory, atoms, min_arity=1, max_arity=None):
    """Image of a word under the bar codifferential determined by cat.b.

    Sum over insertions ``1^q (x) b_m (x) 1^t`` with min_arity <= m;
    returns a formal sum of output words (length n - m + 1).
    """
    atoms = tuple(atoms)
    n = len(atoms)
    acc = {}
    hi = n if max_arity is None else min(n, max_arity)
    bfn = cat.b_slot_fn()
    for m in range(min_arity, hi + 1):
        for q in range(n - m + 1):
            t = n - m - q
            slots = (
                [OperatorSlot.identity() for _ in range(q)]
                + [OperatorSlot(m, 1, bfn)]
                + [OperatorSlot.identity() for _ in range(t)]
            )
            for key, c in koszul_apply(cat.field, slots, atoms).items():
                fs_add_into(cat.field, acc, key, c)
    return acc


def ainf_defect(cat: AInfCategory, atoms):
    """Residual of the structure relation on one word; zero when valid."""
    acc = {}
    for word, c in bar_insertions(cat, atoms).items():
        for out, c2 in cat.b(word).items():
            fs_add_into(cat.field, acc, out, cat.field.mul(c, c2))
    return acc


def check_ainf(cat: AInfCategory, max_arity, max_words=None):
    """Evaluate the structure relation on all words up to max_arity.

    Returns the list of (word, residual) pairs with nonzero residual.
    """
    failures = []
    count = 0
    for n in range(1, max_arity + 1):
        for word in cat.iter_words(n):
            res = ainf_defect(cat, word)
            if res:
                failures.append((word, res))
            count += 1
            if max_words is not None and count >= max_words:
                return failures
    return failures


class TableCategory(AInfCategory):
    """Category with explicitly tabulated structure operations."""

    def __init__(self, field, quiver, b_table, N_max=4, units=None):
        self.field = field
        self.quiver = quiver
        self.window = quiver.window
        self.N_max = N_max
        self._b_table = dict(b_table)
        self._units = dict(units) if units else {}

    def objects(self):
        return self.quiver.objects

    def hom_basis(self, source, target, sdegree):
        return self.quiver.hom_basis(source, target, sdegree)

    def b(self, atoms):
        return self._b_table.get(tuple(atoms), {})

    def unit0(self, obj):
        return self._units.get(obj)


# ---------------------------------------------------------------------------
# functors
# ---------------------------------------------------------------------------


def memoized(fn):
    cache = {}

    def wrapped(segment, at_obj=None):
        key = (segment, at_obj)
        if key not in cache:
            cache[key] = fn(segment, at_obj)
        return cache[key]

    return wrapped


class AInfFunctor:
    """Functor between truncated categories.

    ``components`` maps arity n >= 1 to ``fn(word, at_obj) -> formal
    sum of single atoms``; missing arities are zero.
    """

    def __init__(self, source_cat, target_cat, ob_map, components, name=""):
        self.source_cat = source_cat
        self.target_cat = target_cat
        self._ob_map = ob_map
        self.components = {n: memoized(fn) for n, fn in components.items()}
        self.name = name

    def on_object(self, obj):
        if callable(self._ob_map):
            return self._ob_map(obj)
        return self._ob_map[obj]

    def component(self, n):
        return self.components.get(n)

    def apply1(self, fsum):
        """First component applied to a formal sum of single atoms."""
        f1 = self.component(1)
        acc = {}
        field = self.target_cat.field
        for atom, c in fsum.items():
            if f1 is None:
                continue
            for out, c2 in f1((atom,), None).items():
                fs_add_into(field, acc, out, field.mul(c, c2))
        return acc

    def word_image(self, atoms, out_len=None):
        """Full cocategory-homomorphism image of a word (sum of words)."""
        return eval_homomorphism(self.target_cat.field, self.components, atoms, out_len)


def identity_functor(cat) -> AInfFunctor:
    def comp1(segment, at_obj):
        return {segment[0]: cat.field.one}

    return AInfFunctor(cat, cat, lambda x: x, {1: comp1}, name="id")


def compose_functors(f: AInfFunctor, g: AInfFunctor) -> AInfFunctor:
    """Composite 'apply f, then g' (diagrammatic order)."""
    if f.target_cat is not g.source_cat and f.target_cat != g.source_cat:
        pass  # allow equal-by-content categories
    field = g.target_cat.field

    def make_comp(n):
        def comp(segment, at_obj):
            acc = {}
            for word, c in f.word_image(segment).items():
                gfn = g.component(len(word))
                if gfn is None:
                    continue
                for out, c2 in gfn(word, None).items():
                    fs_add_into(field, acc, out, field.mul(c, c2))
            return acc

        return comp

    max_n = max(
        max(f.components, default=0),
        max(g.components, default=0),
        getattr(g.target_cat, "N_max", 4),
    )
    comps = {n: make_comp(n) for n in range(1, max_n + 1)}
    return AInfFunctor(
        f.source_cat,
        g.target_cat,
        lambda x: g.on_object(f.on_object(x)),
        comps,
        name=f"({f.name};{g.name})",
    )


def functor_defect(f: AInfFunctor, atoms):
    """Residual of the functor relation on one word; zero when valid.

    Relation: (image of word under f) followed by b, minus (bar
    insertions in the source) followed by the matching f component.
    """
    field = f.target_cat.field
    lhs = {}
    for word, c in f.word_image(atoms).items():
        for out, c2 in f.target_cat.b(word).items():
            fs_add_into(field, lhs, out, field.mul(c, c2))
    rhs = {}
    for word, c in bar_insertions(f.source_cat, atoms).items():
        fn = f.component(len(word))
        if fn is None:
            continue
        for out, c2 in fn(word, None).items():
            fs_add_into(field, rhs, out, field.mul(c, c2))
    return fs_sub(field, lhs, rhs)


def check_functor(f: AInfFunctor, max_arity, max_words=None):
    failures = []
    count = 0
    for n in range(1, max_arity + 1):
        for word in f.source_cat.iter_words(n):
            res = functor_defect(f, word)
            if res:
                failures.append((word, res))
            count += 1
            if max_words is not None and count >= max_words:
                return failures
    return failures


def functors_equal_on(f, g, max_arity, words=None):
    """Componentwise comparison of two parallel functors on words."""
    field = f.target_cat.field
    diffs = []
    if words is None:
        words = []
        for n in range(1, max_arity + 1):
            words.extend(f.source_cat.iter_words(n))
    for word in words:
        a = _component_value(f, word)
        b = _component_value(g, word)
        if fs_sub(field, a, b):
            diffs.append((word, fs_sub(field, a, b)))
    return diffs


def _component_value(f: AInfFunctor, word):
    fn = f.component(len(word))
    if fn is None:
        return {}
    return fn(word, None)


# ---------------------------------------------------------------------------
# transformations
# ---------------------------------------------------------------------------


class Transformation:
    """Coderivation-style transformation between parallel functors.

    ``components`` maps arity n >= 0 to ``fn(word, at_obj)``; the
    arity-zero component is indexed by the object at the gap.
    """

    def __init__(self, source_fun, target_fun, degree, components, name=""):
        self.source_fun = source_fun
        self.target_fun = target_fun
        self.degree = degree
        self.components = {n: memoized(fn) for n, fn in components.items()}
        self.name = name

    @property
    def source_cat(self):
        return self.source_fun.source_cat

    @property
    def target_cat(self):
        return self.source_fun.target_cat

    def component(self, n):
        return self.components.get(n)

    def component0(self, obj):
        fn = self.component(0)
        if fn is None:
            return {}
        return fn((), obj)

    def coderivation_image(self, atoms, source_obj=None, out_len=None):
        """Full coderivation image of a word (formal sum of words)."""
        return eval_coderivation(
            self.target_cat.field,
            self.source_fun.components,
            self.components,
            self.target_fun.components,
            self.degree,
            atoms,
            source_obj=source_obj,
            out_len=out_len,
        )


def transformation_from_table(source_fun, target_fun, degree, table, name=""):
    """Transformation with components given by a dict word -> formal sum.

    Arity-zero entries are keyed by ((), obj).
    """

    arities = set()
    for key in table:
        if isinstance(key, tuple) and key and key[0] == ():
            arities.add(0)
        else:
            arities.add(len(key))

    def make_comp(n):
        def comp(segment, at_obj):
            if n == 0:
                return table.get(((), at_obj), {})
            return table.get(tuple(segment), {})

        return comp

    comps = {n: make_comp(n) for n in arities}
    return Transformation(source_fun, target_fun, degree, comps, name=name)


def unit_transformation(cat, extra_components=None, name="unit") -> Transformation:
    """Unit transformation id -> id; strictly unital unless extras given."""
    idf = identity_functor(cat)

    def comp0(segment, at_obj):
        u = cat.unit0(at_obj)
        return dict(u) if u else {}

    comps = {0: comp0}
    if extra_components:
        comps.update(extra_components)
    return Transformation(idf, idf, -1, comps, name=name)


# Derived transformations (differentials, products, whiskerings) have
# components at every arity, not just up to the arity of the category's
# operations, so their tables extend at least this far.  Evaluation is
# lazy; unused high arities cost nothing.
COMPONENT_ARITY_BOUND = 8


def _component_bound(cat):
    return max(getattr(cat, "N_max", 4), COMPONENT_ARITY_BOUND)


def b1_of_transformation(r: Transformation) -> Transformation:
    """Differential of a transformation in the functor category.

    Components: (word -> coderivation image -> b) minus, with the sign
    of the transformation's degree, (bar insertions -> r component).
    """
    field = r.target_cat.field
    sign = field.sign_pow(r.degree)

    def make_comp(n):
        def comp(segment, at_obj):
            acc = {}
            for word, c in r.coderivation_image(segment, source_obj=at_obj).items():
                for out, c2 in r.target_cat.b(word).items():
                    fs_add_into(field, acc, out, field.mul(c, c2))
            if n > 0:
                for word, c in bar_insertions(r.source_cat, segment).items():
                    fn = r.component(len(word))
                    if fn is None:
                        continue
                    for out, c2 in fn(word, None).items():
                        fs_add_into(
                            field,
                            acc,
                            out,
                            field.neg(field.mul(sign, field.mul(c, c2))),
                        )
            return acc

        return comp

    max_n = _component_bound(r.source_cat)
    comps = {n: make_comp(n) for n in range(0, max_n + 1)}
    return Transformation(
        r.source_fun, r.target_fun, r.degree + 1, comps, name=f"B1({r.name})"
    )


def theta_image(r: Transformation, p: Transformation, atoms, source_obj=None, out_len=None):
    """Two-coderivation string operator for composable transformations."""
    field = r.target_cat.field
    return theta(
        field,
        r.source_fun.components,
        r.components,
        r.target_fun.components,
        p.components,
        p.target_fun.components,
        r.degree,
        p.degree,
        atoms,
        source_obj=source_obj,
        out_len=out_len,
    )


def b2_of_transformations(r: Transformation, p: Transformation) -> Transformation:
    """Composition product of composable transformations r then p."""
    field = r.target_cat.field

    def make_comp(n):
        def comp(segment, at_obj):
            acc = {}
            for word, c in theta_image(r, p, segment, source_obj=at_obj).items():
                for out, c2 in r.target_cat.b(word).items():
                    fs_add_into(field, acc, out, field.mul(c, c2))
            return acc

        return comp

    max_n = _component_bound(r.source_cat)
    comps = {n: make_comp(n) for n in range(0, max_n + 1)}
    return Transformation(
        r.source_fun,
        p.target_fun,
        r.degree + p.degree + 1,
        comps,
        name=f"B2({r.name},{p.name})",
    )


def whisker_left(e: AInfFunctor, r: Transformation) -> Transformation:
    """Precompose a transformation with a functor into its source."""
    field = r.target_cat.field

    def make_comp(n):
        def comp(segment, at_obj):
            acc = {}
            if n == 0:
                return r.component0(e.on_object(at_obj))
            for word, c in e.word_image(segment).items():
                fn = r.component(len(word))
                if fn is None:
                    continue
                for out, c2 in fn(word, None).items():
                    fs_add_into(field, acc, out, field.mul(c, c2))
            return acc

        return comp

    max_n = _component_bound(e.source_cat)
    comps = {n: make_comp(n) for n in range(0, max_n + 1)}
    return Transformation(
        compose_functors(e, r.source_fun),
        compose_functors(e, r.target_fun),
        r.degree,
        comps,
        name=f"({e.name}){r.name}",
    )


def whisker_right(r: Transformation, h: AInfFunctor) -> Transformation:
    """Postcompose a transformation with a functor out of its target."""
    field = h.target_cat.field

    def make_comp(n):
        def comp(segment, at_obj):
            acc = {}
            for word, c in r.coderivation_image(segment, source_obj=at_obj).items():
                fn = h.component(len(word))
                if fn is None:
                    continue
                for out, c2 in fn(word, None).items():
                    fs_add_into(field, acc, out, field.mul(c, c2))
            return acc

        return comp

    max_n = _component_bound(r.source_cat)
    comps = {n: make_comp(n) for n in range(0, max_n + 1)}
    return Transformation(
        compose_functors(r.source_fun, h),
        compose_functors(r.target_fun, h),
        r.degree,
        comps,
        name=f"{r.name}({h.name})",
    )


def add_transformations(r: Transformation, p: Transformation, c_r=1, c_p=1):
    """Linear combination of parallel transformations of equal degree."""
    field = r.target_cat.field
    if r.degree != p.degree:
        raise ValueError("degree mismatch")

    def make_comp(n):
        def comp(segment, at_obj):
            a = r.component(n)
            b = p.component(n)
            va = a(segment, at_obj) if a else {}
            vb = b(segment, at_obj) if b else {}
            return fs_combine(
                field, fs_scale(field, va, c_r), fs_scale(field, vb, c_p)
            )

        return comp

    arities = set(r.components) | set(p.components)
    comps = {n: make_comp(n) for n in arities}
    return Transformation(r.source_fun, r.target_fun, r.degree, comps)


def transformation_values(r: Transformation, words_with_objs):
    """Tabulate components on given (word, at_obj) pairs."""
    out = {}
    for word, obj in words_with_objs:
        fn = r.component(len(word))
        out[(word, obj)] = fn(word, obj) if fn else {}
    return out


def transformations_equal_on(r, p, words_with_objs, field=None):
    field = field or r.target_cat.field
    diffs = []
    for word, obj in words_with_objs:
        a = r.component(len(word))
        b = p.component(len(word))
        va = a(word, obj) if a else {}
        vb = b(word, obj) if b else {}
        d = fs_sub(field, va, vb)
        if d:
            diffs.append(((word, obj), d))
    return diffs


# ---------------------------------------------------------------------------
# dictionary between shifted and unshifted binary data
# ---------------------------------------------------------------------------


def b_from_m(field, m1_fn, m2_fn):
    """Shifted structure operations from differential and composition.

    ``m1_fn(atom)`` is the unshifted differential, ``m2_fn(x, y)`` the
    unshifted diagrammatic composition (x then y), both returning
    formal sums of atoms whose stored grading is already shifted.
    Returns (b1, b2) acting on shifted words.
    """

    def b1(atoms):
        (x,) = atoms
        return m1_fn(x)

    def b2(atoms):
        x, y = atoms
        # unshifted degree of y is y.sdegree + 1
        sign = field.sign_pow(y.sdegree + 1)
        return fs_scale(field, m2_fn(x, y), sign)

    return b1, b2


def m_from_b(field, cat):
    """Unshifted differential and composition from shifted operations."""

    def m1(x):
        return cat.b((x,))

    def m2(x, y):
        sign = field.sign_pow(y.sdegree + 1)
        return fs_scale(field, cat.b((x, y)), sign)

    return m1, m2
