"""Tensor strings, slot operators, and the single sign authority.

Every sign in the package is produced by :func:`koszul_apply`.  An
operator ``F_1 (x) ... (x) F_k`` applied to a string split into
segments ``u_1, ..., u_k`` picks up the sign

    (-1) ** sum_i  deg(F_i) * sum_{j > i} sdeg(u_j)

where ``deg(F_i)`` is the (shifted-world) degree of the slot and
``sdeg(u_j)`` the total shifted degree of the segment.  Operators act
on the right of their arguments throughout.

Atoms are any hashable objects exposing ``source``, ``target`` and
``sdegree`` — basis arrows of a quiver or, at the quotient level,
tensor strings themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exact_linalg import Field
from .graded_quiver import fs_add_into


@dataclass(frozen=True)
class TensorString:
    """Immutable nonempty word of composable atoms."""

    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise ValueError("tensor strings are nonempty")
        for a, b in zip(self.factors, self.factors[1:]):
            if a.target != b.source:
                raise ValueError(f"non-composable factors {a!r} then {b!r}")

    @property
    def source(self):
        return self.factors[0].source

    @property
    def target(self):
        return self.factors[-1].target

    @property
    def sdegree(self):
        return sum(f.sdegree for f in self.factors)

    @property
    def interior_objects(self):
        return tuple(f.target for f in self.factors[:-1])

    def __len__(self):
        return len(self.factors)

    def __repr__(self):
        return "(" + " | ".join(repr(f) for f in self.factors) + ")"


@dataclass(frozen=True)
class BlockedString:
    """A string together with a chosen blocking into consecutive groups."""

    blocks: tuple  # tuple of TensorString, consecutively composable

    def __post_init__(self):
        for a, b in zip(self.blocks, self.blocks[1:]):
            if a.target != b.source:
                raise ValueError("non-composable blocks")

    @property
    def lengths(self):
        return tuple(len(b) for b in self.blocks)

    def concatenated(self) -> TensorString:
        return mu(self.blocks)


def sdeg_of(segment) -> int:
    """Total shifted degree of a tuple of atoms."""
    return sum(a.sdegree for a in segment)


def mu(strings) -> TensorString:
    """Concatenate strings (or atoms with a ``factors`` attribute)."""
    factors = []
    for s in strings:
        factors.extend(s.factors)
    return TensorString(tuple(factors))


def cut_comultiplication(atoms):
    """All two-part cuts of a word, including the two trivial ones.

    Returns a list of (prefix, suffix) tuples of atoms.
    """
    atoms = tuple(atoms)
    return [(atoms[:i], atoms[i:]) for i in range(len(atoms) + 1)]


class OperatorSlot:
    """One slot of a tensor-product operator.

    ``fn(segment, at_obj)`` consumes ``arity`` consecutive atoms and
    returns a formal sum mapping output tuples of atoms to scalars.
    ``at_obj`` is the object at the slot's position; it only matters
    for arity-zero slots.  ``degree`` is the slot's shifted degree and
    drives the sign.
    """

    __slots__ = ("arity", "degree", "fn", "_identity")

    def __init__(self, arity: int, degree: int, fn, _identity: bool = False):
        self.arity = arity
        self.degree = degree
        self.fn = fn
        self._identity = _identity

    @classmethod
    def identity(cls) -> "OperatorSlot":
        return cls(1, 0, None, _identity=True)

    def apply(self, field: Field, segment, at_obj):
        if self._identity:
            return {segment: field.one}
        return self.fn(segment, at_obj)


def identity_slots(n: int):
    return [OperatorSlot.identity() for _ in range(n)]


def koszul_apply(field: Field, slots, atoms, source_obj=None):
    """Apply a tensor product of slot operators to a word of atoms.

    Returns a formal sum mapping output tuples to scalars.  This is the
    package's only source of signs.
    """
    atoms = tuple(atoms)
    segments = []
    pos = 0
    for slot in slots:
        segments.append(atoms[pos : pos + slot.arity])
        pos += slot.arity
    if pos != len(atoms):
        raise ValueError("slot arities do not cover the word")

    # suffix shifted degrees: sum of sdeg of segments strictly after i
    suffix = [0] * (len(slots) + 1)
    for i in range(len(slots) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + sdeg_of(segments[i])

    sign_exp = sum(slot.degree * suffix[i + 1] for i, slot in enumerate(slots))
    sign = field.sign_pow(sign_exp)

    # objects at slot positions, for arity-zero slots
    current = source_obj
    if current is None and atoms:
        current = atoms[0].source
    at_objs = []
    for seg in segments:
        at_objs.append(current if not seg else seg[0].source)
        if seg:
            current = seg[-1].target

    partial = {(): sign}
    for slot, seg, obj in zip(slots, segments, at_objs):
        out = slot.apply(field, seg, obj)
        if not out:
            return {}
        new_partial = {}
        for ptuple, pc in partial.items():
            for otuple, oc in out.items():
                fs_add_into(field, new_partial, ptuple + tuple(otuple), field.mul(pc, oc))
        partial = new_partial
        if not partial:
            return {}
    return partial


def compositions(total: int, parts: int | None = None):
    """Words of positive integers with the given sum (and count if set)."""
    if parts is None:
        if total == 0:
            return [()]
        result = []
        for first in range(1, total + 1):
            for rest in compositions(total - first):
                result.append((first,) + rest)
        return result
    if parts == 0:
        return [()] if total == 0 else []
    result = []
    for first in range(1, total - parts + 2):
        for rest in compositions(total - first, parts - 1):
            result.append((first,) + rest)
    return result


def _component(comps, n):
    """Look up component n in a dict of components; missing means zero."""
    return comps.get(n)


def eval_homomorphism(field: Field, comps: dict, atoms, out_len=None):
    """Image of a word under a cocategory homomorphism of degree zero.

    ``comps`` maps arity n >= 1 to a component function
    ``fn(segment, at_obj) -> formal sum over atoms`` (single output
    atoms, not tuples).  The image of a word of length n in output
    length l is the sum over all compositions of n into l positive
    parts of the tensor product of components.
    """
    atoms = tuple(atoms)
    n = len(atoms)
    if n == 0:
        return {(): field.one}
    acc = {}
    lens = range(1, n + 1) if out_len is None else [out_len]
    for l in lens:
        for comp in compositions(n, l):
            slots = []
            ok = True
            for part in comp:
                fn = _component(comps, part)
                if fn is None:
                    ok = False
                    break
                slots.append(OperatorSlot(part, 0, _atomize(fn)))
            if not ok:
                continue
            for key, c in koszul_apply(field, slots, atoms).items():
                fs_add_into(field, acc, key, c)
    return acc


def _atomize(fn):
    """Wrap a component returning single atoms into a tuple-output slot fn."""

    def slot_fn(segment, at_obj):
        out = fn(segment, at_obj)
        return {(k,): c for k, c in out.items()}

    return slot_fn


def eval_coderivation(
    field: Field,
    f_comps: dict,
    r_comps: dict,
    g_comps: dict,
    r_degree: int,
    atoms,
    source_obj=None,
    out_len=None,
):
    """Image of a word under the coderivation determined by components.

    The coderivation sits between the homomorphisms with components
    ``f_comps`` and ``g_comps``; its own components ``r_comps`` map
    arity k >= 0 to functions of the same shape.  Each term places
    f-components on a prefix, one r-component (possibly arity zero, at
    any gap), and g-components on the suffix.
    """
    atoms = tuple(atoms)
    n = len(atoms)
    acc = {}
    for pre in range(n + 1):
        for k in range(n - pre + 1):
            rf = _component(r_comps, k)
            if rf is None:
                continue
            suf = n - pre - k
            for fcomp in compositions(pre):
                fslots = []
                ok = True
                for part in fcomp:
                    fn = _component(f_comps, part)
                    if fn is None:
                        ok = False
                        break
                    fslots.append(OperatorSlot(part, 0, _atomize(fn)))
                if not ok:
                    continue
                for gcomp in compositions(suf):
                    gslots = []
                    ok2 = True
                    for part in gcomp:
                        fn = _component(g_comps, part)
                        if fn is None:
                            ok2 = False
                            break
                        gslots.append(OperatorSlot(part, 0, _atomize(fn)))
                    if not ok2:
                        continue
                    out_length = len(fcomp) + 1 + len(gcomp)
                    if out_len is not None and out_length != out_len:
                        continue
                    slots = fslots + [OperatorSlot(k, r_degree, _atomize(rf))] + gslots
                    for key, c in koszul_apply(field, slots, atoms, source_obj).items():
                        fs_add_into(field, acc, key, c)
    return acc


def theta(
    field: Field,
    f_comps: dict,
    r_comps: dict,
    g_comps: dict,
    p_comps: dict,
    h_comps: dict,
    r_degree: int,
    p_degree: int,
    atoms,
    source_obj=None,
    out_len=None,
):
    """Two-coderivation string operator.

    Each term places f-components, one r-component (arity >= 0),
    g-components, one p-component (arity >= 0), then h-components.
    Output words have length at least two; components in output length
    zero or one vanish identically.
    """
    atoms = tuple(atoms)
    n = len(atoms)
    acc = {}
    for pre in range(n + 1):
        for k in range(n - pre + 1):
            rf = _component(r_comps, k)
            if rf is None:
                continue
            for mid in range(n - pre - k + 1):
                for t in range(n - pre - k - mid + 1):
                    pf = _component(p_comps, t)
                    if pf is None:
                        continue
                    suf = n - pre - k - mid - t
                    for fcomp in compositions(pre):
                        fslots = _functor_slots(f_comps, fcomp)
                        if fslots is None:
                            continue
                        for gcomp in compositions(mid):
                            gslots = _functor_slots(g_comps, gcomp)
                            if gslots is None:
                                continue
                            for hcomp in compositions(suf):
                                hslots = _functor_slots(h_comps, hcomp)
                                if hslots is None:
                                    continue
                                out_length = (
                                    len(fcomp) + 1 + len(gcomp) + 1 + len(hcomp)
                                )
                                if out_len is not None and out_length != out_len:
                                    continue
                                slots = (
                                    fslots
                                    + [OperatorSlot(k, r_degree, _atomize(rf))]
                                    + gslots
                                    + [OperatorSlot(t, p_degree, _atomize(pf))]
                                    + hslots
                                )
                                terms = koszul_apply(field, slots, atoms, source_obj)
                                for key, c in terms.items():
                                    fs_add_into(field, acc, key, c)
    return acc


def _functor_slots(comps, composition):
    slots = []
    for part in composition:
        fn = _component(comps, part)
        if fn is None:
            return None
        slots.append(OperatorSlot(part, 0, _atomize(fn)))
    return slots
