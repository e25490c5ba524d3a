"""Graded quivers: objects, graded hom bases, and formal sums.

All gradings are stored in shifted form ("sdegree"); the unshifted
degree of a morphism is ``sdegree + 1``.  Hom spaces are finite
dimensional in each degree and supported in a finite degree window.

A formal sum is a plain dict mapping basis keys (atoms or tuples of
atoms) to scalars; zero coefficients are pruned eagerly so that equal
sums compare equal as dicts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .exact_linalg import Field, field_from_name

ObjectId = str


@dataclass(frozen=True)
class BasisMorphism:
    """A basis arrow of a graded quiver, in shifted grading."""

    label: str
    source: ObjectId
    target: ObjectId
    sdegree: int

    def __repr__(self):
        return f"{self.label}:{self.source}->{self.target}[{self.sdegree}]"


# ---------------------------------------------------------------------------
# formal sums
# ---------------------------------------------------------------------------


def fs_add_into(field: Field, acc: dict, term_key, coeff):
    """Accumulate coeff * term_key into acc, pruning zeros."""
    if field.is_zero(coeff):
        return acc
    new = field.add(acc.get(term_key, field.zero), coeff)
    if field.is_zero(new):
        acc.pop(term_key, None)
    else:
        acc[term_key] = new
    return acc


def fs_combine(field: Field, *sums):
    acc = {}
    for s in sums:
        for k, c in s.items():
            fs_add_into(field, acc, k, c)
    return acc


def fs_scale(field: Field, s: dict, c):
    c = field.coerce(c)
    if field.is_zero(c):
        return {}
    return {k: field.mul(c, v) for k, v in s.items()}


def fs_sub(field: Field, a: dict, b: dict):
    return fs_combine(field, a, fs_scale(field, b, field.coerce(-1)))


def fs_is_zero(s: dict) -> bool:
    return not s


def fs_equal(field: Field, a: dict, b: dict) -> bool:
    return fs_is_zero(fs_sub(field, a, b))


class Element:
    """A formal sum wrapped with its field, for the public interface."""

    def __init__(self, field: Field, terms=None):
        self.field = field
        self.terms = {}
        if terms:
            for k, c in dict(terms).items():
                fs_add_into(field, self.terms, k, field.coerce(c))

    def add(self, other: "Element") -> "Element":
        return Element(self.field, fs_combine(self.field, self.terms, other.terms))

    def scale(self, c) -> "Element":
        return Element(self.field, fs_scale(self.field, self.terms, c))

    def is_zero(self) -> bool:
        return fs_is_zero(self.terms)

    def __eq__(self, other):
        return isinstance(other, Element) and fs_equal(self.field, self.terms, other.terms)

    def __repr__(self):
        if not self.terms:
            return "Element(0)"
        parts = [f"{c}*{k!r}" for k, c in sorted(self.terms.items(), key=lambda t: repr(t[0]))]
        return "Element(" + " + ".join(parts) + ")"


def element_add(a: Element, b: Element) -> Element:
    return a.add(b)


def element_scale(a: Element, c) -> Element:
    return a.scale(c)


# ---------------------------------------------------------------------------
# quivers
# ---------------------------------------------------------------------------


class GradedQuiver:
    """Finite collection of objects with graded hom bases."""

    def __init__(self, objects, morphisms, window):
        self.objects = tuple(objects)
        self.window = (int(window[0]), int(window[1]))
        self._homs: dict = {}
        seen = set()
        obset = set(self.objects)
        for m in morphisms:
            if m.source not in obset or m.target not in obset:
                raise ValueError(f"morphism {m} references unknown object")
            if not (self.window[0] <= m.sdegree <= self.window[1]):
                raise ValueError(f"morphism {m} outside degree window {self.window}")
            key = (m.source, m.target, m.sdegree, m.label)
            if key in seen:
                raise ValueError(f"duplicate basis label {key}")
            seen.add(key)
            self._homs.setdefault((m.source, m.target, m.sdegree), []).append(m)
        self._homs = {k: tuple(v) for k, v in self._homs.items()}

    def hom_basis(self, source: ObjectId, target: ObjectId, sdegree: int):
        return self._homs.get((source, target, sdegree), ())

    def all_morphisms(self):
        for key in sorted(self._homs):
            for m in self._homs[key]:
                yield m

    def degrees_present(self, source: ObjectId, target: ObjectId):
        return sorted(
            d for (s, t, d) in self._homs if s == source and t == target
        )

    def hom_dim(self, source, target, sdegree):
        return len(self.hom_basis(source, target, sdegree))


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def quiver_to_json(field: Field, quiver: GradedQuiver) -> str:
    data = {
        "field": f"GF({field.characteristic})" if field.characteristic else "QQ",
        "window": list(quiver.window),
        "objects": list(quiver.objects),
        "morphisms": [
            {
                "label": m.label,
                "source": m.source,
                "target": m.target,
                "sdegree": m.sdegree,
            }
            for m in quiver.all_morphisms()
        ],
    }
    return json.dumps(data, indent=2, sort_keys=True)


def quiver_from_json(text: str):
    data = json.loads(text)
    field = field_from_name(data["field"])
    morphisms = [
        BasisMorphism(
            label=m["label"],
            source=m["source"],
            target=m["target"],
            sdegree=int(m["sdegree"]),
        )
        for m in data["morphisms"]
    ]
    quiver = GradedQuiver(data["objects"], morphisms, tuple(data["window"]))
    return field, quiver
