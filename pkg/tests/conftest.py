"""Shared fixtures: small quiver-representation complexes and categories."""

import pytest

from ainfquot.complexes_dg import (
    A2,
    ComplexObject,
    ModuleObject,
    build_dg_category,
    injective_resolution,
    stalk_complex,
)
from ainfquot.exact_linalg import GF


@pytest.fixture(scope="session")
def F7():
    return GF(7)


@pytest.fixture(scope="session")
def a2_modules(F7):
    k = F7.one
    return {
        "S1": ModuleObject({"1": 1, "2": 0}, {}),
        "S2": ModuleObject({"1": 0, "2": 1}, {}),
        "P": ModuleObject({"1": 1, "2": 1}, {("1", "2"): [[k]]}),
    }


@pytest.fixture(scope="session")
def a2_complexes(F7, a2_modules):
    k = F7.one
    s1 = stalk_complex(F7, A2, "S1", a2_modules["S1"], 0)
    s2 = stalk_complex(F7, A2, "S2", a2_modules["S2"], 0)
    p = stalk_complex(F7, A2, "P", a2_modules["P"], 0)
    # contractible: identity map between two copies of S1 in degrees 0, 1
    ac = ComplexObject(
        "Ac", {0: a2_modules["S1"], 1: a2_modules["S1"]}, {0: {"1": [[k]]}}
    )
    return [s1, s2, p, ac]


@pytest.fixture(scope="session")
def dg_cat(F7, a2_complexes):
    return build_dg_category(F7, A2, a2_complexes)


@pytest.fixture(scope="session")
def s2_resolution(F7, a2_complexes):
    s2 = a2_complexes[1]
    res, qmap, already = injective_resolution(F7, A2, s2)
    assert not already
    return res, qmap
