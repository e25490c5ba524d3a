"""Exact-arithmetic toolkit for truncated homotopy-associative categories.

The package builds finite, arity- and length-truncated models of
homotopy-associative (A-infinity style) categories over an exact field
(the rationals or a prime field), forms the string-quotient of such a
category by a full subcategory, and verifies every structural identity
componentwise with exact linear algebra.
"""

__version__ = "0.1.0"
