"""Trichotomy toolkit for counting satisfying assignments of Boolean CSPs.

Classifies a constraint language into one of three counting-complexity
classes with per-relation certificates, counts exactly where the affine
structure allows it, and materialises the supporting gadget and reduction
constructions as verifiable instance transformations.
"""

from .relations import (
    BUILTINS,
    ConstraintLanguage,
    Relation,
    builtin,
    is_0_valid,
    is_1_valid,
    is_affine,
    is_complement_closed,
    is_in_im2,
)

__all__ = [
    "BUILTINS",
    "ConstraintLanguage",
    "Relation",
    "builtin",
    "is_0_valid",
    "is_1_valid",
    "is_affine",
    "is_complement_closed",
    "is_in_im2",
]

__version__ = "0.1.0"
