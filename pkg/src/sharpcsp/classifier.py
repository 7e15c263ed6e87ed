"""Three-way complexity classification of constraint languages.

A language where every relation is affine admits exact polynomial-time
counting.  Failing that, if every relation is closed under componentwise
AND and OR, approximate counting is interreducible with counting
independent sets in bipartite graphs.  In all remaining cases it is as
hard to approximate as counting satisfying assignments of CNF formulas.
Verdicts come with per-relation flags and explicit witness tuples.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .relations import (
    AffineWitness,
    ConstraintLanguage,
    Im2Witness,
    im2_witness,
    is_affine,
    is_in_im2,
    non_affine_witness,
)


class Verdict(enum.Enum):
    EXACT_POLY_TIME = "FP"
    BIS_EQUIVALENT = "BIS"
    SAT_EQUIVALENT = "SAT"


@dataclass(frozen=True)
class RelationReport:
    name: str
    affine: bool
    im2: bool


@dataclass(frozen=True)
class Classification:
    """Verdict plus certificates.

    non_affine carries the first non-affine relation and its witness
    whenever the verdict is not EXACT_POLY_TIME; non_im2 carries the
    first relation violating AND/OR closure exactly for SAT_EQUIVALENT.
    The two may name the same relation.
    """

    verdict: Verdict
    per_relation: tuple[RelationReport, ...]
    non_affine: tuple[str, AffineWitness] | None
    non_im2: tuple[str, Im2Witness] | None

    def to_json(self) -> dict:
        witnesses = {}
        if self.non_affine is not None:
            name, w = self.non_affine
            witnesses["non_affine"] = {"relation": name, **w.to_json()}
        if self.non_im2 is not None:
            name, w = self.non_im2
            witnesses["non_im2"] = {"relation": name, **w.to_json()}
        return {
            "verdict": self.verdict.value,
            "relations": [
                {"name": r.name, "affine": r.affine, "im2": r.im2} for r in self.per_relation
            ],
            "witnesses": witnesses,
        }


def classify(lang: ConstraintLanguage) -> Classification:
    """Classify a language, checking the affine branch first, then closure.

    Witnesses are deterministic: the offending relation is the first by
    language insertion order, its witness the lexicographically smallest.
    """
    reports = tuple(
        RelationReport(name, is_affine(rel), is_in_im2(rel)) for name, rel in lang.items()
    )
    first_non_affine = next((r.name for r in reports if not r.affine), None)
    first_non_im2 = next((r.name for r in reports if not r.im2), None)
    if first_non_affine is None:
        return Classification(Verdict.EXACT_POLY_TIME, reports, None, None)
    affine_evidence = (first_non_affine, non_affine_witness(lang[first_non_affine]))
    if first_non_im2 is None:
        return Classification(Verdict.BIS_EQUIVALENT, reports, affine_evidence, None)
    im2_evidence = (first_non_im2, im2_witness(lang[first_non_im2]))
    return Classification(Verdict.SAT_EQUIVALENT, reports, affine_evidence, im2_evidence)
