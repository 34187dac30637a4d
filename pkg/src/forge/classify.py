"""Classifying triples: a genus-like number together with a nested pair of
end spaces, given either exactly (as an automaton pair spec) or as a finite
truncation (a flagged ends tree)."""

from __future__ import annotations

from dataclasses import dataclass

from . import cantor as ca
from .collapse import FiniteEndsTree
from .errors import PreconditionError
from .tower import LeafReport

INFINITE = "inf"


@dataclass(frozen=True)
class ClassifyingTriple:
    genus: int | str  # a number or "inf"
    pair: ca.PairSpec | None = None
    truncation: FiniteEndsTree | None = None

    def to_json(self) -> dict:
        return {
            "genus": self.genus,
            "pair": self.pair.to_json() if self.pair else None,
            "truncation": self.truncation.to_json() if self.truncation else None,
        }


def check_triple(t: ClassifyingTriple) -> list[str]:
    """The genus is infinite exactly when some end is accumulated by
    homology; with only a truncation at hand the flags of the deepest level
    stand in for that."""
    out = []
    if t.pair is None and t.truncation is None:
        out.append("no end pair data")
        return out
    if t.pair is not None:
        errs = ca.validate_pair_spec(t.pair)
        out += [f"pair: {m}" for m in errs]
        if not errs:
            accumulated = ca.k0_nonempty(t.pair)
            if (t.genus == INFINITE) != accumulated:
                out.append("genus flag disagrees with the accumulated end set")
    elif t.truncation is not None and t.truncation.levels:
        flagged = any(n.hom for n in t.truncation.levels[-1])
        if t.genus != INFINITE and flagged:
            out.append("finite genus but homology-flagged branches survive")
        if t.genus == INFINITE and not flagged:
            out.append("infinite genus but no homology-flagged branch survives")
    return out


def condition_star_triple(t: ClassifyingTriple) -> bool | None:
    """Exact when the pair is an automaton spec; None (undetermined) when
    only a truncation is available."""
    if t.pair is not None:
        return ca.condition_star(t.pair)
    return None


def surface_triple_of_graph(report: LeafReport) -> ClassifyingTriple:
    """Classifying data of a truncated leaf: the Betti trend (stabilized
    value, or the infinite flag under strict growth across the whole audit
    window) plus the deepest ends tree."""
    if not report.betti:
        raise PreconditionError("empty report")
    values = report.betti
    if len(values) >= 2 and all(a < b for a, b in zip(values, values[1:])):
        genus: int | str = INFINITE
    else:
        genus = values[-1]
    return ClassifyingTriple(genus, truncation=report.trees[-1])
