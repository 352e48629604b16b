"""Classification of corpus graphs by the rewrite-and-relabel pipeline.

A graph vanishes if some admissible heavy mollifier edge can be integrated
by parts so that every resulting graph passes all counting conditions under
the adjusted labelling, with a positive epsilon exponent left over.  The
exceptional classes are: no admissible edge at all (either one of the
critical graphs feeding the limit, or one of the square-kernel graphs
handled by direct kernel bounds), a failure of the root-anchored condition
already under canonical labels, and failures of the interior condition that
no admissible rewrite repairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exts import EXT_ZERO, ExtRational
from .feynman import FeynmanGraph, canonical_form, edge_classes
from .powercount import (
    ConditionReport,
    LabelledGraph,
    adjusted_labelling,
    canonical_labelling,
    check_conditions,
    critical_blocks,
    dtest_normalise,
    ibp_at_edge,
    ibp_maps_at_edge,
    lambda_exponent,
    lambda_penalty,
)

VANISHES = "VanishesViaAdjustment"
IN_G2 = "InG2"
IN_G3 = "InG3"
IN_G4 = "InG4"
CRITICAL = "Critical"
UNCLASSIFIED = "Unclassified"


@dataclass
class WitnessCase:
    moves: dict
    graph: FeynmanGraph
    labelled: LabelledGraph
    report: ConditionReport
    scale_shift: int


@dataclass
class Classification:
    verdict: str
    alpha: ExtRational
    estar: int | None = None
    cases: list[WitnessCase] = field(default_factory=list)
    eps_rate: ExtRational = EXT_ZERO
    scale_rate: ExtRational = EXT_ZERO
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "alpha": str(self.alpha),
            "estar": self.estar,
            "eps_rate": str(self.eps_rate),
            "scale_rate": str(self.scale_rate),
            "witnesses": [
                {
                    "moves": {str(v): t for v, t in case.moves.items()},
                    "conditions_pass": case.report.ok(),
                    "alpha": str(case.report.alpha + ExtRational.of(case.scale_shift)),
                }
                for case in self.cases
            ],
            "detail": self.detail,
        }


def admissible_rewrite_edges(graph: FeynmanGraph) -> list[int]:
    """Heavy mollifiers outside every critical block, away from dK edges."""
    blocks = critical_blocks(graph)
    dk_vertices = set()
    for e in graph.edges:
        if e.etype.tag == "dK":
            dk_vertices.update((e.tail, e.head))
    out = []
    for i, e in enumerate(graph.edges):
        if e.etype.tag != "DDRho":
            continue
        if any({e.tail, e.head} <= block for block in blocks):
            continue
        if e.tail in dk_vertices or e.head in dk_vertices:
            continue
        out.append(i)
    return out


def canonical_root_condition_ok(graph: FeynmanGraph) -> bool:
    normalised, _ = dtest_normalise(graph)
    labelled = canonical_labelling(normalised)
    return not check_conditions(labelled).cond3


def _joint_maps(graph: FeynmanGraph, estar_set) -> list[dict[int, int]]:
    """All simultaneous receiver assignments at the rewritten edges' ends."""
    import itertools

    from .powercount import ibp_receiver_choices

    slots = []
    for estar in estar_set:
        e = graph.edges[estar]
        for v in (e.tail, e.head):
            choices = ibp_receiver_choices(graph, v)
            if not choices:
                return []
            slots.append([(v, c) for c in choices])
    return [dict(combo) for combo in itertools.product(*slots)]


def _try_witness(graph: FeynmanGraph, estar_set) -> tuple[bool, list[WitnessCase]]:
    from .powercount import partial_ibp

    estar_set = sorted(estar_set)
    cases = []
    maps = _joint_maps(graph, estar_set)
    for moves in maps:
        try:
            rewritten = partial_ibp(graph, moves)
        except ValueError:
            return False, cases
        normalised, shift = dtest_normalise(rewritten)
        labelled = adjusted_labelling(normalised, estar_set=frozenset(estar_set))
        report = check_conditions(labelled)
        cases.append(WitnessCase(moves, normalised, labelled, report, shift))
        if not report.ok():
            return False, cases
    return bool(cases), cases


def classify(
    graph: FeynmanGraph,
    crit_forms: frozenset | None = None,
    g2_forms: frozenset | None = None,
) -> Classification:
    normalised, shift = dtest_normalise(graph)
    alpha = lambda_exponent(canonical_labelling(normalised)) + ExtRational.of(shift)

    candidates = admissible_rewrite_edges(graph)
    if not candidates:
        form = canonical_form(graph)
        if crit_forms is not None and form in crit_forms:
            return Classification(CRITICAL, alpha, detail="no admissible rewrite edge")
        if g2_forms is not None and form not in g2_forms:
            return Classification(
                UNCLASSIFIED, alpha, detail="no admissible rewrite edge, not listed"
            )
        return Classification(IN_G2, alpha, detail="no admissible rewrite edge")

    if not canonical_root_condition_ok(graph):
        return Classification(
            IN_G3, alpha, detail="root-anchored condition fails under canonical labels"
        )

    import itertools

    singles = [[e] for e in candidates]
    pairs = [list(c) for c in itertools.combinations(candidates, 2)]
    for estar_set in singles + pairs:
        ok, cases = _try_witness(graph, estar_set)
        if ok:
            leftover = cases[0].labelled.leftover
            penalty = lambda_penalty(cases[0].labelled)
            return Classification(
                VANISHES,
                alpha,
                estar=estar_set[0] if len(estar_set) == 1 else tuple(estar_set),
                cases=cases,
                eps_rate=leftover,
                scale_rate=penalty,
            )

    return Classification(
        IN_G4, alpha, detail="every admissible rewrite leaves a failing subset"
    )


def manifest_forms(entries) -> frozenset:
    forms = set()
    for entry in entries:
        for g in entry.expand():
            forms.add(canonical_form(g))
    return frozenset(forms)


def classify_corpus(corpus, crit_forms=None, g2_forms=None):
    """Classify a list of (ref, graph) pairs; returns ref -> Classification."""
    return {
        ref: classify(graph, crit_forms=crit_forms, g2_forms=g2_forms)
        for ref, graph in corpus
    }
