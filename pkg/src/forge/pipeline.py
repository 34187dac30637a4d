"""End-to-end construction: from an automaton pair spec to a tower directory
whose designated leaf realizes the pair's end behaviour at finite depth.

Stages: star-condition check, adapted partition sequence, the containment
graph of the sequence (or the finite-ends graph when the big space is
finite), its chain of odd balls with shell witnesses, the extended tower,
and the reports.  Everything is deterministic given the manifest seed."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from . import cantor as ca
from . import cgraph as cg
from . import classify as cl
from . import forest as fo
from . import tower as tw
from .errors import PreconditionError
from .manifest import Manifest


@dataclass(frozen=True)
class PipelineResult:
    spec: ca.PairSpec
    seq: ca.PartitionSeq | None
    graph: cg.CGraph
    chain: fo.CGraphForest
    ext: tw.ExtendedTower
    report: tw.LeafReport
    audit: list[str]
    triple: cl.ClassifyingTriple


def _sequence_with_radius(spec: ca.PairSpec, floors_needed: int) -> ca.PartitionSeq:
    horizon = 1
    while True:
        seq = ca.adapted_sequence(spec, horizon)
        if len(seq.floors) - 1 >= floors_needed:
            return seq
        horizon += 1
        if horizon > floors_needed + 8:
            raise PreconditionError("partition sequence does not deepen")


def run_pipeline(spec: ca.PairSpec, depth: int,
                 max_vertices: int = 500_000) -> PipelineResult:
    errs = ca.validate_pair_spec(spec)
    if errs:
        raise PreconditionError("invalid pair spec: " + "; ".join(errs))
    if not ca.condition_star(spec):
        raise PreconditionError("pair not realizable: star condition fails")

    whole = ca.whole_space(spec)
    count = ca.size(whole)
    if count != ca.INF:
        graph = ca.finite_ends_graph(int(count), depth + 3)
        seq = None
        audit = []
    else:
        seq = _sequence_with_radius(spec, depth + 3)
        graph, _ = ca.build_gxi(seq, depth + 3)
        audit = ca.ends_match_audit(seq, spec, min(6, depth + 3))

    chain = fo.ball_chain_forest(graph, depth)
    seed = tw.seed_base()
    ext = tw.extended_tower(chain, seed, depth, max_vertices=max_vertices)
    report = tw.leaf_report_ray(ext, depth)
    triple = cl.ClassifyingTriple(
        cl.INFINITE if ca.k0_nonempty(spec) else report.betti[-1], pair=spec)
    return PipelineResult(spec, seq, graph, chain, ext, report, audit, triple)


def write_tower(result: PipelineResult, directory: Path, seed: int = 0) -> Manifest:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    man = Manifest(seed)
    man.log(f"pipeline depth={len(result.ext.tower)}")
    man.write_artifact(directory, "pair.json", result.spec.to_json())
    man.write_artifact(directory, "limit_graph.json", result.graph.to_json())
    if result.seq is not None:
        man.write_artifact(directory, "partitions.json", result.seq.to_json())
    for n, covering in enumerate(result.ext.tower):
        man.write_artifact(directory, f"floor{n}_graph.json",
                           covering.total.to_json())
        man.write_artifact(directory, f"floor{n}_covering.json",
                           covering.to_json())
    man.write_artifact(directory, "report.json", result.report.to_json())
    man.write_artifact(directory, "audit.json", {"mismatches": result.audit})
    man.write_artifact(directory, "triple.json", result.triple.to_json())
    man.save(directory)
    return man
