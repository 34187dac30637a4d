"""Command line front end.

Exit codes: 0 success, 1 validation failure, 2 precondition error,
3 resource cap."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import cantor as ca
from . import cgraph as cg
from . import classify as cl
from . import collapse as col
from . import covering as cov
from . import dotio
from . import forest as fo
from . import pipeline as pl
from . import tower as tw
from .errors import NotDecomposableError, PreconditionError, ResourceCapError
from .manifest import canonical_bytes


def _load(path):
    return json.loads(Path(path).read_text())


def _dump(data, path):
    if path:
        Path(path).write_bytes(canonical_bytes(data))
    else:
        click.echo(json.dumps(data, indent=2, sort_keys=True))


def _report(errors, label):
    for line in errors:
        click.echo(f"{label}: {line}")
    if errors:
        sys.exit(1)
    click.echo(f"{label}: ok")


@click.group()
def main():
    """Build, check and inspect typed graphs, finite covers and towers."""


@main.command()
@click.option("--in", "path", required=True)
@click.option("--kind", type=click.Choice(["graph", "covering", "collapse", "pair"]),
              default="graph")
def validate(path, kind):
    """Validate a JSON artifact."""
    data = _load(path)
    if kind == "graph":
        _report(cg.validate(cg.CGraph.from_json(data)), "graph")
    elif kind == "covering":
        _report(cov.validate_covering(cov.CoveringMap.from_json(data)), "covering")
    elif kind == "collapse":
        _report(col.validate_collapse(col.Collapse.from_json(data)), "collapse")
    else:
        _report(ca.validate_pair_spec(ca.PairSpec.from_json(data)), "pair")


@main.command()
@click.option("--in", "path", required=True)
def betti(path):
    """First Betti number of a graph."""
    click.echo(cg.betti(cg.CGraph.from_json(_load(path))))


@main.group()
def cover():
    """Covering operations."""


@cover.command("validate")
@click.option("--in", "path", required=True)
def cover_validate(path):
    _report(cov.validate_covering(cov.CoveringMap.from_json(_load(path))), "covering")


@cover.command("surgery")
@click.option("--in", "path", required=True)
@click.option("--cut-set", required=True, help="comma separated total-space b2 ids")
@click.option("--out", default=None)
def cover_surgery(path, cut_set, out):
    p0 = cov.CoveringMap.from_json(_load(path))
    xs = [int(x) for x in cut_set.split(",") if x]
    result = cov.surgery(p0, xs)
    _dump(result.covering.to_json(), out)


@cover.command("cyclic")
@click.option("--in", "path", required=True, help="graph JSON")
@click.option("--vertex", type=int, required=True)
@click.option("--copies", type=int, required=True)
@click.option("--out", default=None)
def cover_cyclic(path, vertex, copies, out):
    g = cg.CGraph.from_json(_load(path))
    _dump(cov.cyclic_surgery(g, vertex, copies).covering.to_json(), out)


@cover.command("disjoint")
@click.option("--in", "path", required=True, help="graph JSON")
@click.option("--copies", type=int, required=True)
@click.option("--out", default=None)
def cover_disjoint(path, copies, out):
    g = cg.CGraph.from_json(_load(path))
    _dump(cov.disjoint_cover(g, copies).covering.to_json(), out)


@main.group("collapse")
def collapse_group():
    """Collapse operations."""


@collapse_group.command("check")
@click.option("--in", "path", required=True)
def collapse_check(path):
    _report(col.validate_collapse(col.Collapse.from_json(_load(path))), "collapse")


@collapse_group.command("quotient")
@click.option("--in", "path", required=True, help="graph JSON")
@click.option("--family", required=True,
              help="semicolon separated comma lists of vertex ids")
@click.option("--out", default=None)
def collapse_quotient(path, family, out):
    g = cg.CGraph.from_json(_load(path))
    fam = [frozenset(int(x) for x in part.split(",") if x)
           for part in family.split(";") if part]
    _dump(col.quotient_by_family(g, fam).to_json(), out)


@collapse_group.command("ends-tree")
@click.option("--in", "path", required=True, help="graph JSON")
@click.option("--roots", required=True, help="comma separated vertex ids")
@click.option("--depth", type=int, default=4)
@click.option("--out", default=None)
def collapse_ends_tree(path, roots, depth, out):
    g = cg.CGraph.from_json(_load(path))
    rs = [int(x) for x in roots.split(",") if x]
    _dump(col.ends_tree(g, rs, depth).to_json(), out)


@main.group("forest")
def forest_group():
    """Forest operations."""


@forest_group.command("universal")
@click.option("--depth", type=int, default=1)
def forest_universal(depth):
    h = fo.universal_forest(depth)
    click.echo(json.dumps({"floors": [len(f) for f in h.forest.floors]}))


@main.group()
def pair():
    """Pair-space operations."""


@pair.command("check-star")
@click.option("--in", "path", required=True)
def pair_check_star(path):
    spec = ca.PairSpec.from_json(_load(path))
    errs = ca.validate_pair_spec(spec)
    if errs:
        _report(errs, "pair")
    click.echo("star condition: " + ("holds" if ca.condition_star(spec) else "fails"))


@pair.command("adapt")
@click.option("--in", "path", required=True)
@click.option("--horizon", type=int, default=2)
@click.option("--out", default=None)
def pair_adapt(path, horizon, out):
    spec = ca.PairSpec.from_json(_load(path))
    seq = ca.adapted_sequence(spec, horizon)
    _dump(seq.to_json(), out)


@pair.command("gxi")
@click.option("--in", "path", required=True)
@click.option("--depth", type=int, default=4)
@click.option("--out", default=None)
@click.option("--dot", "dot_out", default=None)
def pair_gxi(path, depth, out, dot_out):
    spec = ca.PairSpec.from_json(_load(path))
    seq = ca.adapted_sequence(spec, max(2, depth))
    g, _ = ca.build_gxi(seq, min(depth, len(seq.floors) - 1))
    _dump(g.to_json(), out)
    if dot_out:
        Path(dot_out).write_text(dotio.graph_to_dot(g))


@main.group("tower")
def tower_group():
    """Tower construction."""


@tower_group.command("build")
@click.option("--pair", "pair_path", required=True)
@click.option("--depth", type=int, default=2)
@click.option("--out", "out_dir", required=True)
@click.option("--seed", type=int, default=0)
def tower_build(pair_path, depth, out_dir, seed):
    spec = ca.PairSpec.from_json(_load(pair_path))
    result = pl.run_pipeline(spec, depth)
    pl.write_tower(result, Path(out_dir), seed=seed)
    click.echo(f"tower written to {out_dir}")


@tower_group.command("extend-finite")
@click.option("--ends", type=int, required=True)
@click.option("--depth", type=int, default=2)
@click.option("--out", default=None)
def tower_extend_finite(ends, depth, out):
    g = ca.finite_ends_graph(ends, depth + 3)
    chain = fo.ball_chain_forest(g, depth)
    ext = tw.extended_tower(chain, tw.seed_base(), depth)
    _dump(tw.leaf_report_ray(ext, depth).to_json(), out)


@main.command()
@click.option("--report", "report_path", required=True)
def classify(report_path):
    """Classifying data from a leaf report."""
    data = _load(report_path)
    genus = cl.INFINITE if all(
        a < b for a, b in zip(data["betti"], data["betti"][1:])) and \
        len(data["betti"]) > 1 else data["betti"][-1]
    click.echo(json.dumps({"genus": genus,
                           "branches": data["branches"][-1]}))


@main.command()
@click.option("--pair", "pair_path", required=True)
@click.option("--depth", type=int, default=2)
@click.option("--out", "out_dir", required=True)
@click.option("--seed", type=int, default=0)
def pipeline(pair_path, depth, out_dir, seed):
    """Full pipeline: pair spec to tower directory with reports."""
    spec = ca.PairSpec.from_json(_load(pair_path))
    result = pl.run_pipeline(spec, depth)
    pl.write_tower(result, Path(out_dir), seed=seed)
    click.echo(json.dumps({"betti": list(result.report.betti),
                           "branches": list(result.report.branches),
                           "audit_mismatches": len(result.audit)}))


@main.command()
@click.option("--in", "path", required=True)
@click.option("--out", default=None)
@click.option("--kind", type=click.Choice(["graph", "covering"]), default="graph")
def dot(path, out, kind):
    """Emit Graphviz DOT."""
    data = _load(path)
    if kind == "graph":
        text = dotio.graph_to_dot(cg.CGraph.from_json(data))
    else:
        text = dotio.covering_to_dot(cov.CoveringMap.from_json(data))
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text)


def run():  # pragma: no cover - thin wrapper
    try:
        main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.Abort:
        sys.exit(130)
    except NotDecomposableError as exc:
        click.echo(f"not decomposable: {exc}", err=True)
        sys.exit(2)
    except PreconditionError as exc:
        click.echo(f"precondition: {exc}", err=True)
        sys.exit(2)
    except ResourceCapError as exc:
        click.echo(f"resource cap: {exc}", err=True)
        sys.exit(3)


if __name__ == "__main__":  # pragma: no cover
    run()
