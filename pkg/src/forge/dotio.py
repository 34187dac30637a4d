"""Graphviz DOT emission with the usual drawing conventions: boundary
vertices as white circles, simple vertices as black circles, homology
vertices as squares."""

from __future__ import annotations

from . import cgraph as cg
from .cgraph import CGraph
from .covering import CoveringMap

_STYLE = {
    cg.B1: 'shape=circle, style=filled, fillcolor=white',
    cg.B2: 'shape=circle, style=filled, fillcolor=white',
    cg.S4: 'shape=circle, style=filled, fillcolor=black, fontcolor=white',
    cg.H2: 'shape=square, style=filled, fillcolor=lightgray',
    cg.H4: 'shape=square, style=filled, fillcolor=gray',
}


def graph_to_dot(g: CGraph, name: str = "G") -> str:
    lines = [f"graph {name} {{", "  node [fixedsize=true, width=0.3];"]
    for v in g.vertex_ids():
        style = _STYLE[g.kinds[v]]
        peri = ", peripheries=2" if v == g.pointing else ""
        lines.append(f'  v{v} [label="{v}", {style}{peri}];')
    for e in g.edge_ids():
        a, b = g.edges[e]
        lines.append(f"  v{a} -- v{b} [label=\"{e}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def covering_to_dot(p: CoveringMap) -> str:
    """Total space colored by base fiber."""
    palette = ["#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
               "#46f0f0", "#f032e6", "#bcf60c", "#fabebe", "#008080"]
    base_ids = p.base.vertex_ids()
    color = {b: palette[n % len(palette)] for n, b in enumerate(base_ids)}
    lines = ["graph total {", "  node [fixedsize=true, width=0.3];"]
    for v in p.total.vertex_ids():
        style = _STYLE[p.total.kinds[v]]
        lines.append(f'  v{v} [label="{v}", {style}, color="{color[p.vmap[v]]}"];')
    for e in p.total.edge_ids():
        a, b = p.total.edges[e]
        lines.append(f"  v{a} -- v{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
