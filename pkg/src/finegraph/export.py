"""Deterministic DOT and JSON renderings of windows and ladders."""

from __future__ import annotations

import json

from .eqgraph import Window
from .ladder import SimpleLadder


def _name(spec, v) -> str:
    if spec is None:
        return str(v)
    return spec.format_vertex(v)


def _q(text: str) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def is_cone_vertex(v) -> bool:
    return isinstance(v, tuple) and isinstance(v[0], str) and v[0].startswith("cone:")


def window_dot(w: Window, name: str = "window") -> str:
    """Undirected DOT; cone vertices are boxes, everything else circles."""
    lines = [f"graph {_q(name)} {{", "  node [shape=circle];"]
    for v in w.vertices:
        attrs = ' [shape=box, style=filled, fillcolor="lightgrey"]' if is_cone_vertex(v) else ""
        lines.append(f"  {_q(_name(w.spec, v))}{attrs};")
    for orbit, u, v in w.edges:
        lines.append(f"  {_q(_name(w.spec, u))} -- {_q(_name(w.spec, v))} [label={_q(orbit)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def window_json(w: Window) -> dict:
    fmt = lambda v: _name(w.spec, v)  # noqa: E731
    adjacency = {fmt(v): sorted(fmt(x) for x in w.nbrs[v]) for v in w.vertices}
    return {
        "center": fmt(w.center) if w.center is not None else None,
        "radius": w.radius,
        "complete": w.complete,
        "vertices": [fmt(v) for v in w.vertices],
        "edges": [[o, fmt(u), fmt(v)] for o, u, v in w.edges],
        "adjacency": adjacency,
    }


def ladder_json(D: SimpleLadder, spec=None) -> dict:
    fmt = lambda v: _name(spec, v)  # noqa: E731
    return {
        "branch": D.branch,
        "n": D.n,
        "eps": D.eps,
        "lam": D.lam,
        "bound": D.bound,
        "P": [fmt(v) for v in D.P],
        "Q": [fmt(v) for v in D.Q],
        "cells": [[fmt(v) for v in c] for c in D.cells],
        "internal_arcs": [[fmt(v) for v in a] for a in D.internal_arcs],
    }


def ladder_dot(D: SimpleLadder, spec=None, name: str = "ladder") -> str:
    """P red, Q blue, internal arcs dashed; each 2-cell drawn as a filled cluster."""
    fmt = lambda v: _q(_name(spec, v))  # noqa: E731
    lines = [f"graph {_q(name)} {{", "  node [shape=circle];"]
    edges: dict = {}

    def add(a, b, attrs):
        key = tuple(sorted((fmt(a), fmt(b))))
        edges.setdefault(key, attrs)

    for a, b in zip(D.P, D.P[1:]):
        add(a, b, "color=red, penwidth=2")
    for a, b in zip(D.Q, D.Q[1:]):
        add(a, b, "color=blue, penwidth=2")
    for arc in D.internal_arcs:
        for a, b in zip(arc, arc[1:]):
            add(a, b, "style=dashed")
    for i, cell in enumerate(D.cells):
        lines.append(f"  subgraph {_q(f'cluster_cell{i + 1}')} {{")
        lines.append(f'    label={_q(f"R{i + 1} ({len(cell)})")}; style=filled; fillcolor="#eeeeee";')
        for v in sorted(set(cell), key=lambda x: fmt(x)):
            lines.append(f"    {fmt(v)};")
        lines.append("  }")
        for a, b in zip(cell, list(cell[1:]) + list(cell[:1])):
            add(a, b, "color=black")
    for (a, b), attrs in sorted(edges.items()):
        lines.append(f"  {a} -- {b} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
