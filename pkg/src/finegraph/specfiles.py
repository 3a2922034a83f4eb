"""JSON formats for groups, graph specs, subgroups and fixture triples.

Group::

    {"backend": "freeGroup", "labels": ["a", "b"]}
    {"backend": "freeProductOfFinite", "orders": [2, 3], "labels": ["s", "t"]}
    {"backend": "finiteTable", "cyclic": [6], "labels": ["x"]}
    {"backend": "finiteTable", "table": [[...]], "generators": {"x": 1}, "names": [...]}

Graph (``kind`` explicit, cayley, coned)::

    {"group": {...}, "kind": "explicit",
     "vertex_orbits": [{"id": "s", "stabilizer": ["s"]}],
     "edge_orbits": [{"id": "e", "ends": [["s", "1"], ["t", "1"]]}]}
    {"group": {...}, "kind": "coned", "S": ["a", "b"],
     "peripherals": [{"name": "A", "gens": ["a"]}]}

Subgroup::

    {"gens": ["s t"]}  or  {"whole": true}

Errors are :class:`SpecError` carrying the JSON line when one is known.
"""

from __future__ import annotations

import json
from pathlib import Path

from .cayley import Peripheral, cayley_graph, coned_off, RelativeCayleyGraph
from .eqgraph import EdgeOrbit, EquivariantGraphSpec, GraphError, VertexOrbit
from .groups import FiniteGroup, FreeGroup, FreeProduct, Group, GroupError, Subgroup


class SpecError(ValueError):
    """Bad input; ``token`` is the offending JSON value, used to find its line."""

    def __init__(self, msg, line=None, path=None, token=None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + msg)
        self.msg = msg
        self.line = line
        self.path = path
        self.token = token

    def anchored(self, path, text: str) -> "SpecError":
        """The same error with the (first) line holding ``token``."""
        line = self.line
        if line is None and self.token is not None:
            needle = json.dumps(self.token)
            for k, row in enumerate(text.splitlines(), 1):
                if needle in row:
                    line = k
                    break
        return SpecError(self.msg, line=line, path=path, token=self.token)


def read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read file ({exc.strerror})", path=path) from exc


def parse_json(text: str, path=None):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(exc.msg, line=exc.lineno, path=path) from exc


def load_json(path) -> dict:
    return parse_json(read_text(path), path)


def _need(d: dict, key: str, what: str):
    if not isinstance(d, dict) or key not in d:
        raise SpecError(f"{what}: missing field {key!r}")
    return d[key]


def group_from_json(d) -> Group:
    backend = _need(d, "backend", "group")
    try:
        if backend == "freeGroup":
            return FreeGroup(_need(d, "labels", "group"), name=d.get("name"))
        if backend == "freeProductOfFinite":
            return FreeProduct(_need(d, "orders", "group"), _need(d, "labels", "group"), name=d.get("name"))
        if backend == "finiteTable":
            if "cyclic" in d:
                return FiniteGroup.cyclic_product(d["cyclic"], d.get("labels"), name=d.get("name"))
            return FiniteGroup(_need(d, "table", "group"), _need(d, "generators", "group"),
                               names=d.get("names"), name=d.get("name") or "G")
    except (GroupError, TypeError, ValueError) as exc:
        raise SpecError(f"group: {exc}") from exc
    raise SpecError(f"group: unknown backend {backend!r}", token=backend)


def group_to_json(G: Group) -> dict:
    if isinstance(G, FreeGroup):
        return {"backend": "freeGroup", "labels": list(G.labels)}
    if isinstance(G, FreeProduct):
        return {"backend": "freeProductOfFinite", "orders": list(G.orders), "labels": list(G.labels)}
    if isinstance(G, FiniteGroup):
        if getattr(G, "cyclic_orders", None):
            return {"backend": "finiteTable", "cyclic": list(G.cyclic_orders), "labels": list(G.labels)}
        return {"backend": "finiteTable", "table": [list(r) for r in G.table],
                "generators": dict(G._gens), "names": list(G.names)}
    raise SpecError(f"cannot serialize group {G!r}")


def _words(G: Group, ws, what: str):
    out = []
    for w in ws:
        try:
            out.append(G.parse(w))
        except (GroupError, ValueError, AttributeError) as exc:
            raise SpecError(f"{what}: {exc}", token=w) from exc
    return out


def subgroup_from_json(G: Group, d, name=None) -> Subgroup:
    if isinstance(d, list):
        d = {"gens": d}
    if d in ("whole", "G") or (isinstance(d, dict) and d.get("whole")):
        return Subgroup(G, whole=True, name=name or "G")
    gens = _words(G, _need(d, "gens", "subgroup"), "subgroup")
    try:
        return Subgroup(G, gens, name=d.get("name", name))
    except NotImplementedError as exc:
        raise SpecError(f"subgroup: {exc}") from exc


def subgroup_to_json(H: Subgroup) -> dict:
    if H.kind == "whole":
        return {"whole": True}
    out = {"gens": [H.group.format(g) for g in H.generators]}
    if H.name:
        out["name"] = H.name
    return out


def peripherals_from_json(G: Group, ps) -> list[Peripheral]:
    out = []
    for p in ps or []:
        name = _need(p, "name", "peripheral")
        out.append(Peripheral(name, subgroup_from_json(G, p, name=name)))
    return out


def graph_from_json(d, group: Group | None = None):
    """Build an equivariant spec (or a ``ConedOffSpec`` for kind ``coned``)."""
    G = group or group_from_json(_need(d, "group", "graph"))
    kind = d.get("kind", "explicit")
    try:
        if kind == "cayley":
            S = _words(G, _need(d, "S", "graph"), "generators")
            return cayley_graph(G, S, name=d.get("name", "Cayley"))
        if kind == "coned":
            S = _words(G, d.get("S", []), "generators")
            return coned_off(G, S, peripherals_from_json(G, d.get("peripherals")), name=d.get("name", "ConedOff"))
        if kind == "relative":
            S = _words(G, d.get("S", []), "generators")
            return RelativeCayleyGraph(G, S, peripherals_from_json(G, d.get("peripherals")))
        if kind != "explicit":
            raise SpecError(f"graph: unknown kind {kind!r}", token=kind)
        vorbits = []
        for o in _need(d, "vertex_orbits", "graph"):
            stab = o.get("stabilizer", [])
            vorbits.append(VertexOrbit(_need(o, "id", "vertex orbit"),
                                       subgroup_from_json(G, stab)))
        eorbits = []
        for e in d.get("edge_orbits", []):
            ends = _need(e, "ends", "edge orbit")
            eid = _need(e, "id", "edge orbit")
            if len(ends) != 2 or any(len(x) != 2 for x in ends):
                raise SpecError(f"edge orbit {eid}: need two [orbit, word] ends", token=eid)
            (o0, w0), (o1, w1) = ends
            for o in (o0, o1):
                if o not in {v.id for v in vorbits}:
                    raise SpecError(f"edge orbit {eid}: unknown vertex orbit {o!r}", token=o)
            g0, g1 = _words(G, [w0, w1], f"edge orbit {eid}")
            eorbits.append(EdgeOrbit(eid, (o0, g0), (o1, g1)))
        return EquivariantGraphSpec(G, vorbits, eorbits, name=d.get("name", "K"),
                                    allow_inversions=d.get("allow_inversions", False))
    except SpecError:
        raise
    except (GraphError, GroupError, ValueError, TypeError) as exc:
        raise SpecError(f"graph: {exc}") from exc


def graph_to_json(spec: EquivariantGraphSpec) -> dict:
    G = spec.group
    return {
        "group": group_to_json(G),
        "kind": "explicit",
        "name": spec.name,
        "allow_inversions": spec.allow_inversions,
        "vertex_orbits": [{"id": o.id, "stabilizer": subgroup_to_json(o.stabilizer)}
                          for o in spec.vertex_orbits.values()],
        "edge_orbits": [{"id": e.id, "ends": [[e.end0[0], G.format(e.end0[1])],
                                              [e.end1[0], G.format(e.end1[1])]]}
                        for e in spec.edge_orbits.values()],
    }


def load_graph(path, group: Group | None = None):
    text = read_text(path)
    d = parse_json(text, path)
    try:
        return graph_from_json(d, group)
    except SpecError as exc:
        raise exc.anchored(path, text) from exc


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
