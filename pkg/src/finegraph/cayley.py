"""Cayley graphs, coned-off Cayley graphs and relative Cayley graphs.

``cayley_graph`` and ``coned_off`` return equivariant specs.  The relative
Cayley graph uses every element of every peripheral subgroup as a generator,
so it has infinitely many edge orbits; it is represented by
:class:`RelativeCayleyGraph`, which materializes word-ball windows with
labelled edges.  Edge labels are ``("S", s)`` for relative generators and
``(i, p)`` for ``p`` in the ``i``-th peripheral subgroup, keeping the union
disjoint even when two labels name the same element.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .eqgraph import (EdgeOrbit, EquivariantGraphSpec, GraphError, VertexOrbit, Window,
                      edge_key)
from .groups import Element, Group, Subgroup, trivial_subgroup

GROUP_ORBIT = "G"


class RelativeGenerationError(GraphError):
    pass


@dataclass
class Peripheral:
    name: str
    subgroup: Subgroup


def _pairs(G: Group, S: Sequence[Element]) -> list[Element]:
    """One representative of each ``{s, s^-1}``, in input order."""
    reps: list = []
    for s in S:
        if s != G.identity and s not in reps and G.inv(s) not in reps:
            reps.append(s)
    return reps


def close_under_inverses(G: Group, S: Sequence[Element]) -> list[Element]:
    out: list = []
    for s in S:
        for x in (s, G.inv(s)):
            if x != G.identity and x not in out:
                out.append(x)
    return out


def _s_label(G: Group, s: Element) -> str:
    return "s:" + G.format(s).replace(" ", "")


def generates(G: Group, S: Sequence[Element], radius: int = 3, depth: int = 12) -> bool:
    """Ball check: every metric generator is a word of length <= ``depth`` in ``S``."""
    targets = {g for g in G.ball(1) if g != G.identity}
    seen = {G.identity}
    frontier = [G.identity]
    for _ in range(depth):
        nxt = []
        for x in frontier:
            for s in S:
                y = G.mul(x, s)
                if y not in seen and G.length(y) <= radius + depth:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
        if targets <= seen:
            return True
    return targets <= seen


def cayley_graph(G: Group, S: Sequence[Element], name: str = "Cayley") -> EquivariantGraphSpec:
    """``Γ(G, S)``: one free vertex orbit and one edge orbit per pair ``{s, s^-1}``.

    Involutions give edges swapped by the action; as simple edges they stand
    for the pair of oriented edges ``(g, s)`` and ``(gs, s)``.
    """
    sset = set(S)
    for s in S:
        if G.inv(s) not in sset:
            raise GraphError(f"generating set is not closed under inverses: missing inverse of {G.format(s)}")
    reps = _pairs(G, S)
    edges = [EdgeOrbit(_s_label(G, s), (GROUP_ORBIT, G.identity), (GROUP_ORBIT, s)) for s in reps]
    spec = EquivariantGraphSpec(G, [VertexOrbit(GROUP_ORBIT, trivial_subgroup(G))], edges,
                                name=name, allow_inversions=True,
                                meta={"kind": "cayley", "S": list(S)})
    spec.meta["connected_on_ball"] = generates(G, close_under_inverses(G, S))
    return spec


def check_relative_generation(G: Group, S: Sequence[Element], peripherals: Sequence[Peripheral],
                              depth: int = 8) -> bool:
    steps = close_under_inverses(G, S)
    for P in peripherals:
        steps += [p for p in P.subgroup.elements_within(depth) if p != G.identity]
    return generates(G, steps, depth=depth)


@dataclass
class ConedOffSpec:
    spec: EquivariantGraphSpec
    S: list
    peripherals: list
    cone_orbits: dict = field(default_factory=dict)
    cone_edge_orbits: dict = field(default_factory=dict)

    @property
    def group(self) -> Group:
        return self.spec.group

    def is_cone(self, v) -> bool:
        return v[0] in self.cone_orbits.values()

    def element_vertex(self, g: Element):
        return (GROUP_ORBIT, g)

    def cone_vertex(self, g: Element, index: int):
        return self.spec.vertex(self.cone_orbits[self.peripherals[index].name], g)

    def window(self, R: int) -> Window:
        from .eqgraph import group_window
        return group_window(self.spec, R)

    def without_cones(self) -> EquivariantGraphSpec:
        """Drop cone vertices and cone edges, recovering ``Γ(G, S)``."""
        return self.spec.extended(drop_vertex=set(self.cone_orbits.values()),
                                  drop_edge=set(self.cone_edge_orbits.values()),
                                  name="Cayley", meta={"kind": "cayley"})


def coned_off(G: Group, S: Sequence[Element], peripherals: Sequence[Peripheral],
              name: str = "ConedOff") -> ConedOffSpec:
    """``Γ̂(G, S ∪ P)``: Cayley graph plus a cone vertex per left coset ``gP``."""
    S = list(S)
    if not check_relative_generation(G, S, peripherals):
        raise RelativeGenerationError(
            "S is not a relative generating set (ball check failed)")
    reps = _pairs(G, S)
    vorbits = [VertexOrbit(GROUP_ORBIT, trivial_subgroup(G))]
    eorbits = [EdgeOrbit(_s_label(G, s), (GROUP_ORBIT, G.identity), (GROUP_ORBIT, s)) for s in reps]
    cones, cone_edges = {}, {}
    for P in peripherals:
        oid, eid = f"cone:{P.name}", f"cone-edge:{P.name}"
        vorbits.append(VertexOrbit(oid, P.subgroup))
        eorbits.append(EdgeOrbit(eid, (GROUP_ORBIT, G.identity), (oid, G.identity)))
        cones[P.name], cone_edges[P.name] = oid, eid
    spec = EquivariantGraphSpec(G, vorbits, eorbits, name=name, allow_inversions=True,
                                meta={"kind": "coned", "S": S,
                                      "peripherals": [p.name for p in peripherals]})
    return ConedOffSpec(spec, S, list(peripherals), cones, cone_edges)


class RelativeCayleyGraph:
    """``Γ̄(G, S ⊔ ⨆P)``, materialized on word balls."""

    def __init__(self, G: Group, S: Sequence[Element], peripherals: Sequence[Peripheral]):
        if not check_relative_generation(G, list(S), peripherals):
            raise RelativeGenerationError("S is not a relative generating set (ball check failed)")
        self.group = G
        self.S = close_under_inverses(G, S)
        self.peripherals = list(peripherals)
        self._windows: dict[int, Window] = {}

    def vertex(self, g: Element):
        return (GROUP_ORBIT, g)

    def edge_orbit(self, label) -> str:
        if label[0] == "S":
            return "S"
        return f"P:{self.peripherals[label[0]].name}"

    def label_of(self, key, g: Element, h: Element):
        """Label of the edge ``key`` traversed from ``g`` to ``h``."""
        G = self.group
        x = G.mul(G.inv(g), h)
        if key[0] == "S":
            return ("S", x)
        name = key[0][2:]
        idx = next(i for i, P in enumerate(self.peripherals) if P.name == name)
        return (idx, x)

    def window(self, R: int) -> Window:
        if R in self._windows:
            return self._windows[R]
        G = self.group
        ball = G.ball(R)
        inball = set(ball)
        edges = set()
        per = [(f"P:{P.name}", [p for p in P.subgroup.elements_within(2 * R) if p != G.identity])
               for P in self.peripherals]
        for g in ball:
            u = (GROUP_ORBIT, g)
            for s in self.S:
                h = G.mul(g, s)
                if h in inball:
                    edges.add(edge_key("S", u, (GROUP_ORBIT, h)))
            for oid, elems in per:
                for p in elems:
                    h = G.mul(g, p)
                    if h in inball:
                        edges.add(edge_key(oid, u, (GROUP_ORBIT, h)))
        depth = {(GROUP_ORBIT, g): G.length(g) for g in ball}
        w = Window(depth, edges, center=(GROUP_ORBIT, G.identity), radius=R, depth=depth,
                   kind="group")
        self._windows[R] = w
        return w

    def relpath(self, w: Window, vertices: Sequence) -> "RelPath":
        """Label a window vertex path, preferring S-edges over P-edges."""
        labels = []
        for a, b in zip(vertices, vertices[1:]):
            keys = w.edges_between(a, b)
            if not keys:
                raise GraphError("consecutive vertices are not adjacent")
            key = min(keys, key=lambda k: (k[0] != "S", k[0]))
            labels.append(self.label_of(key, a[1], b[1]))
        return RelPath(self.group, tuple(v[1] for v in vertices), tuple(labels))


@dataclass(frozen=True)
class RelPath:
    """A path in the relative Cayley graph: group elements plus edge labels."""

    group: Group
    elements: tuple
    labels: tuple

    def __post_init__(self):
        G = self.group
        if len(self.labels) != max(len(self.elements) - 1, 0):
            raise GraphError("one label per edge required")
        for (g, h), lab in zip(zip(self.elements, self.elements[1:]), self.labels):
            if G.mul(g, lab[1]) != h:
                raise GraphError(f"label {G.format(lab[1])} does not join {G.format(g)} to {G.format(h)}")

    @classmethod
    def from_labels(cls, G: Group, start: Element, labels: Sequence) -> "RelPath":
        elems = [start]
        for lab in labels:
            elems.append(G.mul(elems[-1], lab[1]))
        return cls(G, tuple(elems), tuple(labels))

    def __len__(self):
        return len(self.labels)

    def components(self) -> list[tuple[int, int, int]]:
        """Maximal P-components as ``(first_edge, last_edge_exclusive, P_index)``."""
        out = []
        i = 0
        while i < len(self.labels):
            kind = self.labels[i][0]
            if kind == "S":
                i += 1
                continue
            j = i
            while j < len(self.labels) and self.labels[j][0] == kind:
                j += 1
            out.append((i, j, kind))
            i = j
        return out

    def phase_indices(self) -> list[int]:
        interior = {k for a, b, _ in self.components() for k in range(a + 1, b)}
        return [k for k in range(len(self.elements)) if k not in interior]

    def phase_vertices(self) -> list:
        return [self.elements[k] for k in self.phase_indices()]

    def is_embedded(self) -> bool:
        return len(set(self.elements)) == len(self.elements)

    def has_backtracking(self, peripherals=None, same_coset: bool = False) -> bool:
        """Two disjoint maximal components for the same peripheral subgroup.

        With ``same_coset`` only components in the same left coset count.
        """
        comps = self.components()
        for x in range(len(comps)):
            for y in range(x + 1, len(comps)):
                a0, _, i = comps[x]
                b0, _, j = comps[y]
                if i != j:
                    continue
                if not same_coset:
                    return True
                P = peripherals[i].subgroup
                G = self.group
                if P.contains(G.mul(G.inv(self.elements[a0]), self.elements[b0])):
                    return True
        return False

    def compress(self) -> "RelPath":
        """Replace each maximal P-component by a single P-edge."""
        G = self.group
        comps = {a: (b, i) for a, b, i in self.components()}
        elems = [self.elements[0]]
        labels = []
        k = 0
        while k < len(self.labels):
            if k in comps:
                b, i = comps[k]
                x = G.mul(G.inv(self.elements[k]), self.elements[b])
                if x != G.identity:
                    labels.append((i, x))
                    elems.append(self.elements[b])
                k = b
            else:
                labels.append(self.labels[k])
                elems.append(self.elements[k + 1])
                k += 1
        return RelPath(G, tuple(elems), tuple(labels))


def phi(path: RelPath, coned: ConedOffSpec) -> list:
    """Image in ``Γ̂``: P-edges become 2-paths through the coset's cone vertex."""
    out = [coned.element_vertex(path.elements[0])]
    for g, lab, h in zip(path.elements, path.labels, path.elements[1:]):
        if lab[0] != "S":
            out.append(coned.cone_vertex(g, lab[0]))
        out.append(coned.element_vertex(h))
    return out


def has_backtracking(path: RelPath, peripherals=None, same_coset: bool = False) -> bool:
    return path.has_backtracking(peripherals, same_coset)


def compress_components(path: RelPath) -> RelPath:
    return path.compress()


def window_distance_table(w: Window, sources, targets) -> dict:
    out = {}
    for s in sources:
        d = w.distances_from(s)
        for t in targets:
            out[s, t] = d.get(t, float("inf"))
    return out


def bfs_tree_count(w: Window, v) -> int:
    """Size of the component of ``v`` (connectivity checks)."""
    seen = {v}
    q = deque([v])
    while q:
        x = q.popleft()
        for y in w.nbrs[x]:
            if y not in seen:
                seen.add(y)
                q.append(y)
    return len(seen)
