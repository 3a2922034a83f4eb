"""Equivariant graphs given by finite quotient data, and finite windows.

A vertex is a pair ``(orbit_id, coset_rep)`` standing for ``g . v_orbit``
where ``coset_rep`` is the canonical representative of ``g Stab(orbit)``.
An edge orbit joins ``off0 . v_o0`` and ``off1 . v_o1``; its translate by
``h`` joins ``h off0 . v_o0`` and ``h off1 . v_o1``.  Edges are keyed by
``(edge_orbit_id, u, v)`` with ``u <= v``: within one orbit an edge is
determined by its endpoints, edges of different orbits may be parallel.

All enumeration happens on :class:`Window` objects, finite subgraphs that
record whether they are complete.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from itertools import islice
from typing import Iterable, Sequence

from .groups import Element, Group, GroupError, Subgroup, intersect

Vertex = tuple  # (orbit_id, token)
EdgeKey = tuple  # (edge_orbit_id, u, v), u <= v

DEFAULT_MAX_WINDOW = 200_000


class GraphError(ValueError):
    pass


class InversionError(GraphError):
    pass


class InfiniteValenceError(GraphError):
    pass


class DisconnectedError(GraphError):
    def __init__(self, msg, sizes=None, witness=None):
        super().__init__(msg)
        self.sizes = sizes
        self.witness = witness


def max_window() -> int:
    return int(os.environ.get("FINEGRAPH_MAX_WINDOW", DEFAULT_MAX_WINDOW))


def edge_key(orbit: str, u: Vertex, v: Vertex) -> EdgeKey:
    return (orbit, u, v) if u <= v else (orbit, v, u)


@dataclass(frozen=True)
class VertexOrbit:
    id: str
    stabilizer: Subgroup


@dataclass(frozen=True)
class EdgeOrbit:
    id: str
    end0: tuple[str, Element]
    end1: tuple[str, Element]


class EquivariantGraphSpec:
    """Finite quotient description of a G-graph."""

    def __init__(self, group: Group, vertex_orbits: Sequence[VertexOrbit],
                 edge_orbits: Sequence[EdgeOrbit], name: str = "K",
                 allow_inversions: bool = False, meta: dict | None = None):
        self.group = group
        self.name = name
        self.vertex_orbits = {o.id: o for o in vertex_orbits}
        self.edge_orbits = {e.id: e for e in edge_orbits}
        self.allow_inversions = allow_inversions
        self.meta = dict(meta or {})
        if len(self.vertex_orbits) != len(vertex_orbits):
            raise GraphError("duplicate vertex orbit ids")
        if len(self.edge_orbits) != len(edge_orbits):
            raise GraphError("duplicate edge orbit ids")
        self._incident: dict[str, list[tuple[str, int]]] = {o: [] for o in self.vertex_orbits}
        for e in edge_orbits:
            for side, (o, _) in enumerate((e.end0, e.end1)):
                if o not in self.vertex_orbits:
                    raise GraphError(f"edge orbit {e.id} refers to unknown vertex orbit {o!r}")
                self._incident[o].append((e.id, side))
        self._setstab: dict[str, list[Element]] = {}
        self.has_inversions = False
        self.inverted: set[str] = set()
        for e in edge_orbits:
            self._validate_edge(e)

    # -- vertices and action -------------------------------------------------
    def stabilizer(self, orbit: str) -> Subgroup:
        return self.vertex_orbits[orbit].stabilizer

    def vertex(self, orbit: str, g: Element | None = None) -> Vertex:
        g = self.group.identity if g is None else g
        return (orbit, self.stabilizer(orbit).canonical(g))

    def act(self, g: Element, v: Vertex) -> Vertex:
        return self.vertex(v[0], self.group.mul(g, v[1]))

    def act_edge(self, g: Element, key: EdgeKey) -> EdgeKey:
        return edge_key(key[0], self.act(g, key[1]), self.act(g, key[2]))

    def vertex_stabilizer(self, v: Vertex) -> Subgroup:
        """``Stab(g v_o) = g Stab(o) g^-1``."""
        return self.stabilizer(v[0]).conjugate(v[1])

    def edge_ends(self, orbit: str, h: Element | None = None) -> tuple[Vertex, Vertex]:
        e = self.edge_orbits[orbit]
        G = self.group
        h = G.identity if h is None else h
        return (self.vertex(e.end0[0], G.mul(h, e.end0[1])),
                self.vertex(e.end1[0], G.mul(h, e.end1[1])))

    def edge_rep(self, orbit: str) -> EdgeKey:
        u, v = self.edge_ends(orbit)
        return edge_key(orbit, u, v)

    def translate_edge(self, orbit: str, h: Element) -> EdgeKey:
        u, v = self.edge_ends(orbit, h)
        return edge_key(orbit, u, v)

    def edge_setwise_stabilizer(self, orbit: str) -> list[Element]:
        return self._setstab[orbit]

    def translators(self, key: EdgeKey, known: Element) -> list[Element]:
        """All ``g`` with ``g . rep(orbit) = key``, given one of them."""
        G = self.group
        return sorted({G.mul(known, s) for s in self._setstab[key[0]]}, key=G.sort_key)

    def _validate_edge(self, e: EdgeOrbit) -> None:
        G = self.group
        (o0, off0), (o1, off1) = e.end0, e.end1
        a, b = self.vertex(o0, off0), self.vertex(o1, off1)
        if a == b:
            raise GraphError(f"edge orbit {e.id} is a loop")
        try:
            point = intersect(self.vertex_stabilizer(a), self.vertex_stabilizer(b))
        except NotImplementedError as exc:  # pragma: no cover - unsupported shapes
            raise GraphError(f"edge orbit {e.id}: {exc}") from exc
        if not point.is_finite:
            raise GraphError(f"edge orbit {e.id} has infinite stabilizer {point.label}")
        stab = list(point.elements)
        swap = None
        if o0 == o1:
            S = self.stabilizer(o0)
            bound = 2 * (G.length(off0) + G.length(off1)) + 4
            cands = S.elements if S.is_finite else S.elements_within(bound)
            for s in cands:
                g = G.mul(G.mul(off1, s), G.inv(off0))
                if self.act(g, b) == a:
                    swap = g
                    break
        if swap is not None:
            self.has_inversions = True
            self.inverted.add(e.id)
            if not self.allow_inversions:
                raise InversionError(
                    f"edge orbit {e.id}: {G.format(swap)} swaps its endpoints; "
                    "subdivide the edge barycentrically first")
            stab = stab + [G.mul(swap, s) for s in stab]
        self._setstab[e.id] = sorted(set(stab), key=G.sort_key)

    # -- adjacency -----------------------------------------------------------
    def incident(self, orbit: str) -> list[tuple[str, int]]:
        return self._incident[orbit]

    def neighbors(self, v: Vertex, budget: int | None = None):
        """Edges at ``v`` as sorted ``(neighbor, key, translator)`` triples.

        ``budget`` caps how many stabilizer elements are enumerated per
        incident edge orbit side; returns ``(triples, truncated)``.
        """
        G = self.group
        o, c = v
        stab = self.stabilizer(o)
        found: dict[EdgeKey, tuple[Vertex, Element]] = {}
        truncated = False
        for eid, side in self._incident[o]:
            e = self.edge_orbits[eid]
            ends = (e.end0, e.end1)
            off_here = ends[side][1]
            other_o, off_other = ends[1 - side]
            if stab.is_finite and (budget is None or stab.order <= budget):
                elems = stab.elements
            elif budget is None:
                raise InfiniteValenceError(
                    f"vertex orbit {o!r} has infinite stabilizer {stab.label}; supply a valence budget")
            else:
                elems = list(islice(stab.iter_elements(), budget))
                truncated = True
            for s in elems:
                h = G.mul(G.mul(c, s), G.inv(off_here))
                w = self.vertex(other_o, G.mul(h, off_other))
                key = edge_key(eid, v, w)
                if key not in found:
                    found[key] = (w, h)
        out = sorted(((w, key, h) for key, (w, h) in found.items()), key=lambda t: (t[0], t[1]))
        return out, truncated

    def neighbor_set(self, v: Vertex, budget: int | None = None) -> set:
        return {w for w, _, _ in self.neighbors(v, budget)[0]}

    def format_element(self, g: Element) -> str:
        return self.group.format(g)

    def format_vertex(self, v: Vertex) -> str:
        return f"{v[0]}:{self.group.format(v[1])}"

    def parse_vertex(self, text: str) -> Vertex:
        orbit, _, word = text.rpartition(":")
        if orbit not in self.vertex_orbits:
            raise GraphError(f"unknown vertex orbit in {text!r}")
        return self.vertex(orbit, self.group.parse(word))

    def extended(self, vertex_orbits=(), edge_orbits=(), name=None, drop_vertex=(), drop_edge=(),
                 meta=None, allow_inversions=None) -> "EquivariantGraphSpec":
        """A fresh spec with orbits added and/or removed."""
        vs = [o for i, o in self.vertex_orbits.items() if i not in drop_vertex] + list(vertex_orbits)
        es = [e for i, e in self.edge_orbits.items() if i not in drop_edge] + list(edge_orbits)
        m = dict(self.meta)
        m.update(meta or {})
        return EquivariantGraphSpec(self.group, vs, es, name=name or self.name,
                                    allow_inversions=(self.allow_inversions if allow_inversions is None
                                                      else allow_inversions), meta=m)

    def __repr__(self) -> str:
        return (f"<EquivariantGraphSpec {self.name}: {len(self.vertex_orbits)} vertex orbits, "
                f"{len(self.edge_orbits)} edge orbits over {self.group.backend_id}>")


class Window:
    """A finite multigraph snapshot.

    ``complete`` windows are balls (``kind == "ball"``) materialized without
    hitting any valence budget, so they contain every edge between vertices
    within ``radius`` of ``center``.
    """

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[EdgeKey], *, spec=None,
                 center=None, radius=None, depth=None, truncated=False, kind="explicit",
                 translators=None, labels=None):
        self.spec = spec
        self.vertices = tuple(sorted(set(vertices)))
        vset = set(self.vertices)
        self.edges = tuple(sorted(set(edges)))
        self.center = center
        self.radius = radius
        self.depth = dict(depth or {})
        self.truncated = truncated
        self.kind = kind
        self.translators = dict(translators or {})
        self.labels = dict(labels or {})
        adj: dict[Vertex, list] = {v: [] for v in self.vertices}
        for key in self.edges:
            _, u, v = key
            if u not in vset or v not in vset:
                raise GraphError(f"edge {key} has an endpoint outside the window")
            adj[u].append((v, key))
            adj[v].append((u, key))
        self.adj = {v: tuple(sorted(a)) for v, a in adj.items()}
        self.nbrs = {v: tuple(sorted({w for w, _ in a})) for v, a in self.adj.items()}
        self._bfs: dict[Vertex, dict] = {}

    @property
    def complete(self) -> bool:
        return self.kind == "ball" and not self.truncated

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, v) -> bool:
        return v in self.adj

    def distances_from(self, s: Vertex) -> dict[Vertex, int]:
        if s not in self._bfs:
            d = {s: 0}
            q = deque([s])
            while q:
                x = q.popleft()
                for y in self.nbrs[x]:
                    if y not in d:
                        d[y] = d[x] + 1
                        q.append(y)
            self._bfs[s] = d
        return self._bfs[s]

    def dist(self, u: Vertex, v: Vertex) -> float:
        return self.distances_from(u).get(v, float("inf"))

    def component(self, v: Vertex) -> set:
        return set(self.distances_from(v))

    def is_connected(self) -> bool:
        return not self.vertices or len(self.component(self.vertices[0])) == len(self.vertices)

    def certified_radius(self, v: Vertex) -> float:
        """Largest ``r`` such that the window contains the true ball B(v, r)."""
        if not self.complete or v not in self.depth:
            return 0 if v in self else -1
        return self.radius - self.depth[v]

    def edges_between(self, u: Vertex, v: Vertex) -> list[EdgeKey]:
        return [k for w, k in self.adj[u] if w == v]

    def induced(self, vertices: Iterable[Vertex]) -> "Window":
        vs = set(vertices)
        return Window(vs, [k for k in self.edges if k[1] in vs and k[2] in vs], spec=self.spec,
                      kind="explicit", translators=self.translators, labels=self.labels)

    def without_edges(self, drop) -> "Window":
        return Window(self.vertices, [k for k in self.edges if not drop(k)], spec=self.spec,
                      center=self.center, radius=self.radius, depth=self.depth,
                      truncated=self.truncated, kind="explicit", translators=self.translators,
                      labels=self.labels)

    def fmt(self, v: Vertex) -> str:
        if self.spec is not None:
            return self.spec.format_vertex(v)
        return f"{v[0]}:{v[1]}"

    def __repr__(self) -> str:
        return f"<Window {self.kind} |V|={len(self.vertices)} |E|={len(self.edges)} r={self.radius}>"


def materialize_ball(spec: EquivariantGraphSpec, center: Vertex, r: int,
                     valence_budget: int | None = None) -> Window:
    """Ball of graph radius ``r`` around ``center``; deterministic."""
    if r < 0:
        raise GraphError("radius must be nonnegative")
    cap = max_window()
    depth = {center: 0}
    queue = deque([center])
    edges: dict[EdgeKey, Element] = {}
    truncated = False
    pending = []
    while queue:
        x = queue.popleft()
        triples, trunc = spec.neighbors(x, valence_budget)
        truncated |= trunc
        pending.append((x, triples))
        if depth[x] == r:
            continue
        for w, key, h in triples:
            if w not in depth:
                depth[w] = depth[x] + 1
                queue.append(w)
                if len(depth) > cap:
                    raise GraphError(f"window exceeds FINEGRAPH_MAX_WINDOW={cap} vertices")
    for x, triples in pending:
        for w, key, h in triples:
            if w in depth:
                edges.setdefault(key, h)
    return Window(depth, edges, spec=spec, center=center, radius=r, depth=depth,
                  truncated=truncated, kind="ball", translators=edges)


def group_window(spec: EquivariantGraphSpec, R: int) -> Window:
    """Union of ``g . (fundamental data)`` over ``g`` in the word ball B(R).

    Vertices are ``g . v_o`` for every vertex orbit and edges ``g . e`` for
    every edge orbit.  Window distances are path metrics of this finite
    subgraph.
    """
    G = spec.group
    ball = G.ball(R)
    if len(ball) * max(1, len(spec.vertex_orbits)) > max_window():
        raise GraphError(f"group window of radius {R} exceeds FINEGRAPH_MAX_WINDOW")
    verts = set()
    edges: dict[EdgeKey, Element] = {}
    depth: dict[Vertex, int] = {}
    for g in ball:
        for o in spec.vertex_orbits:
            v = spec.vertex(o, g)
            verts.add(v)
            depth.setdefault(v, G.length(g))
        for eid in spec.edge_orbits:
            u, v = spec.edge_ends(eid, g)
            verts.update((u, v))
            depth.setdefault(u, G.length(g))
            depth.setdefault(v, G.length(g))
            edges.setdefault(edge_key(eid, u, v), g)
    first = next(iter(spec.vertex_orbits))
    return Window(verts, edges, spec=spec, center=spec.vertex(first), radius=R, depth=depth,
                  kind="group", translators=edges)


def geodesic(w: Window, u: Vertex, v: Vertex) -> list[Vertex]:
    """Shortest path, lexicographically least vertex sequence among ties."""
    if u not in w or v not in w:
        raise GraphError("endpoints must lie in the window")
    dv = w.distances_from(v)
    if u not in dv:
        raise DisconnectedError(
            f"{w.fmt(u)} and {w.fmt(v)} are disconnected in the window",
            sizes=(len(w.component(u)), len(dv)))
    path = [u]
    x = u
    while x != v:
        x = next(y for y in w.nbrs[x] if dv.get(y) == dv[x] - 1)
        path.append(x)
    return path


def geodesic_vertices(w: Window, u: Vertex, v: Vertex) -> set:
    """Vertices lying on at least one geodesic from ``u`` to ``v``."""
    du, dv = w.distances_from(u), w.distances_from(v)
    d = du.get(v)
    if d is None:
        return set()
    return {x for x in du if x in dv and du[x] + dv[x] == d}


def path_edges(w: Window, path: Sequence[Vertex]) -> list[EdgeKey]:
    """Least edge key joining each consecutive pair."""
    out = []
    for a, b in zip(path, path[1:]):
        ks = w.edges_between(a, b)
        if not ks:
            raise GraphError(f"{w.fmt(a)} and {w.fmt(b)} are not adjacent")
        out.append(ks[0])
    return out


@dataclass
class PathEnumeration:
    paths: list
    complete: bool

    def __len__(self):
        return len(self.paths)


def _ellipse_complete(w: Window, u: Vertex, v: Vertex, n: int) -> bool:
    if not w.complete or u not in w.depth or v not in w.depth:
        return False
    return (w.depth[u] + w.depth[v] + n) / 2 <= w.radius


def _edge_paths(w: Window, u: Vertex, v: Vertex, n: int, banned=frozenset(), allowed=None):
    """Embedded edge-paths from ``u`` to ``v`` of length <= ``n``."""
    dv = w.distances_from(v)
    out = []
    vpath = [u]
    epath = []
    on = {u}

    def rec(x):
        if x == v:
            out.append((tuple(vpath), tuple(epath)))
            return
        for y, key in w.adj[x]:
            if y in on or key in banned or (allowed is not None and not allowed(key)):
                continue
            if len(epath) + 1 + dv.get(y, n + 1) > n:
                continue
            on.add(y)
            vpath.append(y)
            epath.append(key)
            rec(y)
            epath.pop()
            vpath.pop()
            on.discard(y)

    if u in dv and dv[u] <= n:
        rec(u)
    return out


def embedded_paths(w: Window, u: Vertex, v: Vertex, n: int, edges: bool = False) -> PathEnumeration:
    """All embedded paths of length <= ``n`` from ``u`` to ``v``.

    Without ``edges`` paths are vertex sequences (parallel edges collapsed);
    with it, ``(vertices, edge_keys)`` pairs.  Sorted by (length, sequence).
    """
    if u == v:
        raise GraphError("embedded paths need distinct endpoints")
    found = _edge_paths(w, u, v, n)
    if edges:
        paths = sorted(found, key=lambda p: (len(p[1]), p[0], p[1]))
    else:
        paths = sorted({vp for vp, _ in found}, key=lambda p: (len(p), p))
    return PathEnumeration(paths, _ellipse_complete(w, u, v, n))


@dataclass
class CircuitCounts:
    edge: EdgeKey
    n: int
    counts: dict[int, int]
    complete: bool

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def circuits_through_edge(w: Window, e: EdgeKey, n: int) -> CircuitCounts:
    """Number of circuits of each length <= ``n`` containing ``e``.

    Counted as embedded paths of length ``l - 1`` between the endpoints of
    ``e`` that avoid ``e``.
    """
    _, u, v = e
    counts = {l: 0 for l in range(1, n + 1)}
    if n >= 2:
        for _, ep in _edge_paths(w, u, v, n - 1, banned=frozenset([e])):
            counts[len(ep) + 1] += 1
    return CircuitCounts(e, n, counts, _ellipse_complete(w, u, v, max(n - 1, 0)))


@dataclass(frozen=True)
class Circuit:
    vertices: tuple  # cyclic sequence, no repeat of the first vertex
    edges: frozenset

    def __len__(self):
        return len(self.vertices)


def canonical_cycle(vertices: Sequence[Vertex]) -> tuple:
    vs = list(vertices)
    i = vs.index(min(vs))
    vs = vs[i:] + vs[:i]
    if len(vs) > 2 and vs[-1] < vs[1]:
        vs = [vs[0]] + vs[1:][::-1]
    return tuple(vs)


def all_circuits(w: Window, n: int) -> list[Circuit]:
    """Every circuit of length <= ``n`` exactly once, sorted."""
    index = {k: i for i, k in enumerate(w.edges)}
    out = []
    for k in w.edges:
        _, u, v = k
        i = index[k]
        for vp, ep in _edge_paths(w, v, u, n - 1, allowed=lambda e: index[e] > i):
            out.append(Circuit(canonical_cycle(vp), frozenset(ep) | {k}))
    return sorted(out, key=lambda c: (len(c), c.vertices, sorted(c.edges)))


@dataclass
class FinenessReport:
    n: int
    verdict: str
    counts: dict[str, dict[int, int]]
    complete: bool
    budget_stable: bool = False
    budgets: list = field(default_factory=list)

    @property
    def fine(self) -> bool:
        return self.verdict == "fine-up-to-n"


def fineness_certificate(spec: EquivariantGraphSpec, n: int, valence_budget: int | None = 16,
                         max_doublings: int = 1) -> FinenessReport:
    """Circuit counts up to length ``n`` for one edge per orbit.

    Equivariance reduces the check to orbit representatives.  When a valence
    budget truncates the windows, the count is repeated with a doubled budget
    and accepted only if it does not change.
    """
    radius = n // 2 + 1

    def run(budget):
        counts, complete = {}, True
        for eid in sorted(spec.edge_orbits):
            e = spec.edge_rep(eid)
            w = materialize_ball(spec, e[1], radius, budget)
            cc = circuits_through_edge(w, e, n)
            counts[eid] = cc.counts
            complete &= cc.complete
        return counts, complete

    counts, complete = run(valence_budget)
    if complete:
        return FinenessReport(n, "fine-up-to-n", counts, True, budgets=[valence_budget])
    budgets = [valence_budget]
    budget = valence_budget
    for _ in range(max_doublings):
        budget *= 2
        budgets.append(budget)
        again, _ = run(budget)
        if again != counts:
            return FinenessReport(n, "inconclusive beyond budget", again, False, budgets=budgets)
    return FinenessReport(n, "fine-up-to-n", counts, False, budget_stable=True, budgets=budgets)


def stabilizer_intersection_growth(spec: EquivariantGraphSpec, u: Vertex, v: Vertex,
                                   radii: Sequence[int]) -> list[int]:
    """``|Stab(u) ∩ Stab(v) ∩ B(r)|`` for each ``r`` (ball-restricted)."""
    G = spec.group
    out = []
    for r in radii:
        out.append(sum(1 for g in G.ball(r) if spec.act(g, u) == u and spec.act(g, v) == v))
    return out


def valence_profile(spec: EquivariantGraphSpec, v: Vertex, budgets: Sequence[int]) -> list[int]:
    """Materialized valence of ``v`` under each budget."""
    return [len(spec.neighbors(v, b)[0]) for b in budgets]
