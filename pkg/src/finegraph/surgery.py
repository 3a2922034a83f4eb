"""Equivariant surgery: arc attachments, removals, finite hulls, joins."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .eqgraph import (DisconnectedError, EdgeOrbit, EquivariantGraphSpec, GraphError,
                      InversionError, Vertex, VertexOrbit, Window, _edge_paths, edge_key,
                      geodesic, materialize_ball, path_edges)
from .groups import Element, Subgroup, trivial_subgroup

NEW = None  # marks a new vertex in an arc


@dataclass
class ArcAttachment:
    base: EquivariantGraphSpec
    spec: EquivariantGraphSpec
    arc: list
    pieces: list
    new_vertex_orbits: list
    new_edge_orbits: list
    arc_length: int
    p0: list | None = None  # geodesic in base between the endpoints, when both are old

    @property
    def bound_factor(self) -> int:
        """``M`` with ``dist_K <= M dist_K'`` on old vertices."""
        if self.p0 is None:
            return 1
        return max(1, len(self.p0) - 1)


def _split(arc: Sequence) -> list[list]:
    """Cut an arc at interior vertices that already lie in the base."""
    pieces, cur = [], [arc[0]]
    for x in arc[1:-1]:
        cur.append(x)
        if x is not NEW:
            pieces.append(cur)
            cur = [x]
    cur.append(arc[-1])
    pieces.append(cur)
    return pieces


def attach_arc(spec: EquivariantGraphSpec, arc: Sequence, prefix: str = "arc",
               name: str | None = None, p0_radius: int = 8) -> ArcAttachment:
    """G-attach a path; ``arc`` lists base vertices, or ``NEW`` for new ones.

    New vertices get free orbits.  Interior base vertices split the arc into
    interior-disjoint pieces, each attached in turn.
    """
    arc = list(arc)
    if len(arc) < 2:
        raise GraphError("an arc needs at least one edge")
    for x in arc:
        if x is not NEW and x[0] not in spec.vertex_orbits:
            raise GraphError(f"arc vertex {x!r} is not in the base")
    G = spec.group
    pieces = _split(arc)
    vorbits, eorbits = [], []
    ends = []
    k = 0
    for pi, piece in enumerate(pieces):
        if piece[0] is NEW and piece[-1] is NEW:
            raise GraphError("every arc piece needs an endpoint in the base")
        ref = []
        for j, x in enumerate(piece):
            if x is NEW:
                oid = f"{prefix}.v{pi}.{j}"
                vorbits.append(VertexOrbit(oid, trivial_subgroup(G)))
                ref.append((oid, G.identity))
            else:
                ref.append((x[0], x[1]))
        for a, b in zip(ref, ref[1:]):
            eorbits.append(EdgeOrbit(f"{prefix}.e{k}", a, b))
            k += 1
        ends.append(ref)
    out = spec.extended(vorbits, eorbits, name=name or f"{spec.name}+{prefix}")
    bad = [e.id for e in eorbits if e.id in out.inverted]
    if bad:
        raise InversionError(f"attachment introduces an inversion on {bad[0]}")
    p0 = None
    if arc[0] is not NEW and arc[-1] is not NEW:
        u, v = spec.vertex(*arc[0]), spec.vertex(*arc[-1])
        w = materialize_ball(spec, u, p0_radius, valence_budget=16)
        if v in w:
            p0 = geodesic(w, u, v)
    return ArcAttachment(spec, out, arc, pieces, [o.id for o in vorbits], [e.id for e in eorbits],
                         len(arc) - 1, p0)


def attach_edge(spec: EquivariantGraphSpec, u: Vertex, v: Vertex, orbit_id: str = "chord",
                name: str | None = None) -> ArcAttachment:
    att = attach_arc(spec, [u, v], prefix=orbit_id, name=name)
    return att


def qi_bound_check(att: ArcAttachment, center: Vertex, R: int) -> dict:
    """Check ``dist_K(u,v) <= M dist_K'(u,v)`` for all old vertices within ``R``."""
    M = att.bound_factor
    wk = materialize_ball(att.base, center, 3 * R * M, valence_budget=16)
    wk2 = materialize_ball(att.spec, center, 3 * R, valence_budget=16)
    old = [x for x, d in wk2.depth.items() if d <= R and x[0] in att.base.vertex_orbits]
    ok = total = 0
    worst = 0.0
    for i, x in enumerate(old):
        dk, dk2 = wk.distances_from(x), wk2.distances_from(x)
        for y in old[i + 1:]:
            total += 1
            a, b = dk.get(y, float("inf")), dk2[y]
            ok += a <= M * b
            worst = max(worst, a / b)
    return {"pairs": total, "satisfied": ok, "factor": M, "max_ratio": worst}


def _check_connected(old: EquivariantGraphSpec, new: EquivariantGraphSpec, witnesses, radius: int):
    for a, b in witnesses:
        if a == b:
            continue
        w = materialize_ball(new, a, radius, valence_budget=16)
        if b not in w:
            sizes = (len(w), len(materialize_ball(new, b, radius, valence_budget=16)))
            raise DisconnectedError(
                f"removal disconnects {new.format_vertex(a)} from {new.format_vertex(b)} "
                f"(no path of length <= {radius})", sizes=sizes, witness=(a, b))


def remove_edge_orbit(spec: EquivariantGraphSpec, orbit: str, check_connected: bool = True,
                      radius: int = 8, name: str | None = None) -> EquivariantGraphSpec:
    if orbit not in spec.edge_orbits:
        raise GraphError(f"unknown edge orbit {orbit!r}")
    out = spec.extended(drop_edge={orbit}, name=name or f"{spec.name}-{orbit}")
    if check_connected:
        _check_connected(spec, out, [spec.edge_ends(orbit)], radius)
    return out


def remove_vertex_orbit(spec: EquivariantGraphSpec, orbit: str, check_connected: bool = True,
                        radius: int = 8, name: str | None = None) -> EquivariantGraphSpec:
    if orbit not in spec.vertex_orbits:
        raise GraphError(f"unknown vertex orbit {orbit!r}")
    incident = {eid for eid, _ in spec.incident(orbit)}
    if incident and not spec.stabilizer(orbit).is_finite:
        raise GraphError(f"vertex orbit {orbit!r} has infinite valence")
    out = spec.extended(drop_vertex={orbit}, drop_edge=incident, name=name or f"{spec.name}-{orbit}")
    if check_connected and incident:
        v = spec.vertex(orbit)
        nbrs = sorted({w for w, _, _ in spec.neighbors(v)[0] if w[0] != orbit})
        _check_connected(spec, out, [(nbrs[0], x) for x in nbrs[1:]], radius)
    return out


def removal_distortion(spec: EquivariantGraphSpec, reduced: EquivariantGraphSpec, center: Vertex,
                       R: int, slack: int = 4) -> float:
    """Max ``dist_reduced / dist_spec`` over surviving vertex pairs within ``R``."""
    w = materialize_ball(spec, center, R * slack, valence_budget=16)
    wr = materialize_ball(reduced, center, R * slack, valence_budget=16)
    keep = [x for x, d in w.depth.items() if d <= R and x in wr]
    worst = 1.0
    for i, x in enumerate(keep):
        d, dr = w.distances_from(x), wr.distances_from(x)
        for y in keep[i + 1:]:
            worst = max(worst, dr.get(y, float("inf")) / d[y])
    return worst


@dataclass
class HullResult:
    u: Vertex
    v: Vertex
    n: int
    p0: list
    vertices: set
    edges: set
    trace: list = field(default_factory=list)
    inconclusive: bool = False

    def __len__(self):
        return len(self.vertices)


class _LazyGraph:
    """Balls of a spec on demand, with translators for every edge seen."""

    def __init__(self, spec: EquivariantGraphSpec, budget: int | None):
        self.spec = spec
        self.budget = budget
        self.truncated = False
        self._balls: dict = {}
        self.translator: dict = {}

    def ball(self, x: Vertex, r: int) -> Window:
        key = (x, r)
        if key not in self._balls:
            w = materialize_ball(self.spec, x, r, self.budget)
            self.truncated |= w.truncated
            self.translator.update(w.translators)
            self._balls[key] = w
        return self._balls[key]


def hull_c(att: ArcAttachment, u: Vertex, v: Vertex, n: int, p0: Sequence[Vertex] | None = None,
           valence_budget: int | None = 16) -> HullResult:
    """Finite subgraph of the base holding every embedded ``<= n`` path of the
    attached graph between ``u`` and ``v``.

    ``att`` must attach a single edge.  Runs ``n`` rounds of an
    ``n|P0|``-hull followed by ``P0``-inclusion starting from ``{u, v}``.
    """
    if len(att.new_edge_orbits) != 1 or att.new_vertex_orbits:
        raise GraphError("hull_c needs a single-edge attachment")
    base, spec = att.base, att.spec
    G = base.group
    chord = att.new_edge_orbits[0]
    if p0 is None:
        p0 = att.p0
    if p0 is None:
        raise GraphError("no path P0 in the base between the chord endpoints")
    p0 = list(p0)
    lazy = _LazyGraph(base, valence_budget)
    w0 = lazy.ball(p0[0], len(p0))
    p0_edges = path_edges(w0, p0)
    m = n * (len(p0) - 1)
    C_v = {u, v}
    C_e: set = set()
    trace = []
    for _ in range(n):
        # n|P0|-hull: embedded paths of length <= m between distinct C vertices
        before = len(C_v)
        cv = sorted(C_v)
        for i, x in enumerate(cv):
            wx = lazy.ball(x, m)
            for y in cv[i + 1:]:
                if y not in wx or wx.dist(x, y) > m:
                    continue
                for vp, ep in _edge_paths(wx, x, y, m):
                    C_v.update(vp)
                    C_e.update(ep)
        hull_step = len(C_v) - before
        # P0-inclusion
        before = len(C_v)
        for k in sorted(C_e):
            h = lazy.translator.get(k)
            if h is None:
                continue
            for j, pk in enumerate(p0_edges):
                if pk[0] != k[0]:
                    continue
                hp = w0.translators[pk]
                for t in base.translators(k, h):
                    g = G.mul(t, G.inv(hp))
                    # g maps pk onto k; include g.P0 when it really does
                    if base.act_edge(g, pk) != k:
                        continue
                    for x in p0:
                        C_v.add(base.act(g, x))
                    for e in p0_edges:
                        ge = base.act_edge(g, e)
                        C_e.add(ge)
                        lazy.translator.setdefault(ge, G.mul(g, w0.translators[e]))
        trace.append((hull_step, len(C_v) - before))
    return HullResult(u, v, n, p0, C_v, C_e, trace, inconclusive=lazy.truncated)


def hull_oracle(att: ArcAttachment, u: Vertex, v: Vertex, n: int,
                valence_budget: int | None = 16) -> tuple[set, bool]:
    """Vertices on embedded ``<= n`` paths from ``u`` to ``v`` in the attached graph."""
    w = materialize_ball(att.spec, v, n, valence_budget)
    if u not in w:
        return set(), not w.truncated
    verts = set()
    for vp, _ in _edge_paths(w, u, v, n):
        verts.update(vp)
    return verts, not w.truncated


@dataclass
class JointEmbedding:
    spec: EquivariantGraphSpec
    embed1: dict  # orbit id -> (orbit id in joint spec, offset)
    embed2: dict
    parabolic: dict  # P name -> ((orbit1, c1), (orbit2, c2))


def find_parabolic_vertex(spec: EquivariantGraphSpec, P: Subgroup, search_radius: int = 3):
    """Least ``(orbit, c)`` with ``Stab(c v_orbit) = P``."""
    G = spec.group
    for c in G.ball(search_radius):
        for oid in sorted(spec.vertex_orbits):
            if spec.stabilizer(oid).conjugate(c).same_as(P):
                return oid, c
    return None


def joint_embedding(spec1: EquivariantGraphSpec, spec2: EquivariantGraphSpec, peripherals,
                    name: str | None = None) -> JointEmbedding:
    """Disjoint union glued along ``g u_P ~ g v_P`` for each peripheral ``P``."""
    G = spec1.group
    if spec2.group is not G:
        raise GraphError("both specs must use the same group oracle")
    glue = {}
    for P in peripherals:
        a = find_parabolic_vertex(spec1, P.subgroup)
        b = find_parabolic_vertex(spec2, P.subgroup)
        for side, x in ((1, a), (2, b)):
            if x is None:
                raise GraphError(f"spec {side} has no vertex with stabilizer {P.name}")
        glue[P.name] = (a, b)
    remap = {}  # spec2 orbit -> (joint orbit, right multiplier)
    for a, b in glue.values():
        (o1, c1), (o2, c2) = a, b
        if o2 in remap:
            continue
        remap[o2] = ("1:" + o1, G.mul(G.inv(c2), c1))
    vorbits = [VertexOrbit("1:" + o.id, o.stabilizer) for o in spec1.vertex_orbits.values()]
    vorbits += [VertexOrbit("2:" + o.id, o.stabilizer) for o in spec2.vertex_orbits.values()
                if o.id not in remap]
    eorbits = [EdgeOrbit("1:" + e.id, ("1:" + e.end0[0], e.end0[1]), ("1:" + e.end1[0], e.end1[1]))
               for e in spec1.edge_orbits.values()]

    def end2(end):
        o, off = end
        if o in remap:
            oid, m = remap[o]
            return (oid, G.mul(off, m))
        return ("2:" + o, off)

    eorbits += [EdgeOrbit("2:" + e.id, end2(e.end0), end2(e.end1)) for e in spec2.edge_orbits.values()]
    spec = EquivariantGraphSpec(G, vorbits, eorbits, name=name or f"{spec1.name}∪{spec2.name}",
                                allow_inversions=spec1.allow_inversions or spec2.allow_inversions,
                                meta={"kind": "joint"})
    e1 = {o: ("1:" + o, G.identity) for o in spec1.vertex_orbits}
    e2 = {o: remap.get(o, ("2:" + o, G.identity)) for o in spec2.vertex_orbits}
    return JointEmbedding(spec, e1, e2, glue)


def embed_vertex(joint: JointEmbedding, side: int, v: Vertex) -> Vertex:
    oid, m = (joint.embed1 if side == 1 else joint.embed2)[v[0]]
    return joint.spec.vertex(oid, joint.spec.group.mul(v[1], m))


def build_coned_joint(spec: EquivariantGraphSpec, S: Sequence[Element], peripherals,
                      name: str | None = None) -> EquivariantGraphSpec:
    """Triangle G-attachment, an edge per ``s in S`` and an edge ``1 - v_P`` per ``P``.

    The triangle tops form a free orbit ``top`` identified with ``G``, so the
    result contains an equivariant copy of the coned-off Cayley graph with
    ``v_P`` as cone vertex of ``P``.
    """
    G = spec.group
    top = "top"
    one = (top, G.identity)
    vorbits = [VertexOrbit(top, trivial_subgroup(G))]
    eorbits = []
    if spec.edge_orbits:
        e = spec.edge_orbits[sorted(spec.edge_orbits)[0]]
        eorbits += [EdgeOrbit("tri0", one, e.end0), EdgeOrbit("tri1", one, e.end1)]
    else:
        eorbits.append(EdgeOrbit("tri0", one, (sorted(spec.vertex_orbits)[0], G.identity)))
    from .cayley import _pairs
    for s in _pairs(G, S):
        eorbits.append(EdgeOrbit("gen:" + G.format(s).replace(" ", ""), one, (top, s)))
    for P in peripherals:
        x = find_parabolic_vertex(spec, P.subgroup)
        if x is None:
            raise GraphError(f"no vertex with stabilizer {P.name}")
        eorbits.append(EdgeOrbit("cone:" + P.name, one, x))
    return spec.extended(vorbits, eorbits, name=name or f"{spec.name}+cone", allow_inversions=True)
