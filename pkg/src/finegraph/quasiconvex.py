"""Relative quasiconvexity: witnesses, measured constants, generation, transfer.

Every definition quantifies over infinitely many geodesics or elements, so
each quantity here is a constant measured on a radius-indexed window.  A
series that is constant over the last three radii counts as evidence for
quasiconvexity, strict growth as evidence against; neither is a proof.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .cayley import ConedOffSpec, Peripheral, RelativeCayleyGraph, RelPath
from .eqgraph import (DisconnectedError, EquivariantGraphSpec, GraphError, Vertex, Window,
                      geodesic, geodesic_vertices, group_window, materialize_ball, path_edges)
from .groups import Element, Group, Subgroup, intersect

POSITIVE, NEGATIVE, INCONCLUSIVE = "evidence: quasiconvex", "evidence: not quasiconvex", "inconclusive"


class QcError(GraphError):
    pass


def verdict(series: Sequence[float], k: int = 3) -> str:
    vals = [v for _, v in series] if series and isinstance(series[0], tuple) else list(series)
    if len(vals) < k:
        return INCONCLUSIVE
    tail = vals[-k:]
    if all(x == tail[0] for x in tail):
        return POSITIVE
    if all(a < b for a, b in zip(tail, tail[1:])):
        return NEGATIVE
    return INCONCLUSIVE


# -- Q-0 witnesses ------------------------------------------------------------

@dataclass
class QcWitness:
    K: EquivariantGraphSpec
    H: Subgroup
    J_vertices: frozenset
    J_edges: frozenset
    base: Vertex
    series: list = field(default_factory=list)
    connected: bool = True
    trace: list = field(default_factory=list)

    def saturate(self, r: int) -> tuple[set, set]:
        """Vertices and edges of ``hJ`` over ``h`` in ``H`` with ``|h| <= r``."""
        K = self.K
        vs, es = set(), set()
        for h in self.H.elements_within(r):
            vs.update(K.act(h, x) for x in self.J_vertices)
            es.update(K.act_edge(h, e) for e in self.J_edges)
        return vs, es

    def window(self, r: int) -> Window:
        vs, es = self.saturate(r)
        return Window(vs, es, spec=self.K, kind="explicit")


def _connected(vertices, edges) -> bool:
    vs = set(vertices)
    if not vs:
        return False
    adj = {v: [] for v in vs}
    for _, a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    start = min(vs)
    seen = {start}
    q = deque([start])
    while q:
        x = q.popleft()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                q.append(y)
    return seen == vs


def _relatively_generates(H: Subgroup, T, stabs, depth: int = 6) -> bool:
    """Ball check that each generator of ``H`` is a short word in ``T`` and the stabilizers."""
    G = H.group
    if H.kind == "whole":
        targets = [g for g in G.ball(1) if g != G.identity]
    else:
        targets = [g for g in H.generators if g != G.identity]
    steps = set()
    for t in T:
        steps.update((t, G.inv(t)))
    for S in stabs:
        steps.update(S.elements_within(4))
    steps.discard(G.identity)
    cap = max([G.length(g) for g in targets] + [0]) + 8
    seen = {G.identity}
    frontier = [G.identity]
    for _ in range(depth):
        nxt = []
        for x in frontier:
            for s in steps:
                y = G.mul(x, s)
                if y not in seen and G.length(y) <= cap:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
        if all(t in seen for t in targets):
            return True
    return all(t in seen for t in targets)


def cocompact_subgraph(K: EquivariantGraphSpec, H: Subgroup, T: Sequence[Element],
                       C: Sequence[Vertex], J_vertices, J_edges, base: Vertex,
                       check_generation: bool = True) -> QcWitness:
    """``L = union of hJ``; checks the hypotheses and the overlap argument."""
    G = K.group
    Jv = set(J_vertices) | {v for e in J_edges for v in e[1:]}
    Je = set(J_edges)
    need = {base} | {K.act(t, base) for t in T} | set(C)
    missing = need - Jv
    if missing:
        raise QcError(f"J misses required vertices: {[K.format_vertex(x) for x in sorted(missing)]}")
    if not _connected(Jv, Je):
        raise QcError("J is not connected")
    stabs = [intersect(H, K.vertex_stabilizer(c)) for c in C]
    if check_generation and not _relatively_generates(H, T, stabs):
        raise QcError("T does not generate H relative to the stabilizers of C (ball check)")
    for t in T:
        if not any(K.act(t, x) in Jv for x in Jv):
            raise QcError(f"J and {G.format(t)} J are disjoint")
    for c, S in zip(C, stabs):
        for s in S.generators:
            if K.act(s, c) != c:
                raise QcError(f"{G.format(s)} does not fix {K.format_vertex(c)}")
    return QcWitness(K, H, frozenset(Jv), frozenset(Je), base)


def path_witness(K: EquivariantGraphSpec, H: Subgroup, w: Window, path: Sequence[Vertex],
                 T: Sequence[Element], C: Sequence[Vertex] = ()) -> QcWitness:
    """Witness whose ``J`` is a window path together with ``C``."""
    edges = path_edges(w, list(path))
    return cocompact_subgraph(K, H, T, C, set(path) | set(C), edges, path[0])


def star_witness(K: EquivariantGraphSpec, H: Subgroup) -> QcWitness:
    """``J`` = one representative of every edge orbit (for ``H = G``)."""
    G = K.group
    edges = [K.edge_rep(e) for e in sorted(K.edge_orbits)]
    verts = {v for e in edges for v in e[1:]} | {K.vertex(o) for o in K.vertex_orbits}
    T = [g for g in G.ball(2) if g != G.identity]
    reps = [K.vertex(o) for o in sorted(K.vertex_orbits)]
    # connect the representatives through a ball when the star is not connected
    w = materialize_ball(K, reps[0], 4, valence_budget=8)
    for x in sorted(verts | {K.act(t, reps[0]) for t in T}):
        try:
            p = geodesic(w, reps[0], x)
        except (GraphError, DisconnectedError):
            continue
        verts.update(p)
        edges.extend(path_edges(w, p))
    return QcWitness(K, H, frozenset(verts), frozenset(edges), reps[0])


def distortion(witness: QcWitness, radius: int, margin: int = 2, pairs: str = "all") -> float:
    """Max ``dist_L / dist_K`` over vertex pairs of the saturated window."""
    L = witness.window(radius)
    if not L.is_connected():
        raise DisconnectedError(f"L window of radius {radius} is disconnected")
    Kw = group_window(witness.K, radius + margin)
    verts = sorted(L.vertices)
    if pairs == "H":
        verts = sorted({witness.K.act(h, witness.base) for h in witness.H.elements_within(radius)})
    worst = 1.0 if len(verts) > 1 else 0.0
    for i, u in enumerate(verts):
        dl, dk = L.distances_from(u), Kw.distances_from(u)
        for v in verts[i + 1:]:
            a, b = dl[v], dk.get(v)
            if b is None:
                raise QcError("ambient window too small for the L window")
            worst = max(worst, a / b)
    return worst


def distortion_series(witness: QcWitness, radii: Sequence[int], **kw) -> list[tuple[int, float]]:
    out = [(r, distortion(witness, r, **kw)) for r in radii]
    witness.series = out
    return out


# -- sigma ----------------------------------------------------------------------

@dataclass
class SigmaReport:
    kind: str  # "osinRel" or "hatNonCone"
    radius: int
    sigma: int
    witness: tuple | None  # (f, g, p, nearest h)
    pairs: int = 0
    boundary_touched: bool = False

    @property
    def lower_bound(self) -> bool:
        return self.boundary_touched


def _sigma(w: Window, G: Group, H: Subgroup, radius: int, window_radius: int, keep, kind) -> SigmaReport:
    hs = [("G", h) for h in H.elements_within(radius)]
    best, wit, touched = 0, None, False
    count = 0
    near: dict = {}
    for i, f in enumerate(hs):
        for g in hs[i + 1:]:
            count += 1
            for p in sorted(geodesic_vertices(w, f, g)):
                if not keep(p):
                    continue
                if G.length(p[1]) >= window_radius:
                    touched = True
                if p not in near:
                    near[p] = H.distance_to(p[1])
                d, h = near[p]
                if wit is None or d > best:
                    best, wit = d, (f[1], g[1], p[1], h)
    return SigmaReport(kind, radius, best, wit, count, touched)


def osin_sigma(rc: RelativeCayleyGraph, H: Subgroup, radius: int, margin: int = 1) -> SigmaReport:
    """Max over all window geodesics of the relative Cayley graph between
    elements of ``H`` (``|h| <= radius``) of the word distance to ``H``."""
    R = radius + margin
    w = rc.window(R)
    return _sigma(w, rc.group, H, radius, R, lambda p: True, "osinRel")


def hat_sigma(coned: ConedOffSpec, H: Subgroup, radius: int, margin: int = 1) -> SigmaReport:
    """As :func:`osin_sigma` in the coned-off graph, over non-cone vertices."""
    R = radius + margin
    w = group_window(coned.spec, R)
    return _sigma(w, coned.group, H, radius, R, lambda p: not coned.is_cone(p), "hatNonCone")


# -- bounded intersection, parabolic approximation, generation -------------------

def near_coset(G: Group, q: Element, g: Element, C: Subgroup, K: int) -> bool:
    """``dist(q, gC) <= K``."""
    gi = G.inv(g)
    return any(C.contains(G.mul(G.mul(gi, q), h)) for h in G.ball(K))


def bounded_intersection_m(G: Group, B: Subgroup, C: Subgroup, g: Element, K: int,
                           radius: int) -> tuple[int, Element | None]:
    """Least ``M`` with ``B ∩ N_K(gC) ⊂ N_M(B ∩ gCg^-1)`` on ``B ∩ ball(radius)``."""
    I = intersect(B, C.conjugate(g))
    best, wit = 0, None
    for q in B.elements_within(radius):
        if near_coset(G, q, g, C, K):
            d, _ = I.distance_to(q)
            if d > best:
                best, wit = d, q
    return best, wit


@dataclass
class Decomposition:
    h: Element
    g: Element
    p: Element
    f: Element
    a: Element
    b: Element
    P: int
    bound: int

    def valid(self, G: Group, H: Subgroup, peripherals) -> bool:
        P = peripherals[self.P].subgroup
        conj = P.conjugate(self.g)
        return (G.mul(self.a, self.b) == self.h and H.contains(self.a) and conj.contains(self.a)
                and H.contains(self.b) and G.length(self.b) <= self.bound)


@dataclass
class ParabolicApprox:
    L: int
    sigma: int
    radius: int
    M: dict  # (P index, g) -> M
    decompositions: list
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def parabolic_approx_l(G: Group, peripherals: Sequence[Peripheral], H: Subgroup, sigma: int,
                       radius: int, decompose: bool = True) -> ParabolicApprox:
    Ms = {}
    for i, P in enumerate(peripherals):
        for g in G.ball(sigma):
            Ms[i, g] = bounded_intersection_m(G, H, P.subgroup, g, sigma, radius)[0]
    L = max(Ms.values(), default=0)
    decs, fails = [], []
    if decompose:
        seen = set()
        for i, P in enumerate(peripherals):
            ps = P.subgroup.elements_within(radius + 2 * sigma)
            for g in G.ball(sigma):
                I = intersect(H, P.subgroup.conjugate(g))
                for p in ps:
                    gp = G.mul(g, p)
                    for f in G.ball(sigma):
                        h = G.mul(gp, f)
                        if G.length(h) > radius or (h, i, g) in seen or not H.contains(h):
                            continue
                        seen.add((h, i, g))
                        d, a = I.distance_to(h)
                        b = G.mul(G.inv(a), h)
                        dec = Decomposition(h, g, p, f, a, b, i, L)
                        (decs if d <= L else fails).append(dec)
    return ParabolicApprox(L, sigma, radius, Ms, decs, fails)


@dataclass
class RelGenerators:
    T: list
    R: list  # (P index, conjugator g, subgroup H ∩ gPg^-1)
    sigma: int
    K: int
    L: int
    factorizations: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def shadow_factor(rc: RelativeCayleyGraph, w: Window, H: Subgroup, h: Element, sigma: int,
                  T: set, L: int, KS: int):
    """Factor ``h`` along a geodesic of the relative Cayley graph.

    Returns a list of factors ``("T", t)`` or ``("R", P index, conjugator, a)``
    whose product is ``h``, or raises :class:`QcError`.
    """
    G = rc.group
    one = rc.vertex(G.identity)
    path = geodesic(w, one, rc.vertex(h))
    rp: RelPath = rc.relpath(w, path)
    xs = rp.elements
    gs = []
    for k, x in enumerate(xs):
        if k == 0 or k == len(xs) - 1:
            gs.append(G.identity)
            continue
        d, near = H.distance_to(x)
        if d > sigma:
            raise QcError(f"vertex {G.format(x)} is {d} > sigma = {sigma} from H")
        gs.append(G.mul(G.inv(x), near))
    factors = []
    for k, lab in enumerate(rp.labels):
        q = lab[1]
        hk = G.mul(G.mul(G.inv(gs[k]), q), gs[k + 1])
        if lab[0] == "S":
            if G.length(hk) > 2 * sigma + KS:
                raise QcError(f"S-edge factor {G.format(hk)} longer than 2 sigma + K")
            if hk != G.identity:
                factors.append(("T", hk))
            continue
        P = rc.peripherals[lab[0]].subgroup
        conj = G.inv(gs[k])
        I = intersect(H, P.conjugate(conj))
        d, a = I.distance_to(hk)
        b = G.mul(G.inv(a), hk)
        if d > L:
            raise QcError(f"parabolic factor {G.format(hk)} has remainder {d} > L = {L}")
        if a != G.identity:
            factors.append(("R", lab[0], conj, a))
        if b != G.identity:
            factors.append(("T", b))
    prod = G.prod([f[-1] for f in factors])
    if prod != h:
        raise QcError(f"factorization of {G.format(h)} does not multiply back")
    for f in factors:
        if f[0] == "T" and f[1] not in T:
            raise QcError(f"factor {G.format(f[1])} is not in T")
    return factors


def relative_generators(rc: RelativeCayleyGraph, H: Subgroup, sigma: int, radius: int,
                        check_radius: int = 4, L: int | None = None, tau: int | None = None
                        ) -> RelGenerators:
    """``T`` and ``R`` as in the finite relative generation argument, validated
    by factoring every element of ``H ∩ ball(check_radius)``.

    ``tau`` (default ``sigma``) bounds the conjugators of ``R``; it is folded
    in as ``max(sigma, tau)``.
    """
    G = rc.group
    KS = max((G.length(s) for s in rc.S), default=0)
    if L is None:
        L = parabolic_approx_l(G, rc.peripherals, H, sigma, radius, decompose=False).L
    bound = max(2 * sigma + KS, L)
    T = sorted((h for h in H.elements_within(bound) if h != G.identity), key=G.sort_key)
    reach = max(sigma, tau or 0)
    R = []
    for i, P in enumerate(rc.peripherals):
        for g in G.ball(reach):
            I = intersect(H, P.subgroup.conjugate(g))
            if not any(I.same_as(x[2]) for x in R):
                R.append((i, g, I))
    out = RelGenerators(T, R, sigma, KS, L)
    w = rc.window(check_radius + 1)
    Tset = set(T)
    for h in H.elements_within(check_radius):
        try:
            out.factorizations[h] = shadow_factor(rc, w, H, h, sigma, Tset, L, KS)
        except QcError as exc:
            out.failures.append((h, str(exc)))
    return out


# -- induced peripheral structure -------------------------------------------------

@dataclass
class PeripheralInduction:
    H: Subgroup
    stabilizers: dict  # vertex rep -> H-stabilizer
    edge_stabilizers: dict
    checks: dict

    @property
    def induced(self) -> list[Subgroup]:
        out = []
        for S in self.stabilizers.values():
            if not S.is_finite and not any(S.same_as(x) for x in out):
                out.append(S)
        return out

    @property
    def ok(self) -> bool:
        return all(v for k, v in self.checks.items() if k.endswith("ok"))


def _orbit_reps(K: EquivariantGraphSpec, H: Subgroup, verts, bound: int = 6):
    reps = []
    hs = H.elements_within(bound)
    for v in sorted(verts):
        if not any(K.act(h, r) == v for r in reps for h in hs):
            reps.append(v)
    return reps


def induced_peripheral_structure(witness: QcWitness, radius: int = 4, n: int = 4) -> PeripheralInduction:
    from .eqgraph import circuits_through_edge
    from .hyp_metric import delta_estimate

    K, H = witness.K, witness.H
    stabs = {v: intersect(H, K.vertex_stabilizer(v)) for v in _orbit_reps(K, H, witness.J_vertices)}
    estabs = {}
    for e in sorted(witness.J_edges):
        a, b = intersect(H, K.vertex_stabilizer(e[1])), K.vertex_stabilizer(e[2])
        estabs[e] = intersect(a, b)
    L = witness.window(radius)
    counts = {}
    for e in sorted(witness.J_edges):
        counts[e] = circuits_through_edge(L, e, n).counts if e in set(L.edges) else {}
    delta = delta_estimate(L, max_triples=20_000).delta if len(L) > 2 else 0
    checks = {
        "edge_stabilizers_finite_ok": all(s.is_finite for s in estabs.values()),
        "connected_ok": L.is_connected(),
        "circuit_counts": counts,
        "delta": delta,
    }
    return PeripheralInduction(H, stabs, estabs, checks)


# -- transfer between (G, P)-graphs ---------------------------------------------

@dataclass
class TransferResult:
    witness: QcWitness
    stages: list  # (name, ok, details)
    joint: object = None

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.stages)


def intersecting_translates(K: EquivariantGraphSpec, H: Subgroup, Jv, bound: int) -> list:
    """``{h : hJ ∩ J ≠ ∅}`` within ``|h| <= bound``."""
    Jv = set(Jv)
    out = []
    for h in H.elements_within(bound):
        if any(K.act(h, x) in Jv for x in Jv):
            out.append(h)
    return out


def transfer_witness(K2: EquivariantGraphSpec, w1: QcWitness, peripherals: Sequence[Peripheral],
                     radii: Sequence[int] = (3, 4, 5), t_bound: int = 6, ball_radius: int = 6
                     ) -> TransferResult:
    """Move a Q-0 witness from ``w1.K`` to ``K2`` following the independence proof."""
    from .surgery import embed_vertex, joint_embedding

    K1, H = w1.K, w1.H
    G = K1.group
    stages = []
    if K2 is K1:
        w = QcWitness(K1, H, w1.J_vertices, w1.J_edges, w1.base)
        distortion_series(w, radii)
        return TransferResult(w, [("identical", True, {})])
    if H.kind == "whole":
        w = star_witness(K2, H)
        distortion_series(w, radii)
        return TransferResult(w, [("whole group", True, {"L2": "K2"})])
    # 1. reduce to a common graph containing both
    joint = joint_embedding(K1, K2, peripherals)
    stages.append(("joint embedding", True, {"vertex_orbits": len(joint.spec.vertex_orbits),
                                             "edge_orbits": len(joint.spec.edge_orbits)}))
    # 2. vertices of K1 with infinite stabilizers lie in K2
    inf1 = [v for v in sorted(w1.J_vertices) if not K1.vertex_stabilizer(v).is_finite]
    glued1 = {a[0] for a, _ in joint.parabolic.values()}
    bad = [v for v in inf1 if v[0] not in glued1]
    stages.append(("infinite-stabilizer vertices in K2", not bad,
                   {"count": len(inf1), "missing": [K1.format_vertex(v) for v in bad]}))
    if bad:
        return TransferResult(w1, stages, joint)

    def to_k2(v):
        # v lies in a glued orbit of K1: find the K2 vertex with the same image
        oid, m = joint.embed1[v[0]]
        for o2, (oj, m2) in joint.embed2.items():
            if oj == oid:
                # x m = y m2 with x = v[1]
                return K2.vertex(o2, G.mul(G.mul(v[1], m), G.inv(m2)))
        raise QcError(f"{K1.format_vertex(v)} has no counterpart in K2")

    # 3. cocompact L2 from relative generators T and parabolic vertices C
    T = [h for h in intersecting_translates(K1, H, w1.J_vertices, t_bound) if h != G.identity]
    C1 = [v for v in sorted(w1.J_vertices) if not intersect(H, K1.vertex_stabilizer(v)).is_finite]
    C = [to_k2(v) for v in C1]
    v2 = K2.vertex(sorted(K2.vertex_orbits)[0]) if "G" not in K2.vertex_orbits else K2.vertex("G")
    targets = sorted({K2.act(t, v2) for t in T} | set(C))
    W = materialize_ball(K2, v2, ball_radius, valence_budget=16)
    Jv, Je = {v2}, set()
    for x in targets:
        if x not in W:
            raise QcError(f"target {K2.format_vertex(x)} outside the K2 ball")
        p = geodesic(W, v2, x)
        Jv.update(p)
        Je.update(path_edges(W, p))
    w2 = cocompact_subgraph(K2, H, T, C, Jv, Je, v2)
    stages.append(("cocompact L2", True, {"T": [G.format(t) for t in T], "C": len(C),
                                          "J_vertices": len(Jv), "J_edges": len(Je)}))
    # 4. enlarge to contain the infinite valence vertices of L1 (the C vertices)
    missing = [c for c in C if c not in w2.J_vertices]
    stages.append(("enlarge over infinite valence vertices", not missing, {"added": 0}))
    # 5. bookkeeping of the H-attachments and H-removals relating L1 and L2
    img1 = {embed_vertex(joint, 1, v) for v in w1.J_vertices}
    img2 = {embed_vertex(joint, 2, v) for v in w2.J_vertices}
    stages.append(("attachments and removals", True,
                   {"attached_edge_orbits": len(Je), "removed_vertex_reps": len(img1 - img2)}))
    # 6. quasi-isometric embedding, measured
    series = distortion_series(w2, radii)
    stages.append(("distortion", verdict(series, k=min(3, len(series))) == POSITIVE,
                   {"series": series}))
    w2.trace = stages
    return TransferResult(w2, stages, joint)
