"""The ten acceptance criteria, one test each, with wall-clock limits.

Each test is marked ``acceptance(number, title, seconds)``; the terminal
summary prints one PASS/FAIL line per criterion.
"""

import json
import time

import networkx as nx
import pytest

import oracles
from finegraph import fixtures
from finegraph.cayley import RelativeCayleyGraph, coned_off
from finegraph.cli import main
from finegraph.eqgraph import circuits_through_edge, geodesic, group_window, materialize_ball
from finegraph.groups import Subgroup
from finegraph.hyp_metric import epsilon_slim, fellow_travel_constant
from finegraph.ladder import LadderError, build_simple_ladder, required_n, verify_ladder
from finegraph.quasiconvex import (NEGATIVE, POSITIVE, distortion_series, hat_sigma,
                                   induced_peripheral_structure, osin_sigma, parabolic_approx_l,
                                   relative_generators, transfer_witness, verdict)
from finegraph.surgery import attach_edge, hull_c, qi_bound_check

acceptance = pytest.mark.acceptance


@pytest.fixture(autouse=True)
def stopwatch(request):
    m = request.node.get_closest_marker("acceptance")
    t0 = time.perf_counter()
    yield
    if m is not None:
        elapsed = time.perf_counter() - t0
        request.node.user_properties.append(("elapsed", elapsed))
        assert elapsed < m.args[2], f"took {elapsed:.1f}s, limit {m.args[2]}s"


# windows for criterion 1: (fixture, radius, n)
FINENESS_WINDOWS = [("hexagon", 3, 6), ("zline", 8, 6), ("tree_zz", 5, 6), ("tree_f2", 3, 6),
                    ("coned_zz", 4, 6), ("coned_f2", 3, 6), ("cayley_f2", 3, 6), ("ladder", 5, 8)]


@acceptance(1, "fineness oracle equivalence", 30)
def test_fineness_oracle_equivalence():
    for name, radius, n in FINENESS_WINDOWS:
        spec = fixtures.load_graph(name)
        spec = getattr(spec, "spec", spec)
        w = materialize_ball(spec, spec.vertex(sorted(spec.vertex_orbits)[0]), radius,
                             valence_budget=16)
        assert len(w) <= 2000
        oracle = oracles.circuit_counts(w, n)
        for e in w.edges:
            got = circuits_through_edge(w, e, n).counts
            assert got == oracle[frozenset(e[1:])], (name, e)
            if name.startswith("tree"):
                assert not any(got.values())
    co = fixtures.load_graph("coned_f2").spec
    w = materialize_ball(co, co.vertex("G"), 3, valence_budget=16)
    assert circuits_through_edge(w, co.edge_rep("s:a"), 3).counts[3] == 1


@acceptance(2, "chord attachment distance bound", 5)
def test_chord_distance_bound(zline):
    Z = zline.group
    att = attach_edge(zline, zline.vertex("G"), zline.vertex("G", Z.power(Z.generator("z"), 2)))
    assert att.bound_factor == 2
    res = qi_bound_check(att, zline.vertex("G"), 8)
    assert res["pairs"] > 0 and res["satisfied"] == res["pairs"]


@acceptance(3, "hullC contains embedded paths", 60)
def test_hull_correctness(zline, tree_zz, zz):
    Z = zline.group
    B, s, t, _ = zz
    chords = [attach_edge(zline, zline.vertex("G"), zline.vertex("G", Z.power(Z.generator("z"), 2))),
              attach_edge(tree_zz, tree_zz.vertex("vs"), tree_zz.vertex("vs", t))]
    for att in chords:
        _, u, v = att.spec.edge_rep(att.new_edge_orbits[0])
        for n in range(1, 7):
            res = hull_c(att, u, v, n)
            w = materialize_ball(att.spec, v, n, valence_budget=16)
            truth = {x for p in oracles.embedded_paths(w, u, v, n) for x in p}
            assert truth <= res.vertices and not res.inconclusive


@acceptance(4, "phi quasi-isometry", 10)
def test_phi_quasi_isometry(zz, f2):
    for G, x, y, P, S in [(*zz, []), (*f2, list(f2[1:3]))]:
        wb = RelativeCayleyGraph(G, S, P).window(6)
        wh = group_window(coned_off(G, S, P).spec, 6)
        ball = G.ball(3)
        for g in ball:
            db, dh = wb.distances_from(("G", g)), wh.distances_from(("G", g))
            for h in ball:
                assert db[("G", h)] <= dh[("G", h)] <= 2 * db[("G", h)]
    F, a = f2[0], f2[1]
    one, a5 = ("G", F.identity), ("G", F.power(a, 5))
    assert RelativeCayleyGraph(F, [a, f2[2]], f2[3]).window(6).dist(one, a5) == 1
    assert group_window(coned_off(F, [a, f2[2]], f2[3]).spec, 5).dist(one, a5) == 2


@acceptance(5, "ladder bounds", 60)
def test_ladder_bounds():
    spec = fixtures.load_graph("ladder")
    L = spec.group
    x, y = L.generator("x"), L.generator("y")
    V = lambda i, j: spec.vertex("G", L.mul(L.power(x, i), L.power(y, j)))  # noqa: E731
    lam = 1.5
    eps = epsilon_slim(materialize_ball(spec, V(0, 0), 6), lam).eps
    assert eps == 1
    w = materialize_ball(spec, V(12, 0), 40)
    cases = []
    for length in (4, 9, 24, 30):
        P = [V(i, 0) for i in range(length + 1)]
        Q = [V(0, 0)] + [V(i, 1) for i in range(length + 1)] + [V(length, 0)]
        cases.append((length, P, Q))
    for length, P, Q in cases:
        for e in (eps, 2.4, 3):
            n = required_n(e, lam)
            assert n > 50 * e * lam
            with pytest.raises(LadderError):
                build_simple_ladder(w, P, Q, lam, int(50 * e * lam), eps=e)
            D = build_simple_ladder(w, P, Q, lam, n, eps=e)
            assert verify_ladder(D).ok
            assert max(D.cell_lengths) <= 48 * e * lam
            assert (D.branch == "single") == (length < 10 * e)


@acceptance(6, "fellow travel", 10)
def test_fellow_travel(coned_f2, f2):
    F = f2[0]
    spec = coned_f2.spec
    w = materialize_ball(spec, spec.vertex("G"), 4, valence_budget=12)
    for v in w.vertices[:10]:
        p = geodesic(w, w.vertices[0], v)
        assert fellow_travel_constant(w, p, p) == 0
    V = lambda g: spec.vertex("G", F.parse(g))  # noqa: E731
    P1 = [V(x) for x in ["1", "b", "b a", "b a^2", "b a^3", "b a^4", "b a^5", "b a^5 b"]]
    P2 = [V("1"), V("b"), spec.vertex("cone:A", F.parse("b")), V("b a^5"), V("b a^5 b")]
    g = oracles.to_nx(w)
    d = {u: nx.single_source_shortest_path_length(g, u) for u in set(P1) | set(P2)}
    brute = max(max(min(d[u][v] for v in P2) for u in P1), max(min(d[u][v] for v in P1) for u in P2))
    assert fellow_travel_constant(w, P1, P2) == brute == fellow_travel_constant(w, P2, P1)


@acceptance(7, "quasiconvexity positives stabilize", 180)
def test_quasiconvex_positives():
    for name, sigma in [("zz_axis", None), ("f2_free_factor", 0)]:
        t = fixtures.load_triple(name)
        rc = RelativeCayleyGraph(t.group, t.S, t.peripherals)
        co = coned_off(t.group, t.S, t.peripherals)
        osin = [osin_sigma(rc, t.H, r).sigma for r in (5, 6, 7)]
        hat = [hat_sigma(co, t.H, r).sigma for r in (5, 6, 7)]
        dist = [d for _, d in distortion_series(t.witness(), [5, 6, 7])]
        for series in (osin, hat, dist):
            assert len(set(series)) == 1, (name, series)
        if sigma is not None:
            assert osin[0] == hat[0] == sigma


@acceptance(8, "quasiconvexity negative", 120)
def test_quasiconvex_negative(capsys):
    t = fixtures.load_triple("f2_horocycle")
    series = distortion_series(t.witness(), [4, 5, 6])
    vals = [d for _, d in series]
    assert vals[0] < vals[1] < vals[2] and verdict(series) == NEGATIVE
    assert main(["qc", "--fixture", "f2_horocycle", "--radii", "4", "5", "6"]) == 1
    assert json.loads(capsys.readouterr().out)["verdict"] == "evidence: not quasiconvex"


@acceptance(9, "relative generation round trip", 120)
def test_relative_generation(zz, f2):
    B, s, t, PB = zz
    F, a, b, PF = f2
    for G, S, P, H, sigma in [(B, [], PB, Subgroup(B, [B.mul(s, t)]), 1),
                              (F, [a, b], PF, Subgroup(F, [b]), 0)]:
        rg = relative_generators(RelativeCayleyGraph(G, S, P), H, sigma, 4, check_radius=4)
        assert rg.ok
        assert set(rg.factorizations) == set(H.elements_within(4))
        for h, fs in rg.factorizations.items():
            assert G.prod([f[-1] for f in fs]) == h
        pa = parabolic_approx_l(G, P, H, sigma, 4)
        assert pa.ok
        for dec in pa.decompositions:
            assert dec.valid(G, H, P) and G.length(dec.b) <= pa.L


@acceptance(10, "transfer pipeline", 180)
def test_transfer_pipeline():
    t = fixtures.load_triple("zz_axis")
    source, target = t.transfer_inputs()
    res = transfer_witness(target, source, t.peripherals, radii=(5, 6, 7))
    assert res.ok
    assert verdict(res.witness.series) == POSITIVE
    assert induced_peripheral_structure(res.witness).induced == []
