import pytest

from finegraph import fixtures
from finegraph.eqgraph import group_window, materialize_ball
from finegraph.groups import Subgroup
from finegraph.quasiconvex import (INCONCLUSIVE, NEGATIVE, POSITIVE, QcError,
                                   bounded_intersection_m, cocompact_subgraph, distortion_series,
                                   hat_sigma, induced_peripheral_structure, osin_sigma,
                                   parabolic_approx_l, path_witness, relative_generators,
                                   star_witness, transfer_witness, verdict)


def test_verdict():
    assert verdict([3, 1, 1, 1]) == POSITIVE
    assert verdict([(4, 1.0), (5, 2.0), (6, 3.0)]) == NEGATIVE
    assert verdict([1, 2, 2]) == INCONCLUSIVE
    assert verdict([1, 1]) == INCONCLUSIVE


@pytest.mark.parametrize("name", fixtures.triple_names())
def test_shipped_triples(name):
    t = fixtures.load_triple(name)
    series = distortion_series(t.witness(), [3, 4, 5])
    vals = [d for _, d in series]
    assert vals == sorted(vals)
    if t.expect == "positive":
        assert verdict(series) == POSITIVE
    else:
        assert verdict(series) == NEGATIVE


def test_negative_series_frozen():
    t = fixtures.load_triple("f2_horocycle")
    assert [d for _, d in distortion_series(t.witness(), [3, 4, 5])] == [3.5, 4.5, 5.5]


def test_sigma_values(zz, f2, rel_zz, coned_zz, rel_f2, coned_f2):
    B, s, t, _ = zz
    F, a, b, _ = f2
    Hzz, Hf = Subgroup(B, [B.mul(s, t)]), Subgroup(F, [b])
    assert [osin_sigma(rel_zz, Hzz, r).sigma for r in (3, 4, 5)] == [1, 1, 1]
    assert [hat_sigma(coned_zz, Hzz, r).sigma for r in (3, 4, 5)] == [1, 1, 1]
    assert [osin_sigma(rel_f2, Hf, r).sigma for r in (3, 4)] == [0, 0]
    assert [hat_sigma(coned_f2, Hf, r).sigma for r in (3, 4)] == [0, 0]


def test_sigma_finite_and_parabolic(zz, f2, rel_zz, rel_f2):
    B, s, t, _ = zz
    F, a, b, _ = f2
    # a finite subgroup and a peripheral subgroup: sigma stays bounded
    vals = [osin_sigma(rel_zz, Subgroup(B, [t]), r).sigma for r in (3, 4, 5)]
    assert vals[-1] == vals[-2]
    assert [osin_sigma(rel_f2, Subgroup(F, [a]), r).sigma for r in (3, 4)] == [0, 0]


def _brute_m(G, B_gen, C_gen, g, K, radius):
    """Word-metric brute force over explicit powers."""
    N = 4 * radius + 8
    Bs = [G.power(B_gen, n) for n in range(-N, N + 1)]
    gC = [G.mul(g, G.power(C_gen, n)) for n in range(-N, N + 1)]
    gCg = {G.mul(x, G.inv(g)) for x in gC}
    I = [x for x in Bs if x in gCg]
    best = 0
    for q in Bs:
        if G.length(q) > radius:
            continue
        if min(G.dist(q, c) for c in gC) <= K:
            best = max(best, min(G.dist(q, x) for x in I))
    return best


@pytest.mark.parametrize("g_word,K", [("1", 1), ("b", 2), ("a", 2), ("a b", 3)])
def test_bounded_intersection_against_brute_force(f2, g_word, K):
    F, a, b, _ = f2
    Bsub, Csub = Subgroup(F, [F.parse("a b")]), Subgroup(F, [a])
    g = F.parse(g_word)
    M, _ = bounded_intersection_m(F, Bsub, Csub, g, K, 8)
    assert M == _brute_m(F, F.parse("a b"), a, g, K, 8)


def test_parabolic_approx(zz, f2):
    B, s, t, P = zz
    F, a, b, PF = f2
    pa = parabolic_approx_l(B, P, Subgroup(B, [B.mul(s, t)]), 1, 4)
    assert pa.L == 2 and pa.ok and len(pa.decompositions) == 15
    assert all(d.valid(B, Subgroup(B, [B.mul(s, t)]), P) for d in pa.decompositions)
    pf = parabolic_approx_l(F, PF, Subgroup(F, [b]), 0, 4)
    assert pf.L == 0 and pf.ok


def test_relative_generators(zz, f2, rel_zz, rel_f2):
    B, s, t, _ = zz
    F, a, b, _ = f2
    Hzz = Subgroup(B, [B.mul(s, t)])
    rg = relative_generators(rel_zz, Hzz, 1, 4)
    assert rg.ok and [B.format(x) for x in rg.T] == ["s t", "t^2 s"]
    assert len(rg.factorizations) == len(Hzz.elements_within(4))
    for h, fs in rg.factorizations.items():
        assert B.prod([f[-1] for f in fs]) == h
    rf = relative_generators(rel_f2, Subgroup(F, [b]), 0, 4)
    assert rf.ok and rf.T == [F.inv(b), b]
    # tau folds in as max(sigma, tau): more conjugators, same verdict
    rt = relative_generators(rel_f2, Subgroup(F, [b]), 0, 4, tau=1)
    assert rt.ok and len(rt.R) >= len(rf.R)


def test_witness_hypotheses(coned_f2, f2):
    F, a, b, _ = f2
    spec = coned_f2.spec
    w = materialize_ball(spec, spec.vertex("G"), 2, valence_budget=8)
    H = Subgroup(F, [b])
    one, vb = spec.vertex("G"), spec.vertex("G", b)
    with pytest.raises(QcError, match="misses"):
        path_witness(spec, H, w, [one, spec.vertex("G", a)], [b])
    with pytest.raises(QcError, match="generate"):
        cocompact_subgraph(spec, H, [], [], {one}, set(), one)
    wit = path_witness(spec, H, w, [one, vb], [b])
    assert wit.window(3).is_connected()


def test_star_witness_for_whole_group(coned_zz, zz):
    B, *_ = zz
    H = Subgroup(B, whole=True)
    wit = star_witness(coned_zz.spec, H)
    series = distortion_series(wit, [2, 3])
    assert verdict(series + [series[-1]]) == POSITIVE


def test_transfer_and_induced_peripherals():
    t = fixtures.load_triple("zz_axis")
    w1, K2 = t.transfer_inputs()
    assert verdict(distortion_series(w1, [3, 4, 5])) == POSITIVE
    res = transfer_witness(K2, w1, t.peripherals, radii=(4, 5, 6))
    assert res.ok
    assert [s[0] for s in res.stages][-1] == "distortion"
    assert verdict(res.witness.series) == POSITIVE
    ind = induced_peripheral_structure(res.witness)
    assert ind.induced == [] and ind.ok
    ind1 = induced_peripheral_structure(w1)
    assert ind1.induced == []


def test_induced_peripheral_for_parabolic():
    t = fixtures.load_triple("f2_parabolic")
    ind = induced_peripheral_structure(t.witness())
    assert len(ind.induced) == 1 and ind.induced[0].same_as(t.H)


def test_transfer_identical_graph():
    t = fixtures.load_triple("f2_free_factor")
    w = t.witness()
    res = transfer_witness(w.K, w, t.peripherals, radii=(3, 4, 5))
    assert res.stages[0][0] == "identical" and verdict(res.witness.series) == POSITIVE
