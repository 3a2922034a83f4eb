import pytest

from finegraph.cayley import cayley_graph
from finegraph.eqgraph import materialize_ball
from finegraph.groups import FiniteGroup
from finegraph.hyp_metric import epsilon_slim
from finegraph.ladder import (LadderError, SimpleLadder, build_simple_ladder, build_xn,
                              ladder_proximity, required_n, verify_ladder)

LAM = 1.5


@pytest.fixture(scope="module")
def strip():
    L = FiniteGroup.cyclic_product([200, 2], ["x", "y"])
    x, y = L.generator("x"), L.generator("y")
    spec = cayley_graph(L, [x, L.inv(x), y])

    def V(i, j):
        return spec.vertex("G", L.mul(L.power(x, i), L.power(y, j)))

    w = materialize_ball(spec, V(12, 0), 40)
    P = [V(i, 0) for i in range(25)]
    Q = [V(0, 0)] + [V(i, 1) for i in range(25)] + [V(24, 0)]
    return spec, V, w, P, Q


def test_measured_epsilon_is_stable(strip):
    spec, V, *_ = strip
    vals = [epsilon_slim(materialize_ball(spec, V(0, 0), r), LAM).eps for r in (4, 6, 8)]
    assert vals == [1, 1, 1]


def test_ladder_split_branch(strip):
    spec, V, w, P, Q = strip
    D = build_simple_ladder(w, P, Q, LAM, required_n(1, LAM), eps=1)
    assert D.branch == "split" and D.n == 76
    assert D.cell_lengths == [26, 26]
    assert max(D.cell_lengths) <= D.bound == 72
    assert verify_ladder(D).ok
    assert D.internal_arcs == [[V(12, 0), V(12, 1)]]
    assert ladder_proximity(D, w.dist) <= D.bound


def test_refuses_small_n(strip):
    spec, V, w, P, Q = strip
    with pytest.raises(LadderError, match="too small"):
        build_simple_ladder(w, P, Q, LAM, 75, eps=1)


def test_single_cell_branch_iff_short(strip):
    spec, V, w, P, Q = strip
    # |G| = 24: split for eps = 1 (24 >= 10), single cell for eps = 3 (24 < 30)
    D = build_simple_ladder(w, P, Q, LAM, required_n(3, LAM), eps=3)
    assert D.branch == "single" and D.cell_lengths == [50]
    assert verify_ladder(D).ok
    D = build_simple_ladder(w, P, Q, LAM, required_n(2.4, LAM), eps=2.4)
    assert D.branch == "split"  # 24 = 10 * 2.4 is not below the threshold
    assert verify_ladder(D).ok and max(D.cell_lengths) <= D.bound


def test_rejects_bad_pairs(strip):
    spec, V, w, P, Q = strip
    with pytest.raises(LadderError):
        build_simple_ladder(w, P, P, LAM, 76, eps=1)
    with pytest.raises(LadderError):
        build_simple_ladder(w, P, Q[:-1], LAM, 76, eps=1)
    zig = [V(0, 0), V(0, 1), V(1, 1), V(1, 0), V(2, 0)]
    with pytest.raises(LadderError, match="quasigeodesic"):
        build_simple_ladder(w, [V(0, 0), V(1, 0), V(2, 0)], zig, 1.0, 60, eps=1)


def test_hand_built_two_cell_chain(strip):
    spec, V, w, _, _ = strip
    P = [V(0, 0), V(1, 0), V(2, 0)]
    Q = [V(0, 0), V(0, 1), V(1, 1), V(2, 1), V(2, 0)]
    cells = [[V(0, 0), V(1, 0), V(1, 1), V(0, 1)], [V(1, 0), V(2, 0), V(2, 1), V(1, 1)]]
    D = SimpleLadder(cells, P, Q, [[V(1, 0), V(1, 1)]], eps=1, lam=1, n=4, branch="split")
    assert verify_ladder(D).ok
    assert verify_ladder(D, is_b=lambda v: True, window=w).ok
    xn = build_xn(w, 4)
    assert all(xn.has_cell(c) for c in cells)
    assert not xn.has_cell(P + Q[::-1][1:-1])  # length 6 > 4


def test_verify_flags_violations(strip):
    spec, V, w, _, _ = strip
    P = [V(0, 0), V(1, 0), V(2, 0)]
    Q = [V(0, 0), V(0, 1), V(1, 1), V(2, 1), V(2, 0)]
    c1 = [V(0, 0), V(1, 0), V(1, 1), V(0, 1)]
    c2 = [V(1, 0), V(2, 0), V(2, 1), V(1, 1)]
    kinds = lambda D, **kw: {v[0] for v in verify_ladder(D, **kw).violations}  # noqa: E731
    assert "cell longer than n" in kinds(SimpleLadder([c1, c2], P, Q, [], 1, 1, 3, "split"))
    assert "empty" in kinds(SimpleLadder([], P, Q, [], 1, 1, 4, "split"))
    assert "boundary differs from P Q^-1" in kinds(SimpleLadder([c1], P, Q, [], 1, 1, 4, "split"))
    one_b = V(1, 1)
    got = kinds(SimpleLadder([c1, c2], P, Q, [], 1, 1, 4, "split"), is_b=lambda v: v == one_b, window=w)
    assert "no B-vertex on P side" in got and "A-A edge" in got


def test_xn_cells(strip):
    spec, V, w, _, _ = strip
    small = materialize_ball(spec, V(0, 0), 3)
    xn = build_xn(small, 4)
    # squares of the strip only
    assert xn.cells and all(len(c) == 4 for c in xn.cells)
    assert not xn.possibly_missing
