import json
from pathlib import Path

import pytest

from finegraph import fixtures
from finegraph.eqgraph import Window, materialize_ball
from finegraph.export import ladder_dot, ladder_json, window_dot, window_json
from finegraph.hyp_metric import epsilon_slim
from finegraph.ladder import build_simple_ladder, required_n
from finegraph.reports import ConstantReport, MonotoneError, digest
from finegraph.specfiles import (SpecError, graph_from_json, graph_to_json, group_from_json,
                                 group_to_json, load_graph, subgroup_from_json, subgroup_to_json)

GOLDEN = Path(__file__).parent / "golden"


@pytest.mark.parametrize("name", fixtures.graph_names())
def test_graph_fixture_roundtrip(name):
    obj = fixtures.load_graph(name)
    spec = getattr(obj, "spec", obj)
    again = graph_from_json(graph_to_json(spec))
    assert graph_to_json(again) == graph_to_json(spec)
    w1 = materialize_ball(spec, spec.vertex(sorted(spec.vertex_orbits)[0]), 2, valence_budget=8)
    w2 = materialize_ball(again, again.vertex(sorted(again.vertex_orbits)[0]), 2, valence_budget=8)
    assert w1.vertices == w2.vertices and w1.edges == w2.edges


def test_group_roundtrip():
    for d in ({"backend": "freeGroup", "labels": ["a", "b"]},
              {"backend": "freeProductOfFinite", "orders": [2, 3], "labels": ["s", "t"]},
              {"backend": "finiteTable", "cyclic": [6], "labels": ["x"]}):
        assert group_to_json(group_from_json(d)) == d
    table = {"backend": "finiteTable", "table": [[0, 1], [1, 0]], "generators": {"x": 1}}
    G = group_from_json(table)
    assert G.order(G.parse("x")) == 2
    assert group_to_json(G)["table"] == [[0, 1], [1, 0]]


def test_subgroup_json(zz):
    B, s, t, _ = zz
    H = subgroup_from_json(B, {"gens": ["s t"]})
    assert H.kind == "cyclic" and subgroup_to_json(H) == {"gens": ["s t"]}
    assert subgroup_from_json(B, {"whole": True}).kind == "whole"
    with pytest.raises(SpecError):
        subgroup_from_json(B, {"gens": ["q"]})


def test_errors_are_line_anchored(tmp_path):
    p = tmp_path / "k.json"
    p.write_text('{\n  "group": {"backend": "freeGroup", "labels": ["a"]},\n'
                 '  "kind": "cayley",\n  "S": ["a", "zz"]\n}\n')
    with pytest.raises(SpecError) as exc:
        load_graph(p)
    assert exc.value.line == 4 and f"{p}:4:" in str(exc.value)
    p.write_text('{\n  "group": {\n}')
    with pytest.raises(SpecError) as exc:
        load_graph(p)
    assert exc.value.line == 3
    with pytest.raises(SpecError):
        group_from_json({"backend": "nope"})
    with pytest.raises(SpecError):
        graph_from_json({"group": {"backend": "freeGroup", "labels": ["a"]}, "kind": "cayley"})


def test_window_dot_hexagon(hexagon):
    w = materialize_ball(hexagon, hexagon.vertex("G"), 3)
    dot = window_dot(w)
    assert dot.count(" -- ") == 6
    assert sum(1 for line in dot.splitlines() if line.strip().startswith('"') and "--" not in line) == 6
    assert dot == window_dot(materialize_ball(hexagon, hexagon.vertex("G"), 3))


def test_window_dot_empty_and_cones(coned_f2):
    assert window_dot(Window([], [])) == 'graph "window" {\n  node [shape=circle];\n}\n'
    spec = coned_f2.spec
    dot = window_dot(materialize_ball(spec, spec.vertex("G"), 1, valence_budget=4))
    assert '"cone:A:1" [shape=box' in dot


def test_window_json(hexagon):
    w = materialize_ball(hexagon, hexagon.vertex("G"), 3)
    d = window_json(w)
    assert len(d["vertices"]) == 6 and len(d["edges"]) == 6 and d["complete"]
    assert d["adjacency"]["G:1"] == ["G:x", "G:x^5"]


def test_single_cell_ladder_golden(hexagon):
    G = hexagon.group
    x = G.generator("x")
    w = materialize_ball(hexagon, hexagon.vertex("G"), 3)
    V = lambda k: hexagon.vertex("G", G.power(x, k))  # noqa: E731
    eps = epsilon_slim(w, 1.0).eps
    D = build_simple_ladder(w, [V(0), V(1), V(2), V(3)], [V(0), V(5), V(4), V(3)], 1.0,
                            required_n(eps, 1.0), eps=eps)
    assert D.branch == "single"
    assert ladder_dot(D, hexagon) == (GOLDEN / "single_cell_ladder.dot").read_text()
    j = ladder_json(D, hexagon)
    assert j["cells"] == [["G:1", "G:x", "G:x^2", "G:x^3", "G:x^4", "G:x^5"]]


def test_report_monotone_and_digest():
    r = ConstantReport("delta", seed=3)
    r.add_input("graph", {"a": 1})
    r.append(2, True, delta=0)
    r.append(3, False, delta=1)
    with pytest.raises(MonotoneError):
        r.append(4, True, delta=0)
    d = json.loads(r.dumps())
    assert d["seed"] == 3 and d["monotone"] == ["delta"] and d["complete"] is False
    assert d["version"] and d["inputs"]["graph"] == digest({"a": 1})
    assert digest({"b": 1, "a": 2}) == digest({"a": 2, "b": 1})
