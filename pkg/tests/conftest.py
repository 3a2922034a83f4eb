import pytest

from finegraph.cayley import Peripheral, RelativeCayleyGraph, cayley_graph, coned_off
from finegraph.eqgraph import EdgeOrbit, EquivariantGraphSpec, VertexOrbit
from finegraph.groups import FiniteGroup, FreeGroup, FreeProduct, Subgroup


@pytest.fixture(scope="session")
def zz():
    """Z/2 * Z/3 with s, t and peripherals <s>, <t>."""
    B = FreeProduct([2, 3], ["s", "t"])
    s, t = B.generator("s"), B.generator("t")
    P = [Peripheral("s", Subgroup(B, [s], name="<s>")), Peripheral("t", Subgroup(B, [t], name="<t>"))]
    return B, s, t, P


@pytest.fixture(scope="session")
def f2():
    F = FreeGroup(["a", "b"])
    a, b = F.generator("a"), F.generator("b")
    return F, a, b, [Peripheral("A", Subgroup(F, [a], name="<a>"))]


@pytest.fixture(scope="session")
def hexagon():
    G = FiniteGroup.cyclic_product([6], ["x"])
    x = G.generator("x")
    return cayley_graph(G, [x, G.inv(x)])


@pytest.fixture(scope="session")
def zline():
    Z = FreeGroup(["z"])
    z = Z.generator("z")
    return cayley_graph(Z, [z, Z.inv(z)])


@pytest.fixture(scope="session")
def tree_zz(zz):
    B, s, t, P = zz
    e = B.identity
    return EquivariantGraphSpec(B, [VertexOrbit("vs", P[0].subgroup), VertexOrbit("vt", P[1].subgroup)],
                                [EdgeOrbit("e", ("vs", e), ("vt", e))], name="BS")


@pytest.fixture(scope="session")
def coned_zz(zz):
    B, s, t, P = zz
    return coned_off(B, [], P)


@pytest.fixture(scope="session")
def coned_f2(f2):
    F, a, b, P = f2
    return coned_off(F, [a, b], P)


@pytest.fixture(scope="session")
def rel_f2(f2):
    F, a, b, P = f2
    return RelativeCayleyGraph(F, [a, b], P)


@pytest.fixture(scope="session")
def rel_zz(zz):
    B, s, t, P = zz
    return RelativeCayleyGraph(B, [], P)


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    # merged over setup, call and teardown; the time limit is checked at teardown
    props = dict(report.user_properties)
    if "acceptance" in props:
        row = _ACCEPTANCE.setdefault(report.nodeid, {"ok": True})
        row.update(props)
        row["ok"] = row["ok"] and report.outcome != "failed"


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            item.user_properties.append(("acceptance", m.args[:2]))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for row in sorted(_ACCEPTANCE.values(), key=lambda r: r["acceptance"][0]):
        num, title = row["acceptance"]
        took = f" ({row['elapsed']:.1f}s)" if "elapsed" in row else ""
        terminalreporter.write_line(f"[{'PASS' if row['ok'] else 'FAIL'}] criterion {num}: {title}{took}")
