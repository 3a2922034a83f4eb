"""``finegraph`` command line.

Exit codes: 0 success / positive evidence, 1 negative evidence,
2 inconclusive (truncated windows or unstable series), 3 input error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import export, fixtures
from .cayley import ConedOffSpec, RelativeCayleyGraph, RelativeGenerationError
from .eqgraph import (DisconnectedError, GraphError, fineness_certificate, group_window,
                      materialize_ball)
from .hyp_metric import delta_estimate, fellow_travel_constant
from .ladder import LadderError, build_simple_ladder, verify_ladder
from .quasiconvex import (INCONCLUSIVE, NEGATIVE, POSITIVE, QcError, distortion_series,
                          hat_sigma, induced_peripheral_structure, osin_sigma,
                          transfer_witness, verdict)
from .reports import ConstantReport, digest, tool_version
from .specfiles import (SpecError, dumps, graph_from_json, graph_to_json, group_from_json,
                        parse_json, peripherals_from_json, read_text, subgroup_from_json)
from .surgery import (NEW, attach_arc, hull_c, joint_embedding, qi_bound_check,
                      remove_edge_orbit, remove_vertex_orbit)

log = logging.getLogger("finegraph")

EXIT = {POSITIVE: 0, NEGATIVE: 1, INCONCLUSIVE: 2}


class InputError(Exception):
    pass


# -- input plumbing -------------------------------------------------------------

def _source(arg: str):
    """``(data, path, text)`` for a JSON file, ``fixture:<name>`` or inline JSON."""
    if arg.startswith("fixture:"):
        path = fixtures.graph_path(arg.split(":", 1)[1])
    elif arg.lstrip().startswith(("[", "{", '"')):
        return parse_json(arg, "<inline>"), "<inline>", arg
    elif Path(arg).exists():
        path = Path(arg)
    else:
        raise SpecError("no such file", path=arg)
    text = read_text(path)
    return parse_json(text, path), path, text


def _read(arg: str):
    return _source(arg)[0]


def _build(arg: str, build):
    """Run ``build(data)`` with errors anchored to lines of the source."""
    data, path, text = _source(arg)
    try:
        return data, build(data)
    except SpecError as exc:
        raise exc.anchored(path, text) from exc


class Loaded:
    """A graph argument: raw JSON, group and built object."""

    def __init__(self, arg: str):
        self.arg = arg

        def build(data):
            if not isinstance(data, dict):
                raise SpecError("a graph spec must be a JSON object")
            group = group_from_json(data.get("group") or {})
            return group, graph_from_json(data, group)

        self.data, (self.group, self.obj) = _build(arg, build)

    @property
    def spec(self):
        if isinstance(self.obj, ConedOffSpec):
            return self.obj.spec
        if isinstance(self.obj, RelativeCayleyGraph):
            raise InputError("this command needs a graph with finitely many edge orbits, "
                             "not a relative Cayley graph")
        return self.obj

    def tokens(self, arg):
        seq = _read(arg) if isinstance(arg, str) else arg
        if not isinstance(seq, list):
            raise SpecError("paths must be JSON lists of vertex tokens")
        return [self.spec.parse_vertex(x) for x in seq]

    def vertex(self, token: str | None):
        if token is None:
            return self.spec.vertex(sorted(self.spec.vertex_orbits)[0])
        return self.spec.parse_vertex(token)

    def window(self, args):
        return materialize_ball(self.spec, self.vertex(args.center), args.radius,
                                valence_budget=args.budget)


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _radii(args) -> list[int]:
    if args.radii:
        return sorted(set(args.radii))
    return list(range(max(1, args.radius - 2), args.radius + 1))


# -- commands -----------------------------------------------------------------

def cmd_cayley(args) -> int:
    gdata, G = _build(args.group, group_from_json)
    peripherals = _read(args.peripherals) if args.peripherals else []
    kind = {"plain": "cayley", "coned": "coned", "relative": "relative"}[args.kind]
    data = {"group": gdata, "kind": kind, "S": list(args.gens), "name": args.name}
    if kind != "cayley":
        data["peripherals"] = peripherals
    obj = graph_from_json(data, G)
    if args.explicit:
        if isinstance(obj, RelativeCayleyGraph):
            raise InputError("the relative Cayley graph has infinitely many edge orbits")
        data = graph_to_json(obj.spec if isinstance(obj, ConedOffSpec) else obj)
    _emit(args, dumps(data))
    return 0


def cmd_fineness(args) -> int:
    g = Loaded(args.graph)
    rep = fineness_certificate(g.spec, args.n, valence_budget=args.budget)
    out = {"command": "fineness", "version": tool_version(), "inputs": {"graph": digest(g.data)},
           "n": rep.n, "verdict": rep.verdict, "complete": rep.complete,
           "budget_stable": rep.budget_stable, "budgets": rep.budgets,
           "counts": {e: {str(k): c for k, c in sorted(cs.items())} for e, cs in sorted(rep.counts.items())}}
    _emit(args, dumps(out))
    return 0 if rep.fine else 2


def cmd_delta(args) -> int:
    g = Loaded(args.graph)
    report = ConstantReport("delta", seed=args.seed)
    report.add_input("graph", g.data)
    for r in _radii(args):
        w = materialize_ball(g.spec, g.vertex(args.center), r, valence_budget=args.budget)
        est = delta_estimate(w, max_triples=args.max_triples, seed=args.seed)
        report.append(r, w.complete and est.exhaustive, delta=est.delta, vertices=len(w))
    _emit(args, report.dumps())
    return 0 if report.complete else 2


def cmd_ft(args) -> int:
    g = Loaded(args.graph)
    P1, P2 = g.tokens(args.path1), g.tokens(args.path2)
    w = materialize_ball(g.spec, P1[0], args.radius or len(P1) + len(P2), valence_budget=args.budget)
    report = ConstantReport("ft", seed=args.seed)
    report.add_input("graph", g.data)
    report.add_input("paths", [args.path1, args.path2])
    report.append(w.radius, w.complete, M=fellow_travel_constant(w, P1, P2))
    _emit(args, report.dumps())
    return 0 if w.complete else 2


def cmd_ladder(args) -> int:
    g = Loaded(args.graph)
    P, Q = g.tokens(args.P), g.tokens(args.Q)
    w = materialize_ball(g.spec, g.vertex(args.center) if args.center else P[0],
                         args.radius or len(P) + len(Q), valence_budget=args.budget)
    D = build_simple_ladder(w, P, Q, args.lam, args.n, eps=args.eps)
    rep = verify_ladder(D)
    if args.format == "dot":
        _emit(args, export.ladder_dot(D, g.spec))
    else:
        out = export.ladder_json(D, g.spec)
        out["version"] = tool_version()
        out["inputs"] = {"graph": digest(g.data)}
        out["violations"] = [list(map(str, v)) for v in rep.violations]
        out["cell_lengths"] = D.cell_lengths
        _emit(args, export.dumps(out))
    return 0 if rep.ok and max(D.cell_lengths) <= D.bound else 1


def _arc(g: Loaded, arg):
    seq = _read(arg)
    return [NEW if x in (None, "new") else g.spec.parse_vertex(x) for x in seq]


def cmd_surgery(args) -> int:
    g = Loaded(args.graph)
    if args.op == "attach":
        att = attach_arc(g.spec, _arc(g, args.arc), prefix=args.prefix)
        data = graph_to_json(att.spec)
        data["attachment"] = {"bound_factor": att.bound_factor, "arc_length": att.arc_length}
        if args.check_radius:
            chk = qi_bound_check(att, att.arc[0] if att.arc[0] is not NEW else g.vertex(None),
                                 args.check_radius)
            data["attachment"]["qi_check"] = chk
        _emit(args, dumps(data))
        return 0
    if args.op == "remove":
        try:
            if args.edge_orbit:
                out = remove_edge_orbit(g.spec, args.edge_orbit)
            else:
                out = remove_vertex_orbit(g.spec, args.vertex_orbit)
        except DisconnectedError as exc:
            print(f"removal disconnects the graph: {exc}", file=sys.stderr)
            return 1
        _emit(args, dumps(graph_to_json(out)))
        return 0
    if args.op == "hull":
        att = attach_arc(g.spec, _arc(g, args.arc), prefix=args.prefix)
        u, v = g.spec.parse_vertex(args.u), g.spec.parse_vertex(args.v)
        res = hull_c(att, u, v, args.n, valence_budget=args.budget)
        fmt = att.spec.format_vertex
        out = {"u": args.u, "v": args.v, "n": args.n, "p0": [fmt(x) for x in res.p0],
               "vertices": sorted(fmt(x) for x in res.vertices),
               "edges": sorted([e[0], fmt(e[1]), fmt(e[2])] for e in res.edges),
               "inconclusive": res.inconclusive}
        _emit(args, dumps(out))
        return 2 if res.inconclusive else 0
    if args.op == "join":
        g2 = Loaded(args.graph2)
        peripherals = peripherals_from_json(g.group, _read(args.peripherals))
        joint = joint_embedding(g.spec, g2.spec, peripherals)
        _emit(args, dumps(graph_to_json(joint.spec)))
        return 0
    raise InputError(f"unknown surgery {args.op}")


def _qc_inputs(args):
    if args.fixture:
        t = fixtures.load_triple(args.fixture)
        return t.data, t.group, t.H, t.ambient, (lambda: t.witness())
    if not (args.ambient and args.subgroup):
        raise InputError("qc needs --fixture or both --ambient and --subgroup")
    amb = Loaded(args.ambient)
    _, H = _build(args.subgroup, lambda d: subgroup_from_json(amb.group, d, name="H"))

    def witness():
        from .quasiconvex import path_witness
        if not args.witness:
            raise InputError("--def q0 needs --witness (path, T, C)")
        wd = _read(args.witness)
        path = amb.tokens(wd["path"])
        C = amb.tokens(wd.get("C", []))
        w = materialize_ball(amb.spec, path[0], len(path), valence_budget=16)
        return path_witness(amb.spec, H, w, path, [amb.group.parse(x) for x in wd.get("T", [])], C)

    return amb.data, amb.group, H, amb.obj, witness


def cmd_qc(args) -> int:
    data, G, H, ambient, witness = _qc_inputs(args)
    report = ConstantReport(f"qc:{args.definition}", seed=args.seed)
    report.add_input("ambient", data)
    report.add_input("subgroup", H.label)
    radii = _radii(args)
    if args.definition == "q0":
        series = distortion_series(witness(), radii)
        for r, d in series:
            report.append(r, True, distortion=d)
    else:
        if not isinstance(ambient, (ConedOffSpec, RelativeCayleyGraph)):
            raise InputError("osin/hat need a coned or relative ambient (kind coned/relative)")
        S, P = ambient.S, ambient.peripherals
        for r in radii:
            if args.definition == "osin":
                rep = osin_sigma(RelativeCayleyGraph(G, S, P), H, r)
            else:
                coned = ambient if isinstance(ambient, ConedOffSpec) else None
                if coned is None:
                    from .cayley import coned_off
                    coned = coned_off(G, S, P)
                rep = hat_sigma(coned, H, r)
            report.append(r, True, sigma=rep.sigma, lower_bound=rep.lower_bound)
        series = [(r, s) for r, s in zip(radii, report.series("sigma"))]
    report.verdict = verdict(series)
    _emit(args, report.dumps())
    return EXIT[report.verdict]


def cmd_qc_transfer(args) -> int:
    if args.fixture:
        t = fixtures.load_triple(args.fixture)
        w1, K2 = t.transfer_inputs()
        data, peripherals = t.data, t.peripherals
    else:
        src, tgt = Loaded(args.source), Loaded(args.target)
        H = subgroup_from_json(src.group, _read(args.subgroup), name="H")
        peripherals = peripherals_from_json(src.group, _read(args.peripherals))
        from .quasiconvex import path_witness
        path = src.tokens(args.path)
        w = materialize_ball(src.spec, path[0], len(path), valence_budget=16)
        w1 = path_witness(src.spec, H, w, path, [src.group.parse(x) for x in args.T])
        K2, data = tgt.spec, {"source": src.data, "target": tgt.data}
    res = transfer_witness(K2, w1, peripherals, radii=_radii(args))
    induced = induced_peripheral_structure(res.witness)
    report = ConstantReport("qc-transfer", seed=args.seed)
    report.add_input("inputs", data)
    for r, d in res.witness.series:
        report.append(r, True, distortion=d)
    report.extra["stages"] = [{"stage": n, "ok": ok, "details": det} for n, ok, det in res.stages]
    report.extra["induced_peripherals"] = [str(x) for x in induced.induced]
    report.verdict = verdict(res.witness.series) if res.ok else INCONCLUSIVE
    _emit(args, report.dumps())
    return EXIT[report.verdict]


def cmd_export(args) -> int:
    if args.ladder:
        d = _read(args.ladder)
        from .ladder import SimpleLadder
        D = SimpleLadder(d["cells"], d["P"], d["Q"], d.get("internal_arcs", []), d.get("eps", 0),
                         d.get("lam", 1), d.get("n", 0), d.get("branch", "split"))
        text = export.ladder_dot(D) if args.format == "dot" else export.dumps(export.ladder_json(D))
    else:
        g = Loaded(args.graph)
        if args.group_window:
            w = group_window(g.spec, args.radius)
        else:
            w = g.window(args)
        text = export.window_dot(w, g.spec.name) if args.format == "dot" else export.dumps(export.window_json(w))
    _emit(args, text)
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="finegraph", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, graph=True, window=True):
        if graph:
            sp.add_argument("--graph", required=True, help="graph spec JSON, inline JSON or fixture:<name>")
        if window:
            sp.add_argument("--center", help="vertex token (default: first orbit at the identity)")
            sp.add_argument("--radius", type=int, default=4)
            sp.add_argument("--budget", type=int, default=16, help="valence budget")
        sp.add_argument("-o", "--output")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("cayley", help="build a Cayley, coned-off or relative Cayley graph spec")
    sp.add_argument("--group", required=True)
    sp.add_argument("--gens", nargs="*", default=[])
    sp.add_argument("--peripherals", help='JSON list like [{"name": "A", "gens": ["a"]}]')
    sp.add_argument("--kind", choices=["plain", "coned", "relative"], default="plain")
    sp.add_argument("--name", default="K")
    sp.add_argument("--explicit", action="store_true", help="emit orbit tables")
    common(sp, graph=False, window=False)
    sp.set_defaults(func=cmd_cayley)

    sp = sub.add_parser("fineness", help="circuit counts per edge orbit up to length n")
    sp.add_argument("-n", type=int, default=6)
    sp.add_argument("--budget", type=int, default=16)
    common(sp, window=False)
    sp.set_defaults(func=cmd_fineness)

    sp = sub.add_parser("delta", help="slim-triangle delta on nested balls")
    common(sp)
    sp.add_argument("--radii", type=int, nargs="*")
    sp.add_argument("--max-triples", type=int, default=200_000)
    sp.set_defaults(func=cmd_delta)

    sp = sub.add_parser("ft", help="fellow-travel constant of two paths")
    common(sp)
    sp.set_defaults(radius=None)
    sp.add_argument("--path1", required=True)
    sp.add_argument("--path2", required=True)
    sp.set_defaults(func=cmd_ft)

    sp = sub.add_parser("ladder", help="simple ladder between two quasigeodesics")
    common(sp)
    sp.set_defaults(radius=None)
    sp.add_argument("--P", required=True)
    sp.add_argument("--Q", required=True)
    sp.add_argument("--lam", type=float, default=1.0)
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--format", choices=["json", "dot"], default="json")
    sp.set_defaults(func=cmd_ladder)

    sp = sub.add_parser("surgery", help="equivariant attach, remove, hull and join")
    sp.add_argument("op", choices=["attach", "remove", "hull", "join"])
    common(sp, window=False)
    sp.add_argument("--arc", help='JSON list of vertex tokens, "new" for new vertices')
    sp.add_argument("--prefix", default="arc")
    sp.add_argument("--check-radius", type=int, default=0)
    sp.add_argument("--edge-orbit")
    sp.add_argument("--vertex-orbit")
    sp.add_argument("--u")
    sp.add_argument("--v")
    sp.add_argument("-n", type=int, default=4)
    sp.add_argument("--budget", type=int, default=16)
    sp.add_argument("--graph2")
    sp.add_argument("--peripherals")
    sp.set_defaults(func=cmd_surgery)

    sp = sub.add_parser("qc", help="relative quasiconvexity evidence")
    sp.add_argument("--fixture", help="shipped (G, P, H) triple")
    sp.add_argument("--ambient")
    sp.add_argument("--subgroup")
    sp.add_argument("--witness", help="q0 witness JSON: path, T, C")
    sp.add_argument("--def", dest="definition", choices=["q0", "osin", "hat"], default="q0")
    sp.add_argument("--radius", type=int, default=6)
    sp.add_argument("--radii", type=int, nargs="*")
    sp.add_argument("-o", "--output")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_qc)

    sp = sub.add_parser("qc-transfer", help="move a Q-0 witness between (G, P)-graphs")
    sp.add_argument("--fixture")
    sp.add_argument("--source")
    sp.add_argument("--target")
    sp.add_argument("--path")
    sp.add_argument("--T", nargs="*", default=[])
    sp.add_argument("--subgroup")
    sp.add_argument("--peripherals")
    sp.add_argument("--radius", type=int, default=6)
    sp.add_argument("--radii", type=int, nargs="*")
    sp.add_argument("-o", "--output")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_qc_transfer)

    sp = sub.add_parser("export", help="DOT or JSON rendering of a window or ladder")
    sp.add_argument("--graph")
    sp.add_argument("--ladder", help="ladder JSON written by the ladder command")
    sp.add_argument("--center")
    sp.add_argument("--radius", type=int, default=2)
    sp.add_argument("--budget", type=int, default=16)
    sp.add_argument("--group-window", action="store_true", help="union of group translates")
    sp.add_argument("--format", choices=["dot", "json"], default="dot")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        if args.command == "export" and not (args.graph or args.ladder):
            raise InputError("export needs --graph or --ladder")
        return args.func(args)
    except (SpecError, InputError, RelativeGenerationError, LadderError, QcError) as exc:
        print(f"finegraph: error: {exc}", file=sys.stderr)
        return 3
    except GraphError as exc:
        print(f"finegraph: error: {exc}", file=sys.stderr)
        return 3
    except (KeyError, TypeError, ValueError) as exc:
        print(f"finegraph: error: malformed input ({exc})", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
