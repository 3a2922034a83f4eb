"""The 2-complex ``X_n`` of a window and simple ladders between quasigeodesics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .eqgraph import Circuit, GraphError, Window, all_circuits, canonical_cycle, geodesic
from .hyp_metric import SplitData, epsilon_slim, is_quasigeodesic, split_geodesic


class LadderError(GraphError):
    pass


class TwoComplexWindow:
    """``X_n`` restricted to a window: a 2-cell on each circuit of length <= n.

    Cells are enumerated lazily; ``has_cell`` decides membership directly.
    """

    def __init__(self, w: Window, n: int):
        self.window = w
        self.n = n
        self._cells: list[Circuit] | None = None

    @property
    def cells(self) -> list[Circuit]:
        if self._cells is None:
            self._cells = all_circuits(self.window, self.n)
        return self._cells

    @property
    def possibly_missing(self) -> bool:
        """Circuits near the window boundary may be absent."""
        return not self.window.complete

    def cells_through(self, edge) -> list[Circuit]:
        return [c for c in self.cells if edge in c.edges]

    def circuit(self, cycle: Sequence) -> Circuit | None:
        """The circuit on a cyclic vertex sequence, if it is one (least edge keys)."""
        vs = list(cycle)
        if len(vs) < 2 or len(set(vs)) != len(vs):
            return None
        if any(a not in self.window for a in vs):
            return None
        if len(vs) == 2:
            edges = self.window.edges_between(*vs)[:2]
            if len(edges) < 2:
                return None
        else:
            edges = []
            for a, b in zip(vs, vs[1:] + vs[:1]):
                ks = self.window.edges_between(a, b)
                if not ks:
                    return None
                edges.append(ks[0])
        return Circuit(canonical_cycle(vs), frozenset(edges))

    def has_cell(self, cycle: Sequence) -> bool:
        c = self.circuit(cycle)
        return c is not None and len(c) <= self.n


def build_xn(w: Window, n: int) -> TwoComplexWindow:
    return TwoComplexWindow(w, n)


@dataclass
class SimpleLadder:
    cells: list  # cyclic vertex sequences R_1..R_l
    P: list
    Q: list
    internal_arcs: list  # U_2..U_l, from P to Q
    eps: float
    lam: float
    n: int
    branch: str
    split_p: SplitData | None = None
    split_q: SplitData | None = None
    geodesic: list = field(default_factory=list)

    def __len__(self):
        return len(self.cells)

    @property
    def cell_lengths(self) -> list[int]:
        return [len(c) for c in self.cells]

    @property
    def bound(self) -> float:
        return 48 * self.eps * self.lam


def _cycle_edges(cycle) -> set:
    vs = list(cycle)
    return {frozenset((a, b)) for a, b in zip(vs, vs[1:] + vs[:1])}


def _path_edges(path) -> set:
    return {frozenset((a, b)) for a, b in zip(path, path[1:])}


def _check_pair(w: Window, P, Q, lam):
    P, Q = list(P), list(Q)
    if P[0] != Q[0] or P[-1] != Q[-1]:
        raise LadderError("P and Q must have the same start and end")
    for name, X in (("P", P), ("Q", Q)):
        if len(set(X)) != len(X):
            raise LadderError(f"{name} is not embedded")
        for a, b in zip(X, X[1:]):
            if b not in w.nbrs.get(a, ()):
                raise LadderError(f"{name} is not a path in the window")
        res = is_quasigeodesic(w, X, lam)
        if not res.ok:
            raise LadderError(f"{name} is not a {lam}-quasigeodesic: subpath {res.witness}")
    common = set(P[1:-1]) & set(Q[1:-1])
    if common or P == Q:
        raise LadderError(f"P and Q share interior points: {sorted(common)[:3]}"
                          if common else "P and Q coincide")
    return P, Q


def required_n(eps: float, lam: float) -> int:
    """Least integer ``n > 50 eps lam``."""
    return math.floor(50 * eps * lam) + 1


def _splice(S: list, T: list) -> list:
    """Embedded path from the end of ``S`` to the end of ``T`` (same start).

    Cuts at the last vertex of ``S`` lying on ``T``, which realizes the
    shared-prefix re-choice ``S = V S'``, ``T = V T'``.
    """
    tpos = {x: k for k, x in enumerate(T)}
    i = max(k for k, x in enumerate(S) if x in tpos)
    j = tpos[S[i]]
    return S[i:][::-1] + T[j + 1:]


def build_simple_ladder(w: Window, P: Sequence, Q: Sequence, lam: float, n: int,
                        eps: float | None = None, xn: TwoComplexWindow | None = None) -> SimpleLadder:
    P, Q = _check_pair(w, P, Q, lam)
    if eps is None:
        eps = epsilon_slim(w, lam).eps
    if n <= 50 * eps * lam:
        raise LadderError(f"n = {n} is too small: need n > 50*eps*lam = {50 * eps * lam}, "
                          f"i.e. n >= {required_n(eps, lam)}")
    xn = xn or build_xn(w, n)
    G = geodesic(w, P[0], P[-1])
    if len(G) - 1 < 10 * eps:
        cycle = P + Q[::-1][1:-1]
        if not xn.has_cell(cycle):
            raise LadderError(f"P Q^-1 (length {len(cycle)}) does not bound a 2-cell of X_{n}")
        return SimpleLadder([cycle], P, Q, [], eps, lam, n, "single", geodesic=G)
    sp = split_geodesic(w, G, P, eps)
    sq = split_geodesic(w, G, Q, eps)
    for sd, name in ((sp, "P"), (sq, "Q")):
        if not sd.ok:
            raise LadderError(f"splitting along {name} failed: {sd.violations[0]}")
    l = len(sp)
    U = [_splice(sp.projections[i], sq.projections[i]) for i in range(l)]
    U.append([P[-1]])
    pf = sp.foot + [len(P) - 1]
    qf = sq.foot + [len(Q) - 1]
    cells = []
    for i in range(l):
        Pi = P[pf[i]:pf[i + 1] + 1]
        Qi = Q[qf[i]:qf[i + 1] + 1]
        if len(Pi) < 1 or len(Qi) < 1 or pf[i] > pf[i + 1] or qf[i] > qf[i + 1]:
            raise LadderError(f"pieces {i} run backwards along P or Q")
        walk = U[i] + Qi[1:] + U[i + 1][::-1][1:] + Pi[::-1][1:]
        cycle = walk[:-1]
        if len(set(cycle)) != len(cycle):
            raise LadderError(f"C_{i + 1} is not a circuit: repeated vertex in {cycle}")
        if not cycle or len(cycle) < 2:
            continue
        if not xn.has_cell(cycle):
            raise LadderError(f"C_{i + 1} (length {len(cycle)}) does not bound a 2-cell of X_{n}")
        cells.append(cycle)
    return SimpleLadder(cells, P, Q, U[1:l], eps, lam, n, "split", sp, sq, G)


@dataclass
class LadderReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_ladder(D: SimpleLadder, P: Sequence | None = None, Q: Sequence | None = None,
                  is_b: Callable | None = None, window: Window | None = None) -> LadderReport:
    """Check every clause of the simple-ladder definition; list violations."""
    P = list(P if P is not None else D.P)
    Q = list(Q if Q is not None else D.Q)
    bad = []
    cells = [list(c) for c in D.cells]
    cell_edges = [_cycle_edges(c) for c in cells]
    pe, qe = _path_edges(P), _path_edges(Q)
    l = len(cells)
    if l == 0:
        bad.append(("empty",))
    for i, E in enumerate(cell_edges):
        if not E & pe:
            bad.append(("no P arc", i))
        if not E & qe:
            bad.append(("no Q arc", i))
        if len(cells[i]) > D.n:
            bad.append(("cell longer than n", i, len(cells[i])))
    for i in range(l):
        for j in range(i + 1, l):
            shared_v = set(cells[i]) & set(cells[j])
            if j == i + 1:
                shared = cell_edges[i] & cell_edges[j]
                if not shared:
                    bad.append(("adjacent cells share no arc", i, j))
                elif shared & (pe | qe):
                    bad.append(("shared arc meets the boundary", i, j))
                elif len(shared_v) != len(shared) + 1:
                    bad.append(("shared part is not a single arc", i, j))
            elif shared_v:
                bad.append(("non-adjacent cells meet", i, j, sorted(shared_v)))
    if l:
        if not {frozenset(P[:2]), frozenset(Q[:2])} <= cell_edges[0]:
            bad.append(("start not interior to R_1 boundary",))
        if not {frozenset(P[-2:]), frozenset(Q[-2:])} <= cell_edges[-1]:
            bad.append(("end not interior to R_l boundary",))
        count: dict = {}
        for E in cell_edges:
            for e in E:
                count[e] = count.get(e, 0) + 1
        boundary = {e for e, c in count.items() if c == 1}
        if boundary != pe | qe:
            bad.append(("boundary differs from P Q^-1",))
    if is_b is not None:
        if window is not None:
            for u, v in ((k[1], k[2]) for k in window.edges):
                if not is_b(u) and not is_b(v):
                    bad.append(("A-A edge", u, v))
                    break
        for i, c in enumerate(cells):
            vs = set(c)
            if not any(is_b(x) for x in vs & set(P)):
                bad.append(("no B-vertex on P side", i))
            if not any(is_b(x) for x in vs & set(Q)):
                bad.append(("no B-vertex on Q side", i))
    return LadderReport(bad)


def ladder_proximity(D: SimpleLadder, dist: Callable, is_b: Callable | None = None) -> float:
    """Largest distance from a B-vertex of P to the nearest B-vertex of Q in a shared cell."""
    keep = is_b or (lambda v: True)
    Qs = set(D.Q)
    worst = 0
    for u in D.P:
        if not keep(u):
            continue
        best = min((dist(u, v) for c in D.cells if u in c for v in c if v in Qs and keep(v)),
                   default=float("inf"))
        worst = max(worst, best)
    return worst
