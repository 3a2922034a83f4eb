"""Hyperbolicity constants, quasigeodesics and fellow travelling on windows."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .eqgraph import GraphError, Window, geodesic

INF = 10 ** 6


@dataclass(frozen=True)
class QuasiParams:
    lam: float = 1.0
    eps: float = 0.0

    def __post_init__(self):
        if self.lam < 1 or self.eps < 0:
            raise ValueError("need lambda >= 1 and epsilon >= 0")


@dataclass
class HyperbolicityEstimate:
    delta: int
    radius: int | None
    method: str = "slimTriangles"
    triples_checked: int = 0
    exhaustive: bool = True
    witness: tuple | None = None


class DistanceTable:
    """All-pairs window distances as a numpy matrix."""

    def __init__(self, w: Window):
        self.window = w
        self.vertices = list(w.vertices)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        n = len(self.vertices)
        D = np.full((n, n), INF, dtype=np.int32)
        for i, v in enumerate(self.vertices):
            for x, d in w.distances_from(v).items():
                D[i, self.index[x]] = d
        self.D = D

    def __call__(self, u, v) -> int:
        return int(self.D[self.index[u], self.index[v]])

    def idx(self, path) -> np.ndarray:
        return np.fromiter((self.index[x] for x in path), dtype=np.int64)


def _sorted_pair_geodesic(w: Window, cache: dict, x, y):
    key = (x, y) if x <= y else (y, x)
    if key not in cache:
        cache[key] = geodesic(w, *key)
    return cache[key]


def delta_estimate(w: Window, max_triples: int | None = 200_000, seed: int = 0,
                   table: DistanceTable | None = None) -> HyperbolicityEstimate:
    """Largest slimness of a tie-broken geodesic triangle in the window.

    Exhaustive over unordered vertex triples unless there are more than
    ``max_triples``, in which case a seeded sample is used.
    """
    if len(w) <= 2:
        return HyperbolicityEstimate(0, w.radius, triples_checked=0)
    if not w.is_connected():
        raise GraphError("delta estimate needs a connected window")
    T = table or DistanceTable(w)
    verts = T.vertices
    n = len(verts)
    total = n * (n - 1) * (n - 2) // 6
    if max_triples is None or total <= max_triples:
        triples = combinations(range(n), 3)
        exhaustive = True
    else:
        rng = random.Random(seed)
        triples = (tuple(sorted(rng.sample(range(n), 3))) for _ in range(max_triples))
        exhaustive = False
    cache: dict = {}
    best, witness, count = 0, None, 0
    for i, j, k in triples:
        count += 1
        x, y, z = verts[i], verts[j], verts[k]
        sides = [T.idx(_sorted_pair_geodesic(w, cache, a, b)) for a, b in ((x, y), (y, z), (x, z))]
        for s in range(3):
            others = np.concatenate([sides[t] for t in range(3) if t != s])
            val = int(T.D[np.ix_(sides[s], others)].min(axis=1).max())
            if val > best:
                best, witness = val, (x, y, z)
    return HyperbolicityEstimate(best, w.radius, triples_checked=count, exhaustive=exhaustive,
                                 witness=witness)


@dataclass
class QuasiResult:
    ok: bool
    witness: tuple | None  # (i, j) indices of a violating subpath
    conclusive: bool

    def __bool__(self):
        return self.ok


def _certified(w: Window, u, v, d) -> bool:
    if not w.complete or u not in w.depth or v not in w.depth:
        return False
    return (w.depth[u] + w.depth[v] + d) / 2 <= w.radius


def is_quasigeodesic(w: Window, path: Sequence, q: QuasiParams | float,
                     eps: float | None = None) -> QuasiResult:
    """Every subpath satisfies ``|P'| <= lam dist + eps``; witness is the
    longest violating subpath (earliest start among ties)."""
    if not isinstance(q, QuasiParams):
        q = QuasiParams(q, eps or 0.0)
    path = list(path)
    conclusive = True
    for L in range(len(path) - 1, 0, -1):
        for i in range(len(path) - L):
            j = i + L
            d = w.dist(path[i], path[j])
            conclusive &= _certified(w, path[i], path[j], L)
            if L > q.lam * d + q.eps + 1e-9:
                return QuasiResult(False, (i, j), conclusive)
    return QuasiResult(True, None, conclusive)


def quasigeodesics(w: Window, u, v, lam: float, cap: int = 500, table: DistanceTable | None = None):
    """Embedded lam-quasigeodesics from ``u`` to ``v`` (vertex sequences).

    Returns ``(paths, complete)``; ``complete`` is false when ``cap`` was hit.
    """
    if u == v:
        return [(u,)], True
    T = table or DistanceTable(w)
    D, ix = T.D, T.index
    du = int(D[ix[u], ix[v]])
    if du >= INF:
        return [], True
    limit = int(math.floor(lam * du + 1e-9))
    target = ix[v]
    out = []
    path = [u]
    pidx = [ix[u]]
    on = {u}
    full = True

    def ok_ext(y) -> bool:
        j = ix[y]
        L = len(pidx)
        for k, a in enumerate(pidx):
            if L - k > lam * D[a, j] + 1e-9:
                return False
        return True

    def rec(x):
        nonlocal full
        if len(out) >= cap:
            full = False
            return
        if x == v:
            out.append(tuple(path))
            return
        for y in w.nbrs[x]:
            if y in on:
                continue
            if len(path) + D[ix[y], target] > limit:
                continue
            if not ok_ext(y):
                continue
            on.add(y)
            path.append(y)
            pidx.append(ix[y])
            rec(y)
            pidx.pop()
            path.pop()
            on.discard(y)

    rec(u)
    return out, full


def _maximin(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """(max, min) matrix product."""
    out = np.empty((A.shape[0], B.shape[1]), dtype=A.dtype)
    for i in range(A.shape[0]):
        out[i] = np.minimum(A[i][:, None], B).max(axis=0)
    return out


@dataclass
class SlimEstimate:
    eps: int
    lam: float
    exhaustive: bool
    paths: int
    witness: tuple | None = None

    def __int__(self):
        return self.eps


def epsilon_slim(w: Window, lam: float, cap: int = 500, table: DistanceTable | None = None,
                 max_vertices: int = 150) -> SlimEstimate:
    """Least ``eps`` making every lam-quasigeodesic rectangle of the window slim.

    For a vertex ``p`` on a side from ``x1`` to ``x2`` the worst choice of the
    other three sides is independent per side, so with
    ``far[p, x, y] = max over paths Q(x,y) of dist(p, Q)`` the constant is a
    three-hop (max, min) path value from ``x2`` back to ``x1``.
    """
    nverts = len(w)
    if nverts > max_vertices:
        raise GraphError(f"epsilon_slim window has {nverts} vertices (max {max_vertices})")
    if nverts <= 1:
        return SlimEstimate(0, lam, True, 0)
    T = table or DistanceTable(w)
    D = T.D
    n = len(T.vertices)
    far = np.zeros((n, n, n), dtype=np.int32)
    on_path = np.zeros((n, n, n), dtype=bool)  # [x, y, p]
    exhaustive, npaths = True, 0
    for a in range(n):
        for b in range(n):
            paths, full = quasigeodesics(w, T.vertices[a], T.vertices[b], lam, cap, T)
            exhaustive &= full
            npaths += len(paths)
            if not paths:
                far[:, a, b] = INF
                continue
            best = np.zeros(n, dtype=np.int32)
            for p in paths:
                idx = T.idx(p)
                best = np.maximum(best, D[:, idx].min(axis=1))
                on_path[a, b, idx] = True
            far[:, a, b] = best
    eps, witness = 0, None
    for p in range(n):
        F = far[p]
        W2 = _maximin(F, F)  # x3 -> x1 over x4
        W3 = _maximin(F, W2)  # x2 -> x1
        # restrict to (x1, x2) whose quasigeodesics pass through p
        vals = np.where(on_path[:, :, p].T, W3, 0)  # vals[x2, x1]
        m = int(vals.max())
        if m > eps:
            x2, x1 = np.unravel_index(int(vals.argmax()), vals.shape)
            eps, witness = m, (T.vertices[p], T.vertices[x1], T.vertices[x2])
    return SlimEstimate(eps, lam, exhaustive, npaths, witness)


class SingleCellBranch(GraphError):
    """The geodesic is shorter than ``10 eps``."""


@dataclass
class SplitData:
    G: list
    eps: float
    segments: list  # vertex lists G_1..G_l
    projections: list  # S_i as vertex lists, from segment start to P
    foot: list  # index along P of each projection endpoint
    pieces: list  # P_1..P_l as vertex lists
    violations: list = field(default_factory=list)
    hausdorff: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self):
        return len(self.segments)


def partition_lengths(total: int, eps: float) -> list[int]:
    """``ceil(total / 20 eps)`` near-equal parts, merging parts below ``10 eps``."""
    if total < 10 * eps:
        raise SingleCellBranch(f"geodesic length {total} < 10*eps = {10 * eps}; use the single-cell branch")
    if eps <= 0:
        return [total] if total else []
    l = max(1, math.ceil(total / (20 * eps)))
    q, r = divmod(total, l)
    parts = [q + 1] * r + [q] * (l - r)
    merged = []
    for x in parts:
        if merged and x < 10 * eps:
            merged[-1] += x
        else:
            merged.append(x)
    if len(merged) > 1 and merged[0] < 10 * eps:
        merged[1] += merged.pop(0)
    return merged


def project(w: Window, x, P: Sequence) -> list:
    """Shortest geodesic from ``x`` to the vertex set of ``P``, earliest foot first."""
    dx = w.distances_from(x)
    j = min(range(len(P)), key=lambda k: (dx.get(P[k], INF), k))
    return geodesic(w, x, P[j]), j


def split_geodesic(w: Window, G: Sequence, P: Sequence, eps: float) -> SplitData:
    G, P = list(G), list(P)
    if G[0] != P[0] or G[-1] != P[-1]:
        raise GraphError("G and P must share endpoints")
    if len(set(P)) != len(P):
        raise GraphError("P must be embedded")
    lengths = partition_lengths(len(G) - 1, eps)
    segs, starts, k = [], [], 0
    for L in lengths:
        segs.append(G[k:k + L + 1])
        starts.append(k)
        k += L
    projs, feet = [], []
    for s in starts:
        S, j = project(w, G[s], P)
        projs.append(S)
        feet.append(j)
    bounds = feet + [len(P) - 1]
    pieces = []
    for i in range(len(segs)):
        a, b = bounds[i], bounds[i + 1]
        pieces.append(P[a:b + 1] if a <= b else P[b:a + 1][::-1])
    viol = []
    for i, S in enumerate(projs):
        if len(S) - 1 > eps:
            viol.append(("projection", i, len(S) - 1))
    for i, j in combinations(range(len(pieces)), 2):
        common = set(pieces[i]) & set(pieces[j])
        if len(common) > 1:
            viol.append(("overlap", i, j, sorted(common)))
    haus = [hausdorff(w, g, p) for g, p in zip(segs, pieces)]
    return SplitData(G, eps, segs, projs, feet, pieces, viol, haus)


def hausdorff(w: Window, A: Sequence, B: Sequence, dist: Callable | None = None) -> int:
    dist = dist or w.dist
    if not A or not B:
        return 0
    return max(max(min(dist(a, b) for b in B) for a in A), max(min(dist(a, b) for a in A) for b in B))


def one_sided(A, B, dist) -> float:
    if not A:
        return 0
    if not B:
        return float("inf")
    return max(min(dist(a, b) for b in B) for a in A)


def fellow_travel_constant(w: Window | None, P1: Sequence, P2: Sequence, dist: Callable | None = None,
                           vertex_filter: Callable | None = None) -> float:
    """Symmetrized max-min distance between the filtered vertices of two paths."""
    if P1[0] != P2[0] or P1[-1] != P2[-1]:
        raise GraphError("paths must share endpoints")
    if dist is None:
        if w is None:
            raise GraphError("need a window or a metric")
        dist = w.dist
    keep = vertex_filter or (lambda v: True)
    A = [v for v in P1 if keep(v)]
    B = [v for v in P2 if keep(v)]
    return max(one_sided(A, B, dist), one_sided(B, A, dist))


def word_metric(group):
    """``dist(u, v)`` for vertices ``("G", g)`` in element windows."""
    return lambda u, v: group.dist(u[1], v[1])
