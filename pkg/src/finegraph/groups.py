"""Computable group backends.

Elements are represented by their canonical tokens, which are hashable and
totally ordered within a backend:

* finite groups: ``int`` index into the multiplication table;
* free groups: a reduced word, a tuple of nonzero ints where ``k`` is the
  ``k``-th generator and ``-k`` its inverse;
* free products of finite cyclic groups: the alternating normal form, a tuple
  of ``(factor, exponent)`` syllables with ``0 < exponent < order``.

Equality of elements is token equality.  Every backend carries a finite,
inverse-closed set of metric generators and ``length`` is the word length with
respect to it, so ``dist(g, h) = length(inv(g) * h)`` is a proper
left-invariant metric.
"""

from __future__ import annotations

import math
import re
from collections import deque
from functools import cached_property
from itertools import count
from typing import Hashable, Iterable, Iterator, Sequence

Element = Hashable

_POWER = re.compile(r"^([A-Za-z][A-Za-z0-9_]*)\^(-?\d+)$")


class GroupError(ValueError):
    pass


def inverse_label(label: str) -> str:
    return label.swapcase()


class Group:
    """Common machinery; subclasses implement the word problem."""

    kind = "abstract"

    def __init__(self, name: str, labels: Sequence[str]):
        for label in labels:
            if not (label.isalpha() and label.islower()):
                raise GroupError(f"generator label {label!r} must be lowercase letters")
        if len(set(labels)) != len(labels):
            raise GroupError(f"duplicate generator labels in {list(labels)}")
        self.name = name
        self.labels = list(labels)
        self._balls: dict[int, list[Element]] = {}

    # -- to be provided by backends ------------------------------------------
    identity: Element

    def mul(self, g: Element, h: Element) -> Element:
        raise NotImplementedError

    def inv(self, g: Element) -> Element:
        raise NotImplementedError

    def length(self, g: Element) -> int:
        raise NotImplementedError

    def is_element(self, g: object) -> bool:
        raise NotImplementedError

    def format(self, g: Element) -> str:
        raise NotImplementedError

    def generator(self, label: str) -> Element:
        raise NotImplementedError

    # -- shared --------------------------------------------------------------
    @property
    def backend_id(self) -> str:
        return f"{self.kind}:{self.name}"

    @cached_property
    def metric_generators(self) -> list[tuple[str, Element]]:
        """Inverse-closed ``(label, element)`` pairs used for word length."""
        gens: dict[Element, str] = {}
        for label in self.labels:
            g = self.generator(label)
            gens.setdefault(g, label)
            gi = self.inv(g)
            gens.setdefault(gi, inverse_label(label) if gi != g else label)
        gens.pop(self.identity, None)
        return sorted(((lab, g) for g, lab in gens.items()), key=lambda p: self.sort_key(p[1]))

    def multiply(self, g: Element, h: Element) -> Element:
        """Checked product; raises on tokens foreign to this backend."""
        for x in (g, h):
            if not self.is_element(x):
                raise GroupError(f"{x!r} is not an element of {self.backend_id}")
        return self.mul(g, h)

    def prod(self, elements: Iterable[Element]) -> Element:
        out = self.identity
        for g in elements:
            out = self.mul(out, g)
        return out

    def power(self, g: Element, n: int) -> Element:
        if n < 0:
            g, n = self.inv(g), -n
        out, base = self.identity, g
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def conj(self, c: Element, g: Element) -> Element:
        """``c g c^-1``."""
        return self.mul(self.mul(c, g), self.inv(c))

    def dist(self, g: Element, h: Element) -> int:
        return self.length(self.mul(self.inv(g), h))

    def sort_key(self, g: Element) -> tuple:
        return (self.length(g), g)

    def order(self, g: Element, cap: int = 100_000) -> int | None:
        """Order of ``g``, ``None`` if infinite."""
        x = g
        for k in range(1, cap + 1):
            if x == self.identity:
                return k
            x = self.mul(x, g)
        raise GroupError(f"order of {self.format(g)} exceeds cap {cap}")

    def ball(self, r: int) -> list[Element]:
        """Elements of word length at most ``r``, sorted by (length, token)."""
        if r < 0:
            raise GroupError("ball radius must be nonnegative")
        if r not in self._balls:
            seen = {self.identity: 0}
            frontier = deque([self.identity])
            while frontier:
                g = frontier.popleft()
                d = seen[g]
                if d == r:
                    continue
                for _, s in self.metric_generators:
                    h = self.mul(g, s)
                    if h not in seen:
                        seen[h] = d + 1
                        frontier.append(h)
            self._balls[r] = sorted(seen, key=self.sort_key)
        return self._balls[r]

    def parse(self, text: str) -> Element:
        """Parse a word such as ``"a b^-1 a^3"``, ``"abA"`` or ``"1"``."""
        text = text.strip()
        if text in ("", "1", "e"):
            return self.identity
        out = self.identity
        for token in text.split():
            out = self.mul(out, self._parse_token(token, text))
        return out

    def _parse_token(self, token: str, text: str) -> Element:
        m = _POWER.match(token)
        if m:
            base, exp = self._parse_token(m.group(1), text), int(m.group(2))
            return self.power(base, exp)
        if token in self.labels:
            return self.generator(token)
        if token.swapcase() in self.labels:
            return self.inv(self.generator(token.swapcase()))
        if all(ch.lower() in self.labels for ch in token):
            return self.prod(self._parse_token(ch, text) for ch in token)
        raise GroupError(f"cannot parse {token!r} in {text!r} for {self.backend_id}")

    def word(self, g: Element) -> list[str]:
        """A shortest word for ``g`` in the metric generators (labels)."""
        out: list[str] = []
        x = g
        while x != self.identity:
            d = self.length(x)
            for label, s in self.metric_generators:
                y = self.mul(x, self.inv(s))
                if self.length(y) == d - 1:
                    out.append(label)
                    x = y
                    break
            else:  # pragma: no cover - lengths are word lengths
                raise GroupError("word length is inconsistent")
        return out[::-1]

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class FiniteGroup(Group):
    """A finite group given by its multiplication table."""

    kind = "finiteTable"

    def __init__(self, table: Sequence[Sequence[int]], generators: dict[str, int],
                 names: Sequence[str] | None = None, name: str = "G"):
        super().__init__(name, list(generators))
        n = len(table)
        self.table = [list(row) for row in table]
        if any(len(row) != n for row in self.table):
            raise GroupError("multiplication table must be square")
        idents = [e for e in range(n) if self.table[e] == list(range(n))]
        if len(idents) != 1:
            raise GroupError("multiplication table has no unique identity")
        self.identity = idents[0]
        self._inv = [None] * n
        for g in range(n):
            for h in range(n):
                if self.table[g][h] == self.identity:
                    self._inv[g] = h
        if None in self._inv:
            raise GroupError("multiplication table is not a group (missing inverses)")
        self.names = list(names) if names is not None else [str(i) for i in range(n)]
        self._gens = dict(generators)
        self._lengths = self._bfs_lengths()
        self.cyclic_orders: list[int] | None = None

    @classmethod
    def cyclic_product(cls, orders: Sequence[int], labels: Sequence[str] | None = None,
                       name: str | None = None) -> "FiniteGroup":
        """``Z/n1 x Z/n2 x ...`` with one generator per factor."""
        labels = list(labels) if labels else [chr(ord("x") + i) for i in range(len(orders))]
        elems = [()]
        for n in orders:
            elems = [e + (k,) for e in elems for k in range(n)]
        index = {e: i for i, e in enumerate(elems)}
        table = [[index[tuple((a + b) % n for a, b, n in zip(g, h, orders))] for h in elems]
                 for g in elems]
        gens = {}
        for i, label in enumerate(labels):
            unit = tuple(1 if j == i else 0 for j in range(len(orders)))
            gens[label] = index[unit]

        def show(e):
            parts = [lab if k == 1 else f"{lab}^{k}" for lab, k in zip(labels, e) if k]
            return " ".join(parts) or "1"

        G = cls(table, gens, [show(e) for e in elems],
                name or "x".join(f"Z{n}" for n in orders))
        G.cyclic_orders = list(orders)
        return G

    def _bfs_lengths(self) -> list[int]:
        lengths = [-1] * len(self.table)
        lengths[self.identity] = 0
        frontier = deque([self.identity])
        gens = {g for g in self._gens.values()} | {self._inv[g] for g in self._gens.values()}
        while frontier:
            g = frontier.popleft()
            for s in gens:
                h = self.table[g][s]
                if lengths[h] < 0:
                    lengths[h] = lengths[g] + 1
                    frontier.append(h)
        if min(lengths) < 0:
            raise GroupError("generators do not generate the finite group")
        return lengths

    def generator(self, label):
        return self._gens[label]

    def mul(self, g, h):
        return self.table[g][h]

    def inv(self, g):
        return self._inv[g]

    def length(self, g):
        return self._lengths[g]

    def is_element(self, g):
        return isinstance(g, int) and 0 <= g < len(self.table)

    def format(self, g):
        return self.names[g]

    def parse(self, text):
        text = text.strip()
        if text in self.names:
            return self.names.index(text)
        return super().parse(text)

    def order(self, g, cap=100_000):
        return super().order(g, cap=len(self.table))

    @property
    def size(self) -> int:
        return len(self.table)


class FreeGroup(Group):
    """Free group on the given labels, elements are freely reduced words."""

    kind = "freeGroup"

    def __init__(self, labels: Sequence[str], name: str | None = None):
        super().__init__(name or f"F{len(labels)}", labels)
        self.identity = ()

    def generator(self, label):
        return (self.labels.index(label) + 1,)

    def mul(self, g, h):
        k = 0
        n = min(len(g), len(h))
        while k < n and g[-1 - k] == -h[k]:
            k += 1
        return g[: len(g) - k] + h[k:]

    def inv(self, g):
        return tuple(-x for x in reversed(g))

    def length(self, g):
        return len(g)

    def is_element(self, g):
        return (isinstance(g, tuple) and all(isinstance(x, int) and 0 < abs(x) <= len(self.labels) for x in g)
                and all(g[i] != -g[i + 1] for i in range(len(g) - 1)))

    def order(self, g, cap=100_000):
        return 1 if g == () else None

    def format(self, g):
        if not g:
            return "1"
        parts = []
        i = 0
        while i < len(g):
            j = i
            while j < len(g) and g[j] == g[i]:
                j += 1
            label = self.labels[abs(g[i]) - 1]
            exp = (j - i) * (1 if g[i] > 0 else -1)
            parts.append(label if exp == 1 else f"{label}^{exp}")
            i = j
        return " ".join(parts)


class FreeProduct(Group):
    """Free product of finite cyclic groups ``Z/n1 * Z/n2 * ...``.

    The metric generators are each factor generator and its inverse, so a
    syllable ``x^e`` in a factor of order ``n`` has length ``min(e, n - e)``.
    """

    kind = "freeProductOfFinite"

    def __init__(self, orders: Sequence[int], labels: Sequence[str], name: str | None = None):
        if len(orders) != len(labels):
            raise GroupError("one label per factor required")
        if any(n < 2 for n in orders):
            raise GroupError("factor orders must be at least 2")
        super().__init__(name or "*".join(f"Z{n}" for n in orders), labels)
        self.orders = list(orders)
        self.identity = ()

    def generator(self, label):
        return ((self.labels.index(label), 1),)

    def mul(self, g, h):
        out = list(g)
        for f, e in h:
            if out and out[-1][0] == f:
                e2 = (out[-1][1] + e) % self.orders[f]
                out.pop()
                if e2:
                    out.append((f, e2))
            else:
                out.append((f, e))
        return tuple(out)

    def inv(self, g):
        return tuple((f, self.orders[f] - e) for f, e in reversed(g))

    def length(self, g):
        return sum(min(e, self.orders[f] - e) for f, e in g)

    def is_element(self, g):
        if not isinstance(g, tuple):
            return False
        for i, syl in enumerate(g):
            if not (isinstance(syl, tuple) and len(syl) == 2):
                return False
            f, e = syl
            if not (0 <= f < len(self.orders) and 0 < e < self.orders[f]):
                return False
            if i and g[i - 1][0] == f:
                return False
        return True

    def order(self, g, cap=100_000):
        if g == ():
            return 1
        m = math.lcm(*self.orders)
        if self.power(g, m) != ():
            return None
        return next(k for k in count(1) if self.power(g, k) == ())

    def format(self, g):
        if not g:
            return "1"
        return " ".join(self.labels[f] if e == 1 else f"{self.labels[f]}^{e}" for f, e in g)


class Subgroup:
    """A subgroup with decidable membership and canonical left cosets.

    Supported shapes: trivial, finite (explicitly enumerated), infinite
    cyclic, and the whole group.  A non-cyclic infinite proper subgroup raises
    ``NotImplementedError``.
    """

    FINITE_CAP = 5000

    def __init__(self, group: Group, generators: Iterable[Element] = (), whole: bool = False,
                 name: str | None = None):
        self.group = group
        self.generators = sorted({g for g in generators if g != group.identity}, key=group.sort_key)
        self.name = name
        self.elements: list[Element] | None = None
        if whole:
            self.kind = "whole"
        elif not self.generators:
            self.kind = "trivial"
            self.elements = [group.identity]
        else:
            elems = self._closure()
            if elems is not None:
                self.kind = "finite"
                self.elements = elems
            elif len(self.generators) == 1:
                self.kind = "cyclic"
            else:
                raise NotImplementedError(
                    "only finite, infinite cyclic and whole-group subgroups are supported")
        self._elem_set = frozenset(self.elements) if self.elements is not None else None

    @classmethod
    def parse(cls, group: Group, words: Sequence[str], whole: bool = False, name: str | None = None):
        return cls(group, [group.parse(w) for w in words], whole=whole, name=name)

    def _closure(self) -> list[Element] | None:
        G = self.group
        if any(G.order(g) is None for g in self.generators):
            return None
        seen = {G.identity}
        frontier = [G.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for s in self.generators:
                    y = G.mul(x, s)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
                        if len(seen) > self.FINITE_CAP:
                            return None
            frontier = nxt
        return sorted(seen, key=G.sort_key)

    # -- basic queries -------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self.elements is not None

    @property
    def order(self) -> int | None:
        return len(self.elements) if self.elements is not None else None

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == "whole":
            return "G"
        return "<" + ", ".join(self.group.format(g) for g in self.generators) + ">"

    def contains(self, g: Element) -> bool:
        if self.kind == "whole":
            return True
        if self._elem_set is not None:
            return g in self._elem_set
        return self.canonical(g) == self.group.identity

    __contains__ = contains

    def _cyclic_range(self, g: Element) -> range:
        G = self.group
        w = self.generators[0]
        bound = 2 * G.length(g) + G.length(w) + 2
        return range(-bound, bound + 1)

    def canonical(self, g: Element) -> Element:
        """Least (length, token) element of the left coset ``g H``."""
        G = self.group
        if self.kind == "whole":
            return G.identity
        if self.elements is not None:
            return min((G.mul(g, h) for h in self.elements), key=G.sort_key)
        w = self.generators[0]
        return min((G.mul(g, G.power(w, n)) for n in self._cyclic_range(g)), key=G.sort_key)

    def iter_elements(self) -> Iterator[Element]:
        """All elements, roughly by increasing length (infinite for infinite H)."""
        G = self.group
        if self.elements is not None:
            yield from self.elements
        elif self.kind == "cyclic":
            w = self.generators[0]
            yield G.identity
            for n in count(1):
                yield G.power(w, n)
                yield G.power(w, -n)
        else:
            for r in count(0):
                for g in G.ball(r):
                    if G.length(g) == r:
                        yield g

    def elements_within(self, r: int) -> list[Element]:
        """Elements of length at most ``r`` (exact), sorted."""
        G = self.group
        if self.kind == "whole":
            return list(G.ball(r))
        if self.elements is not None:
            return [h for h in self.elements if G.length(h) <= r]
        # |w^n| >= |n| for infinite order elements of the shipped backends
        w = self.generators[0]
        out = [G.power(w, n) for n in range(-r, r + 1)]
        return sorted((h for h in out if G.length(h) <= r), key=G.sort_key)

    def distance_to(self, g: Element) -> tuple[int, Element]:
        """``min_h dist(g, h)`` and a nearest element (least by sort key)."""
        G = self.group
        if self.contains(g):
            return 0, g
        cands = self.elements_within(2 * G.length(g))
        best = min(cands, key=lambda h: (G.dist(g, h), G.sort_key(h)))
        return G.dist(g, best), best

    def conjugate(self, c: Element) -> "Subgroup":
        """``c H c^-1``."""
        G = self.group
        if self.kind == "whole":
            return self
        return Subgroup(G, [G.conj(c, g) for g in (self.elements or self.generators)])

    def same_as(self, other: "Subgroup") -> bool:
        if self.kind == "whole" or other.kind == "whole":
            return self.kind == other.kind
        if self.is_finite != other.is_finite:
            return False
        if self.is_finite:
            return self._elem_set == other._elem_set
        return all(other.contains(g) for g in self.generators) and all(
            self.contains(g) for g in other.generators)

    def __repr__(self) -> str:
        return f"Subgroup({self.label}, {self.kind})"


def trivial_subgroup(group: Group) -> Subgroup:
    return Subgroup(group)


def whole_group(group: Group) -> Subgroup:
    return Subgroup(group, whole=True)


def intersect(a: Subgroup, b: Subgroup, power_bound: int = 64) -> Subgroup:
    """``a ∩ b``.

    For two infinite cyclic subgroups the intersection is searched as the
    least power ``u^p`` (``p <= power_bound``) lying in ``b``.
    """
    G = a.group
    if a.kind == "whole":
        return b
    if b.kind == "whole":
        return a
    if a.is_finite:
        return Subgroup(G, [x for x in a.elements if b.contains(x)])
    if b.is_finite:
        return Subgroup(G, [x for x in b.elements if a.contains(x)])
    u = a.generators[0]
    for p in range(1, power_bound + 1):
        x = G.power(u, p)
        if b.contains(x):
            return Subgroup(G, [x])
    return Subgroup(G)
