"""Concrete rule-backed line complexes.

``SpeiserRule`` covers the tree-shaped families: the q-regular tree (the
universal covering of the sphere minus ``q`` points; ``q = 3`` is the
modular surface), the bi-infinite chain of the exponential (``q = 2``), and
trees whose branch vertices are separated by unbranched chains.  A chain
leaving a branch vertex through side ``s`` alternates a single edge on side
``s`` with a bundle of the remaining ``q - 1`` parallel edges, so chains
always have odd length.

``TableRule`` is a finite neighbour table, optionally repeated along a
one-dimensional period.
"""

from __future__ import annotations

import threading
from typing import Callable

from .complex_core import Color, LineComplex, LocalRule, RuleInconsistent


class ScheduleInvalid(ValueError):
    pass


class _WordTrie:
    """Reduced words over the sides ``0..q-1`` interned as integers."""

    def __init__(self):
        self.parent = [-1]
        self.letter = [-1]
        self.depth = [0]
        self._children: dict = {}
        self._lock = threading.Lock()

    def child(self, node: int, letter: int) -> int:
        key = (node, letter)
        found = self._children.get(key)
        if found is not None:
            return found
        with self._lock:
            found = self._children.get(key)
            if found is None:
                found = len(self.parent)
                self.parent.append(node)
                self.letter.append(letter)
                self.depth.append(self.depth[node] + 1)
                self._children[key] = found
            return found

    def word(self, node: int) -> tuple:
        out = []
        while node > 0:
            out.append(self.letter[node])
            node = self.parent[node]
        return tuple(reversed(out))


class SpeiserRule(LocalRule):
    """Tree of branch vertices joined by chains of prescribed length.

    ``chain_length(k)`` is the length of every chain from generation
    ``k - 1`` to generation ``k`` of branch vertices (``k >= 1``).  Keys are
    ``(node, t)``: ``(node, 0)`` is the branch vertex reached by the word
    ``node``; ``(node, t)`` with ``t >= 1`` sits ``t`` steps into the chain
    that ends at it.
    """

    is_tree = True

    def __init__(self, q: int, chain_length: Callable[[int], int] | None = None,
                 name: str = "speiser", params: dict | None = None,
                 constant: bool = False):
        if q < 2:
            raise ValueError("q must be at least 2")
        self.q = q
        self.name = name
        self.base = (0, 0)
        self._length_fn = chain_length or (lambda k: 1)
        self._lengths = [0]
        self._offsets = [0]
        self._trie = _WordTrie()
        self._params = dict(params or {})
        self._lock = threading.Lock()
        # every generation looks alike, so cone types need not carry k
        self.constant = constant

    def params(self) -> dict:
        return dict(self._params)

    def length(self, k: int) -> int:
        while len(self._lengths) <= k:
            with self._lock:
                j = len(self._lengths)
                if j > k:
                    break
                L = int(self._length_fn(j))
                if L < 1 or L % 2 == 0:
                    raise ScheduleInvalid(f"chain length {L} at generation {j} must be odd and >= 1")
                self._lengths.append(L)
                self._offsets.append(self._offsets[-1] + L)
        return self._lengths[k]

    def branch_distance(self, k: int) -> int:
        """Graph distance from the base to generation ``k`` branch vertices."""
        self.length(k)
        return self._offsets[k]

    def generation(self, v) -> int:
        return self._trie.depth[v[0]]

    def word(self, v) -> tuple:
        return self._trie.word(v[0])

    def distance(self, v) -> int:
        node, t = v
        k = self._trie.depth[node]
        return self.branch_distance(k) if t == 0 else self.branch_distance(k - 1) + t

    def color(self, v) -> Color:
        node, t = v
        k = self._trie.depth[node]
        offs = self._offsets
        if len(offs) <= k:
            self.length(k)
        d = offs[k] if t == 0 else offs[k - 1] + t
        return Color.INNER if d % 2 == 0 else Color.OUTER

    def neighbor(self, v, slot: int):
        if not 0 <= slot < self.q:
            raise RuleInconsistent(f"slot {slot} out of range for q = {self.q}")
        node, t = v
        trie = self._trie
        k = trie.depth[node]
        if t == 0:
            if k > 0 and slot == trie.letter[node]:
                L = self.length(k)
                return (node, L - 1) if L > 1 else (trie.parent[node], 0)
            child = trie.child(node, slot)
            return (child, 1) if self.length(k + 1) > 1 else (child, 0)
        side = trie.letter[node]
        L = self.length(k)
        if t >= L:
            raise RuleInconsistent(f"position {t} beyond chain of length {L}")
        toward_parent = (slot == side) if t % 2 else (slot != side)
        if toward_parent:
            return (trie.parent[node], 0) if t == 1 else (node, t - 1)
        return (node, 0) if t + 1 == L else (node, t + 1)

    def cone_type(self, v):
        k = self._trie.depth[v[0]]
        return (min(k, 1) if self.constant else k, v[1])


def tree_rule(q: int) -> SpeiserRule:
    name = "modular" if q == 3 else f"tree({q})"
    return SpeiserRule(q, lambda k: 1, name=name, params={"q": q}, constant=True)


def modular_rule() -> SpeiserRule:
    return tree_rule(3)


def exp_rule() -> SpeiserRule:
    """Line complex of ``exp``: both branch values logarithmic, a bi-infinite chain."""
    return SpeiserRule(2, lambda k: 1, name="exp", params={}, constant=True)


def _parse_ref(ref: str) -> tuple:
    if "@" in ref:
        name, off = ref.split("@", 1)
        return name.strip(), int(off)
    return ref.strip(), 0


class TableRule(LocalRule):
    """Explicit neighbour table; ``"name@+k"`` points ``k`` periods ahead.

    Keys are ``(name, period)``.  With no offsets the rule is finite.
    """

    def __init__(self, q: int, rows: dict, base: str, name: str = "table"):
        self.q = q
        self.name = name
        self.base = (base, 0)
        self._rows = {}
        for vname, (color, refs) in rows.items():
            if len(refs) != q:
                raise RuleInconsistent(f"vertex {vname!r} has {len(refs)} slots, q = {q}")
            self._rows[vname] = (color, tuple(_parse_ref(r) for r in refs))
        if base not in self._rows:
            raise RuleInconsistent(f"base {base!r} is not in the table")
        for vname, (color, refs) in self._rows.items():
            for s, (w, off) in enumerate(refs):
                if w not in self._rows:
                    raise RuleInconsistent(f"{vname!r} slot {s} points to unknown {w!r}")
                wcolor, wrefs = self._rows[w]
                if wcolor is color:
                    raise RuleInconsistent(f"{vname!r} slot {s} joins equal colours")
                if wrefs[s] != (vname, -off):
                    raise RuleInconsistent(f"{vname!r} slot {s} is not matched by {w!r}")

    @property
    def periodic(self) -> bool:
        return any(off for _, refs in self._rows.values() for _, off in refs)

    def rows(self) -> dict:
        return dict(self._rows)

    def color(self, v) -> Color:
        return self._rows[v[0]][0]

    def neighbor(self, v, slot: int):
        name, p = v
        w, off = self._rows[name][1][slot]
        return (w, p + off)


def table_from_complex(c: LineComplex, prefix: str = "v") -> TableRule:
    rows = {}
    for v, color in enumerate(c.colors):
        rows[f"{prefix}{v}"] = (color, [f"{prefix}{w}" for w, _ in c.ends[v]])
    return TableRule(c.q, rows, f"{prefix}0")


def block_rule(q: int = 3, run: int = 10, long: int = 2001) -> SpeiserRule:
    """Runs of ``run`` unpadded generations alternating with one chain of ``long``.

    Branch-dense runs pull the mean ramification towards ``q`` and the long
    chains pull it back towards 2, so it keeps oscillating.
    """
    if long < 1 or long % 2 == 0:
        raise ScheduleInvalid("long chains must have odd length")
    return SpeiserRule(q, lambda k: long if k % (run + 1) == 0 else 1, name="blocks",
                       params={"q": q, "run": run, "long": long})
