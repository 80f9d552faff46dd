"""Breadth-first exploration of rules: explicit balls and counted shells."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex_core import LineComplexError, LocalRule, checked_neighbor


class BallTooLarge(LineComplexError):
    pass


@dataclass
class Ball:
    """Vertices within ``radius`` of the base, ids in discovery order.

    ``nbr[i, s]`` is the id across slot ``s`` of vertex ``i``, or ``-1``
    when that neighbour lies outside the ball.
    """

    keys: list
    ids: dict
    dist: np.ndarray
    nbr: np.ndarray
    radius: int
    exhausted: bool

    @property
    def size(self) -> int:
        return len(self.keys)

    def shell_sizes(self) -> list:
        return np.bincount(self.dist, minlength=self.radius + 1).tolist()


def explore_ball(rule: LocalRule, radius: int, base=None, max_vertices: int = 2_000_000) -> Ball:
    """Vertices at distance ``<= radius``; ties broken by slot index."""
    base = rule.base if base is None else base
    q = rule.q
    ids = {base: 0}
    keys = [base]
    dist = [0]
    rows = []
    i = 0
    while i < len(keys):
        v = keys[i]
        d = dist[i]
        row = [-1] * q
        for s in range(q):
            w = checked_neighbor(rule, v, s)
            j = ids.get(w)
            if j is None:
                if d >= radius:
                    continue
                if len(keys) >= max_vertices:
                    raise BallTooLarge(f"ball of radius {radius} exceeds {max_vertices} vertices")
                j = len(keys)
                ids[w] = j
                keys.append(w)
                dist.append(d + 1)
            row[s] = j
        rows.append(row)
        i += 1
    nbr = np.asarray(rows, dtype=np.int64).reshape(len(keys), q)
    exhausted = bool((nbr >= 0).all())
    return Ball(keys, ids, np.asarray(dist, dtype=np.int64), nbr, radius, exhausted)


@dataclass
class ShellType:
    count: int
    rep: object
    rep_parent: object
    back_slots: int


def type_shells(rule: LocalRule, radius: int, base=None) -> list:
    """Shells ``0..radius`` of a tree rule as ``{cone_type: ShellType}``.

    Counts are exact integers however large the shells get.
    """
    if not rule.is_tree:
        raise LineComplexError(f"rule {rule.name!r} does not declare a tree structure")
    base = rule.base if base is None else base
    q = rule.q
    shells = [{rule.cone_type(base): ShellType(1, base, None, 0)}]
    for _ in range(radius):
        nxt: dict = {}
        for t, st in shells[-1].items():
            slots: dict = {}
            for s in range(q):
                w = checked_neighbor(rule, st.rep, s)
                if w == st.rep_parent:
                    continue
                slots[w] = slots.get(w, 0) + 1
            for w, mult in slots.items():
                ct = rule.cone_type(w)
                entry = nxt.get(ct)
                if entry is None:
                    nxt[ct] = ShellType(st.count, w, st.rep, mult)
                else:
                    if entry.back_slots != mult:
                        raise LineComplexError(f"cone type {ct!r} is not well defined")
                    entry.count += st.count
        shells.append(nxt)
    return shells


@dataclass
class RadialProfile:
    """Per-distance slot counts of a spherically symmetric tree rule."""

    q: int
    shell_sizes: list
    back_slots: list
    forward_slots: list

    @property
    def radius(self) -> int:
        return len(self.shell_sizes) - 1


def radial_profile(rule: LocalRule, radius: int) -> RadialProfile | None:
    """Slot counts by distance, or ``None`` if vertices in a shell disagree."""
    if not rule.is_tree:
        return None
    shells = type_shells(rule, radius)
    sizes, back, fwd = [], [], []
    for cur in shells:
        backs = {st.back_slots for st in cur.values()}
        if len(backs) != 1:
            return None
        b = backs.pop()
        sizes.append(sum(st.count for st in cur.values()))
        back.append(b)
        # no edges inside a shell of a tree
        fwd.append(rule.q - b)
    return RadialProfile(rule.q, sizes, back, fwd)
