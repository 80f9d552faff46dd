"""Line complexes: representation, validation and face analysis.

A line complex is stored as a rotation system.  Every vertex has exactly
``q`` slots; slot ``s`` is the edge-end that crosses side ``(a_s a_{s+1})``
of the curve through the branch values, so an edge always joins slot ``s``
of an Inner vertex to slot ``s`` of an Outer vertex.

Faces are traced with the usual successor rule: leave ``v`` through slot
``s``, arrive at ``w`` on slot ``s``, continue from slot ``s + 1`` if ``w``
is Inner and from slot ``s - 1`` if ``w`` is Outer.  The two half sheets sit
on opposite sides of the curve, which is why their rotations run in
opposite directions.  With this convention the face through the Inner dart
``(v, s)`` lies over ``a_{s+1}`` (1-based) and the face through the Outer
dart ``(v, s)`` lies over ``a_{s+2}``.
"""

from __future__ import annotations

import enum
import math
import threading
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

INFINITE = math.inf

Dart = tuple  # (vertex, slot)


class LineComplexError(Exception):
    pass


class NonPlanarRotation(LineComplexError):
    pass


class RuleInconsistent(LineComplexError):
    pass


class Color(enum.Enum):
    INNER = "inner"
    OUTER = "outer"

    @property
    def other(self) -> "Color":
        return Color.OUTER if self is Color.INNER else Color.INNER


@dataclass(frozen=True)
class LineComplex:
    """Finite line complex with vertices ``0 .. len(colors) - 1``.

    ``ends[v][s]`` is ``(w, t)``: slot ``s`` of ``v`` is glued to slot ``t``
    of ``w``.  ``None`` marks a dangling slot (only useful for reporting
    broken input through :func:`validate`).
    """

    q: int
    colors: tuple
    ends: tuple

    @property
    def n_vertices(self) -> int:
        return len(self.colors)

    def edges(self) -> list:
        """Each edge once, as ``(inner_vertex, slot, outer_vertex, slot)``."""
        out = []
        for v, row in enumerate(self.ends):
            for s, end in enumerate(row):
                if end is None:
                    continue
                w, t = end
                if (v, s) < (w, t):
                    out.append((v, s, w, t))
        return out

    @property
    def n_edges(self) -> int:
        return len(self.edges())

    def sheet_count(self) -> int:
        return sum(1 for c in self.colors if c is Color.INNER)


@dataclass(frozen=True)
class Face:
    boundary: tuple
    m: float
    branch_label: int
    truncated: bool = False

    @property
    def is_infinite(self) -> bool:
        return self.m == INFINITE

    @property
    def is_bigon(self) -> bool:
        return self.m == 1

    @property
    def order(self):
        """Order ``m - 1`` of the branch point in the face."""
        return INFINITE if self.is_infinite else self.m - 1


@dataclass(frozen=True)
class Violation:
    kind: str
    vertex: int | None = None
    slot: int | None = None
    detail: str = ""

    def __str__(self) -> str:
        where = ""
        if self.vertex is not None:
            where = f" at vertex {self.vertex}"
            if self.slot is not None:
                where += f" slot {self.slot}"
        return f"{self.kind}{where}: {self.detail}" if self.detail else f"{self.kind}{where}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v.kind for v in self.violations}

    def __bool__(self) -> bool:
        return self.ok


def face_label(color: Color, slot: int, q: int) -> int:
    """1-based index of the branch value under the face through a dart."""
    if color is Color.INNER:
        return slot % q + 1
    return (slot + 1) % q + 1


def _successor_slot(color: Color, slot: int, q: int) -> int:
    return (slot + 1) % q if color is Color.INNER else (slot - 1) % q


# ---------------------------------------------------------------------------
# rules


class LocalRule:
    """Infinite (or finite) line complex given by local neighbourhoods.

    Subclasses implement :meth:`color` and :meth:`neighbor`.  Vertex keys are
    any hashable canonical labels; public integer ids are assigned later by
    breadth-first exploration.  A rule whose 1-skeleton is a tree may also
    implement :meth:`cone_type`: vertices with equal types must have equal
    ramification and equal multisets of child types.  This lets exhaustions
    count vertices instead of listing them.
    """

    q: int
    base: Hashable
    name: str = "rule"
    is_tree: bool = False

    def color(self, v) -> Color:
        raise NotImplementedError

    def neighbor(self, v, slot: int):
        raise NotImplementedError

    def neighbors(self, v) -> list:
        return [(self.neighbor(v, s), self.color(v).other) for s in range(self.q)]

    def cone_type(self, v):
        return None

    def params(self) -> dict:
        return {}


class ComplexRule(LocalRule):
    """A finite :class:`LineComplex` seen through the rule interface."""

    def __init__(self, complex_: LineComplex, base: int = 0, name: str = "finite"):
        self.complex = complex_
        self.q = complex_.q
        self.base = base
        self.name = name

    def color(self, v) -> Color:
        return self.complex.colors[v]

    def neighbor(self, v, slot):
        end = self.complex.ends[v][slot]
        if end is None:
            raise RuleInconsistent(f"vertex {v} slot {slot} is dangling")
        return end[0]


def as_rule(obj) -> LocalRule:
    if isinstance(obj, LocalRule):
        return obj
    if isinstance(obj, LineComplex):
        return ComplexRule(obj)
    raise TypeError(f"expected LocalRule or LineComplex, got {type(obj).__name__}")


def checked_neighbor(rule: LocalRule, v, slot: int):
    """``rule.neighbor`` plus the symmetry and colour checks every walk relies on."""
    w = rule.neighbor(v, slot)
    if rule.color(w) is rule.color(v):
        raise RuleInconsistent(f"edge {v!r} -[{slot}]- {w!r} joins equal colours")
    back = rule.neighbor(w, slot)
    if back != v:
        raise RuleInconsistent(
            f"asymmetric slot {slot}: {v!r} -> {w!r} but {w!r} -> {back!r}")
    return w


def next_dart(rule: LocalRule, dart: tuple) -> tuple:
    v, s = dart
    w = checked_neighbor(rule, v, s)
    return (w, _successor_slot(rule.color(w), s, rule.q))


class FaceTracer:
    """Lazy, cached face tracing on a rule.

    Darts already seen are grouped into records; an open record that is
    queried again with a larger cap is extended from where it stopped, and
    two open records that run into each other are merged.  The total work
    per face is therefore bounded by the largest cap requested for it.
    """

    def __init__(self, rule: LocalRule):
        self.rule = rule
        self._owner: dict = {}
        self._parent: list = []
        self._recs: list = []  # [start, frontier, darts, closed]
        self._lock = threading.Lock()
        self.truncations = 0

    def _find(self, r: int) -> int:
        while self._parent[r] != r:
            self._parent[r] = self._parent[self._parent[r]]
            r = self._parent[r]
        return r

    def _new_record(self, dart) -> int:
        idx = len(self._recs)
        self._recs.append([dart, dart, [dart], False])
        self._parent.append(idx)
        self._owner[dart] = idx
        return idx

    def _extend(self, idx: int, cap: int) -> None:
        rec = self._recs[idx]
        darts = rec[2]
        while not rec[3] and len(darts) < cap:
            nxt = next_dart(self.rule, rec[1])
            if nxt == rec[0]:
                rec[3] = True
                break
            owner = self._owner.get(nxt)
            if owner is None:
                self._owner[nxt] = idx
                darts.append(nxt)
                rec[1] = nxt
                continue
            other = self._find(owner)
            orec = self._recs[other]
            if other == idx or orec[3] or orec[0] != nxt:
                raise NonPlanarRotation(f"face walk re-enters dart {nxt!r} inconsistently")
            darts.extend(orec[2])
            rec[1] = orec[1]
            self._parent[other] = idx
            orec[2] = []

    def face(self, dart, cap: int) -> Face:
        if cap < 2:
            raise ValueError("cap must be at least 2")
        with self._lock:
            owner = self._owner.get(dart)
            idx = self._new_record(dart) if owner is None else self._find(owner)
            self._extend(idx, cap)
            start, _, darts, closed = self._recs[idx]
        v, s = dart
        label = face_label(self.rule.color(v), s, self.rule.q)
        if closed:
            if len(darts) % 2:
                raise NonPlanarRotation(f"odd face of length {len(darts)} through {dart!r}")
            return Face(tuple(darts), len(darts) // 2, label)
        self.truncations += 1
        return Face((), INFINITE, label, truncated=True)


def face_of(rule: LocalRule, v, slot: int, cap: int, tracer: FaceTracer | None = None) -> Face:
    """The face through the edge-end ``(v, slot)``.

    A face that has not closed after ``cap`` edge-ends is reported with
    ``m = INFINITE`` and ``truncated=True``.
    """
    if cap < 2:
        raise ValueError("cap must be at least 2")
    tracer = tracer or FaceTracer(rule)
    return tracer.face((v, slot), cap)


def vertex_faces(rule: LocalRule, v, cap: int, tracer: FaceTracer | None = None) -> list:
    """The ``q`` faces at ``v`` in rotation order (one per corner)."""
    tracer = tracer or FaceTracer(rule)
    return [tracer.face((v, s), cap) for s in range(rule.q)]


# ---------------------------------------------------------------------------
# curvature


def _m_value(x):
    return x.m if isinstance(x, Face) else x


def vertex_ramification(faces_at_v: Iterable) -> Fraction:
    """``V_P = sum(1 - 1/m)``; an infinite face contributes exactly 1."""
    total = Fraction(0)
    for x in faces_at_v:
        m = _m_value(x)
        total += 1 if m == INFINITE else 1 - Fraction(1, int(m))
    return total


def polygon_excess(angles: Sequence, q: int) -> Fraction:
    """Excess ``sum(1/m) - q + 2`` of the dual ``q``-gon at a vertex."""
    ms = [_m_value(x) for x in angles]
    if len(ms) != q:
        raise ValueError(f"expected {q} angles, got {len(ms)}")
    inv = sum((Fraction(0) if m == INFINITE else Fraction(1, int(m)) for m in ms), Fraction(0))
    return inv - q + 2


# ---------------------------------------------------------------------------
# finite complexes


def validate(c: LineComplex) -> ValidationReport:
    report = ValidationReport()
    add = report.violations.append
    q = c.q
    if q < 2:
        add(Violation("q < 2", detail=f"q = {q}"))
    if len(c.ends) != len(c.colors):
        add(Violation("shape", detail="colors and rotation lists differ in length"))
        return report
    n = c.n_vertices
    if n == 0:
        add(Violation("empty"))
        return report

    for v, row in enumerate(c.ends):
        if len(row) != q:
            add(Violation("degree != q", v, detail=f"degree {len(row)}, q = {q}"))
        for s, end in enumerate(row):
            if end is None:
                add(Violation("dangling edge-end", v, s))
                continue
            w, t = end
            if not (0 <= w < n) or not (0 <= t < len(c.ends[w])):
                add(Violation("edge-end out of range", v, s, f"points to {end}"))
                continue
            if c.ends[w][t] != (v, s):
                add(Violation("rotation inconsistent", v, s,
                              f"{(v, s)} -> {(w, t)} but {(w, t)} -> {c.ends[w][t]}"))
            if t != s:
                add(Violation("slot mismatch", v, s, f"glued to slot {t} of {w}"))
            if c.colors[v] is c.colors[w]:
                add(Violation("not bipartite", v, s, f"{v} and {w} are both {c.colors[v].value}"))

    seen = {0}
    todo = deque([0])
    while todo:
        v = todo.popleft()
        for end in c.ends[v]:
            if end is None or not (0 <= end[0] < n):
                continue
            if end[0] not in seen:
                seen.add(end[0])
                todo.append(end[0])
    if len(seen) != n:
        missing = min(set(range(n)) - seen)
        add(Violation("disconnected", missing, detail=f"{n - len(seen)} vertices unreachable from 0"))

    if report.ok:
        try:
            faces = trace_faces(c, check=False)
        except NonPlanarRotation as exc:
            add(Violation("non-planar rotation", detail=str(exc)))
        else:
            for f in faces:
                labels = {face_label(c.colors[v], s, q) for v, s in f.boundary}
                if len(labels) != 1:
                    add(Violation("branch label not constant", f.boundary[0][0], f.boundary[0][1]))
    return report


def trace_faces(c: LineComplex, check: bool = True) -> list:
    """All faces of a finite complex, in order of their first dart."""
    if check:
        report = validate(c)
        if not report.ok:
            raise NonPlanarRotation("; ".join(str(v) for v in report.violations))
    q = c.q
    owner: dict = {}
    faces = []
    for v in range(c.n_vertices):
        for s in range(q):
            if (v, s) in owner:
                continue
            start = (v, s)
            darts = []
            cur = start
            while True:
                if cur in owner:
                    raise NonPlanarRotation(f"dart {cur} revisited by a second face")
                owner[cur] = len(faces)
                darts.append(cur)
                w, t = c.ends[cur[0]][cur[1]]
                cur = (w, _successor_slot(c.colors[w], t, q))
                if cur == start:
                    break
                if len(darts) > 2 * q * c.n_vertices:
                    raise NonPlanarRotation(f"face through {start} does not close")
            if len(darts) % 2:
                raise NonPlanarRotation(f"odd face of length {len(darts)} through {start}")
            faces.append(Face(tuple(darts), len(darts) // 2, face_label(c.colors[v], s, q)))
    return faces


def faces_by_vertex(c: LineComplex, faces: list | None = None) -> list:
    """For each vertex, its ``q`` faces in rotation order."""
    faces = trace_faces(c) if faces is None else faces
    table = [[None] * c.q for _ in range(c.n_vertices)]
    for f in faces:
        for v, s in f.boundary:
            table[v][s] = f
    return table


def complex_from_rule(rule: LocalRule, limit: int = 100_000) -> LineComplex:
    """Materialize a finite rule, ids in breadth-first order from ``rule.base``."""
    ids = {rule.base: 0}
    keys = [rule.base]
    ends = []
    i = 0
    while i < len(keys):
        v = keys[i]
        row = []
        for s in range(rule.q):
            w = checked_neighbor(rule, v, s)
            if w not in ids:
                if len(keys) >= limit:
                    raise LineComplexError(f"rule has more than {limit} vertices")
                ids[w] = len(keys)
                keys.append(w)
            row.append((ids[w], s))
        ends.append(tuple(row))
        i += 1
    colors = tuple(rule.color(k) for k in keys)
    return LineComplex(rule.q, colors, tuple(ends))


def complex_stats(c: LineComplex) -> dict:
    """Counts that do not depend on how the complex was produced."""
    faces = trace_faces(c)
    by_m: dict = {}
    for f in faces:
        by_m[f.m] = by_m.get(f.m, 0) + 1
    per_vertex = faces_by_vertex(c, faces)
    vsum = sum((vertex_ramification(fs) for fs in per_vertex), Fraction(0))
    b = sum(f.m - 1 for f in faces)
    chi = c.n_vertices - c.n_edges + len(faces)
    n = c.sheet_count()
    return {
        "vertices": c.n_vertices,
        "edges": c.n_edges,
        "faces": len(faces),
        "faces_by_m": dict(sorted(by_m.items())),
        "total_branching": b,
        "euler_characteristic": chi,
        "genus": (2 - chi) // 2,
        "sheets": n,
        "sum_vertex_ramification": vsum,
        "mean_ramification": vsum / c.n_vertices if c.n_vertices else Fraction(0),
    }


def bigon_complex(q: int) -> LineComplex:
    """The one-sheeted covering: two vertices joined by ``q`` parallel edges."""
    return LineComplex(q, (Color.INNER, Color.OUTER),
                       (tuple((1, s) for s in range(q)), tuple((0, s) for s in range(q))))
