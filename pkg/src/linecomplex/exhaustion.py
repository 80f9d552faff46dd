"""Wreathlike exhaustion and mean ramification.

Generation ``nu`` of the exhaustion is the ball of radius ``nu`` around the
base vertex.  Every vertex in it contributes its full ramification ``V_P``,
even when some of its faces reach past the current horizon; those faces are
traced lazily with a cap and flagged when truncated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from .complex_core import FaceTracer, as_rule, checked_neighbor, vertex_ramification
from .explore import type_shells

MAX_CAP = 4096
DEFAULT_TOLERANCE = Fraction(1, 1000)


def default_cap(q: int, size: int) -> int:
    """``10 * q * size`` clamped to ``MAX_CAP``."""
    return max(2, min(10 * q * size, MAX_CAP))


@dataclass(frozen=True)
class Generation:
    nu: int
    n: int
    V: Fraction

    @property
    def E(self) -> Fraction:
        return 2 - self.V


@dataclass
class ExhaustionReport:
    base: object
    depth: int
    q: int
    generations: list
    mode: str
    exhausted: bool = False
    truncated_faces: int = 0
    vertex_values: set = field(default_factory=set)

    @property
    def n_seq(self) -> list:
        return [g.n for g in self.generations]

    @property
    def V_seq(self) -> list:
        return [g.V for g in self.generations]

    @property
    def E_seq(self) -> list:
        return [g.E for g in self.generations]

    def tail_window(self, w: int) -> tuple:
        tail = self.V_seq[-w:]
        return min(tail), max(tail)

    def is_regular(self) -> bool:
        return len(self.vertex_values) == 1

    def prefix(self, depth: int) -> "ExhaustionReport":
        return ExhaustionReport(self.base, depth, self.q, self.generations[:depth], self.mode,
                                self.exhausted and depth >= len(self.generations),
                                self.truncated_faces, set(self.vertex_values))


def wreath_exhaust(rule, base=None, depth: int = 10, cap: int | None = None,
                   mode: str = "auto") -> ExhaustionReport:
    """Mean ramification ``V_nu`` of the balls ``nu = 1 .. depth``.

    ``mode="counted"`` multiplies cone types instead of listing vertices and
    is exact for tree rules whose shells grow too fast to enumerate;
    ``"auto"`` picks it whenever the rule declares cone types.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    rule = as_rule(rule)
    base = rule.base if base is None else base
    if mode == "auto":
        mode = "counted" if rule.is_tree and rule.cone_type(base) is not None else "explicit"
    if mode == "counted":
        return _exhaust_counted(rule, base, depth, cap)
    if mode == "explicit":
        return _exhaust_explicit(rule, base, depth, cap)
    raise ValueError(f"unknown mode {mode!r}")


def _vp(rule, tracer, v, cap) -> Fraction:
    return vertex_ramification(tracer.face((v, s), cap) for s in range(rule.q))


def _exhaust_explicit(rule, base, depth, cap) -> ExhaustionReport:
    q = rule.q
    tracer = FaceTracer(rule)
    seen = {base}
    frontier = [base]
    n = 1
    total = _vp(rule, tracer, base, cap or default_cap(q, 1))
    values = {total}
    gens = []
    exhausted = False
    for nu in range(1, depth + 1):
        new = []
        for v in frontier:
            for s in range(q):
                w = checked_neighbor(rule, v, s)
                if w not in seen:
                    seen.add(w)
                    new.append(w)
        n += len(new)
        c = cap or default_cap(q, n)
        for w in new:
            vp = _vp(rule, tracer, w, c)
            values.add(vp)
            total += vp
        if not new:
            exhausted = True
        frontier = new
        gens.append(Generation(nu, n, total / n))
    return ExhaustionReport(base, depth, q, gens, "explicit", exhausted,
                            tracer.truncations, values)


def _exhaust_counted(rule, base, depth, cap) -> ExhaustionReport:
    q = rule.q
    tracer = FaceTracer(rule)
    shells = type_shells(rule, depth, base)
    vp_by_type: dict = {}
    n = 0
    total = Fraction(0)
    gens = []
    for nu, shell in enumerate(shells):
        n += sum(st.count for st in shell.values())
        c = cap or default_cap(q, n)
        for t, st in shell.items():
            if t not in vp_by_type:
                vp_by_type[t] = _vp(rule, tracer, st.rep, c)
            total += st.count * vp_by_type[t]
        if nu:
            gens.append(Generation(nu, n, total / n))
    return ExhaustionReport(base, depth, q, gens, "counted", False,
                            tracer.truncations, set(vp_by_type.values()))


class LimitVerdict(enum.Enum):
    CONVERGED = "CONVERGED"
    OSCILLATING = "OSCILLATING"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class LimitEstimate:
    lim_inf_est: Fraction
    lim_sup_est: Fraction
    verdict: LimitVerdict
    window: int
    tolerance: Fraction

    @property
    def V_est(self) -> Fraction:
        return (self.lim_inf_est + self.lim_sup_est) / 2

    @property
    def E_est(self) -> Fraction:
        return 2 - self.V_est


def limit_estimate(report: ExhaustionReport, window: int | None = None,
                   tolerance=DEFAULT_TOLERANCE) -> LimitEstimate:
    """Trailing-window estimates of the lower and upper limits of ``V_nu``.

    CONVERGED when the window spread is below ``tolerance``.  A wider
    spread is OSCILLATING if the window changes direction and INCONCLUSIVE
    if it is still drifting one way.
    """
    vals = report.V_seq
    if window is None:
        window = max(1, len(vals) // 4)
    if not 1 <= window <= len(vals):
        raise ValueError(f"window {window} outside 1..{len(vals)}")
    tol = Fraction(tolerance)
    tail = vals[-window:]
    lo, hi = min(tail), max(tail)
    if hi - lo < tol:
        verdict = LimitVerdict.CONVERGED
    else:
        steps = [b - a for a, b in zip(tail, tail[1:]) if b != a]
        monotone = all(s > 0 for s in steps) or all(s < 0 for s in steps)
        verdict = LimitVerdict.INCONCLUSIVE if monotone else LimitVerdict.OSCILLATING
    return LimitEstimate(lo, hi, verdict, window, tol)
