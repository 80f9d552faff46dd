"""Type verdicts: the chain-length series criterion, the regular trichotomy,
and the counterexample family to the mean-excess conjecture.

Vocabulary on a line complex whose faces are all bigons or infinite:

* a *branch vertex* has ``q`` distinct neighbours (no bigon corner);
* a *chain vertex* has exactly two distinct neighbours, i.e. two bundles of
  parallel edges.  Entering a chain vertex through one bundle forces leaving
  through the complementary one, so a chain leaving a branch vertex on side
  ``s`` alternates ``{s}`` with its complement and has odd length.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from scipy.special import zeta

from .complex_core import (INFINITE, Color, LineComplexError, LocalRule, as_rule,
                           checked_neighbor, FaceTracer)
from .exhaustion import (ExhaustionReport, LimitEstimate, LimitVerdict, default_cap,
                         limit_estimate)
from .explore import explore_ball
from .rules import ScheduleInvalid, SpeiserRule

ZETA2 = math.pi ** 2 / 6


class InfiniteChainDetected(LineComplexError):
    def __init__(self, bound: int, start=None):
        self.bound = bound
        self.start = start
        super().__init__(f"unbranched chain longer than {bound} from {start!r}")


class NotRegular(LineComplexError):
    pass


class Verdict(enum.Enum):
    HYPERBOLIC = "HYPERBOLIC"
    PARABOLIC = "PARABOLIC"
    ELLIPTIC = "ELLIPTIC"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class TypeVerdict:
    value: Verdict
    basis: str
    evidence: dict = field(default_factory=dict)
    reason: str = ""
    proxy: bool = False

    @property
    def label(self) -> str:
        if self.proxy and self.value is not Verdict.INCONCLUSIVE:
            return f"{self.value.value}-proxy"
        return self.value.value


# ---------------------------------------------------------------------------
# local structure


def distinct_neighbors(rule: LocalRule, v) -> dict:
    """Neighbour -> list of slots (the bundles at ``v``)."""
    out: dict = {}
    for s in range(rule.q):
        out.setdefault(checked_neighbor(rule, v, s), []).append(s)
    return out


def branching_degree(rule: LocalRule, v) -> int:
    return len(distinct_neighbors(rule, v))


def is_branch_vertex(rule: LocalRule, v) -> bool:
    return branching_degree(rule, v) != 2


def walk_chain(rule: LocalRule, v, slot: int, bound: int) -> tuple:
    """Follow the chain leaving ``v`` through ``slot`` to the next branch vertex.

    Returns ``(end, length, arrival_slot)``.
    """
    prev, cur = v, checked_neighbor(rule, v, slot)
    last_slot = slot
    length = 1
    while True:
        bundles = distinct_neighbors(rule, cur)
        if len(bundles) != 2:
            return cur, length, last_slot
        if length >= bound:
            raise InfiniteChainDetected(bound, v)
        (a, sa), (b, sb) = bundles.items()
        nxt, slots = (b, sb) if a == prev else (a, sa)
        if a == prev and b == prev:
            raise LineComplexError(f"chain vertex {cur!r} has a single neighbour")
        last_slot = slots[-1] if len(slots) == 1 else slots[0]
        prev, cur = cur, nxt
        length += 1


# ---------------------------------------------------------------------------
# Speiser tree


class SpeiserTree(LocalRule):
    """Branch vertices of a rule, chains contracted to weighted edges.

    ``neighbor(v, s)`` is the branch vertex at the far end of the chain
    leaving ``v`` on side ``s`` and ``weight(v, s)`` its original length.
    Parallel slots of a bundle keep their own entries, so multiplicity is
    preserved as repeated neighbours.
    """

    def __init__(self, original: LocalRule, base, bound: int):
        self.original = original
        self.q = original.q
        self.base = base
        self.bound = bound
        self.name = f"speiser({original.name})"
        self._cache: dict = {}

    def color(self, v) -> Color:
        return self.original.color(v)

    def _edge(self, v, s):
        key = (v, s)
        hit = self._cache.get(key)
        if hit is None:
            end, length, _ = walk_chain(self.original, v, s, self.bound)
            hit = self._cache[key] = (end, length)
        return hit

    def neighbor(self, v, slot: int):
        return self._edge(v, slot)[0]

    def weight(self, v, slot: int) -> int:
        return self._edge(v, slot)[1]

    def expand(self) -> "ExpandedTree":
        return ExpandedTree(self)


def _order_key(x):
    return repr(x)


class ExpandedTree(LocalRule):
    """Re-inserts every weighted edge of a :class:`SpeiserTree` as a chain."""

    def __init__(self, tree: SpeiserTree):
        self.tree = tree
        self.q = tree.q
        self.base = tree.base
        self.name = f"expanded({tree.name})"

    def _chain_key(self, u, w, s, t, L):
        if _order_key(u) <= _order_key(w):
            return ("chain", u, w, s, t, L)
        return ("chain", w, u, s, L - t, L)

    def color(self, v) -> Color:
        if isinstance(v, tuple) and len(v) == 6 and v[0] == "chain":
            _, u, _, _, t, _ = v
            c = self.tree.color(u)
            return c if t % 2 == 0 else c.other
        return self.tree.color(v)

    def neighbor(self, v, slot: int):
        if isinstance(v, tuple) and len(v) == 6 and v[0] == "chain":
            _, u, w, s, t, L = v
            toward_u = (slot == s) if t % 2 else (slot != s)
            if toward_u:
                return u if t == 1 else ("chain", u, w, s, t - 1, L)
            return w if t + 1 == L else ("chain", u, w, s, t + 1, L)
        w = self.tree.neighbor(v, slot)
        L = self.tree.weight(v, slot)
        if L == 1:
            return w
        return self._chain_key(v, w, slot, 1, L)


def nearest_branch_vertex(rule: LocalRule, start, bound: int):
    seen = {start}
    layer = [start]
    for _ in range(bound + 1):
        for v in layer:
            if branching_degree(rule, v) == rule.q:
                return v
        nxt = []
        for v in layer:
            for s in range(rule.q):
                w = checked_neighbor(rule, v, s)
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        layer = nxt
    raise InfiniteChainDetected(bound, start)


def to_speiser_tree(rule_or_complex, bound: int = 10_000) -> SpeiserTree:
    rule = as_rule(rule_or_complex)
    if isinstance(rule, SpeiserTree):
        return rule
    base = nearest_branch_vertex(rule, rule.base, bound)
    return SpeiserTree(rule, base, bound)


# ---------------------------------------------------------------------------
# conditions and chain profile


@dataclass
class ConditionsReport:
    bound: int
    q_at_least_three: bool
    no_algebraic: bool
    no_infinite_unbranched_chain: bool
    degrees_two_or_q: bool
    witnesses: dict = field(default_factory=dict)
    truncated_faces: int = 0

    @property
    def holds(self) -> bool:
        return (self.q_at_least_three and self.no_algebraic
                and self.no_infinite_unbranched_chain and self.degrees_two_or_q)


def check_conditions(rule, bound: int, cap: int | None = None,
                     radius: int | None = None) -> ConditionsReport:
    """The three structural conditions, checked on the ball of radius ``bound``.

    Chains are followed up to ``bound`` edges, so the absence of infinite
    chains is only certified at that scale.  ``radius`` shrinks the ball
    while keeping the chain bound, for trees whose balls grow too fast.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    rule = as_rule(rule)
    q = rule.q
    ball = explore_ball(rule, bound if radius is None else radius)
    cap = cap or default_cap(q, ball.size)
    tracer = FaceTracer(rule)
    witnesses: dict = {}
    no_algebraic = True
    degrees_ok = True
    chains_ok = True
    branch_seen = False
    for v in ball.keys:
        for s in range(q):
            f = tracer.face((v, s), cap)
            if f.m != 1 and f.m != INFINITE:
                no_algebraic = False
                witnesses.setdefault("algebraic", (v, s, f.m))
        deg = branching_degree(rule, v)
        if deg not in (2, q):
            degrees_ok = False
            witnesses.setdefault("degree", (v, deg))
        if deg == q and q > 2:
            branch_seen = True
            for s in range(q):
                try:
                    walk_chain(rule, v, s, bound)
                except InfiniteChainDetected:
                    chains_ok = False
                    witnesses.setdefault("chain", (v, s))
    if q > 2 and not branch_seen:
        chains_ok = False
        witnesses.setdefault("chain", (rule.base, None))
    if q < 3:
        witnesses["q"] = q
    return ConditionsReport(bound, q >= 3, no_algebraic, chains_ok, degrees_ok,
                            witnesses, tracer.truncations)


@dataclass
class ChainProfile:
    K: int
    b_counts: list
    chain_lengths: list
    phi: list
    psi: list
    partial_sums: list

    def psi_at(self, k: int) -> int:
        return self.psi[k - 1]

    @property
    def psi_max(self) -> int:
        return max(self.psi)


def chain_profile(tree, K: int, bound: int = 10_000) -> ChainProfile:
    """Generations ``B_0 .. B_K`` of branch vertices and the chain lengths between them."""
    if K < 1:
        raise ValueError("K must be at least 1")
    tree = to_speiser_tree(tree, bound)
    q = tree.q
    if branching_degree(tree.original, tree.base) != q:
        raise LineComplexError("base of the Speiser tree is not a branch vertex")
    layer = [(tree.base, None)]
    visited = {tree.base}
    b_counts = [1]
    lengths_by_gen, phi, psi, sums = [], [], [], []
    running = 0
    total = Fraction(0)
    for k in range(1, K + 1):
        nxt = []
        lengths: dict = {}
        for v, parent in layer:
            for s in range(q):
                w = tree.neighbor(v, s)
                if w == parent:
                    continue
                if w in visited:
                    raise LineComplexError(f"branch vertex {w!r} reached twice; not a tree")
                visited.add(w)
                L = tree.weight(v, s)
                lengths[L] = lengths.get(L, 0) + 1
                nxt.append((w, v))
        layer = nxt
        b_counts.append(len(nxt))
        lengths_by_gen.append(dict(sorted(lengths.items())))
        phi_k = max(lengths) if lengths else 0
        running = max(running, phi_k)
        phi.append(phi_k)
        psi.append(running)
        total += Fraction(running, k * k)
        sums.append(total)
    return ChainProfile(K, b_counts, lengths_by_gen, phi, psi, sums)


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class PsiBound:
    """A declared closed-form majorant of the running maximum of chain lengths."""

    bound: Callable[[int], float]
    series_bound: float
    description: str


def teichmueller_verdict(profile: ChainProfile, divergence_horizon: int | None = None,
                         closed_form: PsiBound | None = None) -> TypeVerdict:
    """HYPERBOLIC only on a convergence certificate; otherwise INCONCLUSIVE.

    Two certificates are accepted.  A declared closed form must majorize the
    computed running maxima on every computed generation.  Without one, the
    running maximum must be constant over the second half of a profile at
    least ``divergence_horizon`` generations deep; the series is then
    compared with ``psi_max * pi^2 / 6``.  Divergence never yields a verdict.
    """
    K = profile.K
    horizon = divergence_horizon or K
    evidence = {"K": K, "psi_max": profile.psi_max, "S_K": profile.partial_sums[-1]}
    basis = "series criterion"
    if K < horizon:
        return TypeVerdict(Verdict.INCONCLUSIVE, basis, evidence,
                           f"profile depth {K} below horizon {horizon}")
    if closed_form is not None:
        bad = [k for k in range(1, K + 1) if profile.psi_at(k) > closed_form.bound(k)]
        if bad:
            return TypeVerdict(Verdict.INCONCLUSIVE, basis, evidence,
                               f"declared bound {closed_form.description} fails at k = {bad[0]}")
        evidence.update(certificate="declared closed form", form=closed_form.description,
                        series_bound=closed_form.series_bound)
        return TypeVerdict(Verdict.HYPERBOLIC, basis, evidence)
    half = profile.psi[K // 2:]
    if len(set(half)) == 1:
        evidence.update(certificate="bounded psi", series_bound=profile.psi_max * ZETA2)
        return TypeVerdict(Verdict.HYPERBOLIC, basis, evidence)
    return TypeVerdict(Verdict.INCONCLUSIVE, basis, evidence,
                       "criterion gives no verdict on divergence")


def classify_regular(V, vertex_values=None) -> TypeVerdict:
    """Sign of ``V - 2`` for a regularly ramified surface."""
    V = Fraction(V)
    if vertex_values is not None:
        values = set(Fraction(x) for x in vertex_values)
        if values != {V}:
            raise NotRegular(f"vertex ramification takes values {sorted(values)}")
    basis = "regular trichotomy"
    evidence = {"V": V, "E": 2 - V}
    if V < 2:
        return TypeVerdict(Verdict.ELLIPTIC, basis, evidence)
    if V == 2:
        return TypeVerdict(Verdict.PARABOLIC, basis, evidence)
    return TypeVerdict(Verdict.HYPERBOLIC, basis, evidence)


class Assessment(enum.Enum):
    CONFIRMS = "CONFIRMS"
    REFUTES = "REFUTES"
    NOT_APPLICABLE = "NOT_APPLICABLE"


@dataclass(frozen=True)
class ConjectureAssessment:
    outcome: Assessment
    E_est: Fraction
    verdict: TypeVerdict
    reason: str = ""


def nevanlinna_conjecture_eval(report, verdict: TypeVerdict, tolerance=None,
                               window: int | None = None) -> ConjectureAssessment:
    """Compare the mean-excess prediction with an independent verdict.

    ``report`` is an :class:`ExhaustionReport` or a ready :class:`LimitEstimate`.
    Zero mean excess predicts parabolic, negative predicts hyperbolic.
    ``tolerance`` decides "zero" and defaults to the estimate's own.
    """
    if isinstance(report, ExhaustionReport):
        kw = {} if tolerance is None else {"tolerance": tolerance}
        limit = limit_estimate(report, window, **kw)
    else:
        limit = report
    tol = Fraction(tolerance) if tolerance is not None else limit.tolerance
    E = limit.E_est
    if limit.verdict is not LimitVerdict.CONVERGED:
        return ConjectureAssessment(Assessment.NOT_APPLICABLE, E, verdict,
                                    f"mean ramification {limit.verdict.value.lower()}")
    if verdict.value not in (Verdict.HYPERBOLIC, Verdict.PARABOLIC):
        return ConjectureAssessment(Assessment.NOT_APPLICABLE, E, verdict,
                                    f"verdict {verdict.label} is not open hyperbolic/parabolic")
    if abs(E) < tol:
        predicted = Verdict.PARABOLIC
    elif E < 0:
        predicted = Verdict.HYPERBOLIC
    else:
        return ConjectureAssessment(Assessment.NOT_APPLICABLE, E, verdict,
                                    "positive mean excess")
    outcome = Assessment.CONFIRMS if predicted is verdict.value else Assessment.REFUTES
    return ConjectureAssessment(outcome, E, verdict)


# ---------------------------------------------------------------------------
# counterexample family


@dataclass(frozen=True)
class PaddingSchedule:
    """Bigon pairs inserted into generation-``k`` chains.

    ``kind="power"`` pads ``floor(scale * k**exponent)`` pairs, ``"zero"``
    pads nothing, ``"doubling"`` pads ``scale * 2**(k-1)``.
    """

    kind: str = "power"
    scale: float = 50.0
    exponent: float = 0.5

    def pad(self, k: int) -> int:
        if self.kind == "zero":
            return 0
        if self.kind == "power":
            return int(math.floor(self.scale * k ** self.exponent))
        if self.kind == "doubling":
            return int(self.scale * 2 ** (k - 1))
        raise ScheduleInvalid(f"unknown schedule {self.kind!r}")


DEFAULT_SCHEDULE = PaddingSchedule()


def counterexample_family(q: int = 3, chain_length: int = 1,
                          padding_schedule: PaddingSchedule = DEFAULT_SCHEDULE) -> SpeiserRule:
    """Hyperbolic surfaces whose mean ramification tends to 2.

    Generation-``k`` chains have length ``c + 2 * pad(k)``.  Chain vertices
    carry ``V_P = 2`` and branch vertices ``V_P = q``; unbounded padding
    drives the share of branch vertices in every ball to zero, while
    sublinear padding keeps the chain-length series summable.
    """
    c = chain_length
    sched = padding_schedule
    if q < 3:
        raise ScheduleInvalid("the family needs q >= 3")
    if c < 1 or c % 2 == 0:
        raise ScheduleInvalid(f"chain length {c} must be odd and >= 1 (chains have odd length)")
    if sched.kind == "doubling":
        raise ScheduleInvalid("doubling padding makes sum psi(k)/k^2 diverge")
    if sched.kind == "power":
        if sched.scale < 0 or not 0 <= sched.exponent < 1:
            raise ScheduleInvalid("power padding needs scale >= 0 and 0 <= exponent < 1")
    elif sched.kind != "zero":
        raise ScheduleInvalid(f"unknown schedule {sched.kind!r}")
    rule = SpeiserRule(q, lambda k: c + 2 * sched.pad(k), name="counterexample",
                       params={"q": q, "c": c, "schedule": sched.kind,
                               "scale": sched.scale, "exponent": sched.exponent},
                       constant=sched.kind == "zero" or sched.scale == 0)
    rule.declared_psi = declared_psi(c, sched)
    return rule


def declared_psi(c: int, sched: PaddingSchedule) -> PsiBound:
    if sched.kind == "zero" or sched.scale == 0:
        return PsiBound(lambda k: c, c * ZETA2, f"psi(k) = {c}")
    a = sched.exponent
    return PsiBound(lambda k: c + 2 * sched.scale * k ** a,
                    c * ZETA2 + 2 * sched.scale * float(zeta(2 - a)),
                    f"psi(k) <= {c} + {2 * sched.scale:g} k^{a:g}")
