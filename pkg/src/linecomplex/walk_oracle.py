"""Random-walk and electrical oracles on the 1-skeleton.

These are heuristic proxies for the type of the surface: recurrence of the
skeleton (return probability 1, unbounded resistance to infinity) suggests
parabolic type, transience suggests hyperbolic type.  Verdicts carry the
label "oracle (1-skeleton proxy)".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from . import _kernels
from .complex_core import LineComplexError, as_rule
from .explore import explore_ball, radial_profile
from .type_criterion import TypeVerdict, Verdict

ORACLE_BASIS = "oracle (1-skeleton proxy)"
RESIDUAL_TOL = 1e-9
HYPERBOLIC_RATIO = 0.5
PARABOLIC_RATIO = 0.9


class SolverDiverged(LineComplexError):
    pass


@dataclass(frozen=True)
class WalkEstimate:
    base: object
    trials: int
    horizon: int
    seed: int
    return_times: np.ndarray = field(repr=False, compare=False)
    method: str = "graph"

    def fraction_by(self, horizon: int) -> float:
        t = self.return_times
        return float(np.count_nonzero((t > 0) & (t <= horizon))) / self.trials

    @property
    def return_fraction(self) -> float:
        return self.fraction_by(self.horizon)

    @property
    def stderr(self) -> float:
        p = self.return_fraction
        return math.sqrt(p * (1 - p) / self.trials)


def _walk_table(rule, base, horizon):
    """Pick the kernel: radial distances for symmetric trees, else a ball table."""
    reach = horizon // 2 + 1
    if base is None or base == rule.base:
        prof = radial_profile(rule, reach)
        if prof is not None:
            return "radial", np.asarray(prof.back_slots, dtype=np.int64), 0
    ball = explore_ball(rule, reach, base)
    # a walk that leaves the ball cannot come back in time, so -1 is absorbing
    return "graph", ball.nbr, 0


def simulate_walk(rule, base=None, trials: int = 10_000, horizon: int = 10_000,
                  seed: int = 0, use_numba: bool | None = None) -> WalkEstimate:
    """Simple random walk from ``base``; records each trial's first return time.

    Each step leaves through a uniformly chosen slot, so multiple edges are
    weighted by multiplicity.  Deterministic given ``seed``.
    """
    if trials < 1 or horizon < 1:
        raise ValueError("trials and horizon must be at least 1")
    rule = as_rule(rule)
    kind, table, start = _walk_table(rule, base, horizon)
    starts = np.full(trials, start, dtype=np.int64)
    times = _kernels.first_returns(kind, table, starts, rule.q, trials, horizon, seed,
                                   use_numba)
    b = rule.base if base is None else base
    return WalkEstimate(b, trials, horizon, seed, times, kind)


@dataclass(frozen=True)
class ResistanceCurve:
    depths: list
    resistance: list
    solver_tolerance: float
    residuals: list
    method: str

    def at(self, nu: int) -> float:
        return self.resistance[self.depths.index(nu)]

    def is_monotone(self) -> bool:
        r = self.resistance
        return all(a <= b for a, b in zip(r, r[1:]))


def _solve(L, rhs, tol):
    x = spsolve(L.tocsc(), rhs)
    x = np.atleast_1d(x)
    res = float(np.linalg.norm(L @ x - rhs) / np.linalg.norm(rhs))
    if not np.isfinite(res) or res > tol:
        raise SolverDiverged(f"relative residual {res:.3e} above {tol:.1e}")
    return x, res


def _radial_conductances(rule, depth):
    prof = radial_profile(rule, depth)
    if prof is None:
        return None
    return [prof.shell_sizes[d] * prof.forward_slots[d] for d in range(depth)]


def _path_resistance(cond, nu, tol):
    """Shells ``0..nu-1`` as nodes of a path network; shell ``nu`` grounded."""
    c = np.asarray(cond[:nu], dtype=float)
    diag = c.copy()
    diag[1:] += c[:-1]
    L = sp.diags([diag, -c[:-1], -c[:-1]], [0, 1, -1], shape=(nu, nu), format="csr")
    rhs = np.zeros(nu)
    rhs[0] = 1.0
    x, res = _solve(L, rhs, tol)
    return float(x[0]), res


def _ball_resistance(ball, nu, tol):
    inside = np.nonzero(ball.dist < nu)[0]
    if (ball.dist == nu).sum() == 0:
        return math.inf, 0.0
    idx = np.full(ball.size, -1, dtype=np.int64)
    idx[inside] = np.arange(len(inside))
    rows, cols = [], []
    q = ball.nbr.shape[1]
    for s in range(q):
        w = ball.nbr[inside, s]
        keep = idx[w] >= 0
        rows.append(idx[inside][keep])
        cols.append(idx[w[keep]])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    m = len(inside)
    A = sp.coo_matrix((np.ones(len(r)), (r, c)), shape=(m, m)).tocsr()
    # every slot is one unit resistor; slots to the grounded sphere count in the degree
    deg = np.full(m, float(q))
    L = sp.diags(deg) - A
    rhs = np.zeros(m)
    rhs[idx[0]] = 1.0
    x, res = _solve(L, rhs, tol)
    return float(x[idx[0]]), res


def effective_resistance(rule, base=None, depth: int = 16, depths=None,
                         tol: float = RESIDUAL_TOL, method: str = "auto") -> ResistanceCurve:
    """Resistance from ``base`` to the grounded ``nu``-sphere, unit resistor per edge.

    ``method="radial"`` merges each sphere of a spherically symmetric tree
    into one node (all its vertices share a potential), ``"ball"`` solves the
    Laplacian of the explicit ball.  Once a finite complex has no
    ``nu``-sphere the resistance is infinite.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    rule = as_rule(rule)
    depths = list(range(1, depth + 1)) if depths is None else sorted(set(depths))
    if not depths or depths[0] < 1 or depths[-1] > depth:
        raise ValueError(f"depths must lie in 1..{depth}")
    cond = None
    if method in ("auto", "radial") and (base is None or base == rule.base):
        cond = _radial_conductances(rule, depth)
    if method == "radial" and cond is None:
        raise LineComplexError(f"rule {rule.name!r} is not spherically symmetric")
    values, residuals = [], []
    if cond is not None:
        used = "radial"
        for nu in depths:
            r, res = _path_resistance(cond, nu, tol)
            values.append(r)
            residuals.append(res)
    else:
        used = "ball"
        ball = explore_ball(rule, depth, base)
        for nu in depths:
            r, res = _ball_resistance(ball, nu, tol)
            values.append(r)
            residuals.append(res)
    return ResistanceCurve(depths, values, tol, residuals, used)


def radial_resistance_closed_form(rule, depth: int) -> list:
    """``R(nu) = sum_{d < nu} 1 / (N_d * fwd_d)`` for a symmetric tree."""
    cond = _radial_conductances(rule, depth)
    if cond is None:
        raise LineComplexError(f"rule {rule.name!r} is not spherically symmetric")
    out, acc = [], 0.0
    for c in cond:
        acc += 1.0 / c
        out.append(acc)
    return out


def dyadic_ratios(curve: ResistanceCurve) -> list:
    """Increment ratios of ``R`` over successive doublings ``nu = 1, 2, 4, ...``."""
    pts = [nu for nu in curve.depths if nu & (nu - 1) == 0]
    vals = [curve.at(nu) for nu in pts]
    if any(math.isinf(v) for v in vals):
        return [math.inf]
    inc = [b - a for a, b in zip(vals, vals[1:])]
    out = []
    for a, b in zip(inc, inc[1:]):
        out.append(math.inf if a <= 0 < b else (b / a if a > 0 else 0.0))
    return out


def oracle_verdict(curve: ResistanceCurve) -> TypeVerdict:
    """Read transience or recurrence off the resistance growth.

    The increments of ``R`` over the doublings ``nu = 2^j`` are compared;
    their last ratio ``rho`` is the fitted decay rate.  ``rho < 0.5`` means
    the increments shrink geometrically and ``R`` converges
    (HYPERBOLIC-proxy), ``rho >= 0.9`` means they stay bounded below
    (PARABOLIC-proxy).
    """
    pts = [nu for nu in curve.depths if nu & (nu - 1) == 0]
    evidence = {"dyadic_depths": pts, "method": curve.method}
    if len(pts) < 3:
        return TypeVerdict(Verdict.INCONCLUSIVE, ORACLE_BASIS, evidence,
                           f"need resistance at 3 dyadic depths, have {len(pts)}", proxy=True)
    ratios = dyadic_ratios(curve)
    rho = ratios[-1]
    evidence.update(rho=rho, R_last=curve.at(pts[-1]))
    if rho < HYPERBOLIC_RATIO:
        return TypeVerdict(Verdict.HYPERBOLIC, ORACLE_BASIS, evidence, proxy=True)
    if rho >= PARABOLIC_RATIO:
        return TypeVerdict(Verdict.PARABOLIC, ORACLE_BASIS, evidence, proxy=True)
    return TypeVerdict(Verdict.INCONCLUSIVE, ORACLE_BASIS, evidence,
                       f"increment ratio {rho:.3g} between thresholds", proxy=True)


def adaptive_oracle(rule, max_depth: int = 16384, start: int = 8) -> tuple:
    """Double the depth until the oracle reads HYPERBOLIC-proxy or ``max_depth``.

    Only transience stops the search early: a shallow curve of a transient
    skeleton can still look linear.
    """
    depth = start
    while True:
        pts = [2 ** j for j in range(depth.bit_length()) if 2 ** j <= depth]
        curve = effective_resistance(rule, depth=depth, depths=pts)
        verdict = oracle_verdict(curve)
        if verdict.value is Verdict.HYPERBOLIC or depth >= max_depth:
            return curve, verdict
        depth *= 2
