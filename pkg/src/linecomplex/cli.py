"""``lc`` command line: build, classify, export, walk, dilatation.

Reports are line-oriented ``key: value`` text with a fixed key order.
Exit status: 0 success, 1 parse or validation failure, 2 invariant breach.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction

from .complex_core import (INFINITE, ComplexRule, FaceTracer, LineComplex, LineComplexError,
                           NonPlanarRotation, RuleInconsistent, complex_from_rule,
                           complex_stats, faces_by_vertex, polygon_excess, trace_faces,
                           vertex_ramification)
from .dilatation import (AnnulusSpec, DegenerateJacobian, JacobianSample, annulus_modulus,
                         dilatation_K, dilatation_quotient, plane_vs_disc_demo)
from .exhaustion import DEFAULT_TOLERANCE, default_cap, limit_estimate, wreath_exhaust
from .explore import BallTooLarge, explore_ball, type_shells
from .hurwitz import MonodromyError, build_from_monodromy, covering_summary
from .rules import ScheduleInvalid, TableRule
from .specfile import SpecError, load_spec, rule_table_doc, table_doc, dump_doc
from .type_criterion import (InfiniteChainDetected, TypeVerdict, Verdict, chain_profile,
                             check_conditions, classify_regular, nevanlinna_conjecture_eval,
                             teichmueller_verdict)
from .walk_oracle import (SolverDiverged, adaptive_oracle, effective_resistance,
                          oracle_verdict, simulate_walk)

REPORT_SCHEMA = "lc-report/1"
CHAIN_BOUND = 10_000
PROFILE_DEPTH = 6
CONDITIONS_BALL = 1000
CONDITIONS_CAP = 256
ORACLE_MAX_RADIAL = 16384
ORACLE_MAX_BALL = 64


class InvariantBreach(LineComplexError):
    pass


def fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return f"{x:.10g}"
    if x is None:
        return "n/a"
    return str(x)


class Report:
    def __init__(self, command: str):
        self.lines = [("schema", REPORT_SCHEMA), ("command", command)]

    def add(self, key, value):
        self.lines.append((key, fmt(value)))

    def text(self) -> str:
        return "".join(f"{k}: {v}\n" for k, v in self.lines)


def _faces_by_m_text(by_m: dict) -> str:
    return " ".join(f"{fmt(m)}:{k}" for m, k in by_m.items())


def _source(spec):
    """``(finite complex or None, rule, label)``."""
    if spec.kind == "monodromy":
        c = build_from_monodromy(spec.datum)
        return c, ComplexRule(c, name="monodromy"), "monodromy"
    rule = spec.rule
    if isinstance(rule, TableRule) and not rule.periodic:
        c = complex_from_rule(rule)
        return c, ComplexRule(c, name=rule.name), rule.name
    return None, rule, rule.name


def _check_finite_invariants(c: LineComplex, stats: dict, spec) -> None:
    b = stats["total_branching"]
    if stats["sum_vertex_ramification"] != 2 * b:
        raise InvariantBreach(f"sum of V_P is {stats['sum_vertex_ramification']}, expected 2b = {2 * b}")
    n = stats["sheets"]
    if stats["euler_characteristic"] != 2 * n - b:
        raise InvariantBreach(f"V - E + F = {stats['euler_characteristic']} but 2n - b = {2 * n - b}")
    for fs in faces_by_vertex(c):
        if vertex_ramification(fs) + polygon_excess(fs, c.q) != 2:
            raise InvariantBreach("V_P + E_P != 2")
    if spec.kind == "monodromy":
        cs = covering_summary(spec.datum)
        if (cs.total_branching, cs.euler_characteristic) != (b, stats["euler_characteristic"]):
            raise InvariantBreach("cycle count and face count disagree")


def cmd_build(args, spec, out) -> int:
    rep = Report("build")
    c, rule, label = _source(spec)
    rep.add("source", label)
    rep.add("q", rule.q)
    if c is not None:
        stats = complex_stats(c)
        _check_finite_invariants(c, stats, spec)
        rep.add("finite", True)
        for key in ("vertices", "edges", "faces"):
            rep.add(key, stats[key])
        rep.add("faces_by_m", _faces_by_m_text(stats["faces_by_m"]))
        rep.add("total_branching", stats["total_branching"])
        rep.add("euler_characteristic", stats["euler_characteristic"])
        rep.add("genus", stats["genus"])
        rep.add("sheets", stats["sheets"])
        rep.add("sum_vertex_ramification", stats["sum_vertex_ramification"])
        rep.add("mean_ramification", stats["mean_ramification"])
        ident = None
        if stats["genus"] == 0:
            ident = stats["mean_ramification"] == 2 - Fraction(2, stats["sheets"])
        rep.add("genus_zero_identity", ident)
        rep.add("summary", f"genus {stats['genus']}, mean {fmt(stats['mean_ramification'])}")
    else:
        depth = args.depth if args.depth is not None else 3
        ball = explore_ball(rule, depth)
        cap = args.cap or default_cap(rule.q, ball.size)
        tracer = FaceTracer(rule)
        kinds = {"logarithmic": 0, "bigon": 0, "algebraic": 0}
        for v in ball.keys:
            for s in range(rule.q):
                f = tracer.face((v, s), cap)
                k = "logarithmic" if f.m == INFINITE else "bigon" if f.m == 1 else "algebraic"
                kinds[k] += 1
        rep.add("finite", False)
        rep.add("depth", depth)
        rep.add("cap", cap)
        rep.add("ball_vertices", ball.size)
        rep.add("shell_sizes", " ".join(map(str, ball.shell_sizes())))
        rep.add("corners_by_face_kind", " ".join(f"{k}:{v}" for k, v in kinds.items()))
        rep.add("truncated_faces", tracer.truncations)
        present = [k for k, v in kinds.items() if v]
        rep.add("summary", "infinite; faces " + ", ".join(present))
    out.write(rep.text())
    return 0


def _conditions_radius(rule, limit: int, depth: int) -> int:
    if not rule.is_tree:
        return depth
    sizes = [sum(st.count for st in sh.values()) for sh in type_shells(rule, depth)]
    total, r = 0, 0
    for d, s in enumerate(sizes):
        total += s
        if total > limit:
            break
        r = d
    return max(r, 1)


def _verdict_lines(rep: Report, key: str, v: TypeVerdict) -> None:
    rep.add(f"{key}.verdict", v.label)
    rep.add(f"{key}.basis", v.basis)
    for k in sorted(v.evidence):
        val = v.evidence[k]
        if isinstance(val, list):
            val = " ".join(fmt(x) for x in val)
        rep.add(f"{key}.{k}", val)
    if v.reason:
        rep.add(f"{key}.reason", v.reason)


def cmd_classify(args, spec, out) -> int:
    rep = Report("classify")
    c, rule, label = _source(spec)
    depth = args.depth if args.depth is not None else 50
    tol = Fraction(args.tolerance) if args.tolerance is not None else DEFAULT_TOLERANCE
    rep.add("source", label)
    rep.add("q", rule.q)
    rep.add("seed", args.seed)
    rep.add("depth", depth)

    report = wreath_exhaust(rule, depth=depth, cap=args.cap)
    window = args.window or max(1, depth // 4)
    window = min(window, len(report.generations))
    est = limit_estimate(report, window, tol)
    rep.add("exhaustion.mode", report.mode)
    rep.add("exhaustion.n_last", report.n_seq[-1])
    rep.add("exhaustion.V_last", report.V_seq[-1])
    rep.add("exhaustion.V_last_decimal", float(report.V_seq[-1]))
    rep.add("exhaustion.window", window)
    rep.add("exhaustion.tolerance", tol)
    rep.add("exhaustion.lim_inf", float(est.lim_inf_est))
    rep.add("exhaustion.lim_sup", float(est.lim_sup_est))
    rep.add("exhaustion.E_est", float(est.E_est))
    rep.add("exhaustion.limit", est.verdict.value)
    rep.add("exhaustion.truncated_faces", report.truncated_faces)

    decisive = []
    # finite coverings: the genus decides
    if c is not None:
        stats = complex_stats(c)
        if stats["genus"] == 0:
            v = TypeVerdict(Verdict.ELLIPTIC, "finite-cover genus-0", {"genus": 0})
            _verdict_lines(rep, "finite_cover", v)
        else:
            rep.add("finite_cover.genus", stats["genus"])
            rep.add("finite_cover.verdict", "n/a")
            rep.add("finite_cover.reason", f"compact surface of genus {stats['genus']}")

    # regular trichotomy
    if report.is_regular():
        v = classify_regular(report.V_seq[-1], report.vertex_values)
        _verdict_lines(rep, "regular", v)
        if c is None:
            decisive.append(v)
    else:
        rep.add("regular.verdict", "n/a")
        rep.add("regular.reason", "V_P not constant over the exhaustion")

    # series criterion
    if c is not None:
        rep.add("series.verdict", "n/a")
        rep.add("series.reason", "finite complex has algebraic faces")
    elif rule.q < 3:
        rep.add("series.verdict", "n/a")
        rep.add("series.reason", "criterion needs q >= 3")
    else:
        radius = _conditions_radius(rule, CONDITIONS_BALL, depth)
        cap = args.cap or CONDITIONS_CAP
        cond = check_conditions(rule, CHAIN_BOUND, cap=cap, radius=radius)
        rep.add("conditions.radius", radius)
        rep.add("conditions.chain_bound", CHAIN_BOUND)
        rep.add("conditions.face_cap", cap)
        rep.add("conditions.no_algebraic", cond.no_algebraic)
        rep.add("conditions.no_infinite_unbranched_chain", cond.no_infinite_unbranched_chain)
        rep.add("conditions.degrees_two_or_q", cond.degrees_two_or_q)
        if cond.holds:
            prof = chain_profile(rule, PROFILE_DEPTH, CHAIN_BOUND)
            rep.add("series.b_counts", " ".join(map(str, prof.b_counts)))
            v = teichmueller_verdict(prof, PROFILE_DEPTH, getattr(rule, "declared_psi", None))
            _verdict_lines(rep, "series", v)
            decisive.insert(0, v)
        else:
            rep.add("series.verdict", "n/a")
            rep.add("series.reason", "conditions (1)-(3) not certified: "
                    + ", ".join(sorted(cond.witnesses)))

    # walk oracle
    walk = simulate_walk(rule, trials=args.walk_trials or 1000, horizon=args.horizon or 1000,
                         seed=args.seed)
    rep.add("walk.trials", walk.trials)
    rep.add("walk.horizon", walk.horizon)
    rep.add("walk.return_fraction", walk.return_fraction)
    rep.add("walk.stderr", walk.stderr)
    try:
        curve, ov = _oracle(rule)
        if not curve.is_monotone():
            raise InvariantBreach("resistance decreased with depth")
        _verdict_lines(rep, "oracle", ov)
    except BallTooLarge as exc:
        rep.add("oracle.verdict", "INCONCLUSIVE")
        rep.add("oracle.reason", str(exc))

    # conjecture
    picked = next((v for v in decisive if v.value in (Verdict.HYPERBOLIC, Verdict.PARABOLIC)), None)
    if picked is None:
        rep.add("conjecture.outcome", "NOT_APPLICABLE")
        rep.add("conjecture.reason", "no independent open-surface verdict")
    else:
        a = nevanlinna_conjecture_eval(est, picked)
        rep.add("conjecture.outcome", a.outcome.value)
        rep.add("conjecture.E_est", float(a.E_est))
        rep.add("conjecture.verdict_basis", picked.basis)
        if a.reason:
            rep.add("conjecture.reason", a.reason)
    out.write(rep.text())
    return 0


def _oracle(rule):
    radial = rule.is_tree and rule.cone_type(rule.base) is not None
    return adaptive_oracle(rule, ORACLE_MAX_RADIAL if radial else ORACLE_MAX_BALL)


def cmd_walk(args, spec, out) -> int:
    rep = Report("walk")
    _, rule, label = _source(spec)
    trials = args.walk_trials or 10_000
    horizon = args.horizon or 10_000
    walk = simulate_walk(rule, trials=trials, horizon=horizon, seed=args.seed)
    rep.add("source", label)
    rep.add("seed", args.seed)
    rep.add("trials", trials)
    rep.add("horizon", horizon)
    rep.add("kernel", walk.method)
    h = 10
    while h < horizon:
        rep.add(f"return_fraction@{h}", walk.fraction_by(h))
        h *= 10
    rep.add("return_fraction", walk.return_fraction)
    rep.add("stderr", walk.stderr)
    depth = args.depth if args.depth is not None else 64
    curve = effective_resistance(rule, depth=depth,
                                 depths=[2 ** j for j in range(depth.bit_length()) if 2 ** j <= depth])
    if not curve.is_monotone():
        raise InvariantBreach("resistance decreased with depth")
    rep.add("resistance.method", curve.method)
    for nu, r in zip(curve.depths, curve.resistance):
        rep.add(f"resistance@{nu}", r)
    _verdict_lines(rep, "oracle", oracle_verdict(curve))
    out.write(rep.text())
    return 0


def cmd_dilatation(args, spec, out) -> int:
    if spec.kind != "dilatation":
        raise SpecError(f"dilatation needs kind: dilatation, got {spec.kind!r}")
    doc = spec.doc
    rep = Report("dilatation")
    Ds = []
    for i, row in enumerate(doc.get("samples") or []):
        if not isinstance(row, list) or len(row) != 4:
            raise SpecError(f"samples[{i}] must be [u_x, u_y, v_x, v_y]", *spec.marks.get(("samples", i), (None, None)))
        J = JacobianSample(*map(float, row))
        D = dilatation_quotient(J)
        Ds.append(D)
        rep.add(f"sample.{i}.K", dilatation_K(J))
        rep.add(f"sample.{i}.D", D)
    if Ds:
        rep.add("max_D", max(Ds))
    for i, row in enumerate(doc.get("annuli") or []):
        a = AnnulusSpec(float(row[0]), float(row[1]))
        rep.add(f"annulus.{i}.modulus", annulus_modulus(a))
    demo = doc.get("demo")
    if demo:
        d = plane_vs_disc_demo(float(demo.get("K", 1)), float(demo.get("r1", 1.0)),
                               float(demo.get("disc_bound", 0.0)), int(demo.get("rows", 3)))
        rep.add("demo.K", d.K)
        rep.add("demo.disc_bound", d.disc_bound)
        for row in d.rows:
            rep.add(f"demo.row.{row.k}", f"r2={fmt(row.r2)} modulus={fmt(row.modulus)} "
                    f"bound={fmt(row.bound)} exceeds={fmt(row.exceeds)}")
    out.write(rep.text())
    return 0


def to_dot(rule, keys, nbr, cap, title) -> str:
    """Ball or finite complex as DOT; node labels carry ``V_P``."""
    tracer = FaceTracer(rule)
    lines = [f'graph "{title}" {{', '  node [style=filled, fontname="Helvetica"];']
    for i, v in enumerate(keys):
        faces = [tracer.face((v, s), cap) for s in range(rule.q)]
        vp = vertex_ramification(faces)
        ms = ",".join("inf" if f.m == INFINITE else str(f.m) for f in faces)
        inner = rule.color(v).value == "inner"
        fill = "white" if inner else "gray30"
        font = "black" if inner else "white"
        lines.append(f'  n{i} [label="{i}\\nV_P={fmt(vp)}\\nm={ms}", '
                     f'fillcolor="{fill}", fontcolor="{font}"];')
    for i, row in enumerate(nbr):
        if rule.color(keys[i]).value != "inner":
            continue
        for s, j in enumerate(row):
            if j >= 0:
                lines.append(f'  n{i} -- n{j} [label="{s}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export(args, spec, out) -> int:
    c, rule, label = _source(spec)
    fmt_name = args.format or "dot"
    if fmt_name == "structured":
        if c is not None:
            out.write(dump_doc(table_doc(c)))
        elif isinstance(rule, TableRule):
            out.write(dump_doc(rule_table_doc(rule)))
        else:
            raise SpecError("structured export needs a finite complex or a table rule")
        return 0
    if fmt_name != "dot":
        raise SpecError(f"unknown format {fmt_name!r}")
    if c is not None:
        keys = list(range(c.n_vertices))
        nbr = [[w for w, _ in row] for row in c.ends]
        cap = args.cap or default_cap(c.q, c.n_vertices)
        out.write(to_dot(rule, keys, nbr, cap, label))
        return 0
    depth = args.depth if args.depth is not None else 3
    ball = explore_ball(rule, depth)
    cap = args.cap or default_cap(rule.q, ball.size)
    out.write(to_dot(rule, ball.keys, ball.nbr.tolist(), cap, f"{label} radius {depth}"))
    return 0


COMMANDS = {"build": cmd_build, "classify": cmd_classify, "export": cmd_export,
            "walk": cmd_walk, "dilatation": cmd_dilatation}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lc", description="Line complexes of branched coverings.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("spec", help="YAML spec file (schema lc-spec/1)")
    p.add_argument("--depth", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--walk-trials", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=int)
    p.add_argument("--tolerance", help="limit tolerance as a fraction, e.g. 1/100")
    p.add_argument("--format", choices=["dot", "structured"])
    p.add_argument("--out")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for name in ("depth", "cap", "walk_trials", "horizon", "window"):
        val = getattr(args, name)
        if val is not None and val < 1:
            print(f"lc: --{name.replace('_', '-')} must be at least 1", file=sys.stderr)
            return 1
    try:
        spec = load_spec(args.spec)
        if args.command != "dilatation" and spec.kind == "dilatation":
            raise SpecError(f"{args.command} needs a complex, got kind: dilatation")
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                return COMMANDS[args.command](args, spec, fh)
        return COMMANDS[args.command](args, spec, sys.stdout)
    except (InvariantBreach, SolverDiverged) as exc:
        print(f"lc: invariant breach: {exc}", file=sys.stderr)
        return 2
    except (OSError, SpecError, MonodromyError, NonPlanarRotation, RuleInconsistent,
            ScheduleInvalid, InfiniteChainDetected, DegenerateJacobian, ValueError) as exc:
        print(f"lc: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
