"""Acceptance checks, one per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the PASS/FAIL lines.
"""

import math
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from linecomplex import cli
from linecomplex.complex_core import (complex_from_rule, complex_stats, faces_by_vertex,
                                      polygon_excess, vertex_faces, vertex_ramification)
from linecomplex.dilatation import (JacobianSample, dilatation_quotient, plane_vs_disc_demo)
from linecomplex.exhaustion import limit_estimate, wreath_exhaust
from linecomplex.explore import explore_ball
from linecomplex.hurwitz import build_from_monodromy, covering_summary, random_datum
from linecomplex.rules import exp_rule, modular_rule, tree_rule
from linecomplex.specfile import dump_doc, load_spec, table_doc
from linecomplex.type_criterion import (Assessment, PaddingSchedule, Verdict, chain_profile,
                                        check_conditions, classify_regular,
                                        counterexample_family, nevanlinna_conjecture_eval,
                                        teichmueller_verdict)
from linecomplex.walk_oracle import adaptive_oracle, simulate_walk

SPECS = Path(__file__).resolve().parent.parent / "specs"
SEED = 20240601


@contextmanager
def criterion(num, title, limit):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\ncriterion {num} FAIL  {title}")
        raise
    dt = time.perf_counter() - t0
    ok = dt < limit
    print(f"\ncriterion {num} {'PASS' if ok else 'FAIL'}  {title}  ({dt:.2f} s, limit {limit} s)")
    assert ok, f"took {dt:.2f} s, limit {limit} s"


def transitive_data(rng, count, max_n=8, max_q=5):
    out = []
    while len(out) < count:
        d = random_datum(rng, int(rng.integers(1, max_n + 1)), int(rng.integers(2, max_q + 1)),
                         moves=4)
        if d.is_transitive():
            out.append(d)
    return out


def test_criterion_1_mean_ramification_identity():
    with criterion(1, "2 - 2/n on genus 0, sum V_P = 2b on all 200", 10):
        data = transitive_data(np.random.default_rng(SEED), 200)
        genus0 = 0
        for d in data:
            c = build_from_monodromy(d)
            stats = complex_stats(c)
            assert stats["sum_vertex_ramification"] == 2 * stats["total_branching"]
            assert isinstance(stats["mean_ramification"], Fraction)
            if stats["euler_characteristic"] == 2:
                genus0 += 1
                assert stats["mean_ramification"] == 2 - Fraction(2, d.n)
                assert covering_summary(d).mean_ramification == 2 - Fraction(2, d.n)
        assert genus0 >= 50


def test_criterion_2_curvature_identity():
    with criterion(2, "V_P + E_P = 2 at every vertex of the corpus", 5):
        complexes = [build_from_monodromy(d)
                     for d in transitive_data(np.random.default_rng(SEED + 1), 200)]
        for name in ("cubic.yaml", "bigon3.yaml"):
            complexes.append(build_from_monodromy(load_spec(SPECS / name).datum))
        checked = 0
        for c in complexes:
            for fs in faces_by_vertex(c):
                total = vertex_ramification(fs) + polygon_excess(fs, c.q)
                assert total == 2 and isinstance(total, Fraction)
                checked += 1
        for rule, radius in ((exp_rule(), 20), (modular_rule(), 5),
                             (counterexample_family(3, 3, PaddingSchedule("zero")), 8)):
            for v in explore_ball(rule, radius).keys:
                fs = vertex_faces(rule, v, 256)
                assert vertex_ramification(fs) + polygon_excess(fs, rule.q) == 2
                checked += 1
        assert checked > 1000


def test_criterion_3_reference_trichotomy():
    with criterion(3, "exp V = 2 PARABOLIC, modular V = 3 HYPERBOLIC, psi = 1", 10):
        r = wreath_exhaust(exp_rule(), depth=50)
        assert r.V_seq == [2] * 50 and all(type(v) is Fraction for v in r.V_seq)
        assert classify_regular(r.V_seq[-1], r.vertex_values).value is Verdict.PARABOLIC

        rule = modular_rule()
        r = wreath_exhaust(rule, depth=50)
        assert r.V_seq == [3] * 50
        assert classify_regular(r.V_seq[-1], r.vertex_values).value is Verdict.HYPERBOLIC
        assert check_conditions(rule, 10_000, cap=256, radius=6).holds
        prof = chain_profile(rule, 8)
        assert prof.psi == [1] * 8
        assert prof.partial_sums[-1] <= Fraction(math.pi ** 2 / 6)
        v = teichmueller_verdict(prof, 8)
        assert v.value is Verdict.HYPERBOLIC
        assert v.evidence["series_bound"] == pytest.approx(math.pi ** 2 / 6, rel=1e-15)


def test_criterion_4_conjecture_refuted():
    with criterion(4, "counterexample V -> 2 yet series HYPERBOLIC: REFUTES", 60):
        rule = counterexample_family(3, 1)
        r = wreath_exhaust(rule, depth=200)
        assert all(abs(v - 2) < Fraction(1, 100) for v in r.V_seq[-50:])
        est = limit_estimate(r, 50, Fraction(1, 100))
        assert check_conditions(rule, 10_000, cap=256, radius=150).holds
        prof = chain_profile(rule, 6)
        v = teichmueller_verdict(prof, 6, rule.declared_psi)
        assert v.value is Verdict.HYPERBOLIC
        a = nevanlinna_conjecture_eval(est, v)
        assert a.outcome is Assessment.REFUTES


def test_criterion_5_oracle_concordance():
    with criterion(5, "oracle agrees on exp, modular, counterexample", 120):
        cases = [(exp_rule(), Verdict.PARABOLIC, 2),
                 (modular_rule(), Verdict.HYPERBOLIC, 3),
                 (counterexample_family(3, 1), Verdict.HYPERBOLIC, None)]
        for rule, expected, V in cases:
            if V is not None:
                assert classify_regular(V).value is expected
            walk = simulate_walk(rule, trials=10_000, horizon=10_000, seed=SEED)
            curve, ov = adaptive_oracle(rule)
            assert ov.value is expected and ov.proxy
            assert curve.is_monotone()
            print(f"  {rule.name}: return {walk.return_fraction:.4f} +- {walk.stderr:.4f}, "
                  f"R({curve.depths[-1]}) = {curve.resistance[-1]:.4g}, rho = {ov.evidence['rho']:.3f}")
            if rule.name == "exp":
                assert walk.fraction_by(1000) < walk.return_fraction
                assert curve.at(curve.depths[-1]) == pytest.approx(curve.depths[-1] / 2)
            if rule.name == "modular":
                assert abs(walk.return_fraction - 0.5) < 4 * walk.stderr
                assert curve.resistance[-1] < 2 / 3


def test_criterion_6_dilatation():
    with criterion(6, "D formula, invariance, plane vs disc moduli", 1):
        D = lambda m: dilatation_quotient(JacobianSample.from_matrix(m))
        assert D(np.eye(2)) == 1.0
        m = np.diag([2.0, 1.0])
        s = np.linalg.svd(m, compute_uv=False)
        assert D(m) == pytest.approx(s[0] / s[1], rel=1e-15) and D(m) == pytest.approx(2.0)
        rng = np.random.default_rng(SEED)
        for _ in range(200):
            a = rng.normal(size=(2, 2))
            if np.linalg.det(a) <= 0:
                a[0] *= -1
            t = rng.uniform(0, 2 * math.pi)
            rot = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
            lam = math.exp(rng.uniform(-3, 3))
            base = D(a)
            assert abs(D(lam * a) - base) <= 1e-12 * base
            assert abs(D(rot @ a) - base) <= 1e-12 * base
            assert abs(D(a @ rot) - base) <= 1e-12 * base
        for bound in (0.0, 1.0, 10.0):
            demo = plane_vs_disc_demo(2.0, disc_bound=bound, rows=3)
            assert len(demo.rows) == 3
            for row in demo.rows:
                assert row.modulus == pytest.approx(2.0 * (bound + row.k), rel=1e-12)
                assert row.exceeds


def test_criterion_7_branch_vertex_counts():
    with criterion(7, "|B_k| = q(q-1)^(k-1) for k <= 8 when conditions pass", 10):
        rules = [(modular_rule(), 6), (tree_rule(4), 4), (counterexample_family(3, 1), 150),
                 (counterexample_family(3, 3, PaddingSchedule("zero")), 20)]
        for rule, radius in rules:
            assert check_conditions(rule, 10_000, cap=256, radius=radius).holds
            q = rule.q
            prof = chain_profile(rule, 8)
            assert prof.b_counts[1:] == [q * (q - 1) ** (k - 1) for k in range(1, 9)]


def test_criterion_8_round_trip_and_determinism(tmp_path):
    with criterion(8, "export/import on 50 complexes, byte-identical classify", 10):
        for i, d in enumerate(transitive_data(np.random.default_rng(SEED + 2), 50)):
            c = build_from_monodromy(d)
            p = tmp_path / f"c{i}.yaml"
            p.write_text(dump_doc(table_doc(c)))
            rule = load_spec(p).rule
            assert complex_stats(complex_from_rule(rule)) == complex_stats(c)
        for name in ("exp.yaml", "cubic.yaml"):
            outs = []
            for k in range(2):
                out = tmp_path / f"{name}.{k}.txt"
                assert cli.main(["classify", str(SPECS / name), "--seed", "7",
                                 "--out", str(out)]) == 0
                outs.append(out.read_bytes())
            assert outs[0] == outs[1]
