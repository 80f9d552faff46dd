import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from linecomplex.dilatation import (AnnulusSpec, DegenerateJacobian, JacobianSample,
                                    annulus_modulus, dilatation_K, dilatation_quotient,
                                    grid_dilatation, plane_vs_disc_demo)

finite = st.floats(-5, 5, allow_nan=False)


def J(m):
    return JacobianSample.from_matrix(m)


def svd_ratio(m):
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    return s[0] / s[1]


def rot(t):
    return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])


def test_identity_and_rotation_are_conformal():
    assert dilatation_quotient(J(np.eye(2))) == 1.0
    assert dilatation_K(J(np.eye(2))) == 1.0
    assert dilatation_quotient(J(rot(0.7))) == pytest.approx(1.0, abs=1e-15)


def test_stretch():
    m = np.diag([2.0, 1.0])
    assert dilatation_K(J(m)) == pytest.approx(5 / 4)
    assert dilatation_quotient(J(m)) == pytest.approx(2.0)


@given(finite, finite, finite, finite)
def test_matches_singular_values(a, b, c, d):
    m = np.array([[a, b], [c, d]])
    det = a * d - b * c
    if det <= 1e-3:
        return
    D = dilatation_quotient(J(m))
    assert D == pytest.approx(svd_ratio(m), rel=1e-8)
    K = dilatation_K(J(m))
    assert D == pytest.approx(K + math.sqrt(max(K * K - 1, 0)), rel=1e-6)
    assert D >= 1.0


@given(st.floats(0.1, 2), st.floats(1, 4), st.floats(0, 2 * math.pi),
       st.floats(1e-3, 1e3), st.floats(0, 2 * math.pi))
def test_scale_and_rotation_invariant(a, stretch, t1, lam, t2):
    m = rot(t1) @ np.diag([a * stretch, a]) @ rot(-t1)
    base = dilatation_quotient(J(m))
    moved = dilatation_quotient(J(lam * rot(t2) @ m @ rot(t2 + 0.3)))
    assert moved == pytest.approx(base, rel=1e-12)


def test_orientation_reversing_rejected():
    with pytest.raises(DegenerateJacobian):
        dilatation_quotient(J(np.diag([1.0, -1.0])))
    with pytest.raises(DegenerateJacobian):
        dilatation_K(J(np.zeros((2, 2))))


def _grid(jac, xs, ys):
    return [[J(jac(x, y)) for x in xs] for y in ys]


def test_holomorphic_grid_is_conformal():
    # z^2 has derivative 2z
    def jac(x, y):
        return np.array([[2 * x, -2 * y], [2 * y, 2 * x]])
    field = grid_dilatation(_grid(jac, np.linspace(0.1, 2, 9), np.linspace(0.1, 2, 7)))
    assert np.allclose(field.field, 1.0, atol=1e-12)
    assert field.field.shape == (7, 9)


def test_affine_grid_uses_svd():
    m = np.array([[3.0, 1.0], [0.5, 2.0]])
    arr = np.broadcast_to(m, (4, 5, 2, 2)).copy()
    field = grid_dilatation(arr)
    assert field.max_D == pytest.approx(svd_ratio(m), rel=1e-12)


def test_radial_squaring_symbolic():
    x, y = sympy.symbols("x y", real=True)
    r = sympy.sqrt(x ** 2 + y ** 2)
    u, v = x * r, y * r
    jac = sympy.lambdify((x, y), sympy.Matrix([[u.diff(x), u.diff(y)], [v.diff(x), v.diff(y)]]))
    field = grid_dilatation(_grid(lambda a, b: np.array(jac(a, b), dtype=float),
                                  np.linspace(0.2, 1.5, 6), np.linspace(-1, 1, 5)))
    # radial stretch 2r against angular stretch r
    assert np.allclose(field.field, 2.0, rtol=1e-12)
    assert field.max_D == pytest.approx(2.0)


def test_degenerate_cell_location():
    cells = [[J(np.eye(2)), J(np.eye(2))], [J(np.eye(2)), J(np.diag([1.0, 0.0]))]]
    with pytest.raises(DegenerateJacobian) as info:
        grid_dilatation(cells)
    assert info.value.where == (1, 1)


def test_argmax_reported():
    cells = [[J(np.eye(2)), J(np.diag([3.0, 1.0]))], [J(np.diag([2.0, 1.0])), J(np.eye(2))]]
    field = grid_dilatation(cells)
    assert field.argmax == (0, 1) and field.max_D == pytest.approx(3.0)


def test_bad_grid_shape():
    with pytest.raises(ValueError):
        grid_dilatation(np.eye(2))


# annuli


def test_annulus_modulus_examples():
    assert annulus_modulus(AnnulusSpec(1, math.exp(2 * math.pi))) == pytest.approx(1.0)
    a = annulus_modulus(AnnulusSpec(1, 3))
    assert annulus_modulus(AnnulusSpec(1, 6)) - a == pytest.approx(math.log(2) / (2 * math.pi))
    assert annulus_modulus(AnnulusSpec(1, 1 + 1e-9)) < 1e-9


@pytest.mark.parametrize("r1,r2", [(1, 1), (2, 1), (0, 1), (-1, 2)])
def test_annulus_rejects_bad_radii(r1, r2):
    with pytest.raises(ValueError):
        AnnulusSpec(r1, r2)


@pytest.mark.parametrize("K", [1.0, 10.0])
def test_demo_rows_exceed_bound(K):
    demo = plane_vs_disc_demo(K, r1=1.0, disc_bound=0.5, rows=3)
    for row in demo.rows:
        assert row.modulus == pytest.approx(K * (0.5 + row.k))
        assert row.exceeds and row.modulus > K * demo.disc_bound
    assert [row.k for row in demo.rows] == [1, 2, 3]


def test_demo_rejects_small_K():
    with pytest.raises(ValueError):
        plane_vs_disc_demo(0.5)
