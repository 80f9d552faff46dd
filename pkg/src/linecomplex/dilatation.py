"""Dilatation quotients of planar maps and moduli of round annuli."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DegenerateJacobian(ValueError):
    def __init__(self, det: float, where=None):
        self.det = det
        self.where = where
        loc = f" at {where}" if where is not None else ""
        super().__init__(f"Jacobian determinant {det:.6g} <= 0{loc}")


@dataclass(frozen=True)
class JacobianSample:
    """Partial derivatives of ``x + iy -> u + iv`` at one point."""

    u_x: float
    u_y: float
    v_x: float
    v_y: float

    @property
    def det(self) -> float:
        return self.u_x * self.v_y - self.v_x * self.u_y

    def matrix(self) -> np.ndarray:
        return np.array([[self.u_x, self.u_y], [self.v_x, self.v_y]], dtype=float)

    @classmethod
    def from_matrix(cls, m) -> "JacobianSample":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])


def dilatation_K(J: JacobianSample) -> float:
    """``(u_x^2 + u_y^2 + v_x^2 + v_y^2) / (2 det)``."""
    det = J.det
    if det <= 0:
        raise DegenerateJacobian(det)
    return 0.5 * (J.u_x ** 2 + J.u_y ** 2 + J.v_x ** 2 + J.v_y ** 2) / det


def dilatation_quotient(J: JacobianSample) -> float:
    """Axis ratio of the image ellipse of a small circle.

    Equal to ``K + sqrt(K^2 - 1)`` with ``K`` from :func:`dilatation_K`,
    but evaluated through the complex derivatives
    ``(|f_z| + |f_zbar|) / (|f_z| - |f_zbar|)``, which keeps full precision
    when the map is nearly conformal.
    """
    det = J.det
    if det <= 0:
        raise DegenerateJacobian(det)
    fz = 0.5 * math.hypot(J.u_x + J.v_y, J.v_x - J.u_y)
    fzb = 0.5 * math.hypot(J.u_x - J.v_y, J.v_x + J.u_y)
    return (fz + fzb) / (fz - fzb)


@dataclass
class DilatationField:
    field: np.ndarray
    max_D: float
    argmax: tuple


def grid_dilatation(samples) -> DilatationField:
    """``samples`` is a 2-D grid of :class:`JacobianSample` or an array ``(..., 2, 2)``."""
    if isinstance(samples, np.ndarray) and samples.dtype != object:
        arr = samples
        if arr.ndim != 4 or arr.shape[-2:] != (2, 2):
            raise ValueError("expected an (rows, cols, 2, 2) array of Jacobians")
        cells = [[JacobianSample.from_matrix(m) for m in row] for row in arr]
        shape = arr.shape[:2]
    else:
        cells = [list(row) for row in samples]
        shape = (len(cells), len(cells[0]) if cells else 0)
    if not cells or not cells[0]:
        raise ValueError("empty grid")
    out = np.empty(int(np.prod(shape)))
    flat = [J for row in cells for J in row]
    for k, J in enumerate(flat):
        try:
            out[k] = dilatation_quotient(J)
        except DegenerateJacobian as exc:
            raise DegenerateJacobian(exc.det, np.unravel_index(k, shape)) from None
    out = out.reshape(shape)
    k = int(np.argmax(out))
    return DilatationField(out, float(out.flat[k]), tuple(int(i) for i in np.unravel_index(k, shape)))


@dataclass(frozen=True)
class AnnulusSpec:
    r1: float
    r2: float

    def __post_init__(self):
        if not 0 < self.r1 < self.r2:
            raise ValueError(f"annulus needs 0 < r1 < r2, got r1={self.r1}, r2={self.r2}")


def annulus_modulus(a: AnnulusSpec) -> float:
    return math.log(a.r2 / a.r1) / (2 * math.pi)


@dataclass(frozen=True)
class DemoRow:
    k: int
    r2: float
    modulus: float
    bound: float

    @property
    def exceeds(self) -> bool:
        return self.modulus > self.bound


@dataclass(frozen=True)
class Demonstration:
    K: float
    r1: float
    disc_bound: float
    rows: tuple


def plane_vs_disc_demo(K: float, r1: float = 1.0, disc_bound: float = 0.0,
                       rows: int = 3) -> Demonstration:
    """Annuli around the origin of the plane whose moduli outgrow ``K * disc_bound``.

    Row ``k`` takes ``r2 = r1 * exp(2 pi K (disc_bound + k))``, whose modulus is
    ``K (disc_bound + k)``.  A ``K``-quasiconformal map of the plane onto the
    disc would shrink moduli by at most ``K``, while the image annuli, all
    separating two fixed points in the disc, have modulus at most
    ``disc_bound``.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    if rows < 1:
        raise ValueError("need at least one row")
    out = []
    for k in range(1, rows + 1):
        r2 = r1 * math.exp(2 * math.pi * K * (disc_bound + k))
        m = annulus_modulus(AnnulusSpec(r1, r2))
        out.append(DemoRow(k, r2, m, K * disc_bound))
    return Demonstration(K, r1, disc_bound, tuple(out))
