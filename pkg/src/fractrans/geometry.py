"""Planar maps used as the members of an IFS.

Three families are supported: affine, projective and bilinear. Every map
works on scalars or on numpy arrays of coordinates, in both directions.
The vectorised ``forward``/``inverse`` methods are what the raster code
uses; :func:`apply` and :func:`invert` are the point-wise front ends.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import DegenerateDenominator, NotInvertibleHere
from .tolerances import TOL

KIND_AFFINE = 0
KIND_PROJECTIVE = 1
KIND_BILINEAR = 2


class Point2(NamedTuple):
    x: float
    y: float


def _as_arrays(x, y):
    return np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)


@dataclass(frozen=True)
class AffineMap2:
    """(x, y) -> (a x + b y + e, c x + d y + f)."""

    a: float
    b: float
    c: float
    d: float
    e: float = 0.0
    f: float = 0.0

    def __post_init__(self):
        if self.det == 0.0:
            raise ValueError("affine map is singular (a*d - b*c == 0)")

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def forward(self, x, y, strict: bool = True):
        x, y = _as_arrays(x, y)
        return self.a * x + self.b * y + self.e, self.c * x + self.d * y + self.f

    def inverse(self, x, y, strict: bool = True):
        x, y = _as_arrays(x, y)
        u = x - self.e
        v = y - self.f
        det = self.det
        return (self.d * u - self.b * v) / det, (self.a * v - self.c * u) / det

    def packed(self) -> tuple[int, np.ndarray]:
        return KIND_AFFINE, np.array(
            [self.a, self.b, self.c, self.d, self.e, self.f, 0.0, 0.0, 0.0]
        )


@dataclass(frozen=True)
class ProjectiveMap2:
    """(x, y) -> ((a x + b y + c) / w, (d x + e y + k) / w), w = g x + h y + j.

    Coefficients are kept exactly as given; no normalisation is applied.
    """

    a: float
    b: float
    c: float
    d: float
    e: float
    k: float
    g: float
    h: float
    j: float

    def __post_init__(self):
        if np.linalg.det(self.matrix) == 0.0:
            raise ValueError("projective map has a singular coefficient matrix")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.a, self.b, self.c], [self.d, self.e, self.k], [self.g, self.h, self.j]]
        )

    @staticmethod
    def _homogeneous(m, x, y, strict):
        w = m[2, 0] * x + m[2, 1] * y + m[2, 2]
        bad = np.abs(w) <= TOL.denominator
        if np.any(bad):
            if strict:
                raise DegenerateDenominator(
                    f"projective denominator vanishes (|w| <= {TOL.denominator})"
                )
            w = np.where(bad, np.nan, w)
        return (m[0, 0] * x + m[0, 1] * y + m[0, 2]) / w, (
            m[1, 0] * x + m[1, 1] * y + m[1, 2]
        ) / w

    def forward(self, x, y, strict: bool = True):
        x, y = _as_arrays(x, y)
        return self._homogeneous(self.matrix, x, y, strict)

    def inverse(self, x, y, strict: bool = True):
        x, y = _as_arrays(x, y)
        return self._homogeneous(np.linalg.inv(self.matrix), x, y, strict)

    def packed(self) -> tuple[int, np.ndarray]:
        return KIND_PROJECTIVE, np.array(
            [self.a, self.b, self.c, self.d, self.e, self.k, self.g, self.h, self.j]
        )


@dataclass(frozen=True)
class BilinearMap2:
    """The bilinear map sending the unit square corners (0,0), (1,0), (1,1),
    (0,1) to ``P``, ``Q``, ``R``, ``S``:

        B(x, y) = P + x (Q - P) + y (S - P) + x y (R + P - Q - S)
    """

    P: Point2
    Q: Point2
    R: Point2
    S: Point2

    def __post_init__(self):
        for name in "PQRS":
            object.__setattr__(self, name, Point2(*map(float, getattr(self, name))))
        corners = [self.P, self.Q, self.R, self.S]
        for i in range(4):
            a, b, c = corners[i], corners[(i + 1) % 4], corners[(i + 2) % 4]
            if (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) == 0.0:
                raise ValueError("bilinear quadrilateral has three collinear corners")

    def _frame(self):
        P, Q, R, S = self.P, self.Q, self.R, self.S
        e = (Q.x - P.x, Q.y - P.y)
        f = (S.x - P.x, S.y - P.y)
        g = (R.x + P.x - Q.x - S.x, R.y + P.y - Q.y - S.y)
        return e, f, g

    def forward(self, x, y, strict: bool = True):
        x, y = _as_arrays(x, y)
        e, f, g = self._frame()
        xy = x * y
        return (
            self.P.x + x * e[0] + y * f[0] + xy * g[0],
            self.P.y + x * e[1] + y * f[1] + xy * g[1],
        )

    def inverse(self, x, y, strict: bool = True):
        """Solve B(u, v) = (x, y) for (u, v) in the (slightly expanded) unit square.

        Eliminating u leaves k2 v^2 + k1 v + k0 = 0, solved in the
        cancellation-free form. Points with no admissible root come back as
        NaN, or raise :class:`NotInvertibleHere` when ``strict``.
        """
        x, y = _as_arrays(x, y)
        e, f, g = self._frame()
        hx = x - self.P.x
        hy = y - self.P.y

        def cross(ax, ay, bx, by):
            return ax * by - ay * bx

        k2 = cross(g[0], g[1], f[0], f[1])
        k1 = cross(e[0], e[1], f[0], f[1]) + cross(hx, hy, g[0], g[1])
        k0 = cross(hx, hy, e[0], e[1])

        with np.errstate(divide="ignore", invalid="ignore"):
            disc = k1 * k1 - 4.0 * k2 * k0
            scale = k1 * k1 + np.abs(4.0 * k2 * k0)
            disc = np.where((disc < 0) & (disc > -1e-14 * scale), 0.0, disc)
            root = np.sqrt(disc)  # NaN where disc < 0: no real preimage
            q = -0.5 * (k1 + np.where(k1 >= 0, root, -root))
            v1 = q / k2 if k2 != 0.0 else np.full_like(q, np.inf)
            v2 = k0 / q
            v2 = np.where(q == 0.0, v1, v2)

            def u_of(v):
                dx = e[0] + v * g[0]
                dy = e[1] + v * g[1]
                use_x = np.abs(dx) >= np.abs(dy)
                return np.where(use_x, (hx - v * f[0]) / dx, (hy - v * f[1]) / dy)

            u1 = u_of(v1)
            u2 = u_of(v2)

        lo, hi = -TOL.unit_square, 1.0 + TOL.unit_square

        def admissible(u, v):
            return (u >= lo) & (u <= hi) & (v >= lo) & (v <= hi)

        ok1 = admissible(u1, v1)
        ok2 = admissible(u2, v2)

        def residual(u, v):
            with np.errstate(invalid="ignore", over="ignore"):
                fx, fy = self.forward(u, v)
                return np.hypot(fx - x, fy - y)

        prefer2 = ok2 & (~ok1 | (residual(u2, v2) < residual(u1, v1)))
        u = np.where(prefer2, u2, np.where(ok1, u1, np.nan))
        v = np.where(prefer2, v2, np.where(ok1, v1, np.nan))
        if strict and np.any(np.isnan(u)):
            raise NotInvertibleHere("point has no bilinear preimage in the unit square")
        return u, v

    def packed(self) -> tuple[int, np.ndarray]:
        return KIND_BILINEAR, np.array(
            [self.P.x, self.P.y, self.Q.x, self.Q.y, self.R.x, self.R.y, self.S.x, self.S.y, 0.0]
        )


MapVariant = Union[AffineMap2, ProjectiveMap2, BilinearMap2]


def apply(m: MapVariant, p) -> Point2:
    x, y = m.forward(p[0], p[1])
    return Point2(float(x), float(y))


def invert(m: MapVariant, p) -> Point2:
    x, y = m.inverse(p[0], p[1])
    return Point2(float(x), float(y))


def compose(outer: AffineMap2, inner: AffineMap2) -> AffineMap2:
    """The affine map ``outer o inner``."""
    return AffineMap2(
        a=outer.a * inner.a + outer.b * inner.c,
        b=outer.a * inner.b + outer.b * inner.d,
        c=outer.c * inner.a + outer.d * inner.c,
        d=outer.c * inner.b + outer.d * inner.d,
        e=outer.a * inner.e + outer.b * inner.f + outer.e,
        f=outer.c * inner.e + outer.d * inner.f + outer.f,
    )


def image_area(m: MapVariant, rect=(0.0, 1.0, 0.0, 1.0)) -> float:
    """Area of the image of an axis-aligned rectangle.

    Exact for all three families: each sends a rectangle to a quadrilateral
    with straight edges (assuming no pole inside the rectangle).
    """
    x0, x1, y0, y1 = rect
    xs, ys = m.forward(np.array([x0, x1, x1, x0]), np.array([y0, y0, y1, y1]))
    return 0.5 * abs(float(np.dot(xs, np.roll(ys, -1)) - np.dot(ys, np.roll(xs, -1))))


def quad_from_rect(m: MapVariant, rect=(0.0, 1.0, 0.0, 1.0)) -> BilinearMap2:
    """A bilinear map whose image quadrilateral is ``m`` applied to ``rect``."""
    x0, x1, y0, y1 = rect
    xs, ys = m.forward(np.array([x0, x1, x1, x0]), np.array([y0, y0, y1, y1]))
    return BilinearMap2(*(Point2(float(a), float(b)) for a, b in zip(xs, ys)))
