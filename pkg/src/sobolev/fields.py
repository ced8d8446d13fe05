"""Smooth scalar fields on R^n with analytic partial derivatives.

Quadrature routines accept any object with the small interface below.
Plain expressions cover globally smooth data; piecewise fields cover
compactly supported data (mollifier bumps, zero extensions, pulled-back
partition-of-unity factors) whose pieces are expressions glued along
seams where all derivatives agree, so differentiation may act piece by
piece.  Composite fields (products, sums, scalar multiples) differentiate
lazily by the product rule instead of flattening.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from sobolev.funcexpr import (
    Call, Const, Expr, Var, add, diff_expr, div, eval_on_points, neg,
    pow_, sub,
)

__all__ = [
    "Field", "ExprField", "PiecewiseField", "ProductField", "SumField",
    "ScaledField", "BoxRegion", "AnnulusRegion", "as_field", "product",
    "smoothstep_expr", "interval_bump", "box_bump", "radial_bump",
]


class Field:
    """A scalar field: vectorized evaluation plus analytic partials."""

    n: int

    def values(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def partial(self, axis: int) -> "Field":
        """Partial derivative along x<axis> (1-based)."""
        raise NotImplementedError


class ExprField(Field):
    def __init__(self, expr: Expr, n: int):
        self.expr = expr
        self.n = n

    def values(self, pts):
        return eval_on_points(self.expr, pts)

    def partial(self, axis):
        return ExprField(diff_expr(self.expr, axis), self.n)

    def __repr__(self):
        return f"ExprField({self.expr!r})"


class BoxRegion:
    """Axis-aligned box; per-axis bounds may be inclusive or exclusive.

    Bounds of None mean unbounded on that side.
    """

    def __init__(self, lo, hi, lo_closed=True, hi_closed=True):
        self.lo = tuple(lo)
        self.hi = tuple(hi)
        k = len(self.lo)
        self.lo_closed = tuple(lo_closed if isinstance(lo_closed, (list, tuple))
                               else [lo_closed] * k)
        self.hi_closed = tuple(hi_closed if isinstance(hi_closed, (list, tuple))
                               else [hi_closed] * k)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        mask = np.ones(pts.shape[0], dtype=bool)
        for ax, (lo, hi, lc, hc) in enumerate(
                zip(self.lo, self.hi, self.lo_closed, self.hi_closed)):
            x = pts[:, ax]
            if lo is not None:
                mask &= (x >= lo) if lc else (x > lo)
            if hi is not None:
                mask &= (x <= hi) if hc else (x < hi)
        return mask


class AnnulusRegion:
    """Radial shell rlo <(=) |x| <(=) rhi about the origin."""

    def __init__(self, rlo, rhi, lo_closed=True, hi_closed=True):
        self.rlo = rlo
        self.rhi = rhi
        self.lo_closed = lo_closed
        self.hi_closed = hi_closed

    def contains(self, pts: np.ndarray) -> np.ndarray:
        r = np.sqrt(np.sum(pts * pts, axis=1))
        mask = np.ones(pts.shape[0], dtype=bool)
        if self.rlo is not None:
            mask &= (r >= self.rlo) if self.lo_closed else (r > self.rlo)
        if self.rhi is not None:
            mask &= (r <= self.rhi) if self.hi_closed else (r < self.rhi)
        return mask


class PiecewiseField(Field):
    """First-match piecewise expression field with a constant-free default.

    Pieces are (region, expr); points not claimed by any region evaluate
    the default expression.  Valid for differentiation only when the glued
    function is smooth across seams (all our constructions glue along
    flat junctions of mollifier type).
    """

    def __init__(self, pieces, default: Expr, n: int):
        self.pieces = list(pieces)
        self.default = default
        self.n = n

    def values(self, pts):
        pts = np.asarray(pts, dtype=float)
        out = np.empty(pts.shape[0])
        remaining = np.ones(pts.shape[0], dtype=bool)
        for region, expr in self.pieces:
            mask = region.contains(pts) & remaining
            if mask.any():
                out[mask] = eval_on_points(expr, pts[mask])
            remaining &= ~mask
        if remaining.any():
            out[remaining] = eval_on_points(self.default, pts[remaining])
        return out

    def partial(self, axis):
        return PiecewiseField(
            [(region, diff_expr(expr, axis)) for region, expr in self.pieces],
            diff_expr(self.default, axis), self.n)


class ProductField(Field):
    def __init__(self, a: Field, b: Field):
        if a.n != b.n:
            raise ValueError("field dimension mismatch")
        self.a = a
        self.b = b
        self.n = a.n

    def values(self, pts):
        return self.a.values(pts) * self.b.values(pts)

    def partial(self, axis):
        return SumField(ProductField(self.a.partial(axis), self.b),
                        ProductField(self.a, self.b.partial(axis)))


class SumField(Field):
    def __init__(self, a: Field, b: Field):
        if a.n != b.n:
            raise ValueError("field dimension mismatch")
        self.a = a
        self.b = b
        self.n = a.n

    def values(self, pts):
        return self.a.values(pts) + self.b.values(pts)

    def partial(self, axis):
        return SumField(self.a.partial(axis), self.b.partial(axis))


class ScaledField(Field):
    def __init__(self, factor: float, f: Field):
        self.factor = float(factor)
        self.f = f
        self.n = f.n

    def values(self, pts):
        return self.factor * self.f.values(pts)

    def partial(self, axis):
        return ScaledField(self.factor, self.f.partial(axis))


def zero_field(n: int) -> ExprField:
    return ExprField(Const(Fraction(0)), n)


def as_field(u, n: int) -> Field:
    """Coerce an Expr or Field to a Field of dimension n."""
    if isinstance(u, Expr):
        return ExprField(u, n)
    if isinstance(u, Field):
        if u.n != n:
            raise ValueError(f"field has dimension {u.n}, expected {n}")
        return u
    raise TypeError(f"cannot interpret {type(u).__name__} as a scalar field")


def product(*fields: Field) -> Field:
    out = fields[0]
    for f in fields[1:]:
        out = ProductField(out, f)
    return out


# ---------------------------------------------------------------------------
# Mollifier bumps: exp(-1/t)-type profiles rescaled to hold the value 1 on
# an inner plateau, smoothly decaying to 0 at the support edge.
# ---------------------------------------------------------------------------

_ONE = Const(Fraction(1))

# Seam margin for piecewise bump regions.  Within this distance of the
# plateau/support edges the profile equals 1.0/0.0 to double precision
# (the mollifier underflows), so the constant pieces may safely absorb a
# band this wide; it keeps the band expression strictly away from the
# removable singularities of the smoothstep at 0 and 1.
_SEAM = 1e-9


def smoothstep_expr(arg: Expr) -> Expr:
    """exp(-1/t) / (exp(-1/t) + exp(-1/(1-t))) — valid for arg in (0, 1).

    Equals 0 and 1 in the limits t -> 0+ and t -> 1- with all derivatives
    vanishing; the numeric evaluation underflows gracefully near both
    ends (the denominator stays >= e^-2).
    """
    f_lo = Call("exp", neg(div(_ONE, arg)))
    f_hi = Call("exp", neg(div(_ONE, sub(_ONE, arg))))
    return div(f_lo, add(f_lo, f_hi))


def _band_expr(distance: Expr, plateau: float, support: float) -> Expr:
    # smoothstep of (support - distance)/(support - plateau)
    tau = div(sub(Const(Fraction(support)), distance),
              Const(Fraction(support) - Fraction(plateau)))
    return smoothstep_expr(tau)


def interval_bump(n: int, axis: int, center, plateau, support) -> PiecewiseField:
    """1-variable bump in x<axis>: 1 on [c-a, c+a], 0 outside (c-b, c+b)."""
    center = Fraction(center)
    a = Fraction(plateau)
    b = Fraction(support)
    if not 0 < a < b:
        raise ValueError("need 0 < plateau < support")
    dist = Call("abs", sub(Var(axis), Const(center)))
    lo = [None] * n
    hi = [None] * n
    plat_lo, plat_hi = list(lo), list(hi)
    plat_lo[axis - 1] = float(center - a) - _SEAM
    plat_hi[axis - 1] = float(center + a) + _SEAM
    band_lo, band_hi = list(lo), list(hi)
    band_lo[axis - 1] = float(center - b) + _SEAM
    band_hi[axis - 1] = float(center + b) - _SEAM
    return PiecewiseField(
        [(BoxRegion(plat_lo, plat_hi), _ONE),
         (BoxRegion(band_lo, band_hi, lo_closed=False, hi_closed=False),
          _band_expr(dist, float(a), float(b)))],
        Const(Fraction(0)), n)


def box_bump(n: int, center, plateau, support) -> Field:
    """Tensor-product bump: 1 on the plateau box, 0 outside the support box."""
    center = [Fraction(c) for c in center]
    plateau = [Fraction(plateau)] * n if not isinstance(plateau, (list, tuple)) \
        else [Fraction(a) for a in plateau]
    support = [Fraction(support)] * n if not isinstance(support, (list, tuple)) \
        else [Fraction(b) for b in support]
    factors = [interval_bump(n, ax + 1, center[ax], plateau[ax], support[ax])
               for ax in range(n)]
    return product(*factors)


def _radius_expr(n: int) -> Expr:
    r2 = pow_(Var(1), Fraction(2))
    for ax in range(2, n + 1):
        r2 = add(r2, pow_(Var(ax), Fraction(2)))
    return Call("sqrt", r2)


def radial_bump(n: int, plateau, support) -> PiecewiseField:
    """Radial bump about the origin: 1 for |x| <= plateau, 0 for |x| >= support."""
    a = float(plateau)
    b = float(support)
    if not 0 < a < b:
        raise ValueError("need 0 < plateau < support")
    return PiecewiseField(
        [(AnnulusRegion(None, a + _SEAM), _ONE),
         (AnnulusRegion(a + _SEAM, b - _SEAM, lo_closed=False,
                        hi_closed=False),
          _band_expr(_radius_expr(n), a, b))],
        Const(Fraction(0)), n)
