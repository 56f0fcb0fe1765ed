"""Core 1D representations: grids, cell-average densities, piecewise-linear CDFs
and pseudo-inverse quantile curves, with closed-form conversions among them.

Conventions
-----------
* A density is piecewise constant (pwc): one average value per grid cell.
* Its CDF is the piecewise-linear interpolant of the running cell sums at the
  cell edges.
* The pseudo-inverse of a CDF is stored as a monotone polyline in (y, x) with
  y normalized to [0, 1].  Intervals where the CDF is flat (density vanishes)
  appear as *jump pairs*: two consecutive nodes sharing the same y with
  x_lo < x_hi.  Plateaus touching the domain boundary become jumps at y = 0
  and y = 1, which makes the curve total on [0, 1] and the reflection exact.
* Linear combinations of curves are evaluated on the exact union of the input
  y-breakpoints using left/right limits, so jump information is never lost.
  Node counts grow with the number of operations; use :func:`resample` when a
  fixed grid is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DomainMismatch,
    NegativeValue,
    PointMass,
    WeightSum,
    ZeroMass,
)

# Absolute clamp for negative roundoff noise entering cdf().
NEGATIVE_NOISE_CLIP = 1e-12
# Relative factor for the zero-mass test: mass <= factor * length * max|value|.
ZERO_MASS_FACTOR = 1e-12
# Two x-nodes closer than this while the CDF increases encode an atom.
COINCIDENT_NODE_TOL = 1e-14


def _as_readonly(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Strictly increasing cell edges; J >= 1 cells."""

    edges: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "edges", _as_readonly(self.edges))
        if self.edges.ndim != 1 or self.edges.size < 2:
            raise ValueError("grid needs at least two edges")
        if not np.all(np.isfinite(self.edges)):
            raise ValueError("grid edges must be finite")
        if not np.all(np.diff(self.edges) > 0):
            raise ValueError("grid edges must be strictly increasing")

    @classmethod
    def uniform(cls, lo: float, hi: float, ncells: int) -> "Grid1D":
        return cls(np.linspace(float(lo), float(hi), int(ncells) + 1))

    @property
    def ncells(self) -> int:
        return self.edges.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def lo(self) -> float:
        return float(self.edges[0])

    @property
    def hi(self) -> float:
        return float(self.edges[-1])

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def uniform_flag(self) -> bool:
        w = self.widths
        return bool(np.all(np.abs(w - w[0]) <= 1e-12 * max(abs(w[0]), 1.0)))

    def same_edges(self, other: "Grid1D", tol: float = 0.0) -> bool:
        if self.edges.size != other.edges.size:
            return False
        if tol == 0.0:
            return bool(np.array_equal(self.edges, other.edges))
        return bool(np.all(np.abs(self.edges - other.edges) <= tol))


@dataclass(frozen=True, eq=False)
class PwcFunction1D:
    """Cell averages of a piecewise-constant function on a grid."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly(self.values))
        if self.values.shape != (self.grid.ncells,):
            raise ValueError("values must have one entry per grid cell")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    def mass(self) -> float:
        return float(np.dot(self.values, self.grid.widths))

    def scaled(self, factor: float) -> "PwcFunction1D":
        return PwcFunction1D(self.grid, self.values * float(factor))

    def support_bounds(self) -> Optional[tuple]:
        """(x_lo, x_hi) of the nonzero cells, or None for the zero function."""
        nz = np.nonzero(self.values)[0]
        if nz.size == 0:
            return None
        return float(self.grid.edges[nz[0]]), float(self.grid.edges[nz[-1] + 1])


@dataclass(frozen=True, eq=False)
class PwlCdf:
    """Piecewise-linear CDF through nodes (x_j, U_j); U_0 = 0, U_last = total mass."""

    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _as_readonly(self.x))
        object.__setattr__(self, "u", _as_readonly(self.u))
        if self.x.ndim != 1 or self.x.shape != self.u.shape or self.x.size < 2:
            raise ValueError("need matching 1D node arrays with >= 2 nodes")
        if not np.all(np.diff(self.x) > 0):
            raise ValueError("CDF x-nodes must be strictly increasing")
        if np.any(np.diff(self.u) < 0):
            raise ValueError("CDF values must be non-decreasing")
        if self.u[0] != 0.0:
            raise ValueError("CDF must start at 0")

    @property
    def total_mass(self) -> float:
        return float(self.u[-1])


@dataclass(frozen=True, eq=False)
class QuantileCurve:
    """Pseudo-inverse of a normalized CDF as a monotone polyline in (y, x).

    Jumps (plateaus of the CDF) are encoded as consecutive nodes sharing the
    same y.  Runs of constant x with increasing y encode atoms of the
    underlying measure; they arise from jump-measure inputs and are rejected
    by :func:`quantile_to_cdf`.

    ``mass_nodes`` optionally retains the unnormalized CDF values that
    produced ``y``, so reflecting back at the same total mass is bit-exact.
    """

    y: np.ndarray
    x: np.ndarray
    mass_nodes: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "y", _as_readonly(self.y))
        object.__setattr__(self, "x", _as_readonly(self.x))
        if self.mass_nodes is not None:
            object.__setattr__(self, "mass_nodes", _as_readonly(self.mass_nodes))
            if self.mass_nodes.shape != self.y.shape:
                raise ValueError("mass_nodes must match node count")
        if self.y.ndim != 1 or self.y.shape != self.x.shape or self.y.size < 2:
            raise ValueError("need matching 1D node arrays with >= 2 nodes")
        if self.y[0] != 0.0 or self.y[-1] != 1.0:
            raise ValueError("quantile curve must span y in [0, 1]")
        if np.any(np.diff(self.y) < 0):
            raise ValueError("y must be non-decreasing")
        if np.any(np.diff(self.x) < 0):
            raise ValueError("x must be non-decreasing (monotone rearrangement)")

    @property
    def total_mass(self) -> Optional[float]:
        return None if self.mass_nodes is None else float(self.mass_nodes[-1])

    def limits_at(self, q) -> tuple:
        """Left and right limits of the curve at query levels ``q`` in [0, 1].

        At a jump level the left limit is the first (lower) x node and the
        right limit the last (upper) one; elsewhere both coincide with the
        linear interpolant, computed by an identical expression so that
        equality is bitwise.
        """
        y, x = self.y, self.x
        q = np.atleast_1d(np.asarray(q, dtype=float))
        lo = np.searchsorted(y, q, side="left")
        hi = np.searchsorted(y, q, side="right") - 1
        hit = lo <= hi

        n = y.size
        seg_l = np.clip(hi, 0, n - 2)
        seg_r = seg_l + 1
        dy = y[seg_r] - y[seg_l]
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(dy > 0, (q - y[seg_l]) / np.where(dy > 0, dy, 1.0), 0.0)
        interp = x[seg_l] + t * (x[seg_r] - x[seg_l])

        left = np.where(hit, x[np.clip(lo, 0, n - 1)], interp)
        right = np.where(hit, x[np.clip(hi, 0, n - 1)], interp)
        return left, right

    def left_limit(self, q) -> np.ndarray:
        return self.limits_at(q)[0]

    def jumps(self) -> list:
        """All jumps as (y, length) pairs, boundary jumps included."""
        eq = self.y[1:] == self.y[:-1]
        idx = np.nonzero(eq & (self.x[1:] > self.x[:-1]))[0]
        return [(float(self.y[i]), float(self.x[i + 1] - self.x[i])) for i in idx]


def cdf(u: PwcFunction1D) -> PwlCdf:
    """CDF of a nonnegative pwc density: running cell sums at the cell edges.

    Values in [-1e-12, 0) are clamped to zero (finite-volume roundoff noise);
    anything more negative raises :class:`NegativeValue`.  Raises
    :class:`ZeroMass` if the total mass is below tolerance.
    """
    v = np.array(u.values, dtype=float)
    if np.any(v < -NEGATIVE_NOISE_CLIP):
        raise NegativeValue(
            f"density has negative values down to {v.min():g}; split signs first"
        )
    np.clip(v, 0.0, None, out=v)
    running = np.concatenate([[0.0], np.cumsum(v * u.grid.widths)])
    scale = float(np.max(v)) if v.size else 0.0
    if running[-1] <= ZERO_MASS_FACTOR * u.grid.length * scale:
        raise ZeroMass(f"density mass {running[-1]:g} is numerically zero")
    return PwlCdf(u.grid.edges, running)


def pseudo_inverse(U: PwlCdf) -> QuantileCurve:
    """Pseudo-inverse of a CDF: reflect nodes across x = y after normalizing.

    Flat runs of the CDF become jump pairs at the corresponding y; interior
    nodes of a flat run are dropped so each plateau is exactly one pair.
    """
    mass = U.total_mass
    y = U.u / mass
    x = np.asarray(U.x, dtype=float)

    eq_prev = np.concatenate([[False], y[1:] == y[:-1]])
    eq_next = np.concatenate([y[:-1] == y[1:], [False]])
    keep = ~(eq_prev & eq_next)
    return QuantileCurve(y[keep], x[keep], mass_nodes=np.asarray(U.u)[keep])


def _check_weights(curves, weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if len(curves) == 0 or w.shape != (len(curves),):
        raise WeightSum("need one weight per curve and at least one curve")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise WeightSum(f"weights must be nonnegative and sum to 1, got {w.tolist()}")
    return w


def _merged_levels(curves) -> np.ndarray:
    ys = np.unique(np.concatenate([c.y for c in curves]))
    # Breakpoints closer than the coincident-node tolerance are one level;
    # without this, mass-normalization roundoff across curves would create
    # spurious sliver segments (and fake atoms) at every nearly-shared level.
    if ys.size > 2:
        keep = np.concatenate([[True], np.diff(ys) > COINCIDENT_NODE_TOL])
        keep[-1] = True  # the exact endpoint y = 1 always survives
        if ys[-1] - ys[-2] <= COINCIDENT_NODE_TOL:
            keep[-2] = False
        ys = ys[keep]
    return ys


def _blended_limits(curves, w, ys) -> tuple:
    left = np.zeros_like(ys)
    right = np.zeros_like(ys)
    per_curve = []
    for wi, c in zip(w, curves):
        if wi == 0.0:
            per_curve.append(None)
            continue
        li, ri = c.limits_at(ys)
        per_curve.append((li, ri))
        left += wi * li
        right += wi * ri
    return left, right, per_curve


def combine(curves: Sequence[QuantileCurve], weights: Sequence[float]) -> QuantileCurve:
    """Pointwise convex combination of quantile curves.

    The node set is the merged union of all input y-breakpoints; left and
    right limits are combined separately so jumps at shared levels merge by
    summing their lengths, and jumps at distinct levels are all preserved.
    """
    w = _check_weights(curves, weights)
    ys = _merged_levels(curves)
    left, right, _ = _blended_limits(curves, w, ys)

    jump = right > left
    take = 1 + jump.astype(int)
    starts = np.cumsum(take) - take
    total = int(take.sum())
    y_out = np.empty(total)
    x_out = np.empty(total)
    y_out[starts] = ys
    x_out[starts] = left
    y_out[starts[jump] + 1] = ys[jump]
    x_out[starts[jump] + 1] = right[jump]
    return QuantileCurve(y_out, x_out)


def blend_density(
    curves: Sequence[QuantileCurve], weights: Sequence[float], target_mass: float
) -> PwcFunction1D:
    """Density of the convex combination of quantile curves, scaled to a mass.

    Equivalent to ``density_from_cdf(quantile_to_cdf(combine(...), mass))``
    but numerically fused: each output cell width is assembled from per-curve
    x-differences (exact for neighboring nodes) instead of differences of the
    summed positions, which keeps steep cell values accurate to a few ulps.
    """
    if not target_mass > 0:
        raise ZeroMass("target mass must be positive")
    w = _check_weights(curves, weights)
    ys = _merged_levels(curves)
    left, right, per_curve = _blended_limits(curves, w, ys)

    jump = right > left
    dy = np.diff(ys)
    widths = np.zeros(dy.size)
    for wi, lims in zip(w, per_curve):
        if lims is None:
            continue
        li, ri = lims
        widths += wi * (li[1:] - ri[:-1])

    narrow = widths <= COINCIDENT_NODE_TOL
    if np.any(narrow & (dy > 1e-12)):
        k = int(np.nonzero(narrow & (dy > 1e-12))[0][0])
        raise PointMass(f"blend concentrates mass at x = {right[k]:g}")
    band_values = float(target_mass) * dy / np.where(narrow, 1.0, widths)
    band_values[narrow] = 0.0

    # interleave cells: [zero-density jump cell at level k] [band cell to k+1] ...
    edges = [left[0]]
    values = []
    for k in range(dy.size):
        if jump[k]:
            edges.append(right[k])
            values.append(0.0)
        edges.append(left[k + 1])
        values.append(band_values[k])
    if jump[-1]:
        edges.append(right[-1])
        values.append(0.0)

    edges = np.asarray(edges)
    values = np.asarray(values)
    ok = np.diff(edges) > 0
    if not np.all(ok):
        bad = ~ok & (values != 0.0)
        if np.any(bad):
            raise PointMass(f"blend concentrates mass at x = {edges[int(np.nonzero(bad)[0][0])]:g}")
        edges = np.concatenate([edges[:1], edges[1:][ok]])
        values = values[ok]
    return PwcFunction1D(Grid1D(edges), values)


def quantile_to_cdf(Q: QuantileCurve, mass: float) -> PwlCdf:
    """Reflect a quantile curve back into a CDF with the given total mass.

    Jumps of the curve become flat runs of the CDF.  Atoms (constant-x runs
    while y increases) cannot be represented by a piecewise-linear CDF and
    raise :class:`PointMass`.
    """
    if not mass > 0:
        raise ZeroMass("total mass must be positive")
    y, x = np.asarray(Q.y), np.asarray(Q.x)

    if Q.mass_nodes is not None and float(Q.mass_nodes[-1]) == float(mass):
        u = np.asarray(Q.mass_nodes, dtype=float)
    else:
        u = y * float(mass)

    atom = (np.diff(x) == 0.0) & (np.diff(y) > 0.0)
    if np.any(atom):
        i = int(np.nonzero(atom)[0][0])
        raise PointMass(f"curve carries an atom at x = {x[i]:g}; cannot form a CDF")

    dup = (np.diff(x) == 0.0) & (np.diff(y) == 0.0)
    keep = np.concatenate([[True], ~dup])
    return PwlCdf(x[keep], u[keep])


def density_from_cdf(U: PwlCdf) -> PwcFunction1D:
    """Piecewise-constant derivative of a CDF on the grid induced by its x-nodes."""
    dx = np.diff(U.x)
    du = np.diff(U.u)
    narrow = dx <= COINCIDENT_NODE_TOL
    if np.any(narrow & (du > 1e-12 * max(U.total_mass, 1.0))):
        i = int(np.nonzero(narrow)[0][0])
        raise PointMass(f"CDF rises across coincident nodes near x = {U.x[i]:g}")
    return PwcFunction1D(Grid1D(U.x), du / dx)


def resample(u: PwcFunction1D, target: Grid1D) -> PwcFunction1D:
    """Conservative resampling: exact integrals of the pwc source over target cells."""
    support = u.support_bounds()
    if support is not None:
        tol = 1e-12 * u.grid.length
        if target.lo > support[0] + tol or target.hi < support[1] - tol:
            raise DomainMismatch(
                f"target [{target.lo:g}, {target.hi:g}] does not cover support "
                f"[{support[0]:g}, {support[1]:g}]"
            )
    cumulative = np.concatenate([[0.0], np.cumsum(u.values * u.grid.widths)])
    at_edges = np.interp(target.edges, u.grid.edges, cumulative)
    return PwcFunction1D(target, np.diff(at_edges) / target.widths)


def merge_grids(a: Grid1D, b: Grid1D) -> Grid1D:
    """Union of the two edge sets over the combined hull."""
    return Grid1D(np.unique(np.concatenate([a.edges, b.edges])))


def lincomb(terms: Sequence[tuple]) -> PwcFunction1D:
    """Linear combination ``sum(coef * u)`` of pwc functions on the union grid."""
    if not terms:
        raise ValueError("need at least one term")
    grid = terms[0][1].grid
    for _, u in terms[1:]:
        grid = merge_grids(grid, u.grid)
    acc = np.zeros(grid.ncells)
    for coef, u in terms:
        acc += float(coef) * resample(u, grid).values
    return PwcFunction1D(grid, acc)


def quantile_from_atoms(positions, masses) -> tuple:
    """Quantile curve of a purely atomic measure, plus its total mass.

    Each atom becomes a constant-x run covering its mass fraction; gaps
    between distinct positions appear as jumps.  Used by the derivative-split
    interpolation, where second derivatives of piecewise-linear signals are
    jump measures.
    """
    pos = np.asarray(positions, dtype=float)
    m = np.asarray(masses, dtype=float)
    if np.any(m < 0):
        raise NegativeValue("atom masses must be nonnegative")
    keep = m > 0
    pos, m = pos[keep], m[keep]
    if pos.size == 0:
        raise ZeroMass("atomic measure has no mass")
    order = np.argsort(pos, kind="stable")
    pos, m = pos[order], m[order]

    cum = np.concatenate([[0.0], np.cumsum(m)])
    total = cum[-1]
    y_frac = cum / total
    y_frac[-1] = 1.0

    y = np.repeat(y_frac, 2)[1:-1]
    x = np.repeat(pos, 2)
    dup = np.concatenate([[False], (np.diff(y) == 0.0) & (np.diff(x) == 0.0)])
    return QuantileCurve(y[~dup], x[~dup]), float(total)


def second_antiderivative_at(Q: QuantileCurve, mass: float, points) -> np.ndarray:
    """Evaluate ``x -> mass * int_0^1 max(x - Q(y), 0) dy`` at the given points.

    This is the second antiderivative of the measure encoded by the curve
    (atoms and absolutely continuous parts alike), so it reconstructs a signal
    from its blended second-derivative components without ever forming a
    density.  Exact for the piecewise-linear curve representation.
    """
    pts = np.asarray(points, dtype=float)
    out = np.zeros_like(pts)
    y, x = Q.y, Q.x
    dy = np.diff(y)
    for i in np.nonzero(dy > 0)[0]:
        ya, xa, xb = dy[i], x[i], x[i + 1]
        if xb > xa:
            mid = np.clip((pts - xa), 0.0, xb - xa)
            out += ya * (mid * mid / (2.0 * (xb - xa)) + np.maximum(pts - xb, 0.0))
        else:
            out += ya * np.maximum(pts - xa, 0.0)
    return float(mass) * out
