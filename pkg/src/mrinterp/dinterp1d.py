"""Displacement interpolation of 1D piecewise-constant functions.

Variants: nonnegative pair with arbitrary masses, signed pair (positive and
negative parts transported separately, with a mass-balancing coefficient when
parts vanish), barycentric multi-function combination, and the
derivative-split variant that reproduces two-way wave splitting by
interpolating the sign components of the discrete second derivative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import grid1d
from .errors import (
    BothPartsZero,
    DegenerateDenominator,
    DomainMismatch,
    MismatchedComponents,
    UnsupportedSignPattern,
    WeightSum,
    ZeroMass,
)
from .grid1d import (
    Grid1D,
    PwcFunction1D,
    QuantileCurve,
    cdf,
    combine,
    density_from_cdf,
    lincomb,
    pseudo_inverse,
    quantile_from_atoms,
    quantile_to_cdf,
    second_antiderivative_at,
)


@dataclass(frozen=True)
class SignedParts:
    """Exact cellwise split u = plus - minus with both parts stored nonnegative."""

    plus: PwcFunction1D
    minus: PwcFunction1D

    @property
    def mass_plus(self) -> float:
        return self.plus.mass()

    @property
    def mass_minus(self) -> float:
        return self.minus.mass()


@dataclass(frozen=True)
class InterpWeights:
    """Barycentric coordinates, optionally remembering the query parameter."""

    lambdas: np.ndarray
    alphas: Optional[np.ndarray] = None

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        object.__setattr__(self, "lambdas", lam)
        if lam.ndim != 1 or lam.size == 0:
            raise WeightSum("need a 1D weight vector")
        if np.any(lam < 0) or abs(lam.sum() - 1.0) > 1e-12:
            raise WeightSum(f"weights must be nonnegative and sum to 1, got {lam.tolist()}")


def split_signs(u: PwcFunction1D) -> SignedParts:
    """Cellwise positive/negative split; reconstruction plus - minus is bitwise."""
    plus = np.maximum(u.values, 0.0)
    minus = np.maximum(-u.values, 0.0)
    return SignedParts(PwcFunction1D(u.grid, plus), PwcFunction1D(u.grid, minus))


def beta_coefficient(M1p: float, M1m: float, M2p: float, M2m: float, lam: float) -> float:
    """Mass-balancing coefficient for the one-vanishing-part signed interpolation.

    beta = ((1-lam) M1- + lam M2-) / ((1-lam) M1- + lam M2+), which makes the
    integral of ``u+ - beta u-`` interpolate linearly between the operand
    integrals.  With M2- = 0 this is the reduced form used when only the
    second operand's negative part vanishes; the mirrored cases evaluate the
    same formula with operands permuted.
    """
    den = (1.0 - lam) * M1m + lam * M2p
    if den <= 0.0:
        raise DegenerateDenominator(f"beta denominator {den:g} is not positive")
    return ((1.0 - lam) * M1m + lam * M2m) / den


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise WeightSum(f"lambda must lie in [0, 1], got {lam}")
    return lam


def _blend(us: Sequence[PwcFunction1D], lams: np.ndarray) -> PwcFunction1D:
    """Quantile-space convex combination scaled to the affine mass."""
    masses = [u.mass() for u in us]
    curves = [pseudo_inverse(cdf(u)) for u in us]
    target_mass = float(np.dot(lams, masses))
    return grid1d.blend_density(curves, lams, target_mass)


def interp_nonneg(u1: PwcFunction1D, u2: PwcFunction1D, lam: float) -> PwcFunction1D:
    """Displacement interpolant of two nonnegative densities.

    Normalized CDFs are pseudo-inverted, combined with weights (1-lam, lam),
    reflected back and differentiated; the result is scaled so its integral is
    (1-lam) M1 + lam M2 exactly.
    """
    lam = _check_lambda(lam)
    if lam == 0.0:
        return u1
    if lam == 1.0:
        return u2
    return _blend([u1, u2], np.array([1.0 - lam, lam]))


def interp_bary(us: Sequence[PwcFunction1D], w) -> PwcFunction1D:
    """Barycentric displacement interpolant of N nonnegative densities."""
    lams = w.lambdas if isinstance(w, InterpWeights) else InterpWeights(np.asarray(w)).lambdas
    if len(us) != lams.size:
        raise WeightSum(f"{len(us)} functions but {lams.size} weights")
    vertex = np.nonzero(lams == 1.0)[0]
    if vertex.size == 1:
        return us[int(vertex[0])]
    return _blend(list(us), lams)


def _part_is_zero(part: PwcFunction1D) -> bool:
    scale = float(np.max(part.values)) if part.values.size else 0.0
    return part.mass() <= grid1d.ZERO_MASS_FACTOR * part.grid.length * scale


def interp_signed(u1: PwcFunction1D, u2: PwcFunction1D, lam: float) -> PwcFunction1D:
    """Displacement interpolant of two signed functions.

    Nonvanishing sign parts transport to their same-sign counterparts; when a
    part vanishes, the opposite-sign part of the same operand stands in and a
    coefficient from :func:`beta_coefficient` rebalances the masses so the
    integral stays affine in lam.  Monotonicity of the underlying map is not
    preserved in general for this extension.
    """
    lam = _check_lambda(lam)
    if lam == 0.0:
        return u1
    if lam == 1.0:
        return u2

    s1, s2 = split_signs(u1), split_signs(u2)
    p1, m1 = not _part_is_zero(s1.plus), not _part_is_zero(s1.minus)
    p2, m2 = not _part_is_zero(s2.plus), not _part_is_zero(s2.minus)
    if not (p1 or m1):
        raise BothPartsZero("first operand is identically zero")
    if not (p2 or m2):
        raise BothPartsZero("second operand is identically zero")

    M1p, M1m = s1.mass_plus, s1.mass_minus
    M2p, M2m = s2.mass_plus, s2.mass_minus
    I = interp_nonneg

    if not m1 and not m2:
        return I(s1.plus, s2.plus, lam)
    if not p1 and not p2:
        return I(s1.minus, s2.minus, lam).scaled(-1.0)
    if p1 and m1 and p2 and m2:
        return lincomb([(1.0, I(s1.plus, s2.plus, lam)), (-1.0, I(s1.minus, s2.minus, lam))])

    if p1 and m1 and p2 and not m2:
        # only u2- vanishes: u1- pairs with u2+ (the paper's displayed case)
        beta = beta_coefficient(M1p, M1m, M2p, 0.0, lam)
        return lincomb([(1.0, I(s1.plus, s2.plus, lam)), (-beta, I(s1.minus, s2.plus, lam))])
    if p1 and m1 and not p2 and m2:
        # only u2+ vanishes: sign-flipped mirror of the above
        beta = beta_coefficient(M1m, M1p, M2m, 0.0, lam)
        return lincomb([(-1.0, I(s1.minus, s2.minus, lam)), (beta, I(s1.plus, s2.minus, lam))])
    if p1 and not m1 and p2 and m2:
        # only u1- vanishes: time-reversed mirror (swap operands, lam -> 1-lam)
        beta = beta_coefficient(M2p, M2m, M1p, 0.0, 1.0 - lam)
        return lincomb([(1.0, I(s1.plus, s2.plus, lam)), (-beta, I(s1.plus, s2.minus, lam))])
    if not p1 and m1 and p2 and m2:
        # only u1+ vanishes: both mirrors composed
        beta = beta_coefficient(M2m, M2p, M1m, 0.0, 1.0 - lam)
        return lincomb([(-1.0, I(s1.minus, s2.minus, lam)), (beta, I(s1.minus, s2.plus, lam))])

    if p1 and not m1 and not p2 and m2:
        # positive bump morphing into a negative bump: single opposite-sign channel,
        # scaled so the integral passes through zero linearly
        shape = I(s1.plus, s2.minus, lam)
        coef = ((1.0 - lam) * M1p - lam * M2m) / ((1.0 - lam) * M1p + lam * M2m)
        return shape.scaled(coef)
    if not p1 and m1 and p2 and not m2:
        shape = I(s1.minus, s2.plus, lam)
        coef = (lam * M2p - (1.0 - lam) * M1m) / ((1.0 - lam) * M1m + lam * M2p)
        return shape.scaled(coef)

    raise UnsupportedSignPattern(
        f"unhandled sign pattern (u1+:{p1} u1-:{m1} u2+:{p2} u2-:{m2})"
    )


def interp_bary_signed(us: Sequence[PwcFunction1D], w) -> PwcFunction1D:
    """Barycentric interpolation of signed functions.

    Defined only when the positive parts are nonzero for all members and
    likewise the negative parts (interpolated separately and subtracted), or
    when one sign is absent everywhere.  The pairwise opposite-sign
    construction does not generalize to N > 2, so mixed vanishing patterns
    raise :class:`UnsupportedSignPattern`.  Two-member calls defer to
    :func:`interp_signed`, which handles every pairwise pattern.
    """
    lams = w.lambdas if isinstance(w, InterpWeights) else InterpWeights(np.asarray(w)).lambdas
    if len(us) != lams.size:
        raise WeightSum(f"{len(us)} functions but {lams.size} weights")
    if len(us) == 2:
        return interp_signed(us[0], us[1], float(lams[1]))

    splits = [split_signs(u) for u in us]
    plus_zero = [_part_is_zero(s.plus) for s in splits]
    minus_zero = [_part_is_zero(s.minus) for s in splits]
    if all(z for z in minus_zero):
        return interp_bary([s.plus for s in splits], lams)
    if all(z for z in plus_zero):
        return interp_bary([s.minus for s in splits], lams).scaled(-1.0)
    if not any(plus_zero) and not any(minus_zero):
        pos = interp_bary([s.plus for s in splits], lams)
        neg = interp_bary([s.minus for s in splits], lams)
        return lincomb([(1.0, pos), (-1.0, neg)])
    raise UnsupportedSignPattern(
        "mixed vanishing sign parts across more than two functions"
    )


def monotone_map(u1: PwcFunction1D, u2: PwcFunction1D, x_points) -> np.ndarray:
    """The transport map x -> U2^{-1}(U1(x) / M1 * M2) between two densities.

    For smooth strictly positive operands this is the discrete monotone
    rearrangement whose derivative satisfies U'(x) u2(U(x)) = u1(x).
    """
    U1 = cdf(u1)
    Q2 = pseudo_inverse(cdf(u2))
    levels = np.interp(np.asarray(x_points, dtype=float), U1.x, U1.u) / U1.total_mass
    return Q2.limits_at(np.clip(levels, 0.0, 1.0))[1]


def weights_from_alpha(alpha, nodes, simplices=None) -> InterpWeights:
    """Barycentric weights of a query parameter w.r.t. sampled parameter nodes.

    1D: two nodes, lam = (alpha - a1) / (a2 - a1).  2D: nodes tessellated into
    simplices (default: the single triangle of the first three nodes); a query
    on a shared face uses the lexicographically first containing simplex.
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim == 1:
        a1, a2 = float(nodes[0]), float(nodes[1])
        t = (float(alpha) - a1) / (a2 - a1)
        if not -1e-12 <= t <= 1.0 + 1e-12:
            raise WeightSum(f"alpha {alpha} outside the node interval [{a1}, {a2}]")
        t = min(max(t, 0.0), 1.0)
        lam = np.zeros(nodes.shape[0])
        lam[0], lam[1] = 1.0 - t, t
        return InterpWeights(lam, alphas=np.asarray([alpha], dtype=float))

    query = np.asarray(alpha, dtype=float)
    if simplices is None:
        simplices = [tuple(range(nodes.shape[0]))[:3]]
    for simplex in sorted(tuple(s) for s in simplices):
        i, j, k = simplex
        T = np.column_stack([nodes[j] - nodes[i], nodes[k] - nodes[i]])
        try:
            bc = np.linalg.solve(T, query - nodes[i])
        except np.linalg.LinAlgError:
            continue
        coords = np.array([1.0 - bc.sum(), bc[0], bc[1]])
        if np.all(coords >= -1e-12):
            lam = np.zeros(nodes.shape[0])
            lam[[i, j, k]] = np.clip(coords, 0.0, None)
            lam /= lam.sum()
            return InterpWeights(lam, alphas=query)
    raise WeightSum(f"alpha {query.tolist()} is in no simplex of the tessellation")


def _second_difference_atoms(p: PwcFunction1D):
    """Sign components of the discrete second derivative as jump measures.

    Forward differences of the cell values (divided by the uniform width) give
    the discrete first derivative; its positive and negative parts are
    differentiated again, which for piecewise-constant data yields pure jump
    measures located at the cell edges.  Returns four (positions, masses)
    pairs ordered (++, +-, -+, --) with all masses nonnegative.
    """
    h = float(p.grid.widths[0])
    d = np.diff(p.values) / h
    gp = np.maximum(d, 0.0)
    gm = np.minimum(d, 0.0)
    positions = p.grid.edges[:-1]

    jp = np.diff(np.concatenate([[0.0], gp, [0.0]]))
    jm = np.diff(np.concatenate([[0.0], gm, [0.0]]))
    return (
        (positions, np.maximum(jp, 0.0)),
        (positions, np.maximum(-jp, 0.0)),
        (positions, np.maximum(jm, 0.0)),
        (positions, np.maximum(-jm, 0.0)),
    )


def interp_derivative_split(p1: PwcFunction1D, p2: PwcFunction1D, lam: float) -> PwcFunction1D:
    """Interpolate continuous signals through their second-derivative sign parts.

    Both operands must live on the same uniform grid, hold nodal samples of
    piecewise-linear signals vanishing at the left boundary, and have their
    kinks on grid edges; then the four jump-measure components transport
    exactly and the double summation reproduces d'Alembert-type two-way
    splitting that plain density interpolation cannot (a single bump splits
    into translating sub-bumps instead of one deforming bump).

    Output values are the reconstructed signal at the cell left edges, the
    exact inverse of the forward differencing (anchored at zero on the left).
    """
    lam = _check_lambda(lam)
    if not p1.grid.same_edges(p2.grid, tol=1e-12 * max(p1.grid.length, 1.0)):
        raise DomainMismatch("derivative-split interpolation needs a shared grid")
    if not p1.grid.uniform_flag:
        raise DomainMismatch("derivative-split interpolation needs a uniform grid")

    comps1 = _second_difference_atoms(p1)
    comps2 = _second_difference_atoms(p2)
    names = ("d+d+", "d+d-", "d-d+", "d-d-")
    signs = (1.0, -1.0, 1.0, -1.0)

    points = p1.grid.edges[:-1]
    out = np.zeros(points.size)
    total = sum(m.sum() for _, m in comps1) + sum(m.sum() for _, m in comps2)
    for name, sign, (pos1, m1), (pos2, m2) in zip(names, signs, comps1, comps2):
        t1, t2 = float(m1.sum()), float(m2.sum())
        tiny = 1e-12 * max(total, 1.0)
        if t1 <= tiny and t2 <= tiny:
            continue
        if t1 <= tiny or t2 <= tiny:
            raise MismatchedComponents(
                f"component {name} has mass ({t1:g}, {t2:g}); "
                "no pairing rule is defined when exactly one side is empty"
            )
        q1, mass1 = quantile_from_atoms(pos1, m1)
        q2, mass2 = quantile_from_atoms(pos2, m2)
        blended = combine([q1, q2], [1.0 - lam, lam])
        mass = (1.0 - lam) * mass1 + lam * mass2
        out += sign * second_antiderivative_at(blended, mass, points)
    return PwcFunction1D(p1.grid, out)
