"""Secrecy degrees-of-freedom regions in (d0, d1, d2).

Both regions are polytopes cut out by 0/1 half-spaces with integer
right-hand sides, plus nonnegativity.  The constraint matrix has the
consecutive-ones property in the variable order (d1, d0, d2), so every
vertex is integral; vertices are computed exactly with fractions.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InfeasibleTargetError, InputError

__all__ = [
    "NO_PRIVACY",
    "MUTUAL_PRIVACY",
    "RECTANGLE",
    "PENTAGON",
    "Constraint",
    "SdofRegion",
    "RegionVertexSet",
    "region_no_privacy",
    "region_with_privacy",
    "build_region",
    "classify_case",
    "enumerate_vertices",
    "contains",
    "violated_facets",
    "compare",
    "region_to_dict",
]

NO_PRIVACY = "no_privacy"
MUTUAL_PRIVACY = "mutual_privacy"
MODES = (NO_PRIVACY, MUTUAL_PRIVACY)

RECTANGLE = "rectangle"
PENTAGON = "pentagon"


def _plus(v):
    return max(0, v)


@dataclass(frozen=True)
class Constraint:
    """``coeffs . (d0, d1, d2) <= bound`` where ``bound = max(0, raw)``."""

    coeffs: tuple
    raw: int
    label: str

    @property
    def bound(self):
        return _plus(self.raw)

    @property
    def clamped(self):
        return self.raw < 0

    def value(self, point):
        return sum(c * x for c, x in zip(self.coeffs, point))

    def __str__(self):
        names = ("d0", "d1", "d2")
        lhs = " + ".join(n for c, n in zip(self.coeffs, names) if c)
        note = f"  (clamped from {self.raw})" if self.clamped else ""
        return f"{lhs} <= {self.bound}{note}"


@dataclass(frozen=True)
class SdofRegion:
    constraints: tuple
    mode: str
    profile: object
    n_e: int

    @property
    def d0_max(self):
        """Largest d0 in the region (always an integer)."""
        return min(c.bound for c in self.constraints if c.coeffs[0])

    def bound_for(self, coeffs):
        """Tightest bound among constraints with exactly these coefficients."""
        found = [c.bound for c in self.constraints if c.coeffs == tuple(coeffs)]
        return min(found) if found else None


@dataclass(frozen=True)
class RegionVertexSet:
    """Extreme points of a region and its fixed-d0 slices.

    `fixed_d0_polygons` maps every integer d0 in the region to the
    counter-clockwise list of (d1, d2) slice vertices starting at the
    origin.
    """

    vertices: tuple
    fixed_d0_polygons: dict


def region_no_privacy(profile, n_e):
    """Region without the mutual privacy requirement.

    ``d0 + d_i <= {r_i - n_e}+`` for each receiver and
    ``d0 + d1 + d2 <= {r0 - n_e}+``.
    """
    _check_ne(n_e)
    return SdofRegion(
        constraints=(
            Constraint((1, 1, 0), profile.r1 - n_e, "d0+d1 (receiver 1 cut)"),
            Constraint((1, 0, 1), profile.r2 - n_e, "d0+d2 (receiver 2 cut)"),
            Constraint((1, 1, 1), profile.r0 - n_e, "d0+d1+d2 (cooperative cut)"),
        ),
        mode=NO_PRIVACY,
        profile=profile,
        n_e=n_e,
    )


def region_with_privacy(profile, n_e):
    """Region when each private message must also stay hidden from the other receiver.

    ``d0 + d_i <= {r_i - n_e}+`` and ``d_i <= {r_i - s}+``; the cooperative
    cut is never active here.
    """
    _check_ne(n_e)
    s = profile.s
    return SdofRegion(
        constraints=(
            Constraint((1, 1, 0), profile.r1 - n_e, "d0+d1 (receiver 1 cut)"),
            Constraint((1, 0, 1), profile.r2 - n_e, "d0+d2 (receiver 2 cut)"),
            Constraint((0, 1, 0), profile.r1 - s, "d1 (privacy from receiver 2)"),
            Constraint((0, 0, 1), profile.r2 - s, "d2 (privacy from receiver 1)"),
        ),
        mode=MUTUAL_PRIVACY,
        profile=profile,
        n_e=n_e,
    )


def build_region(profile, n_e, mode=NO_PRIVACY):
    if mode in (NO_PRIVACY, False, None):
        return region_no_privacy(profile, n_e)
    if mode in (MUTUAL_PRIVACY, True):
        return region_with_privacy(profile, n_e)
    raise InputError(f"unknown mode {mode!r}; expected one of {MODES}")


def _check_ne(n_e):
    if isinstance(n_e, bool) or int(n_e) != n_e or n_e < 0:
        raise InputError(f"n_e must be a nonnegative integer, got {n_e!r}")


def classify_case(profile, n_e, d0, mode=NO_PRIVACY):
    """Shape of the (d1, d2) slice at a fixed common-message d.o.f.

    Returns ``"rectangle"`` when ``d0 + n_e >= s`` (the cooperative cut is
    implied by the two single-receiver cuts) and ``"pentagon"`` otherwise.
    """
    reg = build_region(profile, n_e, mode)
    d0 = Fraction(d0)
    if d0 < 0 or d0 > reg.d0_max:
        raise InfeasibleTargetError(
            f"d0={d0} is outside the feasible range [0, {reg.d0_max}]",
            violated=["d0 range"],
        )
    return RECTANGLE if d0 + n_e >= profile.s else PENTAGON


def _all_planes(region):
    planes = [(c.coeffs, c.bound) for c in region.constraints]
    planes += [((-1, 0, 0), 0), ((0, -1, 0), 0), ((0, 0, -1), 0)]
    return planes


def _det3(m):
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _solve3(rows, rhs):
    det = _det3(rows)
    if det == 0:
        return None
    out = []
    for k in range(3):
        mk = [list(r) for r in rows]
        for i in range(3):
            mk[i][k] = rhs[i]
        out.append(Fraction(_det3(mk), det))
    return tuple(out)


def _feasible(planes, p):
    return all(sum(a * x for a, x in zip(c, p)) <= b for c, b in planes)


def _as_int(p):
    return tuple(int(x) if Fraction(x).denominator == 1 else x for x in p)


def _slice_polygon(region, d0):
    # half-planes a1*d1 + a2*d2 <= b - a0*d0, plus d1, d2 >= 0
    lines = [((c.coeffs[1], c.coeffs[2]), c.bound - c.coeffs[0] * d0) for c in region.constraints]
    lines = [(a, b) for a, b in lines if a != (0, 0)]
    lines += [((-1, 0), 0), ((0, -1), 0)]
    pts = set()
    for (a, b), (c, d) in itertools.combinations(lines, 2):
        det = a[0] * c[1] - a[1] * c[0]
        if det == 0:
            continue
        x = Fraction(b * c[1] - a[1] * d, det)
        y = Fraction(a[0] * d - b * c[0], det)
        if all(e[0] * x + e[1] * y <= f for e, f in lines):
            pts.add(_as_int((x, y)))
    return _order_ccw(sorted(pts))


def _order_ccw(pts):
    if len(pts) <= 2:
        return pts
    cx = sum(p[0] for p in pts) / len(pts)
    cy = sum(p[1] for p in pts) / len(pts)
    ring = sorted(pts, key=lambda p: math.atan2(float(p[1] - cy), float(p[0] - cx)))
    start = ring.index((0, 0)) if (0, 0) in ring else 0
    return ring[start:] + ring[:start]


def enumerate_vertices(region):
    """Extreme points of the region and its fixed-d0 polygons.

    Every triple of facet planes (nonnegativity included) is intersected
    and the feasible intersection points are kept.
    """
    planes = _all_planes(region)
    verts = set()
    for trio in itertools.combinations(planes, 3):
        p = _solve3([t[0] for t in trio], [t[1] for t in trio])
        if p is not None and _feasible(planes, p):
            verts.add(_as_int(p))
    polygons = {d0: _slice_polygon(region, d0) for d0 in range(region.d0_max + 1)}
    return RegionVertexSet(tuple(sorted(verts)), polygons)


def violated_facets(region, point, tol=0):
    """Labels of the constraints (including nonnegativity) that `point` violates."""
    if len(point) != 3:
        raise InputError("points are (d0, d1, d2) triples")
    out = [f"d{i} >= 0" for i, x in enumerate(point) if x < -tol]
    out += [c.label for c in region.constraints if c.value(point) > c.bound + tol]
    return out


def contains(region, point, tol=0):
    """True iff `point` lies in the closed region."""
    for x in point:
        if isinstance(x, float) and not math.isfinite(x):
            raise InputError("point has non-finite coordinates")
    return not violated_facets(region, point, tol)


def compare(region_a, region_b):
    """Set relation between two regions for the same channel.

    Returns one of ``"equal"``, ``"a_subset_b"``, ``"b_subset_a"``,
    ``"incomparable"``.  Both are convex, so testing the vertices of each
    against the other decides inclusion.
    """
    if region_a.profile != region_b.profile or region_a.n_e != region_b.n_e:
        raise InputError("regions belong to different rank profiles or eavesdropper budgets")
    a_in_b = all(contains(region_b, v) for v in enumerate_vertices(region_a).vertices)
    b_in_a = all(contains(region_a, v) for v in enumerate_vertices(region_b).vertices)
    if a_in_b and b_in_a:
        return "equal"
    if a_in_b:
        return "a_subset_b"
    if b_in_a:
        return "b_subset_a"
    return "incomparable"


def region_to_dict(region, vertex_set=None):
    vs = vertex_set or enumerate_vertices(region)
    return {
        "mode": region.mode,
        "n_e": region.n_e,
        "profile": region.profile.as_dict(),
        "constraints": [
            {"coeffs": list(c.coeffs), "bound": c.bound, "raw": c.raw,
             "clamped": c.clamped, "label": c.label}
            for c in region.constraints
        ],
        "vertices": [list(v) for v in vs.vertices],
        "fixed_d0_polygons": {
            str(d0): [list(p) for p in poly] for d0, poly in vs.fixed_d0_polygons.items()
        },
    }
