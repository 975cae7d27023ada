"""Dimension allocation and rate budgeting for the secure broadcast scheme.

The r0 parallel channels (ordered private-1, common, private-2) are split
among three codebooks:

* ``C_B`` carries the common message together with a fictitious message
  of ``n_e`` d.o.f., on coordinates that both receivers observe (plus,
  when ``n_e' = n_e + d0`` exceeds the common dimension, ``n_e' - s``
  private coordinates on each side);
* ``C_A`` carries receiver 1's private message and ``C_C`` receiver 2's.

Every parallel channel supports ``R = log2(1 + s_min^2 (P/r0) / (s_min^2 + 1))``
bits per use once ``r0`` units of artificial noise are added.  A message
with ``d`` d.o.f. is assigned ``d * (1 - delta) * R`` bits per use so that
each decoding condition holds with a strict margin.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .channel import observed_coordinates
from .errors import InfeasibleTargetError, InputError, PowerBudgetError
from .region import MUTUAL_PRIVACY, NO_PRIVACY, build_region, violated_facets

__all__ = [
    "DEFAULT_DELTA",
    "Block",
    "SchemeAllocation",
    "TimeSharedScheme",
    "DecodabilityReport",
    "parse_target",
    "per_channel_rate",
    "power_budget",
    "plan_layout",
    "allocate",
    "synthesize",
    "check_decodability",
    "allocation_to_dict",
]

DEFAULT_DELTA = 1e-3


def parse_target(target):
    """Normalize a (d0, d1, d2) target to a tuple of Fractions.

    Accepts ints, Fractions, strings such as ``"1/2"`` or ``"0,1,1"``, and
    floats that are within 1e-12 of a fraction with denominator at most
    10**6.  Anything else is rejected.
    """
    if isinstance(target, str):
        target = [t for t in target.replace(" ", "").split(",")]
    parts = list(target)
    if len(parts) != 3:
        raise InputError(f"target must have three components, got {len(parts)}")
    out = []
    for x in parts:
        if isinstance(x, bool):
            raise InputError("target components must be numbers")
        if isinstance(x, float):
            if not math.isfinite(x):
                raise InputError("target components must be finite")
            f = Fraction(x).limit_denominator(10**6)
            if abs(float(f) - x) > 1e-12:
                raise InputError(f"target component {x!r} is not a recognizable rational")
            out.append(f)
            continue
        try:
            out.append(Fraction(x))
        except (TypeError, ValueError) as exc:
            raise InputError(f"cannot parse target component {x!r}") from exc
    return tuple(out)


def per_channel_rate(signal_power, r0, s_min):
    """Rate of one flattened parallel channel in bits per use.

    Each of the r0 channels gets ``signal_power / r0`` of signal and one
    unit of artificial noise, which the receiver sees through gain `s_min`.
    """
    if not signal_power > 0:
        raise PowerBudgetError(f"signal power must be positive, got {signal_power}", minimum_p_bar=None)
    if r0 < 1 or not s_min > 0:
        raise InputError("r0 must be >= 1 and s_min > 0")
    g = s_min * s_min
    return math.log2(1.0 + g * (signal_power / r0) / (g + 1.0))


def power_budget(p_bar, s_p, r0):
    """Split the scaled power into signal and artificial noise.

    Returns ``(p_bar / s_p**2 - r0, r0)``.
    """
    if not (p_bar > 0 and s_p > 0):
        raise InputError("p_bar and s_p must be positive")
    signal = p_bar / (s_p * s_p) - r0
    if not signal > 0:
        need = r0 * s_p * s_p
        raise PowerBudgetError(
            f"p_bar={p_bar:g} leaves no signal power after {r0} units of artificial noise; "
            f"need p_bar > {need:g}",
            minimum_p_bar=need,
        )
    return signal, r0


@dataclass(frozen=True)
class Block:
    """A contiguous run of parallel-channel coordinates used by one codebook."""

    name: str
    start: int
    stop: int

    @property
    def size(self):
        return self.stop - self.start

    @property
    def codebook(self):
        return self.name[0]


@dataclass(frozen=True)
class Layout:
    case_id: str
    corner: object
    n_e_prime: int
    blocks: tuple
    b_split: tuple


def plan_layout(profile, n_e, d0, mode=NO_PRIVACY, corner=1):
    """Place codebooks A, B, C on the r0 parallel channels.

    Parameters
    ----------
    profile : RankProfile
    n_e : int
    d0 : Fraction
        Common-message d.o.f.; must be an integer unless the privacy
        construction with ``n_e' = s`` applies.
    mode : str
    corner : {1, 2}
        Which pentagon corner to build when ``n_e + d0 < s`` without
        privacy: corner 1 gives the spare common coordinates to receiver 1.
    """
    rt1, s, rt2, r0 = profile.rt1, profile.s, profile.rt2, profile.r0
    if mode == MUTUAL_PRIVACY and d0 + n_e <= s:
        nep = s
        case_id = "case2" if d0 + n_e < s else "case1"
        blocks = (Block("A", 0, rt1), Block("B", rt1, rt1 + s), Block("C", rt1 + s, r0))
        b_split = (0, s)
        return Layout(case_id, None, nep, blocks, b_split)

    d0 = Fraction(d0)
    if d0.denominator != 1:
        raise InfeasibleTargetError(
            f"d0={d0} is not an integer; the target is not decomposable over two corner allocations",
            violated=["integral d0"],
        )
    nep = n_e + int(d0)
    if nep >= s:
        # users with fewer than n_e' private+common dims decode nothing, so
        # the private parts of B are clipped to what exists
        b1 = min(nep - s, rt1)
        b2 = min(nep - s, rt2)
        a = rt1 - b1
        blocks = (
            Block("A", 0, a),
            Block("B1", a, rt1),
            Block("B0", rt1, rt1 + s),
            Block("B2", rt1 + s, rt1 + s + b2),
            Block("C", rt1 + s + b2, r0),
        )
        return Layout("case1", None, nep, blocks, (b1, s, b2))

    if corner == 1:
        cut = rt1 + s - nep
        blocks = (Block("A", 0, cut), Block("B", cut, rt1 + s), Block("C", rt1 + s, r0))
    elif corner == 2:
        cut = rt1 + nep
        blocks = (Block("A", 0, rt1), Block("B", rt1, cut), Block("C", cut, r0))
    else:
        raise InputError(f"corner must be 1 or 2, got {corner!r}")
    return Layout("case2", corner, nep, blocks, (s - nep, nep))


@dataclass(frozen=True)
class SchemeAllocation:
    """One codebook layout with its rate and power budget.

    Rates are in bits per channel use; ``rate_unit = (1 - delta) * R``.
    """

    mode: str
    case_id: str
    corner: object
    target: tuple
    n_e: int
    n_e_prime: int
    blocks: tuple
    b_split: tuple
    profile: object
    rate_per_channel: float
    delta: float
    signal_power: float
    noise_power_total: int
    p_bar: float

    def _size(self, codebook):
        return sum(b.size for b in self.blocks if b.codebook == codebook)

    @property
    def dims_a(self):
        return self._size("A")

    @property
    def dims_b(self):
        return self._size("B")

    @property
    def dims_c(self):
        return self._size("C")

    def coords(self, codebook):
        return {i for b in self.blocks if b.codebook == codebook for i in range(b.start, b.stop)}

    @property
    def rate_unit(self):
        return (1.0 - self.delta) * self.rate_per_channel

    @property
    def rates(self):
        d0, d1, d2 = self.target
        u = self.rate_unit
        return {"R0": float(d0) * u, "R1": float(d1) * u, "R2": float(d2) * u, "RE": self.n_e * u}

    @property
    def achieved_dof(self):
        return self.target

    @property
    def weights(self):
        return (Fraction(1),)

    @property
    def components(self):
        return (self,)


@dataclass(frozen=True)
class TimeSharedScheme:
    """Convex combination of corner allocations."""

    weights: tuple
    components: tuple

    @property
    def mode(self):
        return self.components[0].mode

    @property
    def case_id(self):
        return self.components[0].case_id

    @property
    def n_e(self):
        return self.components[0].n_e

    @property
    def achieved_dof(self):
        return tuple(
            sum(w * c.target[i] for w, c in zip(self.weights, self.components)) for i in range(3)
        )

    target = achieved_dof

    @property
    def rates(self):
        keys = ("R0", "R1", "R2", "RE")
        return {k: sum(float(w) * c.rates[k] for w, c in zip(self.weights, self.components)) for k in keys}

    @property
    def rate_unit(self):
        return self.components[0].rate_unit


def allocate(pc, n_e, target, mode=NO_PRIVACY, corner=1, delta=DEFAULT_DELTA):
    """Build a single allocation for `target` without checking the region.

    Useful for inspecting what goes wrong with an infeasible target; use
    :func:`synthesize` for normal work.
    """
    target = parse_target(target)
    if not 0 <= delta < 1:
        raise InputError("delta must lie in [0, 1)")
    pr = pc.profile
    lay = plan_layout(pr, n_e, target[0], mode, corner)
    signal, noise = power_budget(pc.p_bar, pc.s_p, pr.r0)
    rate = per_channel_rate(signal, pr.r0, pc.s_min)
    return SchemeAllocation(
        mode=mode, case_id=lay.case_id, corner=lay.corner, target=target,
        n_e=n_e, n_e_prime=lay.n_e_prime, blocks=lay.blocks, b_split=lay.b_split,
        profile=pr, rate_per_channel=rate, delta=delta,
        signal_power=signal, noise_power_total=noise, p_bar=pc.p_bar,
    )


def synthesize(pc, n_e, target, mode=NO_PRIVACY, delta=DEFAULT_DELTA):
    """Scheme achieving `target` on the reduced channel `pc`.

    Returns a :class:`SchemeAllocation`, or a :class:`TimeSharedScheme`
    over the two pentagon corners when no single corner dominates the
    target.

    Raises
    ------
    InfeasibleTargetError
        The target is outside the region, or has a fractional common
        component that two corner allocations cannot realize.
    """
    target = parse_target(target)
    pr = pc.profile
    reg = build_region(pr, n_e, mode)
    bad = violated_facets(reg, target)
    if bad:
        raise InfeasibleTargetError(
            f"target ({', '.join(str(x) for x in target)}) is outside the {reg.mode} region",
            violated=bad,
        )
    d0, d1, d2 = target
    if mode == MUTUAL_PRIVACY or d0 + n_e >= pr.s:
        return allocate(pc, n_e, target, mode, 1, delta)
    if Fraction(d0).denominator != 1:
        plan_layout(pr, n_e, d0, mode)  # raises
    nep = n_e + d0
    if d2 <= pr.r2 - pr.s:
        return allocate(pc, n_e, target, mode, 1, delta)
    if d1 <= pr.r1 - pr.s:
        return allocate(pc, n_e, target, mode, 2, delta)

    lam = (d1 - (pr.r1 - pr.s)) / (pr.s - nep)
    top = lam * (pr.r2 - pr.s) + (1 - lam) * (pr.r2 - nep)
    kappa = d2 / top
    first = allocate(pc, n_e, (d0, pr.r1 - nep, kappa * (pr.r2 - pr.s)), mode, 1, delta)
    second = allocate(pc, n_e, (d0, pr.r1 - pr.s, kappa * (pr.r2 - nep)), mode, 2, delta)
    return TimeSharedScheme((lam, 1 - lam), (first, second))


@dataclass(frozen=True)
class DecodabilityReport:
    """Per-message capacity minus assigned rate, in bits per use.

    A margin is None when the receiver has nothing to decode for that
    message.  `eve_margin` is how far the fictitious-message rate sits
    below what an eavesdropper told the real messages could decode.
    """

    margins: dict
    eve_margin: object

    @property
    def ok(self):
        return all(m > 0 for m in self.margins.values() if m is not None)


def _check_one(alloc):
    R = alloc.rate_per_channel
    u = alloc.rate_unit
    d0, d1, d2 = alloc.target
    b = alloc.coords("B")
    margins = {}
    common_rate = (float(d0) + alloc.n_e) * u
    for rx, d_own in ((1, d1), (2, d2)):
        needs = (d0 > 0 or d_own > 0) and common_rate > 0
        cap = len(b & observed_coordinates(alloc.profile, rx)) * R
        margins[f"common@rx{rx}"] = cap - common_rate if needs else None
    margins["W1"] = alloc.dims_a * R - float(d1) * u if d1 > 0 else None
    margins["W2"] = alloc.dims_c * R - float(d2) * u if d2 > 0 else None
    eve = None
    if alloc.n_e > 0:
        eve = alloc.n_e * math.log2(1.0 + alloc.signal_power / alloc.profile.r0) - alloc.n_e * u
    return DecodabilityReport(margins, eve)


def check_decodability(alloc):
    """Margins of the sequential decoding conditions.

    For a time-shared scheme a list with one report per component is
    returned.
    """
    if isinstance(alloc, TimeSharedScheme):
        return [_check_one(c) for c in alloc.components]
    return _check_one(alloc)


def _frac(x):
    x = Fraction(x)
    return int(x) if x.denominator == 1 else str(x)


def _one_to_dict(a):
    return {
        "case_id": a.case_id,
        "corner": a.corner,
        "target": [_frac(x) for x in a.target],
        "n_e_prime": a.n_e_prime,
        "dims": {"A": a.dims_a, "B": a.dims_b, "C": a.dims_c},
        "b_split": list(a.b_split),
        "blocks": [{"name": b.name, "start": b.start, "stop": b.stop} for b in a.blocks],
        "rate_per_channel": a.rate_per_channel,
        "rate_unit": a.rate_unit,
        "rates": a.rates,
        "power": {"p_bar": a.p_bar, "signal": a.signal_power, "artificial_noise": a.noise_power_total},
        "delta": a.delta,
    }


def allocation_to_dict(alloc):
    comps = alloc.components
    return {
        "mode": alloc.mode,
        "n_e": alloc.n_e,
        "achieved_dof": [_frac(x) for x in alloc.achieved_dof],
        "time_share": [_frac(w) for w in alloc.weights],
        "allocations": [_one_to_dict(c) for c in comps],
        "rates": alloc.rates,
    }
