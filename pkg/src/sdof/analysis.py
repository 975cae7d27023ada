"""Log-det rate and leakage evaluation over SNR sweeps.

Pre-logs are estimated as least-squares slopes of bits per use against
``log2(p_bar)`` over the upper half of a log-spaced power grid.
"""

import io
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .channel import (
    ChannelSpec,
    observed_coordinates,
    reduce_to_parallel,
    worst_case_eve_single,
    worst_case_eve_sum,
)
from .errors import DimensionError, InfeasibleTargetError, InputError, PowerBudgetError
from .linalg import as_matrix, numerical_rank, random_unitary, svd
from .region import MUTUAL_PRIVACY, NO_PRIVACY, build_region, region_no_privacy, violated_facets
from .scheme import (
    DEFAULT_DELTA,
    check_decodability,
    parse_target,
    per_channel_rate,
    power_budget,
    synthesize,
)

__all__ = [
    "DEFAULT_SNR",
    "Tolerances",
    "RankDeficientEavesdropperWarning",
    "snr_grid",
    "eve_leakage",
    "sample_eavesdropper",
    "RateCurves",
    "achievable_rate_curve",
    "fit_prelog",
    "ConverseReport",
    "converse_prelog",
    "EveSearchResult",
    "adversarial_eve_search",
    "SweepReport",
    "sweep",
    "Certificate",
    "certify",
]

DEFAULT_SNR = np.logspace(4, 12, 9)


class RankDeficientEavesdropperWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Tolerances:
    """Pass/fail thresholds for certificates.

    prelog : matching fitted message pre-logs and converse slopes.
    fictitious : matching the fictitious-message pre-log to n_e.
    leakage : slack on the leakage pre-log above n_e.
    invariance : relative spread of leakage across eavesdroppers.
    rank : absolute rank threshold, or None for the default.
    """

    prelog: float = 0.05
    fictitious: float = 0.02
    leakage: float = 0.02
    invariance: float = 1e-9
    rank: object = None

    def as_dict(self):
        return {"prelog": self.prelog, "fictitious": self.fictitious, "leakage": self.leakage,
                "invariance": self.invariance, "rank": self.rank}


def snr_grid(p_min=1e4, p_max=1e12, points=9):
    """Log-spaced grid of total powers (linear units)."""
    if not (0 < p_min < p_max) or points < 2:
        raise InputError("need 0 < p_min < p_max and at least two points")
    return np.logspace(math.log10(p_min), math.log10(p_max), int(points))


def eve_leakage(signal_power, r0, h_tilde):
    """Information an eavesdropper with channel `h_tilde` gets about the signal.

    The transmitted vector is ``X = Xbar + N`` with ``Xbar ~ CN(0, P/r0 I)``
    and ``N ~ CN(0, I)``, and the eavesdropper sees ``h_tilde X`` without
    noise, so the leakage is

        log2 det(H (P/r0 + 1) H^H) - log2 det(H H^H).

    For a full-row-rank ``h_tilde`` with k rows this equals
    ``k * log2(1 + P/r0)`` whatever the matrix.  A rank-deficient matrix is
    first compressed onto its row space and a warning is issued.

    Parameters
    ----------
    signal_power : float
    r0 : int
    h_tilde : array_like, shape (k, r0)

    Returns
    -------
    float
        Bits per channel use.
    """
    h = as_matrix(h_tilde, "h_tilde", allow_empty=True)
    if h.shape[0] == 0:
        return 0.0
    if h.shape[1] != r0:
        raise DimensionError(f"h_tilde has {h.shape[1]} columns, expected r0={r0}")
    if not signal_power > 0:
        raise InputError("signal power must be positive")
    k = numerical_rank(h)
    if k == 0:
        return 0.0
    if k < h.shape[0]:
        warnings.warn(
            f"eavesdropper channel has rank {k} < {h.shape[0]} rows; using its row space",
            RankDeficientEavesdropperWarning,
            stacklevel=2,
        )
        _, s, v = svd(h, full_matrices=False)
        h = s[:k, np.newaxis] * v[:, :k].conj().T
    kx = (signal_power / r0) * np.eye(r0)
    kn = np.eye(r0)
    _, ld_y = np.linalg.slogdet(h @ (kx + kn) @ h.conj().T)
    _, ld_n = np.linalg.slogdet(h @ kn @ h.conj().T)
    return float((ld_y - ld_n) / math.log(2))


def sample_eavesdropper(n_e, r0, rng, mix=True):
    """Random eavesdropper channel on the r0 reduced coordinates.

    Rows of a Haar unitary, optionally mixed by a random invertible
    ``n_e x n_e`` matrix.  With ``n_e > r0`` the extra rows are random
    combinations of the first r0.
    """
    k = min(n_e, r0)
    rows = random_unitary(r0, rng)[:k]
    if n_e > k:
        extra = (rng.standard_normal((n_e - k, k)) + 1j * rng.standard_normal((n_e - k, k))) @ rows
        rows = np.vstack([rows, extra])
    if mix and n_e:
        a = rng.standard_normal((n_e, n_e)) + 1j * rng.standard_normal((n_e, n_e))
        rows = a @ rows
    return rows


def _signal_power(pc, p_bar):
    return power_budget(p_bar, pc.s_p, pc.profile.r0)[0]


@dataclass
class RateCurves:
    """Per-message rate curves in bits per use, indexed by `p_bar`."""

    p_bar: np.ndarray
    R0: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    RE: np.ndarray
    dropped: list = field(default_factory=list)

    def series(self, name):
        return getattr(self, name)


def _feasible_points(pc, snr_points):
    keep, dropped = [], []
    for p in np.asarray(snr_points, dtype=float):
        try:
            _signal_power(pc, p)
        except PowerBudgetError:
            dropped.append(float(p))
            continue
        keep.append(float(p))
    if dropped:
        warnings.warn(
            f"dropped {len(dropped)} SNR point(s) below the artificial-noise floor: {dropped}",
            RuntimeWarning,
            stacklevel=3,
        )
    return np.array(keep), dropped


def achievable_rate_curve(alloc, pc, snr_points=DEFAULT_SNR):
    """Rates of every message as the total power `p_bar` varies.

    At each point the power split and the per-channel rate are recomputed;
    each message keeps its d.o.f. share of ``(1 - delta) * R``.  Points whose
    power cannot cover the artificial noise are dropped with a warning.
    """
    p, dropped = _feasible_points(pc, snr_points)
    comps = alloc.components
    weights = [float(w) for w in alloc.weights]
    out = {k: np.zeros(p.size) for k in ("R0", "R1", "R2", "RE")}
    for i, pb in enumerate(p):
        signal = _signal_power(pc, pb)
        R = per_channel_rate(signal, pc.profile.r0, pc.s_min)
        for w, c in zip(weights, comps):
            u = (1.0 - c.delta) * R
            d0, d1, d2 = (float(x) for x in c.target)
            out["R0"][i] += w * d0 * u
            out["R1"][i] += w * d1 * u
            out["R2"][i] += w * d2 * u
            out["RE"][i] += w * c.n_e * u
    return RateCurves(p, out["R0"], out["R1"], out["R2"], out["RE"], dropped)


def fit_prelog(p_bar, bits=None, window="top_half"):
    """Slope of `bits` against ``log2(p_bar)``.

    Accepts either two sequences or a single sequence of ``(p_bar, bits)``
    pairs.  With ``window="top_half"`` only the upper ``n - n // 2`` points
    enter the least-squares fit; ``window="all"`` uses every point.
    """
    if bits is None:
        pairs = list(p_bar)
        p_bar = [pt[0] for pt in pairs]
        bits = [pt[1] for pt in pairs]
    p = np.asarray(p_bar, dtype=float)
    b = np.asarray(bits, dtype=float)
    if p.shape != b.shape or p.ndim != 1:
        raise InputError("p_bar and bits must be 1-D sequences of equal length")
    if p.size < 4:
        raise InputError(f"need at least 4 points to fit a pre-log, got {p.size}")
    if np.any(np.diff(p) <= 0) or p[0] <= 0:
        raise InputError("p_bar must be positive and strictly increasing")
    if window == "top_half":
        start = p.size // 2
    elif window == "all":
        start = 0
    else:
        raise InputError(f"unknown fit window {window!r}")
    x = np.log2(p[start:])
    slope, _ = np.polyfit(x, b[start:], 1)
    return float(slope)


def _logdet_curve(m, n_t, snr_points):
    m = np.asarray(m)
    if m.shape[0] == 0:
        return np.zeros(len(snr_points))
    g = m @ m.conj().T
    eye = np.eye(m.shape[0])
    return np.array([
        np.linalg.slogdet(eye + (p / n_t) * g)[1] / math.log(2) for p in snr_points
    ])


@dataclass
class ConverseReport:
    """Cut-set pre-logs with worst-case eavesdroppers.

    `bounds` are residual ranks (exact integers) for the receiver-1,
    receiver-2 and cooperative cuts; `slopes` are the fitted pre-logs of
    ``log2 det(I + p_bar/n_t M M^H)`` for the corresponding residuals.
    """

    bounds: tuple
    slopes: tuple
    constructions: tuple
    snr_points: np.ndarray


def converse_prelog(spec, snr_points=DEFAULT_SNR, tol=None):
    """Worst-case eavesdroppers for the three cuts and their log-det slopes."""
    cons = (worst_case_eve_single(spec, 1, tol), worst_case_eve_single(spec, 2, tol),
            worst_case_eve_sum(spec, tol))
    p = np.asarray(snr_points, dtype=float)
    slopes = tuple(fit_prelog(p, _logdet_curve(c.residual, spec.n_t, p)) for c in cons)
    return ConverseReport(tuple(c.residual_rank for c in cons), slopes, cons, p)


@dataclass
class EveSearchResult:
    """Outcome of sampling eavesdroppers against one allocation.

    `leakage` has one row per trial and one column per feasible power;
    `spread` is the largest relative disagreement between trials at any
    single power.
    """

    max_prelog: float
    argmax_trial: int
    seed: int
    prelogs: np.ndarray
    leakage: np.ndarray
    p_bar: np.ndarray
    spread: float

    @property
    def worst_curve(self):
        return self.leakage.max(axis=0)


def _as_parallel(spec_or_pc, tol=None):
    if isinstance(spec_or_pc, ChannelSpec):
        return reduce_to_parallel(spec_or_pc, tol)
    return spec_or_pc


def adversarial_eve_search(spec, alloc, trials=100, seed=0, snr_points=DEFAULT_SNR, mix=True):
    """Worst leakage pre-log over randomly drawn eavesdroppers.

    Trial ``i`` draws its eavesdropper from ``default_rng([seed, i])`` so
    results do not depend on evaluation order.  The first trial uses
    orthonormal rows without mixing.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    pc = _as_parallel(spec)
    r0 = pc.profile.r0
    p, _ = _feasible_points(pc, snr_points)
    powers = [_signal_power(pc, pb) for pb in p]
    n_e = alloc.n_e
    leak = np.zeros((trials, p.size))
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        h = sample_eavesdropper(n_e, r0, rng, mix=mix and t > 0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RankDeficientEavesdropperWarning)
            leak[t] = [eve_leakage(P, r0, h) for P in powers]
    prelogs = np.array([fit_prelog(p, row) for row in leak]) if p.size >= 4 else np.full(trials, np.nan)
    ref = np.abs(leak).max(axis=0)
    ref[ref == 0] = 1.0
    spread = float(((leak.max(axis=0) - leak.min(axis=0)) / ref).max()) if p.size else 0.0
    j = int(np.nanargmax(prelogs)) if np.any(np.isfinite(prelogs)) else 0
    return EveSearchResult(float(prelogs[j]), j, seed, prelogs, leak, p, spread)


def _frac_out(x):
    x = Fraction(x)
    return int(x) if x.denominator == 1 else str(x)


@dataclass
class SweepReport:
    """Rate and leakage curves with their fitted pre-logs."""

    target: tuple
    mode: str
    n_e: int
    curves: RateCurves
    leakage: np.ndarray
    fitted_prelogs: dict
    leak_trial: int
    seed: int
    trials: int
    tolerances: Tolerances

    @property
    def snr_points(self):
        return self.curves.p_bar

    def to_dict(self):
        c = self.curves
        return {
            "target": [_frac_out(x) for x in self.target],
            "mode": self.mode,
            "n_e": self.n_e,
            "seed": self.seed,
            "trials": self.trials,
            "leak_trial": self.leak_trial,
            "tolerances": self.tolerances.as_dict(),
            "fitted_prelogs": self.fitted_prelogs,
            "dropped_p_bar": c.dropped,
            "points": [
                {"p_bar": float(c.p_bar[i]), "R0": float(c.R0[i]), "R1": float(c.R1[i]),
                 "R2": float(c.R2[i]), "RE": float(c.RE[i]), "leakage": float(self.leakage[i])}
                for i in range(c.p_bar.size)
            ],
        }

    def to_csv(self, header_lines=()):
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        buf.write("p_bar,R0,R1,R2,RE,leakage\n")
        c = self.curves
        for i in range(c.p_bar.size):
            row = (c.p_bar[i], c.R0[i], c.R1[i], c.R2[i], c.RE[i], self.leakage[i])
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()


def sweep(spec, target, mode=NO_PRIVACY, snr_points=DEFAULT_SNR, trials=100, seed=0,
          delta=DEFAULT_DELTA, tolerances=None):
    """Synthesize a scheme for `target` and evaluate it over `snr_points`."""
    tol = tolerances or Tolerances()
    pc = reduce_to_parallel(spec, tol.rank)
    target = parse_target(target)
    alloc = synthesize(pc, spec.n_e, target, mode, delta)
    curves = achievable_rate_curve(alloc, pc, snr_points)
    search = adversarial_eve_search(pc, alloc, trials, seed, curves.p_bar)
    worst = search.worst_curve
    fits = {}
    if curves.p_bar.size >= 4:
        for k in ("R0", "R1", "R2", "RE"):
            fits[k] = fit_prelog(curves.p_bar, curves.series(k))
        fits["leakage"] = search.max_prelog
    return SweepReport(target, mode, spec.n_e, curves, worst, fits, search.argmax_trial,
                       seed, trials, tol), alloc, pc, search


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class Certificate:
    """Combined achievability, secrecy and converse verdict for one target."""

    passed: bool
    checks: list
    sweep: SweepReport
    converse: ConverseReport
    secrecy: dict

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
            "secrecy_accounting": self.secrecy,
            "converse": {"bounds": list(self.converse.bounds), "slopes": list(self.converse.slopes)},
            "sweep": self.sweep.to_dict(),
        }


def certify(spec, target, mode=NO_PRIVACY, snr_points=DEFAULT_SNR, trials=100, seed=0,
            delta=DEFAULT_DELTA, tolerances=None):
    """Check that `target` is achieved, kept secret, and meets the converse.

    Raises
    ------
    InfeasibleTargetError
        When the target lies outside the region for `mode`.
    """
    tol = tolerances or Tolerances()
    target = parse_target(target)
    pc = reduce_to_parallel(spec, tol.rank)
    reg = build_region(pc.profile, spec.n_e, mode)
    bad = violated_facets(reg, target)
    if bad:
        raise InfeasibleTargetError(f"target is outside the {reg.mode} region", violated=bad)

    report, alloc, pc, search = sweep(spec, target, mode, snr_points, trials, seed, delta, tol)
    fits = report.fitted_prelogs
    checks = []

    if not fits:
        checks.append(Check("sweep", False, "fewer than 4 feasible SNR points"))
    else:
        worst = math.inf
        for pb in report.snr_points:
            reps = check_decodability(synthesize(pc.at_power(pb), spec.n_e, target, mode, delta))
            reps = reps if isinstance(reps, list) else [reps]
            for r in reps:
                vals = [m for m in r.margins.values() if m is not None]
                if r.eve_margin is not None:
                    vals.append(r.eve_margin)
                worst = min([worst] + vals)
        checks.append(Check("decodability", worst > 0, f"smallest margin {worst:.6g} bits/use"))

        errs = [abs(fits[f"R{i}"] - float(target[i])) for i in range(3)]
        checks.append(Check(
            "rate_prelogs", max(errs) <= tol.prelog,
            f"fitted ({fits['R0']:.4f}, {fits['R1']:.4f}, {fits['R2']:.4f}) vs target; max error {max(errs):.4f}",
        ))
        e = abs(fits["RE"] - spec.n_e)
        checks.append(Check("fictitious_prelog", e <= tol.fictitious,
                            f"fitted {fits['RE']:.4f} vs n_e={spec.n_e}"))
        checks.append(Check("leakage_prelog", fits["leakage"] <= spec.n_e + tol.leakage,
                            f"worst fitted {fits['leakage']:.4f} (trial {search.argmax_trial}) vs n_e={spec.n_e}"))
        checks.append(Check("leakage_invariance", search.spread <= tol.invariance,
                            f"relative spread {search.spread:.3e} over {trials} eavesdroppers"))

    conv = converse_prelog(spec, snr_points, tol.rank)
    thm = region_no_privacy(pc.profile, spec.n_e)
    expected = tuple(c.bound for c in thm.constraints)
    slope_err = max(abs(s - b) for s, b in zip(conv.slopes, conv.bounds))
    checks.append(Check(
        "converse", conv.bounds == expected and slope_err <= tol.prelog,
        f"residual ranks {conv.bounds} vs cut bounds {expected}; max slope error {slope_err:.4f}",
    ))
    d0, d1, d2 = target
    sums = (d0 + d1, d0 + d2, d0 + d1 + d2)
    checks.append(Check("within_converse", all(a <= b for a, b in zip(sums, conv.bounds)),
                        f"cut sums {tuple(_frac_out(x) for x in sums)} vs {conv.bounds}"))

    if mode == MUTUAL_PRIVACY:
        ok = True
        for comp in alloc.components:
            ok &= not (comp.coords("A") & observed_coordinates(pc.profile, 2))
            ok &= not (comp.coords("C") & observed_coordinates(pc.profile, 1))
        checks.append(Check("privacy_structure", ok,
                            "codebook A unseen by receiver 2 and codebook C unseen by receiver 1"))

    total = sum(target) + spec.n_e
    leaked = Fraction(spec.n_e)
    secrecy = total - leaked
    checks.append(Check("secrecy_accounting", secrecy == sum(target),
                        f"entropy {total} - leakage {leaked} = {secrecy}"))
    acct = {"total_entropy_prelog": _frac_out(total), "leakage_prelog_bound": _frac_out(leaked),
            "side_information_residual": 0, "secrecy_prelog": _frac_out(secrecy)}

    return Certificate(all(c.passed for c in checks), checks, report, conv, acct)
