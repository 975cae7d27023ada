"""Channel description, reduction to parallel channels, converse cuts.

The legitimate receivers see ``Y_t = H_t X + Z_t`` with unit-variance
noise; the eavesdropper sees a noiseless ``H~ X`` with at most ``n_e``
rows.  After the GSVD the input splits into ``rt1`` coordinates seen only
by receiver 1, ``s`` common coordinates and ``rt2`` coordinates seen only
by receiver 2, in that order.
"""

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InputError
from .linalg import RankProfile, as_matrix, default_rank_tol, gsvd, numerical_rank, random_unitary, svd

__all__ = [
    "ChannelSpec",
    "ParallelChannel",
    "EveConstruction",
    "rank_profile",
    "reduce_to_parallel",
    "worst_case_eve_single",
    "worst_case_eve_sum",
    "spec_to_dict",
    "spec_from_dict",
    "load_channel",
    "save_channel",
    "input_hash",
    "generate_random_channel",
    "channel_from_profile",
]

SCHEMA_FIELDS = ("n_t", "n_r1", "n_r2", "n_e", "p_bar", "h1", "h2")

# Row subsets are searched exhaustively only below this many rows.
_EXHAUSTIVE_ROWS = 12


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Two-receiver MIMO broadcast channel with an eavesdropper budget.

    Parameters
    ----------
    n_t, n_r1, n_r2 : int
        Antenna counts at the transmitter and the two receivers.
    n_e : int
        Upper bound on the eavesdropper's antennas (rank of its channel).
    h1, h2 : array_like
        Channel matrices, shapes ``(n_r1, n_t)`` and ``(n_r2, n_t)``.
    p_bar : float
        Average transmit power, in units of the receiver noise variance.
    """

    n_t: int
    n_r1: int
    n_r2: int
    n_e: int
    h1: np.ndarray
    h2: np.ndarray
    p_bar: float = 1e6

    def __post_init__(self):
        for name in ("n_t", "n_r1", "n_r2", "n_e"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise InputError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if min(self.n_t, self.n_r1, self.n_r2) < 1:
            raise DimensionError("antenna counts n_t, n_r1, n_r2 must be positive")
        if self.n_e < 0:
            raise InputError("n_e must be nonnegative")
        p_bar = float(self.p_bar)
        if not (math.isfinite(p_bar) and p_bar > 0):
            raise InputError(f"p_bar must be a positive finite number, got {self.p_bar!r}")
        object.__setattr__(self, "p_bar", p_bar)
        h1 = as_matrix(self.h1, "h1")
        h2 = as_matrix(self.h2, "h2")
        if h1.shape != (self.n_r1, self.n_t):
            raise DimensionError(f"h1 has shape {h1.shape}, expected {(self.n_r1, self.n_t)}")
        if h2.shape != (self.n_r2, self.n_t):
            raise DimensionError(f"h2 has shape {h2.shape}, expected {(self.n_r2, self.n_t)}")
        h1.setflags(write=False)
        h2.setflags(write=False)
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "h2", h2)

    @property
    def stacked(self):
        return np.vstack([self.h1, self.h2])

    def with_changes(self, **kw):
        d = {k: getattr(self, k) for k in SCHEMA_FIELDS}
        d.update(kw)
        return ChannelSpec(**d)

    def regime_warnings(self, tol=None):
        """Non-fatal notes when the eavesdropper budget degenerates the region."""
        out = []
        if self.n_e >= self.n_t:
            out.append(f"n_e={self.n_e} >= n_t={self.n_t}: no secrecy is possible")
        r1 = numerical_rank(self.h1, tol)
        r2 = numerical_rank(self.h2, tol)
        if self.n_e >= min(r1, r2):
            out.append(
                f"n_e={self.n_e} >= min(rank H1, rank H2)={min(r1, r2)}: "
                "at least one receiver has no secret dimensions"
            )
        return out


@dataclass(frozen=True, eq=False)
class ParallelChannel:
    """The channel after GSVD reduction and gain flattening.

    Every nonzero gain is replaced by `s_min`, and the transmit power is
    rescaled by ``s_p**2`` so that the power constraint on the original
    input still holds.
    """

    profile: RankProfile
    s_min: float
    s_p: float
    p_bar: float
    factors: object = field(repr=False)

    @property
    def effective_power(self):
        return self.p_bar / self.s_p**2

    @property
    def private1(self):
        return range(0, self.profile.rt1)

    @property
    def common(self):
        return range(self.profile.rt1, self.profile.rt1 + self.profile.s)

    @property
    def private2(self):
        return range(self.profile.rt1 + self.profile.s, self.profile.r0)

    def observed_by(self, receiver):
        """Coordinates of the r0-dim input seen by receiver 1 or 2."""
        return observed_coordinates(self.profile, receiver)

    def at_power(self, p_bar):
        return ParallelChannel(self.profile, self.s_min, self.s_p, float(p_bar), self.factors)


def observed_coordinates(profile, receiver):
    if receiver == 1:
        return set(range(0, profile.rt1 + profile.s))
    if receiver == 2:
        return set(range(profile.rt1, profile.r0))
    raise InputError(f"receiver must be 1 or 2, got {receiver!r}")


@dataclass(frozen=True, eq=False)
class EveConstruction:
    """A worst-case eavesdropper for one cut of the converse.

    Attributes
    ----------
    h_tilde : ndarray
        The eavesdropper's channel, at most ``n_e`` rows.
    residual : ndarray
        What the cut's receivers see beyond the eavesdropper.
    residual_rank : int
    cut : {"user1", "user2", "sum"}
    rows : tuple of int or None
        Rows of the cut matrix given to the eavesdropper, or None when a
        plain row split could not reach the target rank and the rows were
        first rotated onto the left singular basis.
    """

    h_tilde: np.ndarray
    residual: np.ndarray
    residual_rank: int
    cut: str
    rows: tuple = None

    @property
    def rotated(self):
        return self.rows is None


def rank_profile(spec, tol=None):
    """Ranks of H1, H2 and the stack, with ``s = r1 + r2 - r0``."""
    return RankProfile(
        numerical_rank(spec.h1, tol),
        numerical_rank(spec.h2, tol),
        numerical_rank(spec.stacked, tol),
    )


def reduce_to_parallel(spec, tol=None):
    """GSVD-reduce `spec` to flattened parallel channels.

    Raises
    ------
    DegenerateChannelError
        If either channel matrix has rank zero.
    """
    f = gsvd(spec.h1, spec.h2, tol=tol)
    gains = np.concatenate([
        np.abs(np.diagonal(f.sigma1)),
        np.abs(f.sigma2[f.sigma2 != 0]),
    ])
    gains = gains[gains > 0]
    s_min = float(gains.min())
    s_p = float(np.linalg.svd(f.p, compute_uv=False)[0])
    return ParallelChannel(f.profile, s_min, s_p, spec.p_bar, f)


def _residual_rank(m, rows_out, tol):
    keep = [i for i in range(m.shape[0]) if i not in rows_out]
    if not keep:
        return 0
    return numerical_rank(m[keep], tol)


def _split_rows(m, n_e, cut, tol=None):
    rows = m.shape[0]
    n_t = m.shape[1]
    empty = np.zeros((0, n_t), dtype=complex)
    # one threshold for the whole cut; a submatrix of roundoff must not
    # look full rank relative to its own tiny norm
    if tol is None:
        tol = default_rank_tol(m.shape, np.linalg.norm(m, 2))
    if n_e == 0:
        return EveConstruction(empty, m.copy(), numerical_rank(m, tol), cut, ())
    if n_e >= rows:
        return EveConstruction(m.copy(), empty, 0, cut, tuple(range(rows)))

    target = max(numerical_rank(m, tol) - n_e, 0)

    # greedy: move the row whose removal lowers the residual rank the most
    chosen = []
    for _ in range(n_e):
        best = min(
            (i for i in range(rows) if i not in chosen),
            key=lambda i: (_residual_rank(m, chosen + [i], tol), i),
        )
        chosen.append(best)
    found = tuple(sorted(chosen))
    best_rank = _residual_rank(m, found, tol)

    if best_rank > target and rows < _EXHAUSTIVE_ROWS:
        for combo in itertools.combinations(range(rows), n_e):
            rk = _residual_rank(m, combo, tol)
            if rk < best_rank:
                found, best_rank = combo, rk
                if rk == target:
                    break

    if best_rank == target:
        keep = [i for i in range(rows) if i not in found]
        return EveConstruction(m[list(found)], m[keep], best_rank, cut, found)

    # rotate onto the left singular basis: the first n_e rotated rows carry
    # the strongest directions, the rest have rank exactly max(r - n_e, 0)
    u, _, _ = svd(m, full_matrices=True)
    mr = u.conj().T @ m
    return EveConstruction(mr[:n_e], mr[n_e:], numerical_rank(mr[n_e:], tol), cut, None)


def worst_case_eve_single(spec, user, tol=None):
    """Eavesdropper that observes ``n_e`` rows of one receiver's channel.

    The remaining rows of that receiver have rank ``max(r_i - n_e, 0)``.
    """
    if user in (1, "1", "user1"):
        return _split_rows(spec.h1, spec.n_e, "user1", tol)
    if user in (2, "2", "user2"):
        return _split_rows(spec.h2, spec.n_e, "user2", tol)
    raise InputError(f"user must be 1 or 2, got {user!r}")


def worst_case_eve_sum(spec, tol=None):
    """Eavesdropper for the cooperative cut on the stacked channel."""
    return _split_rows(spec.stacked, spec.n_e, "sum", tol)


def _matrix_to_json(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _matrix_from_json(rows, name):
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} must be a 2-D array of [re, im] pairs", kind="schema_violation") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InputError(f"{name} must be a 2-D array of [re, im] pairs, got shape {arr.shape}", kind="schema_violation")
    return arr[..., 0] + 1j * arr[..., 1]


def spec_to_dict(spec):
    return {
        "n_t": spec.n_t,
        "n_r1": spec.n_r1,
        "n_r2": spec.n_r2,
        "n_e": spec.n_e,
        "p_bar": spec.p_bar,
        "h1": _matrix_to_json(spec.h1),
        "h2": _matrix_to_json(spec.h2),
    }


def spec_from_dict(d):
    """Build a ChannelSpec from the JSON object form.

    Returns
    -------
    spec : ChannelSpec
    warnings : list of str
        One entry per unknown top-level field; such fields are dropped.
    """
    if not isinstance(d, dict):
        raise InputError("channel description must be a JSON object", kind="schema_violation")
    missing = [k for k in SCHEMA_FIELDS if k not in d]
    if missing:
        raise InputError(f"channel description is missing fields: {', '.join(missing)}", kind="schema_violation")
    warnings = [f"unknown field {k!r} ignored" for k in d if k not in SCHEMA_FIELDS]
    for k in ("n_t", "n_r1", "n_r2", "n_e"):
        if not isinstance(d[k], int) or isinstance(d[k], bool):
            raise InputError(f"{k} must be an integer", kind="schema_violation")
    if not isinstance(d["p_bar"], (int, float)) or isinstance(d["p_bar"], bool):
        raise InputError("p_bar must be a number", kind="schema_violation")
    spec = ChannelSpec(
        n_t=d["n_t"], n_r1=d["n_r1"], n_r2=d["n_r2"], n_e=d["n_e"],
        h1=_matrix_from_json(d["h1"], "h1"),
        h2=_matrix_from_json(d["h2"], "h2"),
        p_bar=d["p_bar"],
    )
    return spec, warnings


def load_channel(path):
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not valid JSON ({exc})", kind="schema_violation") from exc
    return spec_from_dict(d)


def save_channel(spec, path):
    with open(path, "w") as fh:
        json.dump(spec_to_dict(spec), fh, indent=1)
        fh.write("\n")


def input_hash(spec):
    """SHA-256 of the canonical JSON form of `spec`."""
    blob = json.dumps(spec_to_dict(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _cgauss(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def generate_random_channel(n_t, n_r1, n_r2, seed=0, n_e=1, p_bar=1e6):
    """I.i.d. standard complex Gaussian channel pair, deterministic in `seed`."""
    if min(n_t, n_r1, n_r2) < 1:
        raise DimensionError("antenna counts must be positive")
    rng = np.random.default_rng(seed)
    h1 = _cgauss(rng, (n_r1, n_t))
    h2 = _cgauss(rng, (n_r2, n_t))
    return ChannelSpec(n_t, n_r1, n_r2, n_e, h1, h2, p_bar)


def channel_from_profile(profile, n_e, seed=0, p_bar=1e6, mix=True):
    """A channel pair realizing a prescribed rank profile.

    Receiver 1 sees the first ``r1`` coordinates and receiver 2 the last
    ``r2`` coordinates of an ``r0``-dim input, so that exactly ``s``
    coordinates are shared.  With ``mix=True`` the input is rotated by a
    Haar unitary and each receiver's rows by a random invertible matrix.
    A receiver with rank zero gets a single all-zero row.
    """
    pr = profile
    n_t = max(pr.r0, 1)
    rng = np.random.default_rng(seed)
    eye = np.eye(n_t, dtype=complex)
    h1 = eye[: pr.r1] if pr.r1 else np.zeros((1, n_t), dtype=complex)
    h2 = eye[pr.rt1 : pr.r0] if pr.r2 else np.zeros((1, n_t), dtype=complex)
    if mix:
        q = random_unitary(n_t, rng)
        h1 = h1 @ q
        h2 = h2 @ q
        if pr.r1:
            h1 = (_cgauss(rng, (pr.r1, pr.r1)) + 2 * np.eye(pr.r1)) @ h1
        if pr.r2:
            h2 = (_cgauss(rng, (pr.r2, pr.r2)) + 2 * np.eye(pr.r2)) @ h2
    return ChannelSpec(n_t, h1.shape[0], h2.shape[0], n_e, h1, h2, p_bar)
