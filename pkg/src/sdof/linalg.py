"""Dense complex linear algebra for the broadcast-channel reduction.

QR and SVD are thin wrappers over LAPACK (through numpy) that enforce the
conventions used everywhere else in the package: complex128 arrays, finite
entries, nonnegative real diagonals.  The CS decomposition and the
generalized SVD are built on top of them.

The GSVD follows the layout

    U^H H1 Q = Sigma1 [W^H R, 0]
    V^H H2 Q = Sigma2 [W^H R, 0]

with ``Sigma1 = diag(I_rt1, S1, 0)`` aligned top-left and
``Sigma2 = diag(0, S2, I_rt2)`` aligned bottom-right, so that the r0
columns split into rt1 directions seen only by the first receiver, s
common directions and rt2 directions seen only by the second receiver.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegenerateChannelError, DimensionError, InputError, NumericalError

__all__ = [
    "TOL_UNIT",
    "TOL_REC",
    "as_matrix",
    "qr_decompose",
    "svd",
    "default_rank_tol",
    "numerical_rank",
    "RankProfile",
    "CSDecomposition",
    "cs_decompose",
    "GsvdFactors",
    "gsvd",
    "random_unitary",
    "unitarity_error",
]

TOL_UNIT = 1e-10
TOL_REC = 1e-8

_EPS = np.finfo(float).eps


def as_matrix(a, name="matrix", allow_empty=False):
    """Return `a` as a finite complex128 2-D array.

    Parameters
    ----------
    a : array_like
    name : str
        Used in error messages.
    allow_empty : bool
        Accept zero rows (or columns).  Only a few internal callers need
        this; the public factorizations require nonempty input.
    """
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not allow_empty and (arr.shape[0] < 1 or arr.shape[1] < 1):
        raise DimensionError(f"{name} must be nonempty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


def unitarity_error(m):
    """Frobenius norm of ``M^H M - I``."""
    m = np.asarray(m)
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[1])))


def qr_decompose(a):
    """Reduced QR factorization with a nonnegative real diagonal in R.

    Parameters
    ----------
    a : array_like, shape (m, n)

    Returns
    -------
    q : ndarray, shape (m, k)
        Orthonormal columns, ``k = min(m, n)``.
    r : ndarray, shape (k, n)
        Upper triangular with ``r[j, j] >= 0``.
    """
    a = as_matrix(a, "A")
    q, r = np.linalg.qr(a, mode="reduced")
    d = np.diagonal(r)
    mag = np.abs(d)
    phase = np.where(mag > 0, d / np.where(mag > 0, mag, 1.0), 1.0)
    q = q * phase[np.newaxis, :]
    r = r * phase.conj()[:, np.newaxis]
    return q, r


def svd(a, full_matrices=True):
    """Singular value decomposition ``A = U diag(s) V^H``.

    Returns ``(U, s, V)`` with `s` descending.  Note that `V` is returned,
    not its conjugate transpose.
    """
    a = as_matrix(a, "A")
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"SVD did not converge within the LAPACK iteration cap for a {a.shape} "
            f"matrix with Frobenius norm {np.linalg.norm(a):.3e}: {exc}"
        ) from exc
    return u, s, vh.conj().T


def default_rank_tol(shape, sigma_max):
    """``max(rows, cols) * eps * sigma_max``."""
    return max(shape) * _EPS * float(sigma_max)


def numerical_rank(a, tol=None):
    """Number of singular values of `a` strictly above `tol`.

    With ``tol=None`` the threshold is ``max(rows, cols) * eps * sigma_max``.
    A zero matrix has rank 0.
    """
    a = as_matrix(a, "A")
    if tol is not None and tol < 0:
        raise InputError("rank tolerance must be nonnegative")
    s = np.linalg.svd(a, compute_uv=False)
    if tol is None:
        tol = default_rank_tol(a.shape, s[0] if s.size else 0.0)
    return int(np.count_nonzero(s > tol))


@dataclass(frozen=True)
class RankProfile:
    """Ranks of the two legitimate channels and of their stack.

    ``s = r1 + r2 - r0`` is the dimension of the intersection of the two row
    spaces; ``rt1 = r1 - s`` and ``rt2 = r2 - s`` count the private
    directions of each receiver.
    """

    r1: int
    r2: int
    r0: int

    def __post_init__(self):
        for name in ("r1", "r2", "r0"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise InputError(f"{name} must be a nonnegative integer, got {v!r}")
        if not max(self.r1, self.r2) <= self.r0 <= self.r1 + self.r2:
            raise InputError(
                f"inconsistent ranks r1={self.r1}, r2={self.r2}, r0={self.r0}: "
                "need max(r1, r2) <= r0 <= r1 + r2"
            )

    @classmethod
    def from_common(cls, r1, r2, s):
        return cls(r1, r2, r1 + r2 - s)

    @property
    def s(self):
        return self.r1 + self.r2 - self.r0

    @property
    def rt1(self):
        return self.r1 - self.s

    @property
    def rt2(self):
        return self.r2 - self.s

    def swapped(self):
        return RankProfile(self.r2, self.r1, self.r0)

    def as_dict(self):
        return {"r1": self.r1, "r2": self.r2, "r0": self.r0,
                "s": self.s, "rt1": self.rt1, "rt2": self.rt2}


class CSDecomposition(NamedTuple):
    """``Q1 = U1 C V1^H`` and ``Q2 = U2 S V1^H``.

    `C` is (m1, n) with the cosines on its main diagonal; `S` is (m2, n)
    with the sines on the diagonal aligned to its bottom-right corner.
    Columns are ordered by nonincreasing cosine.
    """

    u1: np.ndarray
    u2: np.ndarray
    v1: np.ndarray
    c: np.ndarray
    s: np.ndarray

    @property
    def cosines(self):
        m1, n = self.c.shape
        out = np.zeros(n)
        k = min(m1, n)
        out[:k] = np.real(np.diagonal(self.c))[:k]
        return out

    @property
    def sines(self):
        m2, n = self.s.shape
        out = np.zeros(n)
        for j in range(n):
            row = m2 - n + j
            if row >= 0:
                out[j] = np.real(self.s[row, j])
        return out


def cs_decompose(q1, q2, tol=1e-8):
    """CS decomposition of a stacked matrix with orthonormal columns.

    The cosines come from an SVD of `q1`.  Columns whose sine is at least
    ``1/sqrt(2)`` take their left vectors directly from ``q2 V``; for the
    rest the sines are recovered from a second SVD of the trailing block of
    a QR factorization of ``q2 V``, which keeps small sines accurate.

    Parameters
    ----------
    q1 : array_like, shape (m1, n)
    q2 : array_like, shape (m2, n)
    tol : float
        Allowed ``||Q^H Q - I||_F`` for the stacked input.

    Returns
    -------
    CSDecomposition
    """
    q1 = as_matrix(q1, "Q1")
    q2 = as_matrix(q2, "Q2")
    m1, n = q1.shape
    m2, n2 = q2.shape
    if n != n2:
        raise DimensionError(f"Q1 has {n} columns but Q2 has {n2}")
    err = unitarity_error(np.vstack([q1, q2]))
    if err > tol:
        raise InputError(f"stacked [Q1; Q2] is not orthonormal: ||Q^H Q - I||_F = {err:.3e}")

    ua, ca, v = svd(q1, full_matrices=True)
    p1 = min(m1, n)
    c = np.zeros(n)
    c[:p1] = ca
    k = int(np.count_nonzero(c > np.sqrt(0.5)))
    t = n - k
    if t > m2:
        raise NumericalError(f"{t} columns with large sine cannot fit in {m2} rows")

    w = q2 @ v
    z, tmat = np.linalg.qr(np.hstack([w[:, k:], w[:, :k]]), mode="complete")
    d = np.diagonal(tmat)[:t]
    tail_s = np.abs(d)
    phase = np.where(tail_s > 0, d / np.where(tail_s > 0, tail_s, 1.0), 1.0)
    z_tail = z[:, :t] * phase[np.newaxis, :]

    b = tmat[t:, t:]
    if b.size:
        ub, sig, vb = svd(b, full_matrices=True)
    else:
        ub = np.eye(m2 - t, dtype=complex)
        sig = np.zeros(0)
        vb = np.eye(k, dtype=complex)
    head_s = np.zeros(k)
    head_s[: sig.size] = sig
    v_head = (v[:, :k] @ vb)[:, ::-1]
    head_s = head_s[::-1]
    x = q1 @ v_head
    head_c = np.linalg.norm(x, axis=0)
    u_head = x / np.where(head_c > 0, head_c, 1.0)

    cos = np.concatenate([head_c, c[k:]])
    sin = np.concatenate([head_s, tail_s])
    v1 = np.hstack([v_head, v[:, k:]])
    u1 = np.hstack([u_head, ua[:, k:]])
    u2 = np.hstack([(z[:, t:] @ ub)[:, ::-1], z_tail])

    cmat = np.zeros((m1, n), dtype=complex)
    idx = np.arange(p1)
    cmat[idx, idx] = cos[:p1]
    smat = np.zeros((m2, n), dtype=complex)
    for j in range(n):
        row = m2 - n + j
        if row >= 0:
            smat[row, j] = sin[j]
    return CSDecomposition(u1, u2, v1, cmat, smat)


@dataclass(frozen=True)
class GsvdFactors:
    """Factors of the generalized SVD of a channel pair.

    Attributes
    ----------
    u, v : ndarray
        Unitary receive-side factors, (N_R1, N_R1) and (N_R2, N_R2).
    w : ndarray
        Unitary (r0, r0) factor.
    q : ndarray
        Unitary (N_T, N_T) transmit-side factor.
    r : ndarray
        Nonsingular upper triangular (r0, r0) factor.
    sigma1, sigma2 : ndarray
        Structured gain matrices, (N_R1, r0) and (N_R2, r0).
    profile : RankProfile
    rank_tol : tuple of float
        Thresholds used for rank(H1), rank(H2) and rank([H1; H2]).
    warnings : tuple of str
        Nonempty when some singular value sits within a factor of 10 of
        its rank threshold, or when snapping the CS values to the block
        structure moved an entry by more than ``sqrt(eps)``.
    """

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    q: np.ndarray
    r: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    profile: RankProfile
    rank_tol: tuple
    warnings: tuple = field(default=())

    @property
    def flagged(self):
        return bool(self.warnings)

    @property
    def p(self):
        """``W^H R``, the r0 x r0 input transform left after the reduction."""
        return self.w.conj().T @ self.r

    @property
    def s1(self):
        """Diagonal of the common block of `sigma1` (descending)."""
        pr = self.profile
        j = np.arange(pr.rt1, pr.rt1 + pr.s)
        return np.real(self.sigma1[j, j])

    @property
    def s2(self):
        """Diagonal of the common block of `sigma2`, aligned with `s1`."""
        pr = self.profile
        n_r2 = self.sigma2.shape[0]
        j = np.arange(pr.rt1, pr.rt1 + pr.s)
        return np.real(self.sigma2[n_r2 - pr.r0 + j, j])

    def residuals(self, h1, h2):
        """Relative reconstruction residuals for H1 and H2.

        Returns ``||U^H H1 Q - Sigma1 [W^H R, 0]||_F / ||H1||_F`` and the
        analogous quantity for H2.
        """
        h1 = as_matrix(h1, "H1")
        h2 = as_matrix(h2, "H2")
        n_t = self.q.shape[0]
        core = np.zeros((self.profile.r0, n_t), dtype=complex)
        core[:, : self.profile.r0] = self.p
        e1 = np.linalg.norm(self.u.conj().T @ h1 @ self.q - self.sigma1 @ core)
        e2 = np.linalg.norm(self.v.conj().T @ h2 @ self.q - self.sigma2 @ core)
        return float(e1 / np.linalg.norm(h1)), float(e2 / np.linalg.norm(h2))


def _near_threshold(singvals, tol):
    return bool(np.any((singvals > tol / 10.0) & (singvals < tol * 10.0)))


def gsvd(h1, h2, tol=None):
    """Generalized SVD of two matrices with a common column count.

    The stack ``[H1; H2]`` is first compressed to its r0-dimensional row
    space with an SVD (this fixes `q`), the compressed stack is
    QR-factored (this fixes `r`), and the orthonormal factor is split and
    passed through :func:`cs_decompose` (this fixes `u`, `v`, `w` and the
    gains).  Ranks come from :func:`numerical_rank`, and the CS values are
    snapped to the exact block structure those ranks imply.

    Parameters
    ----------
    h1 : array_like, shape (N_R1, N_T)
    h2 : array_like, shape (N_R2, N_T)
    tol : float, optional
        Absolute rank threshold applied to all three rank decisions.  By
        default each matrix uses ``max(rows, cols) * eps * sigma_max``.

    Returns
    -------
    GsvdFactors

    Raises
    ------
    DimensionError
        Column counts differ.
    DegenerateChannelError
        Either matrix is numerically zero.
    """
    h1 = as_matrix(h1, "H1")
    h2 = as_matrix(h2, "H2")
    if h1.shape[1] != h2.shape[1]:
        raise DimensionError(f"H1 has {h1.shape[1]} columns but H2 has {h2.shape[1]}")
    n_r1, n_t = h1.shape
    n_r2 = h2.shape[0]
    stack = np.vstack([h1, h2])

    sv1 = np.linalg.svd(h1, compute_uv=False)
    sv2 = np.linalg.svd(h2, compute_uv=False)
    _, sv0, q = svd(stack, full_matrices=True)
    tols = tuple(
        default_rank_tol(m.shape, sv[0]) if tol is None else float(tol)
        for m, sv in ((h1, sv1), (h2, sv2), (stack, sv0))
    )
    r1 = int(np.count_nonzero(sv1 > tols[0]))
    r2 = int(np.count_nonzero(sv2 > tols[1]))
    r0 = int(np.count_nonzero(sv0 > tols[2]))
    if r1 == 0 or r2 == 0:
        raise DegenerateChannelError("GSVD needs both channel matrices to be nonzero")
    try:
        profile = RankProfile(r1, r2, r0)
    except InputError as exc:
        raise NumericalError(f"rank decisions are mutually inconsistent: {exc}") from exc

    warnings = []
    for label, sv, t in (("H1", sv1, tols[0]), ("H2", sv2, tols[1]), ("[H1; H2]", sv0, tols[2])):
        if _near_threshold(sv, t):
            warnings.append(f"a singular value of {label} lies within 10x of the rank tolerance {t:.3e}")

    x = stack @ q[:, :r0]
    qx, r = qr_decompose(x)
    cs = cs_decompose(qx[:n_r1], qx[n_r1:])
    cos = cs.cosines
    sin = cs.sines

    rt1, s = profile.rt1, profile.s
    sigma1 = np.zeros((n_r1, r0), dtype=complex)
    sigma2 = np.zeros((n_r2, r0), dtype=complex)
    snap = 0.0
    for j in range(r0):
        row2 = n_r2 - r0 + j
        if j < rt1:
            sigma1[j, j] = 1.0
            snap = max(snap, abs(cos[j] - 1.0))
        elif j < rt1 + s:
            sigma1[j, j] = cos[j]
            sigma2[row2, j] = sin[j]
            if min(cos[j], sin[j]) <= np.sqrt(_EPS):
                warnings.append(f"common gain pair ({cos[j]:.3e}, {sin[j]:.3e}) is nearly private")
        else:
            sigma2[row2, j] = 1.0
            snap = max(snap, abs(sin[j] - 1.0))
    if snap > np.sqrt(_EPS):
        warnings.append(f"snapping CS values to the rank structure moved an entry by {snap:.3e}")

    return GsvdFactors(
        u=cs.u1, v=cs.u2, w=cs.v1, q=q, r=r,
        sigma1=sigma1, sigma2=sigma2, profile=profile,
        rank_tol=tols, warnings=tuple(warnings),
    )


def random_unitary(n, rng):
    """Haar-distributed n x n unitary from a numpy Generator."""
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, _ = qr_decompose(g)
    return q
