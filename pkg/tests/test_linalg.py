import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import cossin

from oracles import gram_rank, gram_singular_values, random_pair
from sdof.errors import DegenerateChannelError, DimensionError, InputError
from sdof.linalg import (
    RankProfile,
    cs_decompose,
    gsvd,
    numerical_rank,
    qr_decompose,
    random_unitary,
    svd,
    unitarity_error,
)


def cgauss(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# --- QR / SVD wrappers ------------------------------------------------------

@pytest.mark.parametrize("shape", [(5, 3), (3, 5), (4, 4), (1, 6), (6, 1)])
def test_qr_reconstructs_with_nonnegative_diagonal(shape):
    rng = np.random.default_rng(0)
    a = cgauss(rng, *shape)
    q, r = qr_decompose(a)
    assert np.allclose(q @ r, a, atol=1e-12)
    assert unitarity_error(q) < 1e-12
    d = np.diagonal(r)
    assert np.all(np.abs(d.imag) < 1e-14) and np.all(d.real >= 0)
    assert np.allclose(np.tril(r, -1), 0)


def test_svd_values_match_gram_eigenvalues():
    rng = np.random.default_rng(1)
    for _ in range(20):
        m, n = rng.integers(1, 9, size=2)
        a = cgauss(rng, m, n)
        u, s, v = svd(a, full_matrices=False)
        assert np.allclose(u * s @ v.conj().T, a, atol=1e-12)
        k = min(m, n)
        assert np.allclose(s, gram_singular_values(a)[:k], atol=1e-7)


def test_svd_rejects_nan():
    with pytest.raises(InputError):
        svd(np.array([[1.0, np.nan]]))


def test_rank_of_zero_matrix():
    assert numerical_rank(np.zeros((3, 4))) == 0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_numerical_rank_matches_gram_oracle(k):
    rng = np.random.default_rng(k)
    a = cgauss(rng, 6, k) @ cgauss(rng, k, 5)
    assert numerical_rank(a) == gram_rank(a) == k


def test_explicit_rank_tolerance():
    a = np.diag([1.0, 1e-3, 1e-9])
    assert numerical_rank(a, tol=1e-6) == 2
    assert numerical_rank(a, tol=1e-12) == 3
    with pytest.raises(InputError):
        numerical_rank(a, tol=-1)


# --- rank profile -------------------------------------------------------------

def test_rank_profile_derived_fields():
    pr = RankProfile(2, 2, 3)
    assert (pr.s, pr.rt1, pr.rt2) == (1, 1, 1)
    assert RankProfile.from_common(4, 4, 3) == RankProfile(4, 4, 5)
    assert pr.swapped() == pr
    assert RankProfile(3, 1, 3).swapped() == RankProfile(1, 3, 3)


@pytest.mark.parametrize("bad", [(2, 2, 5), (3, 1, 2), (-1, 1, 1), (1.5, 1, 2)])
def test_rank_profile_rejects_inconsistent(bad):
    with pytest.raises(InputError):
        RankProfile(*bad)


# --- CS decomposition ---------------------------------------------------------

def _check_cs(q1, q2, cs):
    assert np.allclose(cs.u1 @ cs.c @ cs.v1.conj().T, q1, atol=1e-10)
    assert np.allclose(cs.u2 @ cs.s @ cs.v1.conj().T, q2, atol=1e-10)
    for m in (cs.u1, cs.u2, cs.v1):
        assert unitarity_error(m) < 1e-10
    c, s = cs.cosines, cs.sines
    assert np.allclose(c**2 + s**2, 1, atol=1e-10)
    assert np.all(np.diff(c) <= 1e-12)


@settings(max_examples=60, deadline=None)
@given(
    m1=st.integers(1, 6),
    m2=st.integers(1, 6),
    n=st.integers(1, 6),
    seed=st.integers(0, 2**31 - 1),
)
def test_cs_decomposition_property(m1, m2, n, seed):
    if n > m1 + m2:
        n = m1 + m2
    rng = np.random.default_rng(seed)
    q = random_unitary(m1 + m2, rng)[:, :n]
    cs = cs_decompose(q[:m1], q[m1:])
    _check_cs(q[:m1], q[m1:], cs)


@pytest.mark.parametrize("m1,m2,n", [(3, 3, 3), (4, 2, 3), (2, 5, 4), (5, 5, 2)])
def test_cs_values_match_scipy_cossin(m1, m2, n):
    rng = np.random.default_rng(m1 * 100 + m2 * 10 + n)
    full = random_unitary(m1 + m2, rng)  # completes the thin factor
    q = full[:, :n]
    cs = cs_decompose(q[:m1], q[m1:])
    _, csm, _ = cossin(full, p=m1, q=n)
    # the (m1, n) block of LAPACK's middle factor is diagonal and holds the cosines
    ref = np.zeros(n)
    k = min(m1, n)
    ref[:k] = np.abs(np.diagonal(csm[:m1, :n]))[:k]
    assert np.allclose(np.sort(cs.cosines), np.sort(ref), atol=1e-10)


def test_cs_small_sines_keep_relative_accuracy():
    # angles spanning many orders of magnitude
    theta = np.array([1e-9, 1e-5, 0.3, 1.2, np.pi / 2 - 1e-7])
    rng = np.random.default_rng(3)
    n = theta.size
    ua, ub, v = (random_unitary(n, rng) for _ in range(3))
    q1 = ua @ np.diag(np.cos(theta)) @ v.conj().T
    q2 = ub @ np.diag(np.sin(theta)) @ v.conj().T
    cs = cs_decompose(q1, q2)
    _check_cs(q1, q2, cs)
    expect = np.sort(np.sin(theta))
    got = np.sort(cs.sines)
    assert np.allclose(got / expect, 1, rtol=1e-6)


# --- GSVD ---------------------------------------------------------------------

def test_gsvd_on_shifted_identities():
    h1 = np.array([[1, 0, 0], [0, 1, 0]], dtype=complex)
    h2 = np.array([[0, 1, 0], [0, 0, 1]], dtype=complex)
    f = gsvd(h1, h2)
    assert f.profile.as_dict() == {"r1": 2, "r2": 2, "r0": 3, "s": 1, "rt1": 1, "rt2": 1}
    assert np.allclose(f.s1, [2**-0.5]) and np.allclose(f.s2, [2**-0.5])
    # hand computation: the stack has Gram matrix diag(1, 2, 1)
    assert np.allclose(np.sort(np.linalg.svd(f.p, compute_uv=False)), [1, 1, np.sqrt(2)])
    assert max(f.residuals(h1, h2)) < 1e-14


def test_gsvd_equal_channels_are_all_common():
    eye = np.eye(3, dtype=complex)
    f = gsvd(eye, 2 * eye)
    assert (f.profile.s, f.profile.rt1, f.profile.rt2) == (3, 0, 0)
    # gains follow the angle between the two stacked blocks
    assert np.allclose(f.s1, 1 / np.sqrt(5)) and np.allclose(f.s2, 2 / np.sqrt(5))


def test_gsvd_layout_and_unitarity():
    rng = np.random.default_rng(5)
    h1 = cgauss(rng, 4, 3) @ cgauss(rng, 3, 6)
    h2 = cgauss(rng, 5, 6)
    f = gsvd(h1, h2)
    pr = f.profile
    assert (pr.r1, pr.r2, pr.r0) == (3, 5, 6)
    for m in (f.u, f.v, f.w, f.q):
        assert unitarity_error(m) < 1e-10
    assert np.allclose(np.tril(f.r, -1), 0)
    gram = f.sigma1.conj().T @ f.sigma1 + f.sigma2.conj().T @ f.sigma2
    assert np.allclose(gram, np.eye(pr.r0), atol=1e-10)
    assert np.all(np.diff(f.s1) <= 1e-12)
    # Sigma2 entries live on the bottom-aligned diagonal only
    mask = np.zeros_like(f.sigma2, dtype=bool)
    for j in range(pr.r0):
        mask[f.sigma2.shape[0] - pr.r0 + j, j] = True
    assert np.all(f.sigma2[~mask] == 0)
    assert max(f.residuals(h1, h2)) < 1e-12


def test_gsvd_random_pairs_against_rank_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        h1, h2, built = random_pair(rng)
        f = gsvd(h1, h2)
        pr = f.profile
        oracle = (gram_rank(h1), gram_rank(h2), gram_rank(np.vstack([h1, h2])))
        assert (pr.r1, pr.r2, pr.r0) == oracle == built
        assert max(f.residuals(h1, h2)) < 1e-8


def test_gsvd_flags_ambiguous_rank():
    h1 = np.diag([1.0, 1e-15]).astype(complex)
    h2 = np.eye(2, dtype=complex)
    assert gsvd(h1, h2).flagged


def test_gsvd_errors():
    with pytest.raises(DimensionError):
        gsvd(np.eye(2), np.eye(3))
    with pytest.raises(DegenerateChannelError):
        gsvd(np.zeros((2, 2)), np.eye(2))
