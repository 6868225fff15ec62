import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hilbertgame import lina
from hilbertgame.games import F_C, F_Q, N_C, N_Q

from conftest import random_hermitian
from golden_matrices import PENNY_REDUCED_EIGENPAIRS, PENNY_REDUCED_NC

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def kron_oracle(a, b):
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def partial_trace_oracle_2(m, da, db, keep):
    if keep == 0:
        out = np.zeros((da, da), dtype=complex)
        for a in range(da):
            for b in range(da):
                out[a, b] = sum(m[a * db + nu, b * db + nu] for nu in range(db))
    else:
        out = np.zeros((db, db), dtype=complex)
        for a in range(db):
            for b in range(db):
                out[a, b] = sum(m[nu * db + a, nu * db + b] for nu in range(da))
    return out


# -- kron ------------------------------------------------------------------

def test_kron_identity():
    assert np.array_equal(lina.kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_scalar_factor():
    b = np.array([[1, 2j], [3, 4]])
    assert np.array_equal(lina.kron([[1]], b), b)


def test_kron_matches_index_loop():
    assert np.array_equal(lina.kron(SX, SZ), kron_oracle(SX, SZ))


def test_kron_rejects_non_finite():
    with pytest.raises(ValueError):
        lina.kron([[np.nan]], [[1]])


@pytest.mark.parametrize("n,m", [(2, 2), (3, 3), (2, 3)])
def test_kron_trace_multiplicative(rng, n, m):
    for _ in range(20):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        b = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        assert np.isclose(np.trace(lina.kron(a, b)), np.trace(a) * np.trace(b), atol=1e-12)


# -- partial trace ---------------------------------------------------------

def test_partial_trace_of_product(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    out = lina.partial_trace(lina.kron(a, b), [2, 2], keep=0)
    np.testing.assert_allclose(out, np.trace(b) * a, atol=1e-13)
    out = lina.partial_trace(lina.kron(a, b), [2, 2], keep=1)
    np.testing.assert_allclose(out, np.trace(a) * b, atol=1e-13)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 2)])
def test_partial_trace_matches_index_sum(rng, dims):
    side = dims[0] * dims[1]
    m = rng.normal(size=(side, side)) + 1j * rng.normal(size=(side, side))
    for keep in (0, 1):
        np.testing.assert_allclose(lina.partial_trace(m, dims, keep),
                                   partial_trace_oracle_2(m, *dims, keep), atol=1e-13)


def test_partial_trace_three_factors(rng):
    dims = (2, 3, 2)
    m = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    out = np.zeros((3, 3), dtype=complex)
    for a in range(3):
        for b in range(3):
            out[a, b] = sum(m[x * 6 + a * 2 + y, x * 6 + b * 2 + y]
                            for x in range(2) for y in range(2))
    np.testing.assert_allclose(lina.partial_trace(m, dims, 1), out, atol=1e-13)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (2, 2, 2)])
def test_partial_trace_preserves_trace(rng, dims):
    side = int(np.prod(dims))
    for _ in range(20):
        m = rng.normal(size=(side, side)) + 1j * rng.normal(size=(side, side))
        for keep in range(len(dims)):
            assert np.isclose(np.trace(lina.partial_trace(m, dims, keep)), np.trace(m), atol=1e-12)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValueError):
        lina.partial_trace(np.eye(4), [2, 3], 0)
    with pytest.raises(ValueError):
        lina.partial_trace(np.eye(4), [2, 2], 2)


# -- eigendecomposition ----------------------------------------------------

def test_eig_diagonal():
    es = lina.eig_hermitian(np.diag([-2, -5, 0, -4]))
    np.testing.assert_array_equal(es.values, [-5, -4, -2, 0])
    expected = np.eye(4)[:, [1, 3, 0, 2]]
    np.testing.assert_allclose(es.vectors, expected, atol=1e-15)


def test_eig_identity():
    np.testing.assert_allclose(lina.eig_hermitian(np.eye(4)).values, np.ones(4))


def test_eig_reduced_penny_matrix():
    es = lina.eig_hermitian(PENNY_REDUCED_NC)
    np.testing.assert_allclose(es.values, [-2, 0, 0, 2], atol=1e-12)
    for value, vec in PENNY_REDUCED_EIGENPAIRS:
        if value == 0:
            continue
        k = int(np.argmin(np.abs(es.values - value)))
        v = vec / np.linalg.norm(vec)
        assert abs(abs(np.vdot(v, es.vectors[:, k])) - 1) < 1e-12
    # canonical phase: top eigenvector is exactly [1, 0, 1, 0]/sqrt(2)
    np.testing.assert_allclose(es.vectors[:, 3], np.array([1, 0, 1, 0]) / math.sqrt(2), atol=1e-12)


def test_eig_zero_eigenspace_spanned():
    es = lina.eig_hermitian(PENNY_REDUCED_NC)
    zero_space = es.vectors[:, 1:3]
    proj = zero_space @ zero_space.conj().T
    for value, vec in PENNY_REDUCED_EIGENPAIRS:
        if value == 0:
            v = vec / np.linalg.norm(vec)
            np.testing.assert_allclose(proj @ v, v, atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(lina.HermiticityError) as info:
        lina.eig_hermitian([[1, 2], [0, 1]])
    assert info.value.asymmetry == pytest.approx(2.0)


def test_eig_symmetrizes_small_noise():
    h = np.array([[1.0, 1e-12], [0.0, 2.0]])
    es = lina.eig_hermitian(h)
    assert es.values[0] == pytest.approx(1.0)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 16), seed=st.integers(0, 2**32 - 1))
def test_eig_reconstruction_property(n, seed):
    h = random_hermitian(np.random.default_rng(seed), n, scale=3.0)
    es = lina.eig_hermitian(h)
    v, w = es.vectors, es.values
    assert np.all(np.diff(w) >= 0)
    assert lina.max_abs(v.conj().T @ v - np.eye(n)) <= 1e-10
    assert lina.max_abs((v * w) @ v.conj().T - h) <= 1e-10 * max(1.0, lina.max_abs(h))


# -- Gibbs state -----------------------------------------------------------

def test_gibbs_beta_zero_is_uniform(rng):
    h = random_hermitian(rng, 5)
    np.testing.assert_allclose(lina.gibbs_exp(h, 0.0), np.eye(5) / 5, atol=1e-14)


def test_gibbs_two_level_ln2():
    # e^{+-ln 2} = 2, 1/2 -> weights 2/2.5, 0.5/2.5
    rho = lina.gibbs_exp(np.diag([1.0, -1.0]), math.log(2))
    np.testing.assert_allclose(rho, np.diag([0.8, 0.2]), atol=1e-15)


def test_gibbs_reduced_penny_weights():
    beta = 0.7
    rho = lina.gibbs_exp(PENNY_REDUCED_NC, beta)
    z = math.exp(-2 * beta) + math.exp(2 * beta) + 2
    expected = np.zeros((4, 4), dtype=complex)
    zero_vecs = []
    for value, vec in PENNY_REDUCED_EIGENPAIRS:
        v = vec / np.linalg.norm(vec)
        if value == 0:
            zero_vecs.append(v)
            continue
        expected += math.exp(beta * value) / z * np.outer(v, v.conj())
    q, _ = np.linalg.qr(np.array(zero_vecs).T)
    expected += q @ q.conj().T / z
    np.testing.assert_allclose(rho, expected, atol=1e-13)


def test_gibbs_large_beta_no_overflow():
    rho = lina.gibbs_exp(np.diag([1000.0, 0.0]), 1e3)
    assert np.all(np.isfinite(rho))
    np.testing.assert_allclose(rho, np.diag([1.0, 0.0]), atol=1e-300)


def test_gibbs_rejects_negative_beta():
    with pytest.raises(ValueError):
        lina.gibbs_exp(np.eye(2), -1.0)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 8), beta=st.floats(0, 20), seed=st.integers(0, 2**32 - 1))
def test_gibbs_state_properties(n, beta, seed):
    h = random_hermitian(np.random.default_rng(seed), n)
    rho = lina.gibbs_exp(h, beta)
    assert lina.max_abs(rho @ h - h @ rho) <= 1e-9
    w = np.linalg.eigvalsh(rho)
    assert abs(w.sum() - 1) <= 1e-12
    # strict positivity holds in exact arithmetic; allow underflow at the extremes
    assert np.all(w > -1e-15)


# -- operator inner product ------------------------------------------------

def test_op_inner_normalized():
    assert lina.op_inner(N_C, N_C) == pytest.approx(1)
    assert lina.op_inner(N_C, F_C) == 0


def test_op_inner_fq_direct_trace():
    # Tr(A^dag A) / 2 summed entrywise
    expected = sum(abs(F_Q[j, k]) ** 2 for j in range(2) for k in range(2)) / 2
    assert lina.op_inner(F_Q, F_Q) == pytest.approx(expected)
    assert expected == 1


def test_op_inner_conjugate_symmetric(rng):
    for _ in range(20):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        assert lina.op_inner(a, b) == pytest.approx(np.conj(lina.op_inner(b, a)))
        aa = lina.op_inner(a, a)
        assert aa.imag == 0 and aa.real > 0


def test_op_inner_basis_orthonormal():
    basis = [N_C, F_C, N_Q, F_Q]
    gram = np.array([[lina.op_inner(a, b) for b in basis] for a in basis])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-15)


def test_op_inner_shape_mismatch():
    with pytest.raises(ValueError):
        lina.op_inner(np.eye(2), np.eye(3))
