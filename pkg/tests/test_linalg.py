import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles as O
from cqcombine import linalg as L
from cqcombine.errors import DimensionMismatch, InvalidState, NoConvergence, NotHermitian

seeds = st.integers(0, 2**32 - 1)


def rand_herm(rng, d):
    A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return A + A.conj().T


# ---- eigendecomposition ---------------------------------------------------


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_eig_examples(method):
    assert np.allclose(L.eig_hermitian(np.eye(2), method).eigenvalues, [1, 1])
    assert np.allclose(L.eig_hermitian(np.diag([0.2, 0.8]), method).eigenvalues, [0.2, 0.8])
    X = np.array([[0, 1], [1, 0]])
    assert np.allclose(L.eig_hermitian(X, method).eigenvalues, [-1, 1], atol=1e-14)


@pytest.mark.parametrize("d", [1, 2, 5, 20, 64])
def test_jacobi_reconstruction(rng, d):
    M = rand_herm(rng, d)
    w, V = L.jacobi_eigh(M)
    assert np.max(np.abs(V @ np.diag(w) @ V.conj().T - M)) <= 1e-10
    assert np.max(np.abs(V.conj().T @ V - np.eye(d))) <= L.TAU_EIG
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(w, np.linalg.eigvalsh(M), atol=1e-10)


@given(seeds, st.integers(1, 12))
def test_jacobi_matches_scipy(seed, d):
    rng = np.random.default_rng(seed)
    M = rand_herm(rng, d)
    w, V = L.eig_hermitian(M, "jacobi")
    from scipy.linalg import eigh

    assert np.allclose(w, eigh(M, eigvals_only=True), atol=1e-10)
    assert np.max(np.abs(M @ V - V * w)) <= L.TAU_EIG


def test_eig_errors():
    with pytest.raises(NotHermitian):
        L.eig_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NotHermitian):
        L.jacobi_eigh(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NoConvergence):
        L.jacobi_eigh(np.array([[0, 1], [1, 0]]), max_sweeps=0)
    with pytest.raises(DimensionMismatch):
        L.eig_hermitian(np.ones((2, 3)))
    with pytest.raises(ValueError):
        L.eig_hermitian(np.eye(2), "qr")


# ---- entropies and matrix functions ---------------------------------------


def test_entropy_examples():
    assert L.von_neumann_entropy(np.eye(2) / 2) == pytest.approx(math.log(2), abs=1e-14)
    v = np.array([1, 1j]) / math.sqrt(2)
    assert abs(L.von_neumann_entropy(np.outer(v, v.conj()))) < 1e-14
    expected = -0.25 * math.log(0.25) - 0.75 * math.log(0.75)
    assert L.von_neumann_entropy(np.diag([0.25, 0.75])) == pytest.approx(expected, abs=1e-15)


@given(seeds, st.integers(1, 6))
def test_entropy_oracle_and_unitary_invariance(seed, d):
    rng = np.random.default_rng(seed)
    rho = O.rand_state(rng, d)
    H = L.von_neumann_entropy(rho)
    assert H == pytest.approx(O.entropy_logm(rho), abs=1e-9)
    assert -1e-12 <= H <= math.log(d) + 1e-12
    U = L.eig_hermitian(rand_herm(rng, d)).eigenvectors
    assert abs(L.von_neumann_entropy(U @ rho @ U.conj().T) - H) <= 1e-9


def test_entropy_rank_deficient_and_invalid(rng):
    rho = O.rand_state(rng, 4, rank=2)
    w = np.linalg.eigvalsh(rho)[2:]
    assert L.von_neumann_entropy(rho) == pytest.approx(-np.sum(w * np.log(w)), abs=1e-12)
    with pytest.raises(InvalidState):
        L.von_neumann_entropy(np.diag([1.2, -0.2]))
    with pytest.raises(InvalidState):
        L.von_neumann_entropy(np.diag([0.5, 0.6]))
    with pytest.raises(InvalidState):
        L.von_neumann_entropy(np.array([[0.5, 0.1], [0.3, 0.5]]))


def test_entropy_from_eigenvalues_conventions():
    assert L.entropy_from_eigenvalues([0.0, 1.0]) == 0.0
    assert L.entropy_from_eigenvalues([-1e-13, 1.0]) == 0.0
    assert np.allclose(L.entropy_from_eigenvalues([[0.5, 0.5], [1.0, 0.0]]), [math.log(2), 0.0])
    assert L.clip_noise(-1e-14, 0.0, 1.0) == 0.0
    assert L.clip_noise(1.0 + 1e-14, 0.0, 1.0) == 1.0
    assert L.clip_noise(-1e-6, 0.0, 1.0) == -1e-6


def test_matrix_sqrt(rng):
    assert np.allclose(L.matrix_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(L.matrix_sqrt(np.diag([4, 9]) / 13), np.diag([2, 3]) / math.sqrt(13))
    rho = O.rand_state(rng, 2)
    R = L.matrix_sqrt(rho)
    assert np.max(np.abs(R @ R - rho)) <= L.TAU_EIG
    assert np.allclose(R, O.psd_sqrt(rho), atol=1e-10)
    assert np.linalg.eigvalsh(R)[0] >= -1e-14
    # small negative eigenvalues are clipped, large ones rejected
    assert np.allclose(L.matrix_sqrt(np.diag([1.0, -1e-11])), np.diag([1.0, 0.0]))
    with pytest.raises(InvalidState):
        L.matrix_sqrt(np.diag([1.0, -1e-6]))


def test_fidelity_examples(rng):
    rho = O.rand_state(rng, 3)
    assert L.fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)
    assert L.fidelity(np.diag([1.0, 0]), np.diag([0, 1.0])) == pytest.approx(0.0, abs=1e-15)
    plus = np.full((2, 2), 0.5)
    assert L.fidelity(np.diag([1.0, 0]), plus) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    with pytest.raises(DimensionMismatch):
        L.fidelity(np.eye(2) / 2, np.eye(3) / 3)


@given(seeds, st.integers(1, 4), st.integers(1, 3))
def test_fidelity_properties(seed, d1, d2):
    rng = np.random.default_rng(seed)
    r1, s1 = O.rand_state(rng, d1), O.rand_state(rng, d1)
    r2, s2 = O.rand_state(rng, d2), O.rand_state(rng, d2)
    F1 = L.fidelity(r1, s1)
    assert F1 == pytest.approx(L.fidelity(s1, r1), abs=L.TAU_EIG)
    assert F1 == pytest.approx(min(1.0, O.fidelity_sqrtm(r1, s1)), abs=1e-8)
    prod = L.fidelity(L.tensor(r1, r2), L.tensor(s1, s2))
    assert prod == pytest.approx(F1 * L.fidelity(r2, s2), abs=1e-8)


def test_relative_entropy_examples(rng):
    rho = O.rand_state(rng, 3)
    assert L.relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)
    assert L.relative_entropy(np.diag([1.0, 0]), np.diag([0, 1.0])) == math.inf
    expected = 0.5 * math.log(0.5 / 0.25) + 0.5 * math.log(0.5 / 0.75)
    assert L.relative_entropy(np.diag([0.5, 0.5]), np.diag([0.25, 0.75])) == pytest.approx(expected, abs=1e-14)
    # support of rho inside a singular sigma stays finite
    assert L.relative_entropy(np.diag([1.0, 0, 0]), np.diag([0.5, 0.5, 0])) == pytest.approx(math.log(2))
    with pytest.raises(DimensionMismatch):
        L.relative_entropy(np.eye(2) / 2, np.eye(3) / 3)


@given(seeds, st.integers(1, 5))
def test_relative_entropy_properties(seed, d):
    rng = np.random.default_rng(seed)
    rho, sigma = O.rand_state(rng, d), O.rand_state(rng, d)
    D = L.relative_entropy(rho, sigma)
    assert D == pytest.approx(O.rel_entropy_logm(rho, sigma), abs=1e-8)
    assert D >= 0.0
    if d > 1:
        assert D > 1e-10


def test_tensor():
    assert np.array_equal(L.tensor(np.eye(2), np.eye(2)), np.eye(4))
    a, b, c, d = 2.0, 3.0, 5.0, 7.0
    assert np.array_equal(L.tensor(np.diag([a, b]), np.diag([c, d])), np.diag([a * c, a * d, b * c, b * d]))


@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_tensor_trace_multiplicative(seed, da, db):
    rng = np.random.default_rng(seed)
    A = rand_herm(rng, da)
    B = rand_herm(rng, db)
    assert np.trace(L.tensor(A, B)) == pytest.approx(np.trace(A) * np.trace(B), abs=1e-10)


def test_partial_trace_examples(rng):
    rho, sigma = O.rand_state(rng, 2), O.rand_state(rng, 3)
    assert np.allclose(L.partial_trace(L.tensor(rho, sigma), [2, 3], [0]), rho)
    assert np.allclose(L.partial_trace(L.tensor(rho, sigma), [2, 3], [1]), sigma)
    M = L.tensor(rho, sigma)
    assert np.allclose(L.partial_trace(M, [2, 3], []), [[np.trace(M)]])
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert np.allclose(L.partial_trace(np.outer(bell, bell), [2, 2], [1]), np.eye(2) / 2)
    with pytest.raises(DimensionMismatch):
        L.partial_trace(np.eye(6), [2, 2], [0])
    with pytest.raises(DimensionMismatch):
        L.partial_trace(np.eye(4), [2, 2], [3])


@pytest.mark.parametrize("keep", [[0], [1], [2], [0, 2], [1, 2], [0, 1]])
def test_partial_trace_matches_loops(rng, keep):
    dims = [2, 3, 2]
    M = O.rand_state(rng, 12)
    out = L.partial_trace(M, dims, keep)
    assert np.allclose(out, O.partial_trace_loops(M, dims, keep), atol=1e-14)
    assert np.trace(out) == pytest.approx(1.0)
    psi = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    assert np.allclose(L.partial_trace_pure(psi, dims, keep), L.partial_trace(np.outer(psi, psi.conj()), dims, keep))


def test_partial_trace_of_product_scales(rng):
    A = rand_herm(rng, 3)
    B = rand_herm(rng, 2)
    assert np.max(np.abs(L.partial_trace(L.tensor(A, B), [3, 2], [0]) - np.trace(B) * A)) <= L.TAU_EIG
