import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles as O
from cqcombine import channels as C, combine as K
from cqcombine.errors import ChainRuleViolation, InvalidState, NonUniformPrior

LN2 = math.log(2)
seeds = st.integers(0, 2**32 - 1)


def pair(seed, d1, d2, mode="half"):
    return C.random_cq_channel(d1, mode, seed, 0), C.random_cq_channel(d2, mode, seed, 1)


@given(seeds, st.integers(2, 3), st.integers(2, 3))
def test_boxast_varoast_match_dense_oracles(seed, d1, d2):
    W1, W2 = pair(seed, d1, d2)
    A, B = (W1.sigma0, W1.sigma1), (W2.sigma0, W2.sigma1)
    h_minus, h_plus = K.combined_entropies(W1, W2)
    assert h_minus == pytest.approx(O.minus_entropy_dense(0.5, A, 0.5, B), abs=1e-10)
    assert h_plus == pytest.approx(O.plus_entropy_dense(0.5, A, 0.5, B), abs=1e-10)


@given(seeds, st.integers(2, 6), st.integers(2, 6))
def test_chain_rule_and_ordering(seed, d1, d2):
    W1, W2 = pair(seed, d1, d2)
    H1, H2 = C.channel_entropy(W1), C.channel_entropy(W2)
    h_minus, h_plus = K.combined_entropies(W1, W2)
    assert abs(h_minus + h_plus - H1 - H2) <= 1e-9
    assert h_minus >= max(H1, H2) - 1e-10
    assert h_plus <= min(H1, H2) + 1e-10


def test_combined_channels_are_valid_states(rng):
    W1, W2 = pair(3, 2, 3)
    for W in (K.boxast(W1, W2), K.varoast(W1, W2)):
        W.validate()
        assert W.dim in (6, 12)
    assert K.varoast(W1, W2).block_dims == (6, 6)


def test_extremal_combinations():
    W = C.random_cq_channel(3, seed=9)
    H = C.channel_entropy(W)
    P, U = C.perfect_channel(), C.useless_channel()
    assert C.channel_entropy(K.boxast(P, W)) == pytest.approx(H, abs=1e-12)
    assert C.channel_entropy(K.boxast(U, W)) == pytest.approx(LN2, abs=1e-12)
    assert C.channel_entropy(K.varoast(P, W)) == pytest.approx(0.0, abs=1e-12)
    assert C.channel_entropy(K.varoast(U, W)) == pytest.approx(H, abs=1e-12)


@pytest.mark.parametrize("p,q", [(0.1, 0.2), (0.05, 0.4), (0.3, 0.3)])
def test_bsc_combination_is_bsc(p, q):
    h = C.channel_entropy(K.boxast(C.bsc_embed(p), C.bsc_embed(q)))
    assert h == pytest.approx(O.h2(O.conv(p, q)), abs=1e-14)


def test_nonuniform_prior_rejected():
    W = C.bsc_embed(0.1).with_prior(0.3)
    with pytest.raises(NonUniformPrior):
        K.boxast(W, W)
    with pytest.raises(NonUniformPrior):
        K.varoast(C.bsc_embed(0.1), W)


@given(seeds, st.integers(2, 3), st.integers(2, 3))
def test_general_prior_route(seed, d1, d2):
    W1, W2 = pair(seed, d1, d2, "uniform")
    A, B = (W1.sigma0, W1.sigma1), (W2.sigma0, W2.sigma1)
    h = K.minus_entropy(W1, W2)
    assert h == pytest.approx(O.minus_entropy_dense(W1.prior, A, W2.prior, B), abs=1e-10)
    assert K.conditional_entropy_general(C.joint_state(W1, W2)) == h


def test_general_route_agrees_with_uniform_route():
    W1, W2 = pair(4, 2, 3)
    assert K.conditional_entropy_general(C.joint_state(W1, W2)) == pytest.approx(
        C.channel_entropy(K.boxast(W1, W2)), abs=1e-12
    )
    with pytest.raises(ValueError):
        K.conditional_entropy_general(C.joint_state(W1, W2), combine_rule="and")
    J = C.JointCqState(2, ((0.5, np.eye(2) / 2), (0.5, np.eye(2) / 2)))
    with pytest.raises(InvalidState):
        K.conditional_entropy_general(J)
    assert K.conditional_entropy(J) == pytest.approx(LN2)


@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_batched_entropies(seed, d1, d2):
    rng = np.random.default_rng(seed)
    n = 3
    p1, p2 = rng.uniform(size=n), rng.uniform(size=n)
    A = [np.stack([O.rand_state(rng, d1) for _ in range(n)]) for _ in range(2)]
    B = [np.stack([O.rand_state(rng, d2) for _ in range(n)]) for _ in range(2)]
    r = K.pair_entropies_batch(p1, A[0], A[1], p2, B[0], B[1])
    for i in range(n):
        Ai, Bi = (A[0][i], A[1][i]), (B[0][i], B[1][i])
        assert r["minus"][i] == pytest.approx(O.minus_entropy_dense(p1[i], Ai, p2[i], Bi), abs=1e-10)
        assert r["plus"][i] == pytest.approx(O.plus_entropy_dense(p1[i], Ai, p2[i], Bi), abs=1e-10)
        assert r["H1"][i] == pytest.approx(O.channel_entropy_dense(p1[i], *Ai), abs=1e-10)
    assert np.max(np.abs(r["chain_residual"])) <= 1e-10


def test_compress_preserves_entropy():
    W = K.varoast(C.bec_embed(0.3), C.bec_embed(0.6))
    Z = K.compress(W)
    assert Z.max_block_dim == 1 and len(Z.blocks) <= 3
    assert C.channel_entropy(Z) == pytest.approx(C.channel_entropy(W), abs=1e-14)


def test_chain_rule_guard(monkeypatch):
    W1, W2 = pair(1, 2, 2)
    real = K.channel_entropy
    calls = {"n": 0}

    def drifting(W):
        calls["n"] += 1
        return real(W) + (1e-6 if calls["n"] == 1 else 0.0)

    monkeypatch.setattr(K, "channel_entropy", drifting)
    with pytest.raises(ChainRuleViolation):
        K.combined_entropies(W1, W2)
