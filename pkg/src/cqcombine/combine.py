"""CNOT channel combining: the check-node (minus) and variable-node (plus) channels."""
from __future__ import annotations

import numpy as np

from . import linalg
from .channels import CqChannel, JointCqState, channel_entropy, joint_state
from .errors import ChainRuleViolation, InvalidState, NonUniformPrior

CHAIN_RULE_TOL = 1e-8


def _require_uniform(*channels: CqChannel) -> None:
    for W in channels:
        if not W.is_uniform:
            raise NonUniformPrior(f"combining needs prior 1/2, got {W.prior}")


def boxast(W1: CqChannel, W2: CqChannel) -> CqChannel:
    """Worse channel: u1 -> 1/2 sum_u2 rho_{u1+u2} (x) rho'_{u2}.

    Output blocks are indexed by (block of W1, block of W2), W1-major.
    """
    _require_uniform(W1, W2)
    blocks = []
    for a0, a1 in W1.blocks:
        for b0, b1 in W2.blocks:
            s0 = 0.5 * (np.kron(a0, b0) + np.kron(a1, b1))
            s1 = 0.5 * (np.kron(a1, b0) + np.kron(a0, b1))
            blocks.append((s0, s1))
    return CqChannel(0.5, tuple(blocks))


def varoast(W1: CqChannel, W2: CqChannel) -> CqChannel:
    """Better channel with the classical register U1 handed to the decoder.

    u2 -> 1/2 sum_u1 |u1><u1| (x) rho_{u1+u2} (x) rho'_{u2}; the register
    value is the outermost block index.
    """
    _require_uniform(W1, W2)
    blocks = []
    for u1 in (0, 1):
        for a in W1.blocks:
            for b0, b1 in W2.blocks:
                s0 = 0.5 * np.kron(a[u1], b0)
                s1 = 0.5 * np.kron(a[1 - u1], b1)
                blocks.append((s0, s1))
    return CqChannel(0.5, tuple(blocks))


def compress(W: CqChannel) -> CqChannel:
    """Entropy-preserving block simplification used by the polar recursions."""
    return W.split().prune().merge()


def combined_entropies(W1: CqChannel, W2: CqChannel) -> tuple[float, float]:
    """(H(W1 boxast W2), H(W1 varoast W2)) with the chain rule enforced.

    Raises:
        ChainRuleViolation: if H_minus + H_plus misses H(W1) + H(W2) by more
            than 1e-8, which can only be a numerical fault.
    """
    h_minus = channel_entropy(boxast(W1, W2))
    h_plus = channel_entropy(varoast(W1, W2))
    residual = h_minus + h_plus - channel_entropy(W1) - channel_entropy(W2)
    if abs(residual) > CHAIN_RULE_TOL:
        raise ChainRuleViolation(f"chain rule residual {residual:.3e}")
    return h_minus, h_plus


def conditional_entropy(joint: JointCqState) -> float:
    """H(K|B) of sum_k p_k |k><k| (x) rho_k."""
    weighted = [p * r for p, r in joint.blocks]
    h_kb = sum(linalg.unnormalized_entropy(m) for m in weighted)
    return float(h_kb - linalg.unnormalized_entropy(sum(weighted)))


def conditional_entropy_general(joint: JointCqState, combine_rule: str = "cnot") -> float:
    """H(X1 + X2 | B1 B2) for a product of two cq states with arbitrary priors.

    ``joint`` must carry four blocks indexed ``2*x1 + x2`` (as produced by
    :func:`cqcombine.channels.joint_state`); blocks with equal ``x1 ^ x2``
    are merged before evaluating H((X1+X2) B1 B2) - H(B1 B2).
    """
    if combine_rule != "cnot":
        raise ValueError(f"unsupported combine rule {combine_rule!r}")
    if joint.classical_dim != 4:
        raise InvalidState("expected a two-bit classical register")
    weighted = [p * r for p, r in joint.blocks]
    z0 = weighted[0] + weighted[3]
    z1 = weighted[1] + weighted[2]
    value = (
        linalg.unnormalized_entropy(z0)
        + linalg.unnormalized_entropy(z1)
        - linalg.unnormalized_entropy(z0 + z1)
    )
    return linalg.clip_noise(value, 0.0, linalg.LOG2)


def minus_entropy(W1: CqChannel, W2: CqChannel) -> float:
    """H(X1 + X2 | B1 B2) for any priors."""
    if W1.is_uniform and W2.is_uniform:
        return channel_entropy(boxast(W1, W2))
    return conditional_entropy_general(joint_state(W1, W2))


def _kron_stack(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    n, d1, _ = A.shape
    d2 = B.shape[1]
    return np.einsum("nij,nkl->nikjl", A, B).reshape(n, d1 * d2, d1 * d2)


def pair_entropies_batch(p1, A0, A1, p2, B0, B1) -> dict:
    """Exact entropies for a stack of channel pairs, any priors.

    ``A0, A1`` (shape ``(n, d1, d1)``) and ``B0, B1`` (``(n, d2, d2)``)
    are the outputs of the first and second channels; ``p1, p2`` are the
    probabilities of input 0.  Returns arrays ``H1``, ``H2``,
    ``minus`` = H(X1 + X2 | B1 B2), ``plus`` = H(X2 | X1 + X2, B1 B2) and
    ``chain_residual`` = minus + plus - H1 - H2.
    """
    eta = linalg.unnormalized_entropy
    p1 = np.asarray(p1, dtype=float)[:, None, None]
    p2 = np.asarray(p2, dtype=float)[:, None, None]
    P1 = (p1, 1.0 - p1)
    P2 = (p2, 1.0 - p2)
    A = (np.asarray(A0, dtype=complex), np.asarray(A1, dtype=complex))
    B = (np.asarray(B0, dtype=complex), np.asarray(B1, dtype=complex))

    def single(P, S):
        a, b = P[0] * S[0], P[1] * S[1]
        return eta(a) + eta(b) - eta(a + b)

    # joint[x1][x2] = P1(x1) P2(x2) A_x1 (x) B_x2
    joint = [[P1[x1] * P2[x2] * _kron_stack(A[x1], B[x2]) for x2 in (0, 1)] for x1 in (0, 1)]
    z0 = joint[0][0] + joint[1][1]
    z1 = joint[0][1] + joint[1][0]
    minus = eta(z0) + eta(z1) - eta(z0 + z1)
    # plus: condition on u1 = x1 + x2; the four (u1, x2) terms are the joint blocks
    h_u_x2_b = sum(eta(joint[x1][x2]) for x1 in (0, 1) for x2 in (0, 1))
    h_u_b = eta(z0) + eta(z1)
    plus = h_u_x2_b - h_u_b
    H1 = single(P1, A)
    H2 = single(P2, B)
    return {
        "H1": np.asarray(H1),
        "H2": np.asarray(H2),
        "minus": np.asarray(minus),
        "plus": np.asarray(plus),
        "chain_residual": np.asarray(minus + plus - H1 - H2),
    }
