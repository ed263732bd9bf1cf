"""Dual channels and numerical checks of the duality identities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .channels import CqChannel, channel_entropy
from .combine import boxast, varoast
from .errors import NonUniformPrior
from .linalg import LOG2, TAU_SUPP


def canonical_purification(sigma) -> np.ndarray:
    """(1 (x) sqrt(sigma)) |Omega> on B' (x) B, as a length d^2 vector."""
    root = linalg.matrix_sqrt(sigma)
    # entry (k, m) = <k|_B' <m|_B (1 (x) root) sum_j |j>|j> = root[m, k]
    return root.T.reshape(-1)


def dual_channel(W: CqChannel, truncate: bool = False) -> CqChannel:
    """The dual channel W^perp on the 2d-dimensional system B (x) Z.

    Each output is purified as (1 (x) sqrt(sigma_z))|Omega>, the isometry
    U|z> = |phi_z>|z> is applied to the conjugate-basis input
    (|0> + (-1)^x |1>)/sqrt(2), and the purifying copy B' is traced out.

    With ``truncate=True`` the outputs are restricted to the support of
    sigma0 + sigma1 (eigenvalues above ``TAU_SUPP``), an isometry that keeps
    every entropy unchanged while curbing dimension growth under repeated
    dualization.
    """
    if not W.is_uniform:
        raise NonUniformPrior(f"dual channel needs prior 1/2, got {W.prior}")
    d = W.dim
    phis = [canonical_purification(W.sigma0), canonical_purification(W.sigma1)]
    outputs = []
    for x in (0, 1):
        psi = np.zeros((d * d, 2), dtype=complex)
        for z in (0, 1):
            psi[:, z] = (-1) ** (x * z) * phis[z] / np.sqrt(2.0)
        # psi is laid out as B' (x) B (x) Z
        outputs.append(linalg.partial_trace_pure(psi.reshape(-1), [d, d, 2], keep=[1, 2]))
    s0, s1 = outputs
    if truncate:
        w, V = np.linalg.eigh(0.5 * (s0 + s1))
        P = V[:, w > TAU_SUPP]
        s0 = P.conj().T @ s0 @ P
        s1 = P.conj().T @ s1 @ P
    return CqChannel(0.5, ((s0, s1),))


def dual_outputs_closed_form(W: CqChannel) -> tuple[np.ndarray, np.ndarray]:
    """1/2 sum_{z,z'} (-1)^{x(z+z')} sqrt(sigma_z) sqrt(sigma_z') (x) |z><z'|.

    Independent of the purification route; used as a cross-check.
    """
    r = [linalg.matrix_sqrt(W.sigma0), linalg.matrix_sqrt(W.sigma1)]
    out = []
    for x in (0, 1):
        M = np.zeros((2 * W.dim, 2 * W.dim), dtype=complex)
        for z in (0, 1):
            for zp in (0, 1):
                E = np.zeros((2, 2))
                E[z, zp] = 1.0
                M += 0.5 * (-1) ** (x * (z + zp)) * np.kron(r[z] @ r[zp], E)
        out.append(M)
    return out[0], out[1]


@dataclass(frozen=True)
class DualityReport:
    lemma_boxast: float  # |H(W1p boxast W2p) - H((W1 varoast W2)p)|
    lemma_varoast: float  # |H(W1p varoast W2p) - H((W1 boxast W2)p)|
    plus_from_dual: float  # |H(W1 varoast W2) - (log 2 - H(W1p boxast W2p))|
    double_dual: float  # max_i |H((Wi p) p) - H(Wi)|
    capacity_sum: float  # max_i |I(Wi) + I(Wi p) - log 2|

    @property
    def max_residual(self) -> float:
        return max(
            self.lemma_boxast, self.lemma_varoast, self.plus_from_dual, self.double_dual, self.capacity_sum
        )


def check_duality_lemma(W1: CqChannel, W2: CqChannel) -> DualityReport:
    if not (W1.is_uniform and W2.is_uniform):
        raise NonUniformPrior("duality identities need uniform priors")
    D1, D2 = dual_channel(W1), dual_channel(W2)
    H1, H2 = channel_entropy(W1), channel_entropy(W2)
    h_dual_box = channel_entropy(boxast(D1, D2))
    h_dual_varo = channel_entropy(varoast(D1, D2))
    h_plus = channel_entropy(varoast(W1, W2))
    h_of_dual_plus = channel_entropy(dual_channel(varoast(W1, W2)))
    h_of_dual_minus = channel_entropy(dual_channel(boxast(W1, W2)))
    hd1, hd2 = channel_entropy(D1), channel_entropy(D2)
    dd1 = channel_entropy(dual_channel(D1))
    dd2 = channel_entropy(dual_channel(D2))
    return DualityReport(
        lemma_boxast=abs(h_dual_box - h_of_dual_plus),
        lemma_varoast=abs(h_dual_varo - h_of_dual_minus),
        plus_from_dual=abs(h_plus - (LOG2 - h_dual_box)),
        double_dual=max(abs(dd1 - H1), abs(dd2 - H2)),
        capacity_sum=max(abs(H1 + hd1 - LOG2), abs(H2 + hd2 - LOG2)),
    )


def mirror_identity_check(W1: CqChannel, W2: CqChannel) -> float:
    """Residual of H(W1 boxast W2) = H1 + H2 - log 2 + H(W1p boxast W2p)."""
    if not (W1.is_uniform and W2.is_uniform):
        raise NonUniformPrior("mirror identity needs uniform priors")
    lhs = channel_entropy(boxast(W1, W2))
    rhs = (
        channel_entropy(W1)
        + channel_entropy(W2)
        - LOG2
        + channel_entropy(boxast(dual_channel(W1), dual_channel(W2)))
    )
    return abs(lhs - rhs)


def symmetry_functional(W1: CqChannel, W2: CqChannel) -> float:
    """H(W1 varoast W2) - (H(W1) + H(W2)) / 2; invariant under W -> W^perp."""
    return channel_entropy(varoast(W1, W2)) - 0.5 * (channel_entropy(W1) + channel_entropy(W2))
