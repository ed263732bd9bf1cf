"""Binary-input classical-quantum channels.

A channel maps input bit ``x`` to a density matrix ``sigma_x``.  Outputs
are stored block-diagonally: ``blocks`` is a tuple of ``(s0, s1)`` pairs,
one per block, with ``sigma_x`` the direct sum of the ``s_x`` blocks.  A
channel built from two dense states has exactly one block.  The block label
is classical information available to the receiver, so conditional
entropies decompose over blocks and nothing is ever materialized at the
full (possibly huge) output dimension unless asked for.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

from . import linalg
from .errors import DimensionMismatch, InvalidChannel, InvalidState, OutOfRange
from .linalg import LOG2, TAU_TR


@dataclass(frozen=True, eq=False)
class CqChannel:
    prior: float
    blocks: tuple = field(repr=False)

    def __post_init__(self):
        p = float(self.prior)
        if not (0.0 <= p <= 1.0):
            raise InvalidChannel(f"prior {p} outside [0, 1]")
        object.__setattr__(self, "prior", p)
        blocks = tuple(
            (np.asarray(s0, dtype=complex), np.asarray(s1, dtype=complex)) for s0, s1 in self.blocks
        )
        if not blocks:
            raise InvalidChannel("channel needs at least one output block")
        for s0, s1 in blocks:
            if s0.shape != s1.shape or s0.ndim != 2 or s0.shape[0] != s0.shape[1]:
                raise InvalidChannel(f"bad block shapes {s0.shape}, {s1.shape}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_states(cls, sigma0, sigma1, prior: float = 0.5, validate: bool = True) -> "CqChannel":
        if validate:
            try:
                sigma0 = linalg.density_matrix(sigma0)
                sigma1 = linalg.density_matrix(sigma1)
            except InvalidState as exc:
                raise InvalidChannel(str(exc)) from exc
        sigma0 = np.asarray(sigma0, dtype=complex)
        sigma1 = np.asarray(sigma1, dtype=complex)
        if sigma0.shape != sigma1.shape:
            raise DimensionMismatch(f"{sigma0.shape} vs {sigma1.shape}")
        return cls(prior, ((sigma0, sigma1),))

    @property
    def block_dims(self) -> tuple[int, ...]:
        return tuple(s0.shape[0] for s0, _ in self.blocks)

    @property
    def dim(self) -> int:
        return sum(self.block_dims)

    @property
    def max_block_dim(self) -> int:
        return max(self.block_dims)

    @property
    def sigma0(self) -> np.ndarray:
        return block_diag(*[s0 for s0, _ in self.blocks])

    @property
    def sigma1(self) -> np.ndarray:
        return block_diag(*[s1 for _, s1 in self.blocks])

    @property
    def is_uniform(self) -> bool:
        return self.prior == 0.5

    def validate(self) -> "CqChannel":
        """Check that both outputs are density matrices; returns self."""
        for name, states in (("sigma0", [b[0] for b in self.blocks]), ("sigma1", [b[1] for b in self.blocks])):
            total = sum(np.trace(s).real for s in states)
            if abs(total - 1.0) > TAU_TR:
                raise InvalidChannel(f"{name} has trace {total}")
            for s in states:
                if linalg.hermiticity_error(s) > linalg.TAU_HERM:
                    raise InvalidChannel(f"{name} block not Hermitian")
                if s.size and np.linalg.eigvalsh(s)[0] < -linalg.TAU_PSD:
                    raise InvalidChannel(f"{name} block not PSD")
        return self

    def with_prior(self, prior: float) -> "CqChannel":
        return CqChannel(prior, self.blocks)

    def to_dense(self) -> "CqChannel":
        return CqChannel(self.prior, ((self.sigma0, self.sigma1),))

    def split(self, tol: float = 0.0) -> "CqChannel":
        """Refine each block into its finest common block-diagonal structure.

        Two basis indices belong to the same sub-block when they are linked
        by an entry of ``|s0| + |s1|`` larger than ``tol``.  Diagonal
        channels split into 1x1 blocks.
        """
        from scipy.sparse.csgraph import connected_components

        out = []
        for s0, s1 in self.blocks:
            if s0.shape[0] == 1:
                out.append((s0, s1))
                continue
            pattern = (np.abs(s0) + np.abs(s1)) > tol
            ncomp, labels = connected_components(pattern, directed=False)
            if ncomp == 1:
                out.append((s0, s1))
                continue
            for c in range(ncomp):
                idx = np.flatnonzero(labels == c)
                sub = np.ix_(idx, idx)
                out.append((s0[sub], s1[sub]))
        return CqChannel(self.prior, tuple(out))

    def prune(self, tol: float = 1e-15) -> "CqChannel":
        """Drop blocks carrying (numerically) zero weight under both inputs."""
        kept = [
            (s0, s1) for s0, s1 in self.blocks if np.trace(s0).real > tol or np.trace(s1).real > tol
        ]
        return CqChannel(self.prior, tuple(kept or self.blocks[:1]))

    def merge(self, decimals: int = 12) -> "CqChannel":
        """Merge blocks with proportional contents (exact, entropy-preserving).

        Blocks ``(A0, A1)`` and ``(c A0, c A1)`` are the same conditional
        state observed with different probability, so summing them leaves
        H(X|B) unchanged.  Matching is done on content normalized by the
        block weight and rounded to ``decimals`` digits.
        """
        groups: dict = {}
        order = []
        for s0, s1 in self.blocks:
            w = np.trace(s0).real + np.trace(s1).real
            if w <= 0.0:
                continue
            key = (s0.shape[0], np.round(s0 / w, decimals).tobytes(), np.round(s1 / w, decimals).tobytes())
            if key in groups:
                a0, a1 = groups[key]
                groups[key] = (a0 + s0, a1 + s1)
            else:
                groups[key] = (s0, s1)
                order.append(key)
        if not order:
            return self
        return CqChannel(self.prior, tuple(groups[k] for k in order))

    def conjugate(self, U) -> "CqChannel":
        """Apply ``U . U^dagger`` to both dense outputs."""
        U = np.asarray(U, dtype=complex)
        s0 = U @ self.sigma0 @ U.conj().T
        s1 = U @ self.sigma1 @ U.conj().T
        return CqChannel(self.prior, ((s0, s1),))

    # ---- serialization -------------------------------------------------

    def to_json_dict(self) -> dict:
        d = {
            "prior": self.prior,
            "dim": self.dim,
            "sigma0": _matrix_to_pairs(self.sigma0),
            "sigma1": _matrix_to_pairs(self.sigma1),
        }
        if len(self.blocks) > 1:
            d["block_dims"] = list(self.block_dims)
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "CqChannel":
        dim = int(d["dim"])
        s0 = _pairs_to_matrix(d["sigma0"])
        s1 = _pairs_to_matrix(d["sigma1"])
        if s0.shape != (dim, dim) or s1.shape != (dim, dim):
            raise DimensionMismatch(f"matrices do not match dim {dim}")
        dims = d.get("block_dims") or [dim]
        if sum(dims) != dim:
            raise DimensionMismatch(f"block_dims {dims} do not sum to {dim}")
        blocks = []
        start = 0
        for bd in dims:
            sl = slice(start, start + bd)
            blocks.append((s0[sl, sl].copy(), s1[sl, sl].copy()))
            start += bd
        return cls(float(d["prior"]), tuple(blocks))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "CqChannel":
        return cls.from_json_dict(json.loads(text))


def _matrix_to_pairs(M: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _pairs_to_matrix(rows: Sequence) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


# ---- entropic functionals ------------------------------------------------


def channel_entropy(W: CqChannel) -> float:
    """H(X|B) of the cq state p|0><0| (x) sigma0 + (1-p)|1><1| (x) sigma1, in nats.

    Evaluated blockwise as H(XB) - H(B); both terms are sums over blocks of
    -tr M log M of the (unnormalized) weighted blocks.
    """
    p = W.prior
    total = 0.0
    for s0, s1 in W.blocks:
        a = p * s0
        b = (1.0 - p) * s1
        total += linalg.unnormalized_entropy(a) + linalg.unnormalized_entropy(b)
        total -= linalg.unnormalized_entropy(a + b)
    # only rounding noise is clipped; larger excursions stay visible
    return linalg.clip_noise(total, 0.0, LOG2)


def symmetric_capacity(W: CqChannel) -> float:
    """I(W) = log 2 - H(W); meaningful for prior 1/2."""
    if not W.is_uniform:
        warnings.warn("symmetric capacity assumes a uniform prior", stacklevel=2)
    return LOG2 - channel_entropy(W)


# ---- standard channels ---------------------------------------------------


def _check_unit(name: str, x: float) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise OutOfRange(f"{name}={x} outside [0, 1]")
    return x


def bsc_embed(p: float) -> CqChannel:
    p = _check_unit("p", p)
    return CqChannel.from_states(np.diag([1.0 - p, p]), np.diag([p, 1.0 - p]))


def bec_embed(eps: float) -> CqChannel:
    """Outputs (1-eps)|x><x| + eps|e><e| on basis (|0>, |1>, |e>)."""
    eps = _check_unit("eps", eps)
    return CqChannel.from_states(np.diag([1.0 - eps, 0.0, eps]), np.diag([0.0, 1.0 - eps, eps]))


def pure_channel(alpha: float) -> CqChannel:
    """|psi0> = (1, 0), |psi1> = (cos a, sin a); fidelity cos a."""
    alpha = float(alpha)
    if not (0.0 <= alpha <= np.pi / 2 + 1e-15):
        raise OutOfRange(f"alpha={alpha} outside [0, pi/2]")
    v0 = np.array([1.0, 0.0])
    v1 = np.array([np.cos(alpha), np.sin(alpha)])
    return CqChannel.from_states(np.outer(v0, v0), np.outer(v1, v1))


def perfect_channel() -> CqChannel:
    return bsc_embed(0.0)


def useless_channel() -> CqChannel:
    return bsc_embed(0.5)


# ---- random generation ---------------------------------------------------


def sample_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based stream keyed by ``(seed, index)``.

    Philox keyed through a SeedSequence over the pair, so sample ``i`` gets
    the same numbers whether drawn serially or in a worker.
    """
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    return np.random.Generator(np.random.Philox(ss))


def random_density_matrix(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    """G G^dagger / tr(G G^dagger) with G a d x rank complex Ginibre matrix."""
    k = d if rank is None else int(rank)
    G = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    M = G @ G.conj().T
    return M / np.trace(M).real


def random_cq_channel(
    d: int,
    prior_mode: str = "half",
    seed: int = 0,
    index: int = 0,
    rank: int | None = None,
) -> CqChannel:
    """Random channel from the stream ``(seed, index)``.

    Draw order: prior (only for ``prior_mode="uniform"``), then sigma0,
    then sigma1.
    """
    d = int(d)
    if d < 1:
        raise OutOfRange(f"dimension {d} < 1")
    if d < 2 or d > 6:
        warnings.warn(f"dimension {d} outside the tested range 2..6", stacklevel=2)
    if rank is not None and not (1 <= rank <= d):
        raise OutOfRange(f"rank {rank} outside [1, {d}]")
    rng = sample_rng(seed, index)
    if prior_mode in ("half", "fixed-half"):
        p = 0.5
    elif prior_mode == "uniform":
        p = float(rng.uniform())
    else:
        raise OutOfRange(f"unknown prior mode {prior_mode!r}")
    s0 = random_density_matrix(rng, d, rank)
    s1 = random_density_matrix(rng, d, rank)
    return CqChannel(p, ((s0, s1),))


# ---- joint cq states -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class JointCqState:
    """sum_k p_k |k><k| (x) rho_k with a classical register of size classical_dim."""

    classical_dim: int
    blocks: tuple  # ((p_k, rho_k), ...)

    def __post_init__(self):
        blocks = tuple((float(p), np.asarray(r, dtype=complex)) for p, r in self.blocks)
        if len(blocks) != self.classical_dim:
            raise InvalidState(f"{len(blocks)} blocks for classical_dim {self.classical_dim}")
        if abs(sum(p for p, _ in blocks) - 1.0) > TAU_TR:
            raise InvalidState("block probabilities do not sum to 1")
        if any(p < 0.0 for p, _ in blocks):
            raise InvalidState("negative block probability")
        shapes = {r.shape for _, r in blocks}
        if len(shapes) != 1:
            raise InvalidState(f"blocks of differing shapes {shapes}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def quantum_dim(self) -> int:
        return self.blocks[0][1].shape[0]


def joint_state(W1: CqChannel, W2: CqChannel) -> JointCqState:
    """Product state of two independent channels; block index = 2*x1 + x2."""
    p1, p2 = W1.prior, W2.prior
    a = (W1.sigma0, W1.sigma1)
    b = (W2.sigma0, W2.sigma1)
    pr1 = (p1, 1.0 - p1)
    pr2 = (p2, 1.0 - p2)
    blocks = []
    for x1 in (0, 1):
        for x2 in (0, 1):
            blocks.append((pr1[x1] * pr2[x2], np.kron(a[x1], b[x2])))
    return JointCqState(4, tuple(blocks))

