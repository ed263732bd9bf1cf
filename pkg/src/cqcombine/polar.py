"""Polar-transform recursions and polarization statistics.

Three backends share one level-synchronous driver:

* exact cq channels (block-diagonal, compressed after every step and
  guarded by a block-dimension budget),
* the binary erasure channel as a scalar erasure probability,
* general binary memoryless symmetric (BMS) channels as a finite list of
  (weight, crossover) pairs, which covers the BSC exactly.

Sign paths are enumerated with the first transform in the most significant
bit of the index; bit value 0 is the minus (check-node) branch.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channels import CqChannel, channel_entropy, sample_rng
from .combine import boxast, compress, varoast
from .errors import BadLength, DimensionBudgetExceeded, NonUniformPrior, OutOfRange
from .linalg import LOG2

MAX_BLOCK_DIM = 4096
MAX_CLASSICAL_LEVELS = 24
MAX_BMS_SYMBOLS = 1 << 16
MERGE_TOL = 1e-12


# ---- exact cq backend ----------------------------------------------------


def polar_step(W: CqChannel, simplify: bool = True) -> tuple[CqChannel, CqChannel]:
    """(W-, W+) = (W boxast W, W varoast W), optionally block-compressed."""
    if not W.is_uniform:
        raise NonUniformPrior(f"polar transform needs prior 1/2, got {W.prior}")
    minus, plus = boxast(W, W), varoast(W, W)
    if simplify:
        minus, plus = compress(minus), compress(plus)
    return minus, plus


def _combine_pair(W1: CqChannel, W2: CqChannel) -> tuple[CqChannel, CqChannel]:
    return compress(boxast(W1, W2)), compress(varoast(W1, W2))


def predicted_block_dim(block_dim: int, n: int) -> int:
    """Largest block dimension after n transforms: D -> D^2 per level."""
    d = int(block_dim)
    for _ in range(n):
        d = d * d
    return d


def _check_budget(channels: Sequence[CqChannel], n: int, max_block_dim: int) -> None:
    worst = max(compress(W).max_block_dim for W in channels)
    need = predicted_block_dim(worst, n)
    if need > max_block_dim:
        raise DimensionBudgetExceeded(
            f"{n} levels grow blocks of dimension {worst} to {need} > {max_block_dim}"
        )


def _capacity(W: CqChannel) -> float:
    return LOG2 - channel_entropy(W)


def polarize_exact_levels(
    W: CqChannel, n: int, max_block_dim: int = MAX_BLOCK_DIM
) -> list[np.ndarray]:
    """Symmetric capacities of all 2^k synthesized channels for k = 0..n."""
    n = _check_levels(n)
    if not W.is_uniform:
        raise NonUniformPrior(f"polar transform needs prior 1/2, got {W.prior}")
    _check_budget([W], n, max_block_dim)
    level = [compress(W)]
    out = [np.array([_capacity(level[0])])]
    for _ in range(n):
        nxt = []
        for c in level:
            nxt.extend(polar_step(c))
        level = nxt
        out.append(np.array([_capacity(c) for c in level]))
    return out


def polarize_exact(W: CqChannel, n: int, max_block_dim: int = MAX_BLOCK_DIM) -> np.ndarray:
    """Capacities I(W^s) for every sign path s in {-,+}^n (see module notes)."""
    return polarize_exact_levels(W, n, max_block_dim)[-1]


# ---- classical backends --------------------------------------------------


@dataclass(frozen=True)
class BecChannel:
    eps: float

    def __post_init__(self):
        if not (0.0 <= self.eps <= 1.0):
            raise OutOfRange(f"erasure probability {self.eps} outside [0, 1]")

    def minus(self, other: "BecChannel | None" = None) -> "BecChannel":
        o = self if other is None else other
        return BecChannel(self.eps + o.eps - self.eps * o.eps)

    def plus(self, other: "BecChannel | None" = None) -> "BecChannel":
        o = self if other is None else other
        return BecChannel(self.eps * o.eps)

    def entropy(self) -> float:
        return self.eps * LOG2

    def capacity(self) -> float:
        return (1.0 - self.eps) * LOG2


def _h2(e: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(e > 0.0, -e * np.log(np.where(e > 0.0, e, 1.0)), 0.0)
        q = 1.0 - e
        b = np.where(q > 0.0, -q * np.log(np.where(q > 0.0, q, 1.0)), 0.0)
    return a + b


def _merge_symbols(w: np.ndarray, e: np.ndarray, tol: float = MERGE_TOL):
    keep = w > 0.0
    w, e = w[keep], e[keep]
    order = np.argsort(e, kind="stable")
    w, e = w[order], e[order]
    starts = np.concatenate(([0], np.flatnonzero(np.diff(e) > tol) + 1))
    wm = np.add.reduceat(w, starts)
    em = np.add.reduceat(w * e, starts) / wm
    return wm, em


@dataclass(frozen=True, eq=False)
class BmsChannel:
    """Binary memoryless symmetric channel as a mixture of BSCs.

    ``weights[k]`` is the probability of output class k and ``errors[k]``
    (at most 1/2) its crossover probability.  Classes with crossovers
    within ``MERGE_TOL`` are merged, which leaves the entropy unchanged.
    """

    weights: np.ndarray
    errors: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        e = np.asarray(self.errors, dtype=float).ravel()
        if w.shape != e.shape or w.size == 0:
            raise OutOfRange("weights and errors must be equal-length, nonempty")
        if np.any(w < 0.0) or abs(w.sum() - 1.0) > 1e-9:
            raise OutOfRange("weights must form a probability vector")
        if np.any(e < 0.0) or np.any(e > 0.5 + 1e-12):
            raise OutOfRange("crossover probabilities must lie in [0, 1/2]")
        w, e = _merge_symbols(w, np.minimum(e, 0.5))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "errors", e)

    @classmethod
    def bsc(cls, p: float) -> "BmsChannel":
        if not (0.0 <= p <= 1.0):
            raise OutOfRange(f"crossover {p} outside [0, 1]")
        return cls([1.0], [min(p, 1.0 - p)])

    @classmethod
    def bec(cls, eps: float) -> "BmsChannel":
        if not (0.0 <= eps <= 1.0):
            raise OutOfRange(f"erasure probability {eps} outside [0, 1]")
        return cls([1.0 - eps, eps], [0.0, 0.5])

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def _check(self, n: int) -> None:
        if n > MAX_BMS_SYMBOLS:
            raise DimensionBudgetExceeded(f"output alphabet of {n} classes exceeds {MAX_BMS_SYMBOLS}")

    def minus(self, other: "BmsChannel | None" = None) -> "BmsChannel":
        o = self if other is None else other
        self._check(self.size * o.size)
        w = np.outer(self.weights, o.weights).ravel()
        a, b = self.errors[:, None], o.errors[None, :]
        e = (a * (1.0 - b) + (1.0 - a) * b).ravel()
        return BmsChannel(w / w.sum(), e)

    def plus(self, other: "BmsChannel | None" = None) -> "BmsChannel":
        o = self if other is None else other
        self._check(2 * self.size * o.size)
        w = np.outer(self.weights, o.weights)
        a, b = self.errors[:, None], o.errors[None, :]
        agree = (1.0 - a) * (1.0 - b) + a * b
        disagree = a * (1.0 - b) + (1.0 - a) * b
        with np.errstate(divide="ignore", invalid="ignore"):
            e_agree = np.where(agree > 0.0, a * b / agree, 0.0)
            e_dis = np.where(
                disagree > 0.0, np.minimum(a * (1.0 - b), (1.0 - a) * b) / disagree, 0.0
            )
        weights = np.concatenate(((w * agree).ravel(), (w * disagree).ravel()))
        errors = np.concatenate((e_agree.ravel(), e_dis.ravel()))
        return BmsChannel(weights / weights.sum(), errors)

    def entropy(self) -> float:
        return float(np.dot(self.weights, _h2(self.errors)))

    def capacity(self) -> float:
        return LOG2 - self.entropy()


def _check_levels(n: int, cap: int | None = None) -> int:
    n = int(n)
    if n < 0 or (cap is not None and n > cap):
        raise OutOfRange(f"level count {n} outside [0, {cap}]")
    return n


def _bec_levels(eps: np.ndarray, n: int) -> list[np.ndarray]:
    out = [(1.0 - eps) * LOG2]
    for _ in range(n):
        eps = np.stack((2.0 * eps - eps * eps, eps * eps), axis=1).reshape(-1)
        out.append((1.0 - eps) * LOG2)
    return out


def _object_levels(root, n: int) -> list[np.ndarray]:
    level = [root]
    out = [np.array([root.capacity()])]
    for _ in range(n):
        level = [c for parent in level for c in (parent.minus(), parent.plus())]
        out.append(np.array([c.capacity() for c in level]))
    return out


def polarize_classical_levels(kind: str, param: float, n: int) -> list[np.ndarray]:
    """Per-level capacities from the scalar BEC or the BMS list recursion."""
    n = _check_levels(n, MAX_CLASSICAL_LEVELS)
    kind = kind.lower()
    if kind == "bec":
        if not (0.0 <= param <= 1.0):
            raise OutOfRange(f"erasure probability {param} outside [0, 1]")
        return _bec_levels(np.array([float(param)]), n)
    if kind == "bsc":
        return _object_levels(BmsChannel.bsc(float(param)), n)
    raise OutOfRange(f"unknown classical channel kind {kind!r}")


def polarize_classical(kind: str, param: float, n: int) -> np.ndarray:
    """Capacities of the 2^n synthesized channels of a BSC or BEC."""
    return polarize_classical_levels(kind, param, n)[-1]


# ---- statistics ----------------------------------------------------------


def _check_window(a: float, b: float) -> None:
    if not (0.0 < a < b < LOG2):
        raise OutOfRange(f"need 0 < a < b < log 2, got a={a}, b={b}")


def polarization_stats(I_values, a: float, b: float) -> tuple[float, float, float, float, float]:
    """(alpha, theta, beta, mu, nu) of a list of capacities.

    alpha, theta and beta are the fractions in [0, a), [a, b] and
    (b, log 2]; mu and nu are the mean of I and of I^2.
    """
    _check_window(a, b)
    I = np.asarray(I_values, dtype=float)
    if I.size == 0:
        raise OutOfRange("empty capacity list")
    n_lo = int(np.count_nonzero(I < a))
    n_hi = int(np.count_nonzero(I > b))
    n_mid = I.size - n_lo - n_hi
    return (n_lo / I.size, n_mid / I.size, n_hi / I.size, float(np.mean(I)), float(np.mean(I * I)))


def T_value(I) -> np.ndarray:
    """T = h (1 - h) with h = H / log 2 the normalized entropy, so T is in [0, 1/4]."""
    h = 1.0 - np.asarray(I, dtype=float) / LOG2
    return h * (1.0 - h)


@dataclass(frozen=True)
class PolarizationTrace:
    n: int
    I_values: np.ndarray = field(repr=False)
    alpha: float
    theta: float
    beta: float
    mu: float
    nu: float
    expected_T: float


def polarization_trace(levels: Sequence[np.ndarray], a: float, b: float) -> list[PolarizationTrace]:
    out = []
    for n, I in enumerate(levels):
        alpha, theta, beta, mu, nu = polarization_stats(I, a, b)
        out.append(PolarizationTrace(n, np.asarray(I), alpha, theta, beta, mu, nu, float(np.mean(T_value(I)))))
    return out


# ---- non-stationary recursion --------------------------------------------


def _butterfly(level: list, N: int, combine: Callable) -> list:
    """One recursion level: slots Nm + j and Nm + N/2 + j feed the minus
    channel at Nm + j and the plus channel at Nm + N/2 + j."""
    half = N // 2
    nxt = list(level)
    for m in range(len(level) // N):
        for j in range(half):
            lo, hi = m * N + j, m * N + half + j
            nxt[lo], nxt[hi] = combine(level[lo], level[hi])
    return nxt


def _bec_pair(x: BecChannel, y: BecChannel):
    return x.minus(y), x.plus(y)


def _bms_pair(x: BmsChannel, y: BmsChannel):
    return x.minus(y), x.plus(y)


def nonstationary_levels(channels: Sequence, n: int, max_block_dim: int = MAX_BLOCK_DIM) -> list[np.ndarray]:
    """Capacities after each of the first k = 0..n recursion levels.

    ``channels`` holds CqChannel, BecChannel or BmsChannel objects (one
    kind per call); its length must be a multiple of 2^n.  BEC inputs take
    a vectorized path.
    """
    n = _check_levels(n)
    channels = list(channels)
    if not channels or len(channels) % (1 << n):
        raise BadLength(f"{len(channels)} channels is not a positive multiple of 2^{n}")
    kinds = {type(c) for c in channels}
    if len(kinds) != 1:
        raise OutOfRange("mixed channel representations")
    kind = kinds.pop()
    if kind is BecChannel:
        eps = np.array([c.eps for c in channels])
        out = [(1.0 - eps) * LOG2]
        for k in range(1, n + 1):
            e = eps.reshape(-1, 2, 1 << (k - 1))
            top, bot = e[:, 0, :], e[:, 1, :]
            eps = np.stack((top + bot - top * bot, top * bot), axis=1).reshape(-1)
            out.append((1.0 - eps) * LOG2)
        return out
    if kind is CqChannel:
        for c in channels:
            if not c.is_uniform:
                raise NonUniformPrior("non-stationary recursion needs uniform priors")
        _check_budget(channels, n, max_block_dim)
        level = [compress(c) for c in channels]
        combine, cap = _combine_pair, _capacity
    elif kind is BmsChannel:
        level, combine, cap = channels, _bms_pair, lambda c: c.capacity()
    else:
        raise OutOfRange(f"unsupported channel type {kind.__name__}")
    out = [np.array([cap(c) for c in level])]
    for k in range(1, n + 1):
        level = _butterfly(level, 1 << k, combine)
        out.append(np.array([cap(c) for c in level]))
    return out


def nonstationary_polarize(channels: Sequence, n: int, max_block_dim: int = MAX_BLOCK_DIM) -> np.ndarray:
    return nonstationary_levels(channels, n, max_block_dim)[-1]


def bit_reverse_permutation(n: int) -> np.ndarray:
    """Index map r with r[i] = i read backwards in n bits."""
    idx = np.arange(1 << n)
    rev = np.zeros_like(idx)
    for k in range(n):
        rev |= ((idx >> k) & 1) << (n - 1 - k)
    return rev


# ---- speed of polarization -----------------------------------------------


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    rss: float


@dataclass(frozen=True)
class SpeedTrace:
    expected_T: np.ndarray
    fit_linear: LinearFit | None  # log E[T] ~ intercept + slope * n
    fit_sqrt: LinearFit | None  # log E[T] ~ intercept + slope * sqrt(n)


def _lstsq(x: np.ndarray, y: np.ndarray) -> LinearFit | None:
    if x.size < 2:
        return None
    A = np.column_stack((x, np.ones_like(x)))
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    rss = float(np.sum((A @ coef - y) ** 2))
    return LinearFit(float(coef[0]), float(coef[1]), rss)


def speed_trace(source, n: int, param: float | None = None, max_block_dim: int = MAX_BLOCK_DIM) -> SpeedTrace:
    """E[T] per level with least-squares fits of log E[T] against n and sqrt(n).

    ``source`` is a CqChannel (exact backend) or the strings ``"bec"`` /
    ``"bsc"`` together with ``param``.  Levels with E[T] = 0 are left out
    of the fits.
    """
    if isinstance(source, CqChannel):
        levels = polarize_exact_levels(source, n, max_block_dim)
    else:
        if param is None:
            raise OutOfRange("classical backends need a channel parameter")
        levels = polarize_classical_levels(str(source), param, n)
    eT = np.array([float(np.mean(T_value(I))) for I in levels])
    x = np.arange(len(eT), dtype=float)
    pos = eT > 0.0
    y = np.log(eT[pos]) if pos.any() else np.array([])
    return SpeedTrace(eT, _lstsq(x[pos], y), _lstsq(np.sqrt(x[pos]), y))


# ---- Monte Carlo paths ---------------------------------------------------


def sample_paths(source, n: int, paths: int, seed: int = 0, max_block_dim: int = MAX_BLOCK_DIM):
    """Follow ``paths`` uniformly random sign sequences of length n.

    Path k draws its signs from the stream ``(seed, k)``.  ``source`` is a
    CqChannel, BecChannel or BmsChannel.  Returns ``(signs, capacities)``
    where ``signs[k, t] = 1`` marks a plus step at level t.
    """
    n = _check_levels(n)
    if paths < 1:
        raise OutOfRange("need at least one path")
    if isinstance(source, CqChannel):
        _check_budget([source], n, max_block_dim)
        start = compress(source)

        def step(c, s):
            return compress(varoast(c, c) if s else boxast(c, c))

        cap = _capacity
    else:
        start = source

        def step(c, s):
            return c.plus() if s else c.minus()

        def cap(c):
            return c.capacity()

    signs = np.zeros((paths, n), dtype=np.int8)
    caps = np.zeros(paths)
    for k in range(paths):
        signs[k] = sample_rng(seed, k).integers(0, 2, size=n)
        c = start
        for s in signs[k]:
            c = step(c, int(s))
        caps[k] = cap(c)
    return signs, caps
