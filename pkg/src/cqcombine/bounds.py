"""Scalar entropy bounds for combining binary inputs under side information.

Every function here works in nats and accepts floats or numpy arrays
(broadcasting elementwise).  Inputs outside their domain by more than
``DOMAIN_TOL`` raise :class:`~cqcombine.errors.OutOfRange`; smaller
overshoots are clipped.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from . import linalg
from .channels import CqChannel, channel_entropy
from .combine import minus_entropy
from .errors import EqualityFormMismatch, InvalidEnsemble, OutOfRange
from .linalg import LOG2

DOMAIN_TOL = 1e-12
CLAMP_TOL = 1e-12
BISECTION_STEPS = 60
EQUALITY_FORM_TOL = 1e-8
PROVEN_TOL = 1e-8
CONJECTURE_TOL = 1e-7
CONVENIENT_CONSTANT = 0.083


def _ret(x):
    return float(x) if np.ndim(x) == 0 else x


def _in_range(name: str, x, lo: float, hi: float):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < lo - DOMAIN_TOL) or np.any(x > hi + DOMAIN_TOL):
        raise OutOfRange(f"{name} outside [{lo}, {hi}]")
    return np.clip(x, lo, hi)


def _entropy_arg(name: str, H):
    return _in_range(name, H, 0.0, LOG2)


def _clamped_arccos(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + CLAMP_TOL):
        raise OutOfRange("arccos argument outside [-1, 1]")
    return np.arccos(np.clip(x, -1.0, 1.0))


# ---- binary entropy and friends ------------------------------------------


def _h2(p: np.ndarray) -> np.ndarray:
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(p > 0.0, -p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
        b = np.where(q > 0.0, -q * np.log(np.where(q > 0.0, q, 1.0)), 0.0)
    return a + b


def binary_entropy(p):
    """h2(p) = -p log p - (1-p) log(1-p)."""
    return _ret(_h2(_in_range("p", p, 0.0, 1.0)))


def _h2_gap(x: np.ndarray) -> np.ndarray:
    """log 2 - h2(x), accurate near x = 1/2."""
    t = 1.0 - 2.0 * x
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.where(t < 1.0, (1.0 - t) * np.log1p(-np.where(t < 1.0, t, 0.0)), 0.0)
    return 0.5 * ((1.0 + t) * np.log1p(t) + lo)


def _h2_inverse(h: np.ndarray, gap: np.ndarray) -> np.ndarray:
    """Bisection for h2(x) = h on [0, 1/2], with ``gap = log 2 - h`` supplied
    separately so that arguments close to log 2 keep full precision."""
    use_gap = gap < h
    lo = np.zeros(np.shape(h))
    hi = np.full(np.shape(h), 0.5)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = np.where(use_gap, _h2_gap(mid) > gap, _h2(mid) < h)
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return np.where(h <= 0.0, 0.0, np.where(gap <= 0.0, 0.5, 0.5 * (lo + hi)))


def binary_entropy_inverse(h):
    """Inverse of h2 on [0, 1/2]: fixed 60-step bisection, vectorized."""
    h = _entropy_arg("h", h)
    return _ret(_h2_inverse(h, LOG2 - h))


def _inverse_of_gap(g) -> np.ndarray:
    """h2^-1(log 2 - g) without forming log 2 - g first."""
    g = np.clip(np.asarray(g, dtype=float), 0.0, LOG2)
    return _h2_inverse(LOG2 - g, g)


def binary_convolution(a, b):
    """a * b = a(1-b) + (1-a)b."""
    a = _in_range("a", a, 0.0, 1.0)
    b = _in_range("b", b, 0.0, 1.0)
    return _ret(a * (1.0 - b) + (1.0 - a) * b)


def gc(H1, H2):
    """h2(h2^-1(H1) * h2^-1(H2)), the classical optimal lower bound."""
    a = binary_entropy_inverse(H1)
    b = binary_entropy_inverse(H2)
    return _ret(_h2(np.asarray(binary_convolution(a, b))))


def classical_bounds(H1, H2):
    """Optimal classical (lower, upper) bounds on H(X1 + X2 | Y1 Y2)."""
    H1 = _entropy_arg("H1", H1)
    H2 = _entropy_arg("H2", H2)
    lower = np.asarray(gc(H1, H2))
    upper = LOG2 - (LOG2 - H1) * (LOG2 - H2) / LOG2
    return _ret(lower), _ret(upper)


def classical_plus_bounds(H1, H2):
    """Optimal classical (lower, upper) bounds on H(X2 | X1 + X2, Y1 Y2)."""
    H1 = _entropy_arg("H1", H1)
    H2 = _entropy_arg("H2", H2)
    lower = H1 * H2 / LOG2
    upper = H1 + H2 - np.asarray(gc(H1, H2))
    return _ret(lower), _ret(upper)


# ---- concavity of the von Neumann entropy --------------------------------


def _ensemble(probs, states):
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or len(probs) != len(states) or len(states) == 0:
        raise InvalidEnsemble("need one probability per state")
    if np.any(probs < 0.0) or abs(probs.sum() - 1.0) > linalg.TAU_TR:
        raise InvalidEnsemble("probabilities must be nonnegative and sum to 1")
    states = [np.asarray(s, dtype=complex) for s in states]
    if len({s.shape for s in states}) != 1:
        raise InvalidEnsemble("states of differing dimensions")
    try:
        states = [linalg.density_matrix(s) for s in states]
    except linalg.InvalidState as exc:
        raise InvalidEnsemble(str(exc)) from exc
    return probs, states


def _shannon(probs: np.ndarray) -> float:
    return linalg.entropy_from_eigenvalues(probs)


def concavity_gap_forms(probs, states) -> tuple[float, float]:
    """Both evaluations of H(sum p_i rho_i) - sum p_i H(rho_i).

    Returns ``(direct, via_relative_entropy)`` where the second is
    H({p_i}) - D(psi_BC || P_B(psi_BC)) with
    psi_BC = sum_ij sqrt(p_i p_j) |i><j| (x) sqrt(rho_i) sqrt(rho_j) and
    P_B the pinching onto the |i> blocks.
    """
    probs, states = _ensemble(probs, states)
    n = len(states)
    d = states[0].shape[0]
    mix = sum(p * s for p, s in zip(probs, states))
    direct = linalg.von_neumann_entropy(mix, validate=False) - sum(
        p * linalg.von_neumann_entropy(s, validate=False) for p, s in zip(probs, states)
    )
    roots = [linalg.matrix_sqrt(s) for s in states]
    psi = np.zeros((n * d, n * d), dtype=complex)
    pinched = np.zeros_like(psi)
    for i in range(n):
        for j in range(n):
            blk = np.sqrt(probs[i] * probs[j]) * (roots[i] @ roots[j])
            psi[i * d:(i + 1) * d, j * d:(j + 1) * d] = blk
            if i == j:
                pinched[i * d:(i + 1) * d, i * d:(i + 1) * d] = probs[i] * states[i]
    via = _shannon(probs) - linalg.relative_entropy(psi, pinched)
    return float(direct), float(via)


def concavity_gap_exact(probs, states) -> float:
    """Concavity gap, computed two ways and cross-checked to 1e-8.

    Raises:
        EqualityFormMismatch: if the two evaluations disagree.
    """
    direct, via = concavity_gap_forms(probs, states)
    if abs(direct - via) > EQUALITY_FORM_TOL:
        raise EqualityFormMismatch(f"direct {direct!r} vs relative-entropy form {via!r}")
    return direct


def _pairwise_bound(probs, states, overlap) -> float:
    probs, states = _ensemble(probs, states)
    roots = [linalg.matrix_sqrt(s) for s in states]
    acc = 0.0
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            acc += np.sqrt(probs[i] * probs[j]) * overlap(roots[i], roots[j])
    return float(_shannon(probs) - np.log(1.0 + 2.0 * acc))


def concavity_lower_sqrt(probs, states) -> float:
    """H({p}) - log(1 + 2 sum_{i<j} sqrt(p_i p_j) tr[sqrt(rho_i) sqrt(rho_j)])."""
    return _pairwise_bound(probs, states, lambda a, b: float(np.trace(a @ b).real))


def concavity_lower_fid(probs, states) -> float:
    """Same as :func:`concavity_lower_sqrt` with the trace replaced by the fidelity."""
    return _pairwise_bound(probs, states, lambda a, b: min(1.0, linalg.trace_norm(a @ b)))


# ---- fidelity and entropy ------------------------------------------------


def fidelity_window(H):
    """(e^H - 1, 1 - 2 h2^-1(log 2 - H)): the fidelity range allowed by H(X|B) = H."""
    H = _entropy_arg("H", H)
    lo = np.clip(np.expm1(H), 0.0, 1.0)
    hi = 1.0 - 2.0 * _inverse_of_gap(H)
    return _ret(lo), _ret(np.clip(hi, 0.0, 1.0))


def fuchs_vdg_lower(H):
    """1 - sqrt(2 (log 2 - H)) clipped to [0, 1]."""
    H = _entropy_arg("H", H)
    return _ret(np.clip(1.0 - np.sqrt(2.0 * (LOG2 - H)), 0.0, 1.0))


def mgl_fg(f, g):
    """-2 log cos(arccos(f g)/2 - arccos(g)/2)."""
    f = _in_range("f", f, 0.0, 1.0)
    g = _in_range("g", g, 0.0, 1.0)
    angle = 0.5 * _clamped_arccos(f * g) - 0.5 * _clamped_arccos(g)
    return _ret(np.maximum(-2.0 * np.log(np.cos(angle)), 0.0))


def _upper_fid(H):
    """1 - 2 h2^-1(log 2 - H)."""
    return np.clip(1.0 - 2.0 * _inverse_of_gap(H), 0.0, 1.0)


def _upper_fid_dual(H):
    """1 - 2 h2^-1(H), the same edge for the dual channel."""
    return np.clip(1.0 - 2.0 * _h2_inverse(H, LOG2 - H), 0.0, 1.0)


def qmgl_lower_asym(H1, H2):
    """Lower bound on H(X1 + X2 | B1 B2) for uniform priors and any two channels.

    The maximum of four expressions: two from the fidelity route applied
    to (W1, W2) and (W2, W1), and two more from applying the same route to
    the dual channels, whose entropies are log 2 - H_i.
    """
    H1 = _entropy_arg("H1", H1)
    H2 = _entropy_arg("H2", H2)
    with np.errstate(invalid="ignore"):
        terms = np.stack(
            np.broadcast_arrays(
                H1 + np.asarray(mgl_fg(_upper_fid(H1), np.clip(np.expm1(H2), 0.0, 1.0))),
                H2 + np.asarray(mgl_fg(_upper_fid(H2), np.clip(np.expm1(H1), 0.0, 1.0))),
                H2 + np.asarray(mgl_fg(_upper_fid_dual(H1), np.clip(2.0 * np.exp(-H2) - 1.0, 0.0, 1.0))),
                H1 + np.asarray(mgl_fg(_upper_fid_dual(H2), np.clip(2.0 * np.exp(-H1) - 1.0, 0.0, 1.0))),
            )
        )
    fallback = np.maximum(H1, H2)
    best = np.where(np.all(np.isnan(terms), axis=0), fallback, np.nanmax(np.where(np.isnan(terms), -np.inf, terms), axis=0))
    return _ret(np.maximum(best, fallback))


def _iid_excess(x):
    """-2 log cos(arccos(x^2)/2 - arccos(x)/2)."""
    angle = 0.5 * _clamped_arccos(x * x) - 0.5 * _clamped_arccos(x)
    return np.maximum(-2.0 * np.log(np.cos(angle)), 0.0)


def qmgl_lower_iid(H):
    """Lower bound on H(X1 + X2 | B1 B2) for two identical uniform-prior channels."""
    H = _entropy_arg("H", H)
    low = H <= 0.5 * LOG2
    arg = np.where(low, H, LOG2 - H)
    x = 1.0 - 2.0 * np.asarray(binary_entropy_inverse(arg))
    return _ret(H + _iid_excess(x))


def qmgl_lower_iid_convenient(H, base: str = "nat"):
    """H + 0.083 H / (1 - log H), mirrored about log(2)/2.

    The constant is only valid with natural logarithms; any other ``base``
    is rejected.
    """
    if base not in ("nat", "nats", "e"):
        raise ValueError("the 0.083 constant requires natural-log entropies")
    H = _entropy_arg("H", H)
    low = H <= 0.5 * LOG2
    arg = np.where(low, H, LOG2 - H)
    with np.errstate(divide="ignore"):
        safe = np.where(arg > 0.0, arg, 1.0)
        excess = np.where(arg > 0.0, CONVENIENT_CONSTANT * arg / (1.0 - np.log(safe)), 0.0)
    return _ret(H + excess)


# ---- conjectured optimal bounds ------------------------------------------


def conjectured_lower(H1, H2):
    """Conjectured optimal lower bound: classical branch below H1 + H2 = log 2,
    its dual mirror above."""
    H1 = _entropy_arg("H1", H1)
    H2 = _entropy_arg("H2", H2)
    classical = np.asarray(gc(H1, H2))
    mirrored = H1 + H2 - LOG2 + np.asarray(gc(LOG2 - H1, LOG2 - H2))
    return _ret(np.where(H1 + H2 <= LOG2, classical, mirrored))


def conjectured_upper(H1, H2):
    H1 = _entropy_arg("H1", H1)
    H2 = _entropy_arg("H2", H2)
    return _ret(LOG2 - (LOG2 - H1) * (LOG2 - H2) / LOG2)


def kappa_estimate(a: float, b: float, grid_n: int = 100) -> float:
    """Grid estimate of min 2 (qmgl_lower_asym(H1, H2) - max(H1, H2)).

    Capacities in [a, b] correspond to entropies in [log 2 - b, log 2 - a];
    the minimum runs over a ``grid_n`` x ``grid_n`` lattice on that square.
    """
    if not (0.0 < a < b < LOG2):
        raise OutOfRange(f"need 0 < a < b < log 2, got a={a}, b={b}")
    if grid_n < 2:
        raise OutOfRange("grid_n must be at least 2")
    hs = np.linspace(LOG2 - b, LOG2 - a, int(grid_n))
    H1, H2 = np.meshgrid(hs, hs, indexing="ij")
    gap = np.asarray(qmgl_lower_asym(H1, H2)) - np.maximum(H1, H2)
    return float(2.0 * gap.min())


# ---- reports -------------------------------------------------------------

BOUND_COLUMNS = ("cl_lo", "cl_hi", "thm3", "thm4", "thm4_conv", "conj_lo", "conj_hi")


def evaluate_bounds(H1, H2, exact, identical=False, uniform=True) -> dict:
    """All bound values, slacks and flags for arrays of (H1, H2, exact).

    ``identical`` and ``uniform`` may be scalars or boolean arrays.  Proven
    bounds (the two quantum Mrs. Gerber bounds) only apply with uniform
    priors and are NaN elsewhere; the convenient i.i.d. form only applies
    to identical pairs.
    """
    H1 = np.atleast_1d(_entropy_arg("H1", H1))
    H2 = np.atleast_1d(_entropy_arg("H2", H2))
    exact = np.atleast_1d(np.asarray(exact, dtype=float))
    identical = np.broadcast_to(np.asarray(identical, dtype=bool), H1.shape)
    uniform = np.broadcast_to(np.asarray(uniform, dtype=bool), H1.shape)
    cl_lo, cl_hi = classical_bounds(H1, H2)
    out = {
        "cl_lo": np.asarray(cl_lo),
        "cl_hi": np.asarray(cl_hi),
        "thm3": np.where(uniform, qmgl_lower_asym(H1, H2), np.nan),
        "thm4": np.where(uniform & identical, qmgl_lower_iid(H1), np.nan),
        "thm4_conv": np.where(uniform & identical, qmgl_lower_iid_convenient(H1), np.nan),
        "conj_lo": np.asarray(conjectured_lower(H1, H2)),
        "conj_hi": np.asarray(conjectured_upper(H1, H2)),
    }
    proven_slack = np.fmin(
        np.fmin(exact - out["thm3"], exact - out["thm4"]),
        exact - np.maximum(H1, H2),
    )
    conj_slack = np.minimum(exact - out["conj_lo"], out["conj_hi"] - exact)
    out["proven_slack"] = proven_slack
    out["conjecture_slack"] = conj_slack
    out["proven_violation"] = uniform & (proven_slack < -PROVEN_TOL)
    out["conjecture_violation"] = conj_slack < -CONJECTURE_TOL
    out["classical_lower_violated"] = exact < out["cl_lo"] - CONJECTURE_TOL
    return out


@dataclass
class BoundReport:
    H1: float
    H2: float
    exact: float
    uniform: bool
    identical: bool
    values: dict = field(default_factory=dict)
    slack: dict = field(default_factory=dict)
    proven_violation: bool = False
    conjecture_violation: bool = False
    classical_lower_violated: bool = False


def _same_channel(W1: CqChannel, W2: CqChannel) -> bool:
    if W1 is W2:
        return True
    if W1.prior != W2.prior or W1.block_dims != W2.block_dims:
        return False
    return all(
        np.array_equal(a0, b0) and np.array_equal(a1, b1) for (a0, a1), (b0, b1) in zip(W1.blocks, W2.blocks)
    )


def bound_report(W1: CqChannel, W2: CqChannel) -> BoundReport:
    """Exact H(X1 + X2 | B1 B2) against every bound for one channel pair."""
    H1 = channel_entropy(W1)
    H2 = channel_entropy(W2)
    exact = minus_entropy(W1, W2)
    uniform = W1.is_uniform and W2.is_uniform
    identical = _same_channel(W1, W2)
    ev = evaluate_bounds(H1, H2, exact, identical=identical, uniform=uniform)
    values = {k: float(ev[k][0]) for k in BOUND_COLUMNS}
    slack = {
        "cl_lo": exact - values["cl_lo"],
        "cl_hi": values["cl_hi"] - exact,
        "thm3": exact - values["thm3"],
        "thm4": exact - values["thm4"],
        "thm4_conv": exact - values["thm4_conv"],
        "conj_lo": exact - values["conj_lo"],
        "conj_hi": values["conj_hi"] - exact,
    }
    return BoundReport(
        H1=H1,
        H2=H2,
        exact=exact,
        uniform=uniform,
        identical=identical,
        values=values,
        slack=slack,
        proven_violation=bool(ev["proven_violation"][0]),
        conjecture_violation=bool(ev["conjecture_violation"][0]),
        classical_lower_violated=bool(ev["classical_lower_violated"][0]),
    )
