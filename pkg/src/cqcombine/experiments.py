"""Numerical campaigns: conjecture sweeps, bound curves, duality checks,
polarization runs and speed traces.

Every runner takes an :class:`ExperimentConfig`, returns its results in
memory and, when ``out_path`` is set, writes them as CSV (header row,
``%.17g`` values) or JSON.  Sample ``i`` always draws from the random
stream keyed by ``(seed, i)``, so output is byte-identical across reruns.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import bounds, duality, polar
from .channels import (
    bec_embed,
    bsc_embed,
    channel_entropy,
    pure_channel,
    random_cq_channel,
)
from .combine import pair_entropies_batch
from .errors import OutOfRange
from .linalg import LOG2

DEFAULT_SAMPLES = 50_000
FULL_SCALE_SAMPLES = 200_000
COMMANDS = ("sweep", "curves", "duality", "polarize", "speed")
CHANNEL_KINDS = ("bec", "bsc", "bec-embed", "bsc-embed", "pure", "random", "bec-mixed")


@dataclass
class ExperimentConfig:
    command: str = "sweep"
    seed: int = 0
    samples: int = DEFAULT_SAMPLES
    dims: list = field(default_factory=lambda: [2])
    prior: str = "half"
    pairing: str = "distinct"
    grid: int = 101
    a: float = 0.05 * LOG2
    b: float = 0.95 * LOG2
    log_base: str = "nat"
    out_path: str | None = None
    channel: str = "bec"
    param: float = 0.5
    levels: int = 10

    def validate(self) -> "ExperimentConfig":
        if self.command not in COMMANDS:
            raise OutOfRange(f"unknown command {self.command!r}")
        if self.samples < 1:
            raise OutOfRange("samples must be at least 1")
        if self.grid < 2:
            raise OutOfRange("grid must be at least 2")
        if not (0.0 < self.a < self.b < LOG2):
            raise OutOfRange(f"need 0 < a < b < log 2, got a={self.a}, b={self.b}")
        if self.log_base not in ("nat", "bits"):
            raise OutOfRange(f"unknown log base {self.log_base!r}")
        if self.prior not in ("half", "uniform"):
            raise OutOfRange(f"unknown prior mode {self.prior!r}")
        if self.pairing not in ("identical", "distinct"):
            raise OutOfRange(f"unknown pairing {self.pairing!r}")
        if not self.dims or any(int(d) < 1 for d in self.dims):
            raise OutOfRange("dimensions must be positive")
        if self.channel not in CHANNEL_KINDS:
            raise OutOfRange(f"unknown channel kind {self.channel!r}")
        if self.levels < 0:
            raise OutOfRange("levels must be nonnegative")
        return self

    @property
    def scale(self) -> float:
        """Factor converting nats into the output base."""
        return 1.0 if self.log_base == "nat" else 1.0 / LOG2


# ---- output helpers ------------------------------------------------------


def format_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def write_csv(path, header, columns) -> None:
    """Write equal-length columns as UTF-8 CSV with a header row."""
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    n = len(columns[0]) if columns else 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(n):
            w.writerow([format_value(col[i]) for col in columns])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def write_json(path, payload) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def sidecar(path, suffix: str) -> Path:
    """``out.csv`` -> ``out<suffix>``."""
    p = Path(path)
    return p.with_name(p.stem + suffix)


# ---- conjecture sweep ----------------------------------------------------

SWEEP_COLUMNS = (
    "sample",
    "d",
    "p1",
    "p2",
    "H1",
    "H2",
    "exact",
    *bounds.BOUND_COLUMNS,
    "proven_violation",
    "conjecture_violation",
    "classical_lower_violated",
)
_ENTROPIC = {"H1", "H2", "exact", *bounds.BOUND_COLUMNS}


@dataclass
class SweepResult:
    columns: dict
    summary: dict


def _sweep_channels(cfg: ExperimentConfig, idx: np.ndarray, d: int):
    mode = "half" if cfg.prior == "half" else "uniform"
    first = [random_cq_channel(d, mode, cfg.seed, 2 * int(i)) for i in idx]
    if cfg.pairing == "identical":
        second = first
    else:
        second = [random_cq_channel(d, mode, cfg.seed, 2 * int(i) + 1) for i in idx]
    return first, second


def run_conjecture_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Random channel pairs checked against every bound.

    Pair ``i`` uses dimension ``dims[i % len(dims)]``; its first channel
    comes from stream ``(seed, 2i)`` and, for distinct pairing, its second
    from ``(seed, 2i + 1)``.  Exact entropies are computed in batches per
    dimension; the proven bounds apply only to uniform priors.
    """
    cfg.validate()
    n = int(cfg.samples)
    dims = [int(d) for d in cfg.dims]
    d_of = np.array([dims[i % len(dims)] for i in range(n)])
    cols = {k: np.zeros(n) for k in ("p1", "p2", "H1", "H2", "exact", "chain")}
    for d in sorted(set(dims)):
        idx = np.flatnonzero(d_of == d)
        if idx.size == 0:
            continue
        first, second = _sweep_channels(cfg, idx, d)
        p1 = np.array([W.prior for W in first])
        p2 = np.array([W.prior for W in second])
        ent = pair_entropies_batch(
            p1,
            np.stack([W.sigma0 for W in first]),
            np.stack([W.sigma1 for W in first]),
            p2,
            np.stack([W.sigma0 for W in second]),
            np.stack([W.sigma1 for W in second]),
        )
        cols["p1"][idx], cols["p2"][idx] = p1, p2
        cols["H1"][idx] = ent["H1"]
        cols["H2"][idx] = ent["H2"]
        cols["exact"][idx] = ent["minus"]
        cols["chain"][idx] = ent["chain_residual"]
    uniform = (cols["p1"] == 0.5) & (cols["p2"] == 0.5)
    ev = bounds.evaluate_bounds(
        cols["H1"], cols["H2"], cols["exact"], identical=cfg.pairing == "identical", uniform=uniform
    )
    out = {
        "sample": np.arange(n),
        "d": d_of,
        "p1": cols["p1"],
        "p2": cols["p2"],
        "H1": cols["H1"],
        "H2": cols["H2"],
        "exact": cols["exact"],
    }
    for k in bounds.BOUND_COLUMNS:
        out[k] = ev[k]
    for k in ("proven_violation", "conjecture_violation", "classical_lower_violated"):
        out[k] = ev[k].astype(bool)
    cl_viol = out["classical_lower_violated"]
    summary = {
        "samples": n,
        "seed": cfg.seed,
        "dims": dims,
        "prior": cfg.prior,
        "pairing": cfg.pairing,
        "log_base": cfg.log_base,
        "proven_violations": int(np.count_nonzero(out["proven_violation"])),
        "conjecture_violations": int(np.count_nonzero(out["conjecture_violation"])),
        "classical_lower_violations": int(np.count_nonzero(cl_viol)),
        "max_chain_rule_residual": float(np.max(np.abs(cols["chain"]))),
        "min_proven_slack": float(np.nanmin(ev["proven_slack"])) if np.any(uniform) else None,
        "min_conjecture_slack": float(np.min(ev["conjecture_slack"])),
        "first_classical_lower_violation": int(np.flatnonzero(cl_viol)[0]) if cl_viol.any() else None,
    }
    if cfg.out_path:
        write_csv(
            cfg.out_path,
            SWEEP_COLUMNS,
            [out[k] * cfg.scale if k in _ENTROPIC else out[k] for k in SWEEP_COLUMNS],
        )
        write_json(sidecar(cfg.out_path, "_summary.json"), summary)
    return SweepResult(out, summary)


# ---- bound curves --------------------------------------------------------

CURVE_COLUMNS = ("H1", "H2", "exact", *bounds.BOUND_COLUMNS)
DIAG_COLUMNS = ("H", "f_lo", "f_hi", "fvdg", "thm3_diag", "thm4", "thm4_conv", "conj_lo_diag", "conj_hi_diag")


@dataclass
class CurveResult:
    grid: dict
    diagonal: dict


def run_bound_curves(cfg: ExperimentConfig) -> CurveResult:
    """Bound surfaces on a grid x grid lattice of (H1, H2) plus 1-D curves.

    The surface has no channel attached, so ``exact`` is NaN; the i.i.d.
    bounds are evaluated on the diagonal only.  The 1-D file (suffix
    ``_diag.csv``) holds the fidelity window, the Fuchs-van de Graaf
    comparison, and the diagonal of every entropy bound.
    """
    cfg.validate()
    hs = np.linspace(0.0, LOG2, int(cfg.grid))
    H1, H2 = np.meshgrid(hs, hs, indexing="ij")
    H1, H2 = H1.ravel(), H2.ravel()
    on_diag = np.arange(H1.size) // len(hs) == np.arange(H1.size) % len(hs)
    ev = bounds.evaluate_bounds(H1, H2, np.full(H1.size, np.nan), identical=on_diag, uniform=True)
    grid = {"H1": H1, "H2": H2, "exact": np.full(H1.size, np.nan)}
    grid.update({k: ev[k] for k in bounds.BOUND_COLUMNS})
    f_lo, f_hi = bounds.fidelity_window(hs)
    diag = {
        "H": hs,
        "f_lo": f_lo,
        "f_hi": f_hi,
        "fvdg": bounds.fuchs_vdg_lower(hs),
        "thm3_diag": bounds.qmgl_lower_asym(hs, hs),
        "thm4": bounds.qmgl_lower_iid(hs),
        "thm4_conv": bounds.qmgl_lower_iid_convenient(hs),
        "conj_lo_diag": bounds.conjectured_lower(hs, hs),
        "conj_hi_diag": bounds.conjectured_upper(hs, hs),
    }
    if cfg.out_path:
        s = cfg.scale
        write_csv(cfg.out_path, CURVE_COLUMNS, [grid[k] * s for k in CURVE_COLUMNS])
        fid = {"f_lo", "f_hi", "fvdg"}
        write_csv(
            sidecar(cfg.out_path, "_diag.csv"),
            DIAG_COLUMNS,
            [diag[k] if k in fid else diag[k] * s for k in DIAG_COLUMNS],
        )
    return CurveResult(grid, diag)


# ---- duality suite -------------------------------------------------------


def run_duality_suite(cfg: ExperimentConfig) -> dict:
    """Residuals of the duality identities over random uniform-prior pairs."""
    cfg.validate()
    fields = ("lemma_boxast", "lemma_varoast", "plus_from_dual", "double_dual", "capacity_sum")
    res = {k: [] for k in fields}
    res["mirror"] = []
    res["symmetry"] = []
    dims = [int(d) for d in cfg.dims]
    for i in range(int(cfg.samples)):
        d = dims[i % len(dims)]
        W1 = random_cq_channel(d, "half", cfg.seed, 2 * i)
        W2 = random_cq_channel(d, "half", cfg.seed, 2 * i + 1)
        rep = duality.check_duality_lemma(W1, W2)
        for k in fields:
            res[k].append(getattr(rep, k))
        res["mirror"].append(duality.mirror_identity_check(W1, W2))
        D1, D2 = duality.dual_channel(W1), duality.dual_channel(W2)
        res["symmetry"].append(
            abs(duality.symmetry_functional(W1, W2) - duality.symmetry_functional(D1, D2))
        )
    bec = []
    for eps in np.linspace(0.0, 1.0, 11):
        D = duality.dual_channel(bec_embed(float(eps)))
        bec.append({"eps": float(eps), "dual_capacity": LOG2 - channel_entropy(D), "expected": float(eps) * LOG2})
    report = {
        "samples": int(cfg.samples),
        "seed": cfg.seed,
        "dims": dims,
        "residuals": {k: {"max": float(np.max(v)), "mean": float(np.mean(v))} for k, v in res.items()},
        "max_residual": float(max(np.max(v) for v in res.values())),
        "bec_duals": bec,
        "max_bec_residual": float(max(abs(r["dual_capacity"] - r["expected"]) for r in bec)),
    }
    if cfg.out_path:
        write_json(cfg.out_path, report)
    return report


# ---- polarization --------------------------------------------------------

POLAR_COLUMNS = ("n", "alpha", "theta", "beta", "mu", "nu", "expected_T")
MIXED_BEC_CHANNELS = 1 << 14


def mixed_bec_list(count: int = MIXED_BEC_CHANNELS) -> list:
    """Erasure probabilities on the uniform midpoint grid (t + 1/2) / count."""
    return [polar.BecChannel((t + 0.5) / count) for t in range(count)]


def _source(cfg: ExperimentConfig):
    kind, p = cfg.channel, float(cfg.param)
    if kind in ("bec", "bsc"):
        return "classical", kind
    if kind == "bec-mixed":
        return "nonstationary", mixed_bec_list()
    builders = {
        "bec-embed": lambda: bec_embed(p),
        "bsc-embed": lambda: bsc_embed(p),
        "pure": lambda: pure_channel(p),
        "random": lambda: random_cq_channel(2, "half", cfg.seed, 0),
    }
    return "exact", builders[kind]()


def polarization_levels(cfg: ExperimentConfig) -> tuple[str, list]:
    backend, src = _source(cfg)
    if backend == "classical":
        return backend, polar.polarize_classical_levels(src, cfg.param, cfg.levels)
    if backend == "nonstationary":
        return backend, polar.nonstationary_levels(src, cfg.levels)
    return backend, polar.polarize_exact_levels(src, cfg.levels)


def run_polarization(cfg: ExperimentConfig) -> list:
    """Per-level polarization statistics; CSV plus a JSON run manifest."""
    cfg.validate()
    backend, levels = polarization_levels(cfg)
    trace = polar.polarization_trace(levels, cfg.a, cfg.b)
    if cfg.out_path:
        s = cfg.scale
        write_csv(
            cfg.out_path,
            POLAR_COLUMNS,
            [
                [t.n for t in trace],
                [t.alpha for t in trace],
                [t.theta for t in trace],
                [t.beta for t in trace],
                [t.mu * s for t in trace],
                [t.nu * s * s for t in trace],
                [t.expected_T for t in trace],
            ],
        )
        write_json(
            sidecar(cfg.out_path, "_manifest.json"),
            {
                "seed": cfg.seed,
                "backend": backend,
                "channel": cfg.channel,
                "param": cfg.param,
                "levels": cfg.levels,
                "budget": polar.MAX_BLOCK_DIM,
                "a": cfg.a,
                "b": cfg.b,
                "log_base": cfg.log_base,
            },
        )
    return trace


def run_speed(cfg: ExperimentConfig) -> polar.SpeedTrace:
    """E[T] per level and the two least-squares decay fits."""
    cfg.validate()
    backend, src = _source(cfg)
    if backend == "nonstationary":
        raise OutOfRange("speed traces need a single stationary channel")
    if backend == "classical":
        st = polar.speed_trace(src, cfg.levels, cfg.param)
    else:
        st = polar.speed_trace(src, cfg.levels)
    if cfg.out_path:
        write_csv(cfg.out_path, ("n", "expected_T"), [np.arange(len(st.expected_T)), st.expected_T])
        write_json(
            sidecar(cfg.out_path, "_fits.json"),
            {
                "channel": cfg.channel,
                "param": cfg.param,
                "backend": backend,
                "fit_linear": asdict(st.fit_linear) if st.fit_linear else None,
                "fit_sqrt": asdict(st.fit_sqrt) if st.fit_sqrt else None,
            },
        )
    return st


RUNNERS = {
    "sweep": run_conjecture_sweep,
    "curves": run_bound_curves,
    "duality": run_duality_suite,
    "polarize": run_polarization,
    "speed": run_speed,
}
