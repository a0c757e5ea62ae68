"""Monte-Carlo campaigns over random hyperparameters.

Each trial draws ``(theta, W)``, simulates a panel, and runs the three
estimators (bandwidth from the ratio rank, subspace centers, MAP
refinement).  Trials are keyed by ``(master_seed, trial id)`` through
:class:`numpy.random.SeedSequence`, so any single trial can be replayed and
the campaign output does not depend on the number of worker threads.
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .covest import estimate_covariance
from .kernel import PriorHyperParams
from .mapest import MapProblem, map_refine
from .signal import PanelConfig, generate_panel, make_rng, snr_to_noise_variance
from .subspace import estimate_centers

__all__ = [
    "McConfig",
    "TrialRecord",
    "sample_hyperparams",
    "relative_bandwidth_error",
    "relative_center_error",
    "run_trial",
    "run_campaign",
    "boxplot_stats",
    "summarize",
    "read_trials",
    "trials_header",
]

TWO_PI = 2 * np.pi
# default amplitude bound of the reference two-frequency setup; sigma2 = bound**2 / 3
REFERENCE_AMP_BOUND = 1.3813


@dataclass
class McConfig:
    trials: int = 100
    N: list = field(default_factory=lambda: [100])
    L: list = field(default_factory=lambda: [100])
    snr_db: list = field(default_factory=lambda: [15.0])
    nu: int = 2
    w_range: tuple = (TWO_PI * 0.01, TWO_PI * 0.05)
    master_seed: int = 20190625
    outputs: str | None = None
    tie_nl: bool = False
    amp_law: str = "uniform"
    amp_bound: float = REFERENCE_AMP_BOUND
    run_map: bool = True
    cluster_method: str = "gap"
    search_max: int | None = None
    record_timing: bool = False

    def __post_init__(self):
        for name in ("N", "L", "snr_db"):
            v = getattr(self, name)
            v = [v] if np.isscalar(v) else list(v)
            if not v:
                raise ValueError(f"sweep list {name} is empty")
            setattr(self, name, v)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.tie_nl and len(self.N) != len(self.L):
            raise ValueError("tie_nl needs N and L lists of equal length")
        lo, hi = self.w_range
        if not 0 < lo <= hi < np.pi / 2:
            raise ValueError("w_range must satisfy 0 < lo <= hi < pi/2")
        self.w_range = (float(lo), float(hi))

    @property
    def amp_variance(self) -> float:
        if self.amp_law == "uniform":
            return self.amp_bound**2 / 3.0
        return self.amp_bound**2

    def points(self) -> list:
        """Sweep points as ``(N, L, snr_db)`` tuples."""
        nl = list(zip(self.N, self.L)) if self.tie_nl else [(n, l) for n in self.N for l in self.L]
        return [(int(n), int(l), float(s)) for (n, l) in nl for s in self.snr_db]

    @classmethod
    def from_json(cls, path) -> "McConfig":
        raw = json.loads(Path(path).read_text())
        if "w_range" in raw:
            raw["w_range"] = tuple(raw["w_range"])
        return cls(**raw)


@dataclass
class TrialRecord:
    trial: int
    N: int
    L: int
    snr_db: float
    theta_true: list
    w_true: float
    w_hat: float = math.nan
    w_rel_err: float = math.nan
    theta_hat: list = field(default_factory=list)
    theta_rel_err: float = math.nan
    omega_map: list = field(default_factory=list)
    map_rel_err: float = math.nan
    rank_hat: int = -1
    flags: list = field(default_factory=list)
    ms: float | None = None


def sample_hyperparams(rng, nu: int, w_range=(TWO_PI * 0.01, TWO_PI * 0.05), max_tries: int = 10_000):
    """Draw ``W ~ U[w_range]`` then centers ``U[W, pi - W]`` with pairwise gaps above ``2W``.

    Rejection is on the whole center vector; a fresh ``W`` is not drawn.
    Returns sorted centers and ``W``.
    """
    W = float(rng.uniform(*w_range))
    for _ in range(max_tries):
        theta = np.sort(rng.uniform(W, np.pi - W, size=nu))
        if nu == 1 or np.all(np.diff(theta) > 2 * W):
            return theta, W
    raise RuntimeError(f"could not place {nu} centers with W={W:.4g} after {max_tries} draws")


def relative_bandwidth_error(W_hat: float, W: float) -> float:
    """Signed ``(W_hat - W) / W``; positive means overestimation."""
    if W == 0:
        raise ZeroDivisionError("true bandwidth is zero")
    return (W_hat - W) / W


def relative_center_error(theta_hat, theta) -> float:
    """``||theta_hat - theta|| / ||theta||`` after sorting both vectors."""
    theta_hat = np.sort(np.atleast_1d(np.asarray(theta_hat, dtype=float)))
    theta = np.sort(np.atleast_1d(np.asarray(theta, dtype=float)))
    if theta_hat.shape != theta.shape:
        raise ValueError(f"dimension mismatch: {theta_hat.shape} vs {theta.shape}")
    return float(np.linalg.norm(theta_hat - theta) / np.linalg.norm(theta))


def _panel_seed(master_seed, trial, point):
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(1, int(trial), int(point)))
    return int(ss.generate_state(1, np.uint64)[0])


def run_trial(cfg: McConfig, trial: int, point: int = 0) -> TrialRecord:
    """One trial at sweep point ``point``; never raises on estimator failure."""
    N, L, snr = cfg.points()[point]
    t0 = time.perf_counter()
    # hyperparameters depend on the trial only, so sweep points share them
    theta, W = sample_hyperparams(make_rng(cfg.master_seed, 0, trial), cfg.nu, cfg.w_range)
    rec = TrialRecord(trial, N, L, snr, theta.tolist(), W)
    s2 = cfg.amp_variance
    prior = PriorHyperParams(theta, W, s2, snr_to_noise_variance(snr, s2))
    panel = generate_panel(
        PanelConfig(prior, N, L, cfg.amp_law, seed=_panel_seed(cfg.master_seed, trial, point))
    )
    try:
        cov = estimate_covariance(panel, cfg.nu, search_max=cfg.search_max)
        rec.w_hat, rec.rank_hat = cov.W_hat, cov.rank_hat
        rec.w_rel_err = relative_bandwidth_error(cov.W_hat, W)
        rec.flags.extend(cov.flags)
        sub = estimate_centers(cov, cfg.nu, method=cfg.cluster_method)
        rec.theta_hat = sub.theta_hat.tolist()
        rec.theta_rel_err = relative_center_error(sub.theta_hat, theta)
        rec.flags.extend(f for f in sub.flags if f not in rec.flags)
        if cfg.run_map:
            res = map_refine(MapProblem.from_panel(panel, sub.theta_hat, sub.W_hat))
            rec.omega_map = res.omega_map.tolist()
            rec.map_rel_err = relative_center_error(res.omega_map, theta)
            rec.flags.extend(res.flags)
    except Exception as exc:  # a failed trial is flagged, the campaign goes on
        rec.flags.append(f"error:{type(exc).__name__}")
    if cfg.record_timing:
        rec.ms = 1e3 * (time.perf_counter() - t0)
    return rec


def trials_header(nu: int) -> list:
    th = [f"theta_true{i + 1}" for i in range(nu)]
    hat = [f"theta_hat{i + 1}" for i in range(nu)]
    om = [f"omega_map{i + 1}" for i in range(nu)]
    return (
        ["trial", "N", "L", "snr_db"]
        + th
        + ["w_true", "w_hat", "w_rel_err"]
        + hat
        + ["theta_rel_err"]
        + om
        + ["map_rel_err", "rank_hat", "flags", "ms"]
    )


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _pad(v, nu):
    return list(v) + [math.nan] * (nu - len(v))


def _row(rec: TrialRecord, nu: int) -> list:
    vals = (
        [rec.trial, rec.N, rec.L, rec.snr_db]
        + _pad(rec.theta_true, nu)
        + [rec.w_true, rec.w_hat, rec.w_rel_err]
        + _pad(rec.theta_hat, nu)
        + [rec.theta_rel_err]
        + _pad(rec.omega_map, nu)
        + [rec.map_rel_err, rec.rank_hat]
    )
    return [_fmt(v) for v in vals] + [";".join(rec.flags), _fmt(rec.ms)]


def read_trials(path) -> list:
    """Parse ``trials.csv`` back into :class:`TrialRecord` objects."""
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            def vec(prefix):
                keys = sorted((k for k in row if k.startswith(prefix) and k[len(prefix):].isdigit()),
                              key=lambda k: int(k[len(prefix):]))
                v = [float(row[k]) for k in keys]
                return [] if all(math.isnan(x) for x in v) else v

            out.append(
                TrialRecord(
                    trial=int(row["trial"]),
                    N=int(row["N"]),
                    L=int(row["L"]),
                    snr_db=float(row["snr_db"]),
                    theta_true=vec("theta_true"),
                    w_true=float(row["w_true"]),
                    w_hat=float(row["w_hat"]),
                    w_rel_err=float(row["w_rel_err"]),
                    theta_hat=vec("theta_hat"),
                    theta_rel_err=float(row["theta_rel_err"]),
                    omega_map=vec("omega_map"),
                    map_rel_err=float(row["map_rel_err"]),
                    rank_hat=int(row["rank_hat"]),
                    flags=[f for f in row["flags"].split(";") if f],
                    ms=float(row["ms"]) if row["ms"] else None,
                )
            )
    return out


def boxplot_stats(values) -> dict:
    """Median, quartiles, 1.5 IQR whiskers and outliers of the finite values."""
    x = np.asarray(values, dtype=float)
    n_nan = int(np.sum(~np.isfinite(x)))
    x = np.sort(x[np.isfinite(x)])
    if x.size == 0:
        return {"n": 0, "n_missing": n_nan}
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    iqr = q3 - q1
    inside = x[(x >= q1 - 1.5 * iqr) & (x <= q3 + 1.5 * iqr)]
    return {
        "n": int(x.size),
        "n_missing": n_nan,
        "median": float(med),
        "q1": float(q1),
        "q3": float(q3),
        "whisker_lo": float(inside.min()),
        "whisker_hi": float(inside.max()),
        "outliers": [float(v) for v in x if v < inside.min() or v > inside.max()],
        "mean": float(x.mean()),
    }


def _in_box(rec: TrialRecord) -> bool | None:
    if not rec.omega_map or not rec.theta_hat:
        return None
    om, th = np.asarray(rec.omega_map), np.asarray(rec.theta_hat)
    return bool(np.all((th - rec.w_hat <= om) & (om <= th + rec.w_hat)))


def summarize(records) -> dict:
    """Per sweep point statistics; a pure function of the trial records."""
    groups = {}
    for r in records:
        groups.setdefault((r.N, r.L, r.snr_db), []).append(r)
    points = []
    for (N, L, snr), recs in sorted(groups.items()):
        recs = sorted(recs, key=lambda r: r.trial)
        inbox = [_in_box(r) for r in recs]
        points.append(
            {
                "N": N,
                "L": L,
                "snr_db": snr,
                "trials": len(recs),
                "failed": sum(any(f.startswith("error:") for f in r.flags) for r in recs),
                "w_rel_err": boxplot_stats([r.w_rel_err for r in recs]),
                "w_abs_rel_err": boxplot_stats([abs(r.w_rel_err) for r in recs]),
                "theta_rel_err": boxplot_stats([r.theta_rel_err for r in recs]),
                "map_rel_err": boxplot_stats([r.map_rel_err for r in recs]),
                "map_in_box": sum(b is True for b in inbox),
                "map_out_of_box": sum(b is False for b in inbox),
            }
        )
    return {"points": points}


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SPECBAND_THREADS", "1")))
    except ValueError:
        return 1


def run_campaign(cfg: McConfig, outputs=None) -> tuple:
    """Run every (sweep point, trial) pair and optionally persist the results.

    Returns ``(summary, records)``.  With an output directory,
    ``trials.csv`` and ``summary.json`` are written there; the summary is
    derived from the records only.
    """
    jobs = [(t, p) for p in range(len(cfg.points())) for t in range(cfg.trials)]
    nthreads = _threads()
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            records = list(ex.map(lambda j: run_trial(cfg, *j), jobs))
    else:
        records = [run_trial(cfg, *j) for j in jobs]
    summary = summarize(records)
    summary["config"] = {k: v for k, v in asdict(cfg).items() if k != "outputs"}
    out = outputs if outputs is not None else cfg.outputs
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "trials.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(trials_header(cfg.nu))
            for rec in records:
                w.writerow(_row(rec, cfg.nu))
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary, records
