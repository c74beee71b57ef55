"""Convergence studies: metrics over sample-size grids with repetitions.

Each (n, repetition) cell draws its own dataset from a seed mixed out of
(base seed, n, rep), trains on the first train_frac of the rows, and
scores on the rest against the true regression values f(t_i) known from
generation.  Slice-parameter quality is measured against oracle values
computed from one large cached dataset binned by the fitted model's own
knots.  Rows serialize to CSV; with timing disabled (the default) reruns
of the same config are byte-identical.
"""

import math
import time
from dataclasses import dataclass, fields

import numpy as np

from .estimator import (FitConfig, classification_indices, fit,
                        interval_index, partition_knots, predict)
from .synthesis import sample_dataset
from .tuning import (constants_from_model, select_noiseless, select_noisy,
                     select_wide)

PARAM_STRATEGIES = ("theory_noisy", "theory_noiseless", "theory_wide",
                    "fixed")

_MASK64 = (1 << 64) - 1


def derive_seed(*parts):
    """Mix integers into one 64-bit seed (splitmix64 finalizer per part)."""
    x = 0
    for part in parts:
        x = (x + int(part) + 0x9E3779B97F4A7C15) & _MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        x = z ^ (z >> 31)
    return x


@dataclass(frozen=True)
class ExperimentConfig:
    """One convergence study.

    param_strategy picks (l, j, m) per cell: the theory_* strategies call
    the matching selector with constants derived from the model (selection
    uses the training-split size); 'fixed' uses fixed_l/fixed_j/fixed_m.
    partition/heavy_threshold_factor/distance/strict_paper_fallback/M pass
    through to FitConfig.  oracle_n is the size of the oracle dataset for
    slice-parameter metrics (full-scale studies used 2e6; the default is
    desk-scaled by 10x).  With timing False the wall-clock columns are
    written as 0 so identical configs produce identical CSV bytes.
    """

    model: object
    n_grid: tuple
    reps: int = 5
    train_frac: float = 0.9
    param_strategy: str = "theory_noisy"
    fixed_l: int | None = None
    fixed_j: int | None = None
    fixed_m: int | None = None
    oracle_n: int = 200_000
    seed: int = 0
    out: str | None = None
    experiment_id: str = "exp"
    abs_const: dict | None = None
    partition: str = "uniform"
    heavy_threshold_factor: float = 1.0
    distance: str = "shape"
    strict_paper_fallback: bool = False
    M: float = math.inf
    timing: bool = False

    def __post_init__(self):
        if not self.n_grid:
            raise ValueError("n_grid must be nonempty")
        if list(self.n_grid) != sorted(set(self.n_grid)):
            raise ValueError("n_grid must be strictly ascending")
        if self.reps < 1:
            raise ValueError("need at least one repetition")
        if not 0 < self.train_frac < 1:
            raise ValueError("train_frac must lie in (0, 1)")
        if self.param_strategy not in PARAM_STRATEGIES:
            raise ValueError(f"unknown strategy {self.param_strategy!r}")
        if self.param_strategy == "fixed" and None in (
                self.fixed_l, self.fixed_j, self.fixed_m):
            raise ValueError("fixed strategy needs fixed_l, fixed_j, fixed_m")


@dataclass(frozen=True)
class MetricsRow:
    experiment_id: str
    curve_kind: str
    d: int
    n: int
    rep: int
    sigma_zeta: float
    sigma_gamma: float
    l: int
    j: int
    m: int
    mse: float
    rel_mse: float
    center_err: float
    vec_err: float
    h_mean: float
    misclass2: float
    fit_ms: float
    pred_ms: float
    failed: int


CSV_HEADER = ",".join(f.name for f in fields(MetricsRow))


def rows_to_csv(rows):
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in (getattr(r, f.name)
                                        for f in fields(MetricsRow))))
    return "\n".join(lines) + "\n"


def save_rows(path, rows):
    with open(path, "w") as fh:
        fh.write(rows_to_csv(rows))


def load_rows(path):
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected metrics header {header!r}")
        by_name = {"str": str, "int": int, "float": float}
        casts = [f.type if isinstance(f.type, type) else by_name[f.type]
                 for f in fields(MetricsRow)]
        for line in fh:
            parts = line.strip().split(",")
            rows.append(MetricsRow(*(c(p) for c, p in zip(casts, parts))))
    return rows


@dataclass(frozen=True)
class OracleSliceParams:
    """Per-slice oracle values: slice index -> (mean, unit mean tangent).
    Slices the oracle sample never hits are absent."""

    params: dict


def _bin_oracle(dataset, knots):
    which = interval_index(knots, dataset.Y)
    params = {}
    for h in range(len(knots) - 1):
        mask = which == h
        if not mask.any():
            continue
        mu = dataset.X[mask].mean(axis=0)
        tan = dataset.oracle_tangent[mask].mean(axis=0)
        norm = np.linalg.norm(tan)
        if norm < 1e-12:
            continue
        params[h] = (mu, tan / norm)
    return OracleSliceParams(params=params)


def compute_oracle_params(model, knots, oracle_n, seed):
    """Oracle slice parameters: bin a large fresh sample by the knots and
    average X and the generating tangents per slice."""
    l = len(knots) - 1
    if oracle_n < 10 * l * model.d:
        raise ValueError(f"oracle_n must be at least 10 l d = "
                         f"{10 * l * model.d}")
    return _bin_oracle(sample_dataset(model, oracle_n, seed), knots)


def _select_params(config, tc, n_train):
    if config.param_strategy == "fixed":
        return config.fixed_l, config.fixed_j, config.fixed_m
    if config.param_strategy == "theory_noisy":
        sel = select_noisy(tc, n_train)
    elif config.param_strategy == "theory_noiseless":
        sel = select_noiseless(tc, n_train)
    else:
        sel = select_wide(tc)
    return sel.l, sel.j, sel.m


def _slice_metrics(model_fit, oracle):
    centers, vecs = [], []
    for h in model_fit.heavy_indices:
        if h not in oracle.params:
            continue
        mu, tan = oracle.params[h]
        stats = model_fit.slices[h]
        centers.append(abs(float((stats.mean - mu) @ tan)))
        vecs.append(min(np.linalg.norm(stats.sig_vec - tan),
                        np.linalg.norm(stats.sig_vec + tan)))
    if not centers:
        return math.nan, math.nan
    return float(np.mean(centers)), float(np.mean(vecs))


def run_experiment(config):
    """All (n, rep) cells of the study; failed fits are recorded with the
    failure flag and NaN metrics, and the run continues."""
    model = config.model
    needs_tc = config.param_strategy != "fixed"
    tc = constants_from_model(model, config.abs_const) if needs_tc else None
    oracle_ds = sample_dataset(model, config.oracle_n,
                               derive_seed(config.seed, 0xACE))

    rows = []
    for n in config.n_grid:
        for rep in range(config.reps):
            ds = sample_dataset(model, n, derive_seed(config.seed, n, rep))
            n_train = int(config.train_frac * n)
            X_tr, Y_tr = ds.X[:n_train], ds.Y[:n_train]
            X_te = ds.X[n_train:]
            F_te = np.asarray(model.link(ds.oracle_t[n_train:]))

            common = dict(experiment_id=config.experiment_id,
                          curve_kind=model.curve.spec.kind, d=model.d,
                          n=n, rep=rep, sigma_zeta=model.sigma_zeta,
                          sigma_gamma=model.sigma_gamma)
            try:
                l, j, m = _select_params(config, tc, n_train)
                fit_cfg = FitConfig(
                    l=l, j=j, m=m, M=config.M, partition=config.partition,
                    distance=config.distance,
                    heavy_threshold_factor=config.heavy_threshold_factor,
                    strict_paper_fallback=config.strict_paper_fallback)
                t0 = time.perf_counter()
                fitted = fit(X_tr, Y_tr, fit_cfg)
                t1 = time.perf_counter()
                pred = predict(fitted, X_te)
                t2 = time.perf_counter()
            except ValueError:
                rows.append(MetricsRow(**common, l=0, j=0, m=0, mse=math.nan,
                                       rel_mse=math.nan, center_err=math.nan,
                                       vec_err=math.nan, h_mean=math.nan,
                                       misclass2=math.nan, fit_ms=0.0,
                                       pred_ms=0.0, failed=1))
                continue

            mse = float(np.mean((pred - F_te) ** 2))
            var = float(np.var(F_te))
            rel_mse = mse / var if var > 0 else math.nan
            oracle = _bin_oracle(oracle_ds, fitted.knots)
            center_err, vec_err = _slice_metrics(fitted, oracle)
            h_mean = float(np.mean([fitted.slices[h].H
                                    for h in fitted.heavy_indices]))
            h_hat, h_true = classification_indices(fitted, X_te, F_te)
            misclass2 = float(np.mean(np.abs(h_hat - h_true) >= 2))
            fit_ms = (t1 - t0) * 1e3 if config.timing else 0.0
            pred_ms = (t2 - t1) * 1e3 if config.timing else 0.0
            rows.append(MetricsRow(**common, l=l, j=j, m=m, mse=mse,
                                   rel_mse=rel_mse, center_err=center_err,
                                   vec_err=vec_err, h_mean=h_mean,
                                   misclass2=misclass2, fit_ms=fit_ms,
                                   pred_ms=pred_ms, failed=0))
    if config.out:
        save_rows(config.out, rows)
    return rows


def fit_rate(rows, x_field="n", y_field="mse", n_window=None):
    """Log-log least-squares slope of mean y against x.

    Repetitions are averaged per x first; the window (lo, hi) restricts x
    inclusively.  Needs at least three x values with positive means.
    """
    groups = {}
    for r in rows:
        if r.failed:
            continue
        groups.setdefault(getattr(r, x_field), []).append(
            getattr(r, y_field))
    xs = sorted(groups)
    if n_window is not None:
        lo, hi = n_window
        xs = [x for x in xs if lo <= x <= hi]
    if len(xs) < 3:
        raise ValueError("need at least three grid points in the window")
    means = np.array([np.mean(groups[x]) for x in xs], dtype=float)
    if not (means > 0).all():
        raise ValueError("log-log rate needs positive values")
    slope, _ = np.polyfit(np.log(np.array(xs, dtype=float)),
                          np.log(means), 1)
    return float(slope)


def mse_at_saturation(config, l_grid=None, j_grid=(1, 2, 4)):
    """Best test MSE at the largest n with oracle slice parameters.

    Replaces every fitted (mean, sig_vec) with the oracle (mean, tangent)
    for slices the oracle sample hits, then grid-searches l in l_grid
    (default: half, equal, and double the strategy's l*) and j in j_grid
    for the minimum test MSE.  This isolates the regression floor from
    slice-parameter estimation error.
    """
    model = config.model
    n = config.n_grid[-1]
    ds = sample_dataset(model, n, derive_seed(config.seed, n, 0))
    n_train = int(config.train_frac * n)
    X_tr, Y_tr = ds.X[:n_train], ds.Y[:n_train]
    X_te = ds.X[n_train:]
    F_te = np.asarray(model.link(ds.oracle_t[n_train:]))
    oracle_ds = sample_dataset(model, config.oracle_n,
                               derive_seed(config.seed, 0xACE))

    needs_tc = config.param_strategy != "fixed"
    tc = constants_from_model(model, config.abs_const) if needs_tc else None
    l_star, _, m = _select_params(config, tc, n_train)
    if l_grid is None:
        l_grid = sorted({max(1, l_star // 2), l_star, 2 * l_star})

    best = math.inf
    for l in l_grid:
        knots = partition_knots(Y_tr, l, config.partition)
        oracle = _bin_oracle(oracle_ds, knots)
        override = dict(oracle.params)
        for j in j_grid:
            fit_cfg = FitConfig(
                l=l, j=j, m=m, M=config.M, partition=config.partition,
                distance=config.distance,
                heavy_threshold_factor=config.heavy_threshold_factor,
                strict_paper_fallback=config.strict_paper_fallback)
            try:
                fitted = fit(X_tr, Y_tr, fit_cfg,
                             slice_param_override=override)
            except ValueError:
                continue
            mse = float(np.mean((predict(fitted, X_te) - F_te) ** 2))
            best = min(best, mse)
    if not math.isfinite(best):
        raise ValueError("every (l, j) candidate failed to fit")
    return best
