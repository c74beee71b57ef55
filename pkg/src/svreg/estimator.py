"""Significant-vector regression.

Training responses are sliced into level sets; each populous ("heavy")
slice contributes a mean, a covariance spectrum, an entropy-style shape
index H, and a significant direction (the least-variance eigenvector when
the slice is a thin slab, the top eigenvector when it is a wide tube).
Prediction assigns a query to the nearest heavy slice under a shape-aware
distance and evaluates a low-degree polynomial in the projection onto the
slice's significant vector, fitted on the slice pooled with its immediate
neighbors.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

PARTITION_KINDS = ("uniform", "quantile")
DISTANCE_KINDS = ("shape", "mahalanobis")

# Relative floor applied to eigenvalues when inverting a slice spectrum.
_MAHALANOBIS_FLOOR = 1e-10


@dataclass(frozen=True)
class FitConfig:
    """Estimator hyperparameters.

    l ........................ number of response slices
    j ........................ projection bins per heavy slice
    m ........................ local polynomial degree (0, 1, or 2)
    M ........................ truncation level: predictions clipped to
                               [-M, M]; inf disables clipping
    partition ................ 'uniform' response intervals or 'quantile'
    distance ................. 'shape' (significant-vector weighted) or
                               'mahalanobis' (full floored spectrum)
    heavy_threshold_factor ... slice is heavy when n_lh >= factor * n / l
    strict_paper_fallback .... excluded bins and out-of-interval queries
                               answer 0 instead of the pooled mean
    """

    l: int
    j: int = 1
    m: int = 1
    M: float = math.inf
    partition: str = "uniform"
    distance: str = "shape"
    heavy_threshold_factor: float = 1.0
    strict_paper_fallback: bool = False

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("need at least one slice")
        if self.j < 1:
            raise ValueError("need at least one projection bin")
        if self.m not in (0, 1, 2):
            raise ValueError("polynomial degree must be 0, 1, or 2")
        if not self.M > 0:
            raise ValueError("truncation level must be positive")
        if self.partition not in PARTITION_KINDS:
            raise ValueError(f"unknown partition {self.partition!r}")
        if self.distance not in DISTANCE_KINDS:
            raise ValueError(f"unknown distance {self.distance!r}")
        if self.heavy_threshold_factor <= 0:
            raise ValueError("heavy_threshold_factor must be positive")


@dataclass(frozen=True)
class SliceStats:
    """Second-order summary of one response slice."""

    h: int
    n_lh: int
    mean: np.ndarray              # (d,)
    eigvals: np.ndarray           # (d,) descending, clipped at 0
    H: float                      # log(lam_mid^2 / (lam_1 lam_d))
    sig_vec: np.ndarray           # (d,) unit significant direction
    heavy: bool
    basis: np.ndarray | None = None   # (d, d) eigvecs as columns, descending

    @property
    def thin(self) -> bool:
        return self.H >= 0.0


@dataclass(frozen=True)
class LocalRegressor:
    """Per-slice polynomial pieces over projection bins.

    coefs[b] is None for excluded bins (fewer than n_lh / j points);
    those and projections outside [edges[0], edges[-1]] answer fallback.
    """

    edges: np.ndarray             # (j+1,) bin edges on the projection axis
    centers: np.ndarray           # (j,) expansion points
    coefs: tuple                  # per bin: highest-first coefficients or None
    fallback: float


@dataclass(frozen=True)
class SvrModel:
    config: FitConfig
    n: int
    d: int
    knots: np.ndarray             # (l+1,) response interval boundaries
    slices: tuple                 # l SliceStats
    heavy_indices: tuple          # ascending slice indices
    regressors: dict              # heavy index -> LocalRegressor

    def slice_range(self, h):
        return float(self.knots[h]), float(self.knots[h + 1])

    def predict(self, X):
        return predict(self, X)


def interval_index(knots, y):
    """Slice index of each response.  Intervals share knots; a value on an
    interior knot belongs to the interval on its right, the last interval
    includes the top knot, and out-of-range values clamp to the ends."""
    idx = np.searchsorted(knots, np.asarray(y, dtype=float), side="right") - 1
    return np.clip(idx, 0, len(knots) - 2)


def partition_knots(Y, l, kind="uniform"):
    """l+1 interval boundaries spanning [min Y, max Y]."""
    Y = np.asarray(Y, dtype=float)
    if l < 1:
        raise ValueError("need at least one interval")
    if Y.size < l:
        raise ValueError("fewer responses than intervals")
    if Y.min() == Y.max():
        warnings.warn("all responses identical; partition collapses to a "
                      "single interval", stacklevel=2)
    if kind == "uniform":
        return np.linspace(Y.min(), Y.max(), l + 1)
    if kind == "quantile":
        return np.quantile(Y, np.linspace(0.0, 1.0, l + 1))
    raise ValueError(f"unknown partition {kind!r}")


def _entropy_index(eigvals):
    """H = log(lam_mid^2 / (lam_1 lam_d)), lam_mid the geometric mean of the
    middle eigenvalues.  d = 2 has no middle and H := 0; 0/0 corners
    (rank-deficient slices with zero middle eigenvalues) also map to 0."""
    d = eigvals.size
    if d == 2:
        return 0.0
    lam1, lamd = eigvals[0], eigvals[-1]
    mid = eigvals[1:-1]
    if lam1 == 0.0:
        return 0.0
    if lamd == 0.0:
        return math.inf if np.all(mid > 0.0) else 0.0
    log_mid_sq = (2.0 / (d - 2)) * float(np.sum(np.log(mid)))
    return log_mid_sq - math.log(lam1) - math.log(lamd)


def _canonical_sign(vec):
    """Flip so the largest-magnitude entry (first on ties) is positive."""
    pivot = vec[np.argmax(np.abs(vec))]
    return -vec if pivot < 0 else vec.copy()


def compute_slice_stats(h, X_slice, heavy, keep_basis=False):
    """Mean/spectrum/shape summary of the rows of one slice.

    Covariance is the biased (1/n_lh) estimator.  Empty or single-point
    slices get a zero spectrum and H = 0.  H >= 0 marks the slice thin and
    the significant vector is the bottom eigenvector; otherwise the top.
    """
    n_lh, d = X_slice.shape
    if n_lh == 0:
        mean = np.zeros(d)
        cov = np.zeros((d, d))
    else:
        mean = X_slice.mean(axis=0)
        diff = X_slice - mean
        cov = diff.T @ diff / n_lh
    w, v = np.linalg.eigh(cov)
    order = np.argsort(w)[::-1]
    eigvals = np.maximum(w[order], 0.0)
    basis = v[:, order]
    H = _entropy_index(eigvals)
    sig_vec = _canonical_sign(basis[:, -1] if H >= 0.0 else basis[:, 0])
    return SliceStats(h=h, n_lh=n_lh, mean=mean, eigvals=eigvals, H=H,
                      sig_vec=sig_vec, heavy=heavy,
                      basis=basis if keep_basis else None)


def slice_distance(stats, X, distance="shape"):
    """Squared distance from rows of X to one slice.

    shape: thin slices score |<x-mu, v>|^2 + r |x-mu|^2 and wide slices
    |x-mu|^2 + r |<x-mu, v>|^2 with r = lam_d / lam_1 (r := 1 when the
    spectrum is zero).  mahalanobis: full eigenbasis with eigenvalues
    floored at 1e-10 lam_1.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    diff = X - stats.mean
    if distance == "shape":
        lam1, lamd = stats.eigvals[0], stats.eigvals[-1]
        r = lamd / lam1 if lam1 > 0 else 1.0
        proj_sq = (diff @ stats.sig_vec) ** 2
        norm_sq = np.einsum("ij,ij->i", diff, diff)
        if stats.thin:
            return proj_sq + r * norm_sq
        return norm_sq + r * proj_sq
    if distance == "mahalanobis":
        if stats.basis is None:
            raise ValueError("mahalanobis distance needs a stored eigenbasis")
        lam1 = stats.eigvals[0]
        floor = _MAHALANOBIS_FLOOR * lam1 if lam1 > 0 else 1.0
        lam = np.maximum(stats.eigvals, floor)
        comps = diff @ stats.basis
        return np.einsum("ij,ij->i", comps ** 2, 1.0 / lam[None, :])
    raise ValueError(f"unknown distance {distance!r}")


def nearest_heavy_slice(model, X):
    """Index (into model.slices) of the closest heavy slice per row; ties go
    to the smaller slice index."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    heavy = [model.slices[h] for h in model.heavy_indices]
    if not heavy:
        raise ValueError("model has no heavy slices")
    if model.config.distance == "shape":
        mus = np.stack([s.mean for s in heavy])              # (H, d)
        vecs = np.stack([s.sig_vec for s in heavy])          # (H, d)
        lam1 = np.array([s.eigvals[0] for s in heavy])
        lamd = np.array([s.eigvals[-1] for s in heavy])
        r = np.where(lam1 > 0, lamd / np.maximum(lam1, 1e-300), 1.0)
        thin = np.array([s.thin for s in heavy])
        proj = X @ vecs.T - np.einsum("hj,hj->h", mus, vecs)  # (n, H)
        sq = (np.einsum("ij,ij->i", X, X)[:, None]
              - 2.0 * X @ mus.T + np.einsum("hj,hj->h", mus, mus))
        sq = np.maximum(sq, 0.0)
        proj_sq = proj ** 2
        dist = np.where(thin, proj_sq + r * sq, sq + r * proj_sq)
    else:
        dist = np.stack([slice_distance(s, X, model.config.distance)
                         for s in heavy], axis=1)
    pick = np.argmin(dist, axis=1)      # first minimum -> smaller index
    return np.asarray(model.heavy_indices)[pick]


def _fit_poly(p, y, deg):
    """Least-squares polynomial in (p - mean p).  Degree drops to what the
    bin supports (count - 1, or fewer distinct abscissae); rank-deficient
    systems fall back to the minimum-norm solution rather than failing."""
    deg = min(deg, p.size - 1, np.unique(p).size - 1)
    center = float(p.mean())
    V = np.vander(p - center, deg + 1)
    coef, *_ = np.linalg.lstsq(V, y, rcond=None)
    return center, coef


def fit_local_regressor(p, y, slice_count, config):
    """Binned polynomials on the projection axis of one heavy slice.

    p, y are the pooled sample (the slice and its adjacent neighbors)
    projected onto the slice's significant vector.  j uniform bins span
    [min p, max p]; a bin is fitted when it holds at least slice_count / j
    points, otherwise it answers the fallback (pooled mean, or 0 under
    strict_paper_fallback).
    """
    p = np.asarray(p, dtype=float)
    y = np.asarray(y, dtype=float)
    if p.size == 0:
        raise ValueError("empty pooled sample")
    edges = np.linspace(p.min(), p.max(), config.j + 1)
    which = interval_index(edges, p)
    need = slice_count / config.j
    fallback = 0.0 if config.strict_paper_fallback else float(y.mean())
    centers = np.zeros(config.j)
    coefs = []
    for b in range(config.j):
        mask = which == b
        cnt = int(mask.sum())
        if cnt == 0 or cnt < need:
            coefs.append(None)
            continue
        center, coef = _fit_poly(p[mask], y[mask], config.m)
        centers[b] = center
        coefs.append(coef)
    return LocalRegressor(edges=edges, centers=centers, coefs=tuple(coefs),
                          fallback=fallback)


def fit(X, Y, config, slice_param_override=None):
    """Train a significant-vector regression model.

    Rows are canonicalized by sorting on (Y, X columns), so any permutation
    of the training set yields a bit-identical model.  slice_param_override
    maps slice index -> (mean, sig_vec) and replaces those fields after the
    spectra are computed (the regressors then pool and project with the
    overridden values); it exists for oracle-assisted diagnostics.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be 2-d")
    if Y.shape != (X.shape[0],):
        raise ValueError("Y must be 1-d with one response per row of X")
    n, d = X.shape
    if n < max(config.l, 2 * d):
        raise ValueError(f"need at least max(l, 2d) = "
                         f"{max(config.l, 2 * d)} samples, got {n}")

    keys = tuple(X[:, k] for k in range(d - 1, -1, -1)) + (Y,)
    order = np.lexsort(keys)
    X, Y = X[order], Y[order]

    knots = partition_knots(Y, config.l, config.partition)
    which = interval_index(knots, Y)
    counts = np.bincount(which, minlength=config.l)
    threshold = config.heavy_threshold_factor * n / config.l
    keep_basis = config.distance == "mahalanobis"

    slices = []
    for h in range(config.l):
        stats = compute_slice_stats(h, X[which == h],
                                    heavy=bool(counts[h] >= threshold),
                                    keep_basis=keep_basis)
        if slice_param_override and h in slice_param_override:
            mean, sig_vec = slice_param_override[h]
            stats = SliceStats(h=stats.h, n_lh=stats.n_lh,
                               mean=np.asarray(mean, dtype=float),
                               eigvals=stats.eigvals, H=stats.H,
                               sig_vec=_canonical_sign(
                                   np.asarray(sig_vec, dtype=float)),
                               heavy=stats.heavy, basis=stats.basis)
        slices.append(stats)

    heavy_indices = tuple(h for h in range(config.l) if slices[h].heavy)
    if not heavy_indices:
        raise ValueError("no slice reached the heavy threshold; use a "
                         "smaller l or heavy_threshold_factor")

    regressors = {}
    for h in heavy_indices:
        pool = (which >= h - 1) & (which <= h + 1)
        stats = slices[h]
        p = (X[pool] - stats.mean) @ stats.sig_vec
        regressors[h] = fit_local_regressor(p, Y[pool], stats.n_lh, config)

    return SvrModel(config=config, n=n, d=d, knots=knots,
                    slices=tuple(slices), heavy_indices=heavy_indices,
                    regressors=regressors)


def predict(model, X):
    """Evaluate the model on rows of X.

    Each row goes to its nearest heavy slice; the projection onto that
    slice's significant vector is looked up in the slice's bins.  Excluded
    bins and projections outside the fitted interval answer the slice
    fallback.  Output is clipped to [-M, M].
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.d:
        raise ValueError(f"expected {model.d} columns, got {X.shape[1]}")
    assigned = nearest_heavy_slice(model, X)
    out = np.empty(X.shape[0])
    for h in np.unique(assigned):
        rows = assigned == h
        stats = model.slices[h]
        reg = model.regressors[h]
        p = (X[rows] - stats.mean) @ stats.sig_vec
        vals = np.full(p.size, reg.fallback)
        inside = (p >= reg.edges[0]) & (p <= reg.edges[-1])
        bins = interval_index(reg.edges, p[inside])
        got = np.full(bins.size, reg.fallback)
        for b in np.unique(bins):
            coef = reg.coefs[b]
            if coef is None:
                continue
            sel = bins == b
            got[sel] = np.polyval(coef, p[inside][sel] - reg.centers[b])
        vals[inside] = got
        out[rows] = vals
    return np.clip(out, -model.config.M, model.config.M)


def classification_indices(model, X, true_F):
    """(estimated, correct) slice index per row: the nearest heavy slice and
    the interval holding the true response value (clamped to the range)."""
    h_hat = nearest_heavy_slice(model, X)
    h_true = interval_index(model.knots, true_F)
    return h_hat, h_true
