"""Synthetic data for the curve-projection regression model.

A sample is X = gamma(t) + M_v (Z, 0) with t uniform on [0, len], Z an
isotropic Gaussian in the normal space truncated inside the reach, and
Y = f(t) + zeta.  The displacement is orthogonal to the tangent at t by
construction, so the closest-point projection of X recovers t up to grid
resolution whenever the truncation keeps X inside the tube.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import (DiscretizedCurve, curve_position, curve_tangent,
                     reach_estimate)

LINK_KINDS = ("identity", "exp_scaled", "power_holder", "custom_table")

# Straight lines have infinite reach; their sampling tube is capped at this
# many noise standard deviations instead.
LINE_TUBE_SIGMAS = 10.0


@dataclass(frozen=True)
class LinkSpec:
    """Monotone link f applied to the arc-length parameter.

    kind ... identity        f(t) = t                      (declared s = 1)
             exp_scaled      f(t) = scale * exp(t / scale) (declared s = 2)
             power_holder    f(t) = t^s                    (Holder for s <= 1)
             custom_table    piecewise-linear through (knots, values)
    s ...... declared smoothness exponent in [0.5, 2]; drives the default
             local polynomial degree and the theory constants
    scale .. scale of exp_scaled (its derivative spans [1, e] on [0, scale])
    """

    kind: str
    s: float = 1.0
    scale: float = 1.0
    knots: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in LINK_KINDS:
            raise ValueError(f"unknown link kind {self.kind!r}")
        if not 0.5 <= self.s <= 2.0:
            raise ValueError("smoothness exponent must lie in [0.5, 2]")
        if self.kind == "exp_scaled" and self.scale <= 0:
            raise ValueError("exp_scaled needs a positive scale")
        if self.kind == "custom_table":
            if len(self.knots) != len(self.values):
                raise ValueError("custom_table needs matching knots and "
                                 "values")
            if len(self.knots) < 2:
                raise ValueError("custom_table needs at least two knots")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "identity":
            out = t.copy()
        elif self.kind == "exp_scaled":
            out = self.scale * np.exp(t / self.scale)
        elif self.kind == "power_holder":
            out = np.power(np.maximum(t, 0.0), self.s)
        else:
            out = np.interp(t, np.asarray(self.knots), np.asarray(self.values))
        return out if out.ndim else float(out)


@dataclass
class ModelSpec:
    """Curve + link + noise levels defining one synthetic model."""

    curve: DiscretizedCurve
    link: LinkSpec
    sigma_gamma: float
    sigma_zeta: float = 0.0
    trunc_frac: float = 0.9
    reach: float = field(init=False)

    def __post_init__(self):
        if self.sigma_gamma <= 0:
            raise ValueError("sigma_gamma must be positive")
        if self.sigma_zeta < 0:
            raise ValueError("sigma_zeta must be nonnegative")
        if not 0 < self.trunc_frac <= 1:
            raise ValueError("trunc_frac must be in (0, 1]")
        self.reach = reach_estimate(self.curve)

    @property
    def d(self) -> int:
        return self.curve.d

    def tube_radius(self) -> float:
        if math.isfinite(self.reach):
            return self.trunc_frac * self.reach
        return LINE_TUBE_SIGMAS * self.sigma_gamma


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray                      # (n, d)
    Y: np.ndarray                      # (n,)
    oracle_t: np.ndarray | None        # (n,) arc lengths used at generation
    oracle_tangent: np.ndarray | None  # (n, d) tangents used at generation
    seed: int

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


def rotation_to(v: np.ndarray) -> np.ndarray:
    """Orthogonal matrix mapping the last basis vector e_d onto unit v.

    Householder reflection through (e_d - v)/|e_d - v|; identity when v is
    (numerically) e_d itself.
    """
    v = np.asarray(v, dtype=float)
    d = v.size
    e = np.zeros(d)
    e[-1] = 1.0
    w = e - v
    norm = np.linalg.norm(w)
    if norm < 1e-12:
        return np.eye(d)
    w /= norm
    return np.eye(d) - 2.0 * np.outer(w, w)


def normal_displacements(tangents: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Map rows Z in R^{d-1} into the normal space of each tangent.

    Row i is M_{v_i} (Z_i, 0) with M_v the Householder map of rotation_to,
    applied without materializing the d x d matrices.
    """
    n, d = tangents.shape
    padded = np.concatenate([Z, np.zeros((n, 1))], axis=1)
    w = -tangents.copy()
    w[:, -1] += 1.0
    norms = np.linalg.norm(w, axis=1)
    degenerate = norms < 1e-12
    norms[degenerate] = 1.0
    w /= norms[:, None]
    out = padded - 2.0 * np.einsum("ij,ij->i", w, padded)[:, None] * w
    out[degenerate] = padded[degenerate]
    return out


# Rejection sampling guard: give up when the acceptance ratio stays below
# this after a generous number of proposals.
_MIN_ACCEPT = 1e-4


def _truncated_normals(rng: np.random.Generator, n: int, dim: int,
                       sigma: float, radius: float) -> np.ndarray:
    """n draws of N(0, sigma^2 I_dim) conditioned on |Z| < radius."""
    out = np.empty((n, dim))
    have = 0
    drawn = 0
    while have < n:
        batch = max(n - have, 1024)
        z = sigma * rng.standard_normal((batch, dim))
        z = z[np.linalg.norm(z, axis=1) < radius]
        drawn += batch
        take = min(n - have, z.shape[0])
        out[have:have + take] = z[:take]
        have += take
        if drawn > max(1e6, 100 * n) and have < _MIN_ACCEPT * drawn:
            raise ValueError(
                f"truncation radius {radius:g} rejects almost every draw "
                f"(acceptance {have / drawn:.2e})")
    return out


def sample_dataset(model: ModelSpec, n: int, seed: int) -> Dataset:
    """Draw n samples from the model; deterministic for a fixed seed.

    Draw order is fixed (t, then truncated displacements, then response
    noise) so identical seeds give bit-identical datasets.
    """
    if n <= 0:
        raise ValueError("need a positive sample size")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    curve = model.curve
    t = rng.uniform(0.0, curve.length, n)
    Z = _truncated_normals(rng, n, model.d - 1, model.sigma_gamma,
                           model.tube_radius())
    zeta = rng.standard_normal(n) if model.sigma_zeta > 0 else None

    base = curve_position(curve, t)
    tangents = curve_tangent(curve, t)
    X = base + normal_displacements(tangents, Z)
    Y = np.asarray(model.link(t))
    if zeta is not None:
        Y = Y + model.sigma_zeta * zeta
    return Dataset(X=X, Y=Y, oracle_t=t, oracle_tangent=tangents, seed=seed)


def evaluate_F(model: ModelSpec, X: np.ndarray) -> np.ndarray:
    """Regression function F(x) = f(t*(x)) via closest-point projection."""
    from .curves import project_points
    t_star, _ = project_points(model.curve, X)
    return np.asarray(model.link(t_star))


def estimate_monotonicity_constants(link: LinkSpec, t_lo: float, t_hi: float,
                                    min_scale: float | None = None,
                                    grid: int = 32768, n_offsets: int = 64,
                                    growth_cap: float = 1.5):
    """Coarse-monotonicity constants of the link by interval probing.

    Sweeps response intervals T of dyadic widths from half the output range
    down to min_scale (default: range/1024) and measures the ratio
    |span of f^{-1}(T)| / |T| over shifted copies of T.  For a monotone
    link the max ratio approaches 1/min f' as widths shrink; a broken
    monotonicity at scale w makes the ratio blow up like 1/|T| below w.
    omega_hat is the smallest tested width reached before such a blow-up
    (max ratio growing by more than growth_cap per halving); C_f and
    C_f_prime are the max and min ratio over all tested widths >= omega_hat.

    Returns (c_f, c_f_prime, omega_hat).
    """
    ts = np.linspace(t_lo, t_hi, grid)
    fs = np.asarray(link(ts))
    y_lo, y_hi = float(fs.min()), float(fs.max())
    y_range = y_hi - y_lo
    if y_range <= 0:
        raise ValueError("link is constant on the probe interval")
    if min_scale is None:
        min_scale = y_range / 1024
    if not 0 < min_scale <= y_range / 2:
        raise ValueError("min_scale must lie in (0, range/2]")

    widths = [y_range / 2]
    while widths[-1] / 2 > min_scale:
        widths.append(widths[-1] / 2)
    if widths[-1] > min_scale:
        widths.append(min_scale)

    per_width = []
    for w in widths:
        ratios = []
        for start in np.linspace(y_lo, y_hi - w, n_offsets):
            mask = (fs >= start) & (fs <= start + w)
            if mask.sum() < 2:
                continue
            hit = ts[mask]
            ratios.append((hit.max() - hit.min()) / w)
        if not ratios:
            break                 # below grid resolution; end the sweep
        per_width.append((w, max(ratios), min(ratios)))
    if not per_width:
        raise ValueError("no probe interval captured at least two grid points")

    omega_hat, c_f, c_f_prime = per_width[0]
    for (_, hi_prev, _), (w, hi, lo) in zip(per_width, per_width[1:]):
        if lo <= 0 or hi > growth_cap * hi_prev:
            break
        omega_hat = w
        c_f = max(c_f, hi)
        c_f_prime = min(c_f_prime, lo)
    return float(c_f), float(c_f_prime), float(omega_hat)


def estimate_holder_seminorm(link: LinkSpec, s: float, t_lo: float,
                             t_hi: float, grid: int = 512) -> float:
    """Empirical Holder seminorm |f|_{C^s} on [t_lo, t_hi].

    s <= 1: sup |f(u)-f(v)| / |u-v|^s over grid pairs.
    s in (1, 2]: same quotient with exponent s-1 applied to a central
    finite-difference derivative.
    """
    if not 0 < s <= 2:
        raise ValueError("s must lie in (0, 2]")
    ts = np.linspace(t_lo, t_hi, grid)
    if s <= 1:
        vals = np.asarray(link(ts))
        expo = s
    else:
        h = (t_hi - t_lo) / (4 * grid)
        vals = (np.asarray(link(ts + h)) - np.asarray(link(ts - h))) / (2 * h)
        expo = s - 1
    diff = np.abs(vals[:, None] - vals[None, :])
    gap = np.abs(ts[:, None] - ts[None, :])
    mask = gap > 0
    return float((diff[mask] / gap[mask] ** expo).max())
