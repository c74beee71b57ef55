"""Arc-length discretizations of the model curves and their geometry.

A curve here is always handled as a dense polyline resampled to constant
speed, so that the parameter grid *is* arc length.  Everything downstream
(sampling tubes around the curve, projecting points back onto it, reach and
stable-rank summaries) works off that discretization.
"""

import math
from dataclasses import dataclass, replace, field

import numpy as np

CURVE_KINDS = ("line", "arc", "meyer_staircase", "meyer_helix")

# Oversampling of the native parameter before arc-length resampling.  The
# native speed of the oscillatory curves varies by orders of magnitude, so
# the chord-length integral is taken on a much finer grid than the output.
NATIVE_OVERSAMPLE = 50


@dataclass(frozen=True)
class CurveSpec:
    """Parameters selecting one member of the supported curve families.

    kind ............ one of CURVE_KINDS
    d ............... ambient dimension (>= 2)
    length .......... native length for 'line' / 'arc' (arc length budget)
    kappa ........... curvature of 'arc' (radius 1/kappa)
    delta ........... bump width of 'meyer_staircase'; default 1/d
    a ............... phase/frequency constant of 'meyer_helix'
    amplitude ....... modulation amplitude of the helix widths
    decay ........... helix envelope: 'bernstein' exp(-z^2/(1+z)) or
                      'gaussian' exp(-z^2)
    scale ........... global multiplier applied to the embedding
    """

    kind: str
    d: int
    length: float = 1.0
    kappa: float = 0.2
    delta: float | None = None
    a: float = 10.0
    amplitude: float = 0.3
    decay: str = "bernstein"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.d < 2:
            raise ValueError("ambient dimension must be >= 2")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.kind == "arc" and self.kappa <= 0:
            raise ValueError("arc curvature must be positive")
        if self.decay not in ("bernstein", "gaussian"):
            raise ValueError(f"unknown decay kind {self.decay!r}")


@dataclass(frozen=True)
class DiscretizedCurve:
    """Unit-speed polyline: t[i] is arc length, points[i] = curve(t[i])."""

    spec: CurveSpec
    t: np.ndarray          # (g,) increasing, t[0] = 0, t[-1] = length
    points: np.ndarray     # (g, d)
    tangents: np.ndarray   # (g, d) unit rows
    length: float

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def grid_size(self) -> int:
        return self.points.shape[0]

    @property
    def grid_step(self) -> float:
        return self.length / (self.grid_size - 1)


@dataclass(frozen=True)
class CurveGeometryReport:
    kind: str
    d: int
    length: float
    reach: float
    max_curvature: float
    stable_rank_sum: float
    stable_rank_count: int
    complexity: float      # length / reach; 0.0 when the reach is infinite


def _native_points(spec: CurveSpec, u: np.ndarray) -> np.ndarray:
    """Evaluate the curve family at native parameters u, shape (len(u), d)."""
    d = spec.d
    if spec.kind == "line":
        pts = np.zeros((u.size, d))
        pts[:, 0] = u
    elif spec.kind == "arc":
        r = 1.0 / spec.kappa
        pts = np.zeros((u.size, d))
        pts[:, 0] = r * np.sin(u / r)
        pts[:, 1] = r * (1.0 - np.cos(u / r))
    elif spec.kind == "meyer_staircase":
        delta = spec.delta if spec.delta is not None else 1.0 / d
        k = np.arange(1, d + 1) / d
        z = u[:, None] - k[None, :]
        pts = (2.0 * math.pi) ** (-0.25) * delta ** (-0.5) * np.exp(
            -(z ** 2) / (4.0 * delta ** 2)
        )
    else:  # meyer_helix
        k = np.arange(1, d + 1)
        delta_k = (1.0 + spec.amplitude * np.cos(spec.a * k)) / d
        delta_k_prime = (1.0 + spec.amplitude * np.sin(spec.a * k)) / d
        z = u[:, None] - (k[None, :] / d)
        phase = spec.a * k[None, :] + z / delta_k_prime[None, :]
        r = np.abs(z) / delta_k[None, :]
        if spec.decay == "bernstein":
            envelope = np.exp(-(r ** 2) / (1.0 + r))
        else:
            envelope = np.exp(-(r ** 2))
        pts = (2.0 * math.pi) ** (-0.25) * delta_k[None, :] ** (-0.5) \
            * np.cos(phase) * envelope
    return pts * spec.scale


def _native_domain(spec: CurveSpec) -> tuple[float, float]:
    if spec.kind in ("line", "arc"):
        if spec.length <= 0:
            raise ValueError("curve length must be positive")
        return 0.0, spec.length
    return 0.0, 1.0


def build_curve(spec: CurveSpec, grid_size: int = 1000) -> DiscretizedCurve:
    """Discretize a curve at `grid_size` nodes equally spaced in arc length.

    The native parameter is oversampled NATIVE_OVERSAMPLE-fold, the chord
    length accumulated there, and positions are then interpolated back onto
    a uniform arc-length grid.  Tangents are centered differences of the
    resampled points (one-sided at the ends), renormalized to unit length.
    """
    if grid_size < 1000:
        raise ValueError("grid_size must be at least 1000")
    u0, u1 = _native_domain(spec)
    u = np.linspace(u0, u1, NATIVE_OVERSAMPLE * grid_size)
    native = _native_points(spec, u)
    chord = np.linalg.norm(np.diff(native, axis=0), axis=1)
    keep = chord > 0
    if not keep.all():
        # drop duplicate nodes so cumulative arc length stays invertible
        native = native[np.concatenate(([True], keep))]
        chord = chord[keep]
    s = np.concatenate(([0.0], np.cumsum(chord)))
    length = float(s[-1])
    if length <= 0:
        raise ValueError("curve has zero length")
    t = np.linspace(0.0, length, grid_size)
    points = np.empty((grid_size, spec.d))
    for col in range(spec.d):
        points[:, col] = np.interp(t, s, native[:, col])
    tangents = np.empty_like(points)
    tangents[1:-1] = points[2:] - points[:-2]
    tangents[0] = points[1] - points[0]
    tangents[-1] = points[-1] - points[-2]
    tangents /= np.linalg.norm(tangents, axis=1, keepdims=True)
    return DiscretizedCurve(spec=spec, t=t, points=points, tangents=tangents,
                            length=length)


def curve_position(curve: DiscretizedCurve, t) -> np.ndarray:
    """Linear interpolation of curve points at arbitrary arc lengths t."""
    t = np.asarray(t, dtype=float)
    h = curve.grid_step
    idx = np.clip((t / h).astype(int), 0, curve.grid_size - 2)
    w = (t - curve.t[idx]) / h
    return curve.points[idx] + w[..., None] * (curve.points[idx + 1] - curve.points[idx])


def curve_tangent(curve: DiscretizedCurve, t) -> np.ndarray:
    """Unit tangent at arbitrary arc lengths t (interpolated, renormalized)."""
    t = np.asarray(t, dtype=float)
    h = curve.grid_step
    idx = np.clip((t / h).astype(int), 0, curve.grid_size - 2)
    w = (t - curve.t[idx]) / h
    tan = curve.tangents[idx] + w[..., None] * (curve.tangents[idx + 1] - curve.tangents[idx])
    return tan / np.linalg.norm(tan, axis=-1, keepdims=True)


def closest_point_projection(curve: DiscretizedCurve, x: np.ndarray) -> tuple[float, float]:
    """Arc length t* of the point on the polyline closest to x, and the distance.

    Every segment is minimized in closed form, so the result is the exact
    polyline minimum.  Ties (within 1e-10 relative) resolve to the smallest t*.
    """
    x = np.asarray(x, dtype=float)
    p = curve.points
    v = p[1:] - p[:-1]
    w = x[None, :] - p[:-1]
    seg_len_sq = np.einsum("ij,ij->i", v, v)
    frac = np.einsum("ij,ij->i", w, v) / seg_len_sq
    frac = np.clip(frac, 0.0, 1.0)
    residual = w - frac[:, None] * v
    dist_sq = np.einsum("ij,ij->i", residual, residual)
    best = float(dist_sq.min())
    ties = np.nonzero(dist_sq <= best * (1.0 + 1e-10) + 1e-300)[0]
    j = int(ties[0])
    t_star = curve.t[j] + frac[j] * (curve.t[j + 1] - curve.t[j])
    return float(t_star), math.sqrt(max(best, 0.0))


def project_points(curve: DiscretizedCurve, X: np.ndarray,
                   chunk: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized closest-point projection of many points; returns (t*, dist)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    p = curve.points
    v = p[1:] - p[:-1]
    seg_len_sq = np.einsum("ij,ij->i", v, v)
    pv = np.einsum("ij,ij->i", p[:-1], v)
    pp = np.einsum("ij,ij->i", p[:-1], p[:-1])
    t_out = np.empty(X.shape[0])
    d_out = np.empty(X.shape[0])
    for lo in range(0, X.shape[0], chunk):
        xb = X[lo:lo + chunk]
        frac = (xb @ v.T - pv[None, :]) / seg_len_sq[None, :]
        np.clip(frac, 0.0, 1.0, out=frac)
        xp = xb @ p[:-1].T
        a = np.einsum("ij,ij->i", xb, xb)[:, None] + pp[None, :] - 2.0 * xp
        b = xb @ v.T - pv[None, :]
        dist_sq = a - 2.0 * frac * b + frac ** 2 * seg_len_sq[None, :]
        j = np.argmin(dist_sq, axis=1)
        rows = np.arange(xb.shape[0])
        t_out[lo:lo + chunk] = curve.t[j] + frac[rows, j] * (curve.t[j + 1] - curve.t[j])
        d_out[lo:lo + chunk] = np.sqrt(np.maximum(dist_sq[rows, j], 0.0))
    return t_out, d_out


def second_differences(curve: DiscretizedCurve) -> np.ndarray:
    """Acceleration estimates gamma''(t[i]) on the arc-length grid, (g, d)."""
    p = curve.points
    h = curve.grid_step
    acc = np.empty_like(p)
    acc[1:-1] = (p[2:] - 2.0 * p[1:-1] + p[:-2]) / h ** 2
    acc[0] = acc[1]
    acc[-1] = acc[-2]
    return acc


# Curvature this small (relative to 1/length) is treated as a straight line.
_FLAT_CURVATURE_REL = 1e-9
# Pairs closer than this many grid steps along the curve are skipped by the
# bottleneck bound; at that separation the ratio degenerates to curvature.
_BOTTLENECK_GUARD_STEPS = 10
_REACH_MAX_NODES = 2000


def reach_estimate(curve: DiscretizedCurve) -> float:
    """Reach of the curve: min of the curvature bound and the bottleneck bound.

    curvature bound ... min_t 1 / |gamma''(t)| by second differences
    bottleneck bound .. min over node pairs (p, q), more than 10 grid steps
                        apart along the curve, of |q-p|^2 / (2 dist(q-p, T_p))
                        where T_p is the tangent line at p

    Returns math.inf for straight lines.  Needs at least 100 nodes.
    """
    g = curve.grid_size
    if g < 100:
        raise ValueError("reach estimation needs at least 100 grid nodes")
    acc = np.linalg.norm(second_differences(curve), axis=1)
    max_curv = float(acc.max())
    if max_curv <= _FLAT_CURVATURE_REL / curve.length:
        return math.inf
    curv_bound = 1.0 / max_curv

    stride = max(1, math.ceil(g / _REACH_MAX_NODES))
    pts = curve.points[::stride]
    tan = curve.tangents[::stride]
    m = pts.shape[0]
    gram = pts @ pts.T
    sq = np.diag(gram)
    dist_sq = sq[None, :] + sq[:, None] - 2.0 * gram
    # tangential component of (q - p) at p, for all ordered pairs (p=i, q=j)
    t_comp = (pts @ tan.T).T - np.einsum("ij,ij->i", pts, tan)[:, None]
    orth_sq = np.maximum(dist_sq - t_comp ** 2, 0.0)
    idx = np.arange(m)
    near = np.abs(idx[None, :] - idx[:, None]) * stride <= _BOTTLENECK_GUARD_STEPS
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = dist_sq / (2.0 * np.sqrt(orth_sq))
    ratio[near] = math.inf
    ratio[~np.isfinite(ratio)] = math.inf
    bottleneck = float(ratio.min())
    return min(curv_bound, bottleneck)


def normalize_to_reach(curve: DiscretizedCurve, target: float) -> DiscretizedCurve:
    """Rescale the embedding so the estimated reach equals `target`."""
    if target <= 0:
        raise ValueError("target reach must be positive")
    reach = reach_estimate(curve)
    if not math.isfinite(reach):
        raise ValueError("cannot normalize the reach of a straight line")
    c = target / reach
    spec = replace(curve.spec, scale=curve.spec.scale * c)
    return DiscretizedCurve(spec=spec, t=curve.t * c, points=curve.points * c,
                            tangents=curve.tangents, length=curve.length * c)


def stable_ranks(curve: DiscretizedCurve, threshold: float = 0.05) -> tuple[float, int]:
    """Stable ranks of the centered discretization: (sum lam/lam1, count above
    threshold*lam1), computed from singular values of the node matrix."""
    centered = curve.points - curve.points.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    top = sv[0]
    if top <= 0:
        raise ValueError("degenerate curve: all nodes coincide")
    return float(sv.sum() / top), int((sv > threshold * top).sum())


def geometry_report(curve: DiscretizedCurve) -> CurveGeometryReport:
    reach = reach_estimate(curve)
    acc = np.linalg.norm(second_differences(curve), axis=1)
    srank_sum, srank_count = stable_ranks(curve)
    complexity = curve.length / reach if math.isfinite(reach) else 0.0
    return CurveGeometryReport(
        kind=curve.spec.kind, d=curve.d, length=curve.length, reach=reach,
        max_curvature=float(acc.max()), stable_rank_sum=srank_sum,
        stable_rank_count=srank_count, complexity=complexity,
    )


def project_and_measure(curve: DiscretizedCurve, basis: np.ndarray,
                        rescale: bool = True) -> tuple[DiscretizedCurve, CurveGeometryReport]:
    """Push the curve through an orthonormal-column projection and re-measure it.

    basis is (d, d') with orthonormal columns.  With rescale=True the image is
    multiplied by sqrt(d/d'), compensating the norm shrink of coordinate
    subsampling.  The image polyline is re-parameterized by arc length before
    the geometry report is taken.
    """
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[0] != curve.d:
        raise ValueError("basis must be (d, d') for this curve")
    d_new = basis.shape[1]
    if not np.allclose(basis.T @ basis, np.eye(d_new), atol=1e-8):
        raise ValueError("basis columns must be orthonormal")
    img = curve.points @ basis
    if rescale:
        img = img * math.sqrt(curve.d / d_new)
    chord = np.linalg.norm(np.diff(img, axis=0), axis=1)
    keep = chord > 0
    if not keep.all():
        img = img[np.concatenate(([True], keep))]
        chord = chord[keep]
    s = np.concatenate(([0.0], np.cumsum(chord)))
    length = float(s[-1])
    if length < 1e-12:
        raise ValueError("projected curve is degenerate")
    g = curve.grid_size
    t = np.linspace(0.0, length, g)
    pts = np.empty((g, d_new))
    for col in range(d_new):
        pts[:, col] = np.interp(t, s, img[:, col])
    tangents = np.empty_like(pts)
    tangents[1:-1] = pts[2:] - pts[:-2]
    tangents[0] = pts[1] - pts[0]
    tangents[-1] = pts[-1] - pts[-2]
    tangents /= np.linalg.norm(tangents, axis=1, keepdims=True)
    spec = replace(curve.spec, d=d_new) if d_new >= 2 else curve.spec
    projected = DiscretizedCurve(spec=spec, t=t, points=pts, tangents=tangents,
                                 length=length)
    return projected, geometry_report(projected)


def finite_diff_gradient(curve: DiscretizedCurve, link, x: np.ndarray,
                         step: float) -> np.ndarray:
    """Central finite-difference gradient of x -> link(t*(x))."""
    x = np.asarray(x, dtype=float)
    d = x.size
    probes = np.repeat(x[None, :], 2 * d, axis=0)
    probes[:d] += step * np.eye(d)
    probes[d:] -= step * np.eye(d)
    t_star, _ = project_points(curve, probes)
    vals = link(t_star)
    return (vals[:d] - vals[d:]) / (2.0 * step)


def level_set_alignment_check(curve: DiscretizedCurve, link, x: np.ndarray,
                              step: float | None = None) -> float | None:
    """Angle between the finite-difference gradient of link(t*(x)) and the
    curve tangent at the projection of x.  Returns None when the gradient is
    numerically zero (flat link), instead of a meaningless angle."""
    x = np.asarray(x, dtype=float)
    if step is None:
        step = 1e-5 * curve.length
    if step > 1e-4 * curve.length:
        raise ValueError("step must be at most 1e-4 of the curve length")
    grad = finite_diff_gradient(curve, link, x, step)
    norm = float(np.linalg.norm(grad))
    if norm < 1e-10:
        return None
    t_star, _ = closest_point_projection(curve, x)
    tangent = curve_tangent(curve, t_star)
    cosine = abs(float(grad @ tangent) / norm)
    return math.acos(min(1.0, cosine))
