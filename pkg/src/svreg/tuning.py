"""Theory-driven slice/bin selection and assumption diagnostics.

The sample-complexity constants C_gamma_f, M_star and l_max turn a model's
geometric and link constants into slice counts.  Three noisy regimes:
variance-limited small samples (l grows like n / log^2 n), a middle regime
(l ~ n^{1/(2s+1)} M*), and a noise-floor regime where l sticks at l_max and
the per-slice bin count j grows instead.  Hidden absolute constants of the
theory are exposed in an abs_const dict (every key defaults to 1.0), since
the analysis never pins them; with the defaults the selector is continuous
across regime boundaries.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .synthesis import (LinkSpec, ModelSpec, estimate_holder_seminorm,
                        estimate_monotonicity_constants)

REGIMES = ("low_noise", "mid", "high_noise", "noiseless", "wide")

# Link kinds that are strictly monotone by construction: their coarse
# monotonicity scale is exactly 0, below any probe resolution.
_MONOTONE_KINDS = ("identity", "exp_scaled", "power_holder")


@dataclass(frozen=True)
class TheoryConstants:
    """Model constants feeding the selectors.

    C_f / C_f_prime bound preimage spans of response intervals from above
    and below, omega_f is the scale below which those bounds fail; C_Y and
    R_0 are output/input sub-Gaussian proxies; seminorm_f is the Holder
    seminorm of the link at smoothness s, sup_f its sup norm, seminorm_rho
    the marginal-density seminorm (0 for arc-length-uniform sampling).
    """

    d: int
    s: float
    length: float
    reach: float
    sigma_gamma: float
    sigma_zeta: float
    R_0: float
    C_Y: float
    C_f: float
    C_f_prime: float
    omega_f: float
    seminorm_f: float
    sup_f: float
    seminorm_rho: float = 0.0
    abs_const: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be at least 1")
        if not 0.5 <= self.s <= 2.0:
            raise ValueError("smoothness exponent must lie in [0.5, 2]")
        if not (self.C_f >= self.C_f_prime > 0):
            raise ValueError("need C_f >= C_f_prime > 0")
        for name in ("length", "reach", "sigma_gamma", "R_0", "C_Y"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("sigma_zeta", "omega_f", "seminorm_f", "sup_f",
                     "seminorm_rho"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def const(self, key):
        return self.abs_const.get(key, 1.0)


@dataclass(frozen=True)
class SelectedParams:
    l: int
    j: int
    m: int
    regime: str


@dataclass(frozen=True)
class AssumptionReport:
    """Diagnostics for the thin-slice (low-curvature) and wide-slice
    assumptions, plus minimum sample sizes for the guarantees."""

    lcv_ok: bool
    lcv_margin: float             # sigma_gamma - 2 C_f max(sigma_zeta, omega_f)
    sc_ok: bool
    sc_margin_noise: float        # c1 C_f max(sigma_zeta, omega_f) - sigma_gamma
    sc_margin_reach: float        # c2 reach - C_f max(sigma_zeta, omega_f)
    omega_ok: bool
    n_min_noisy: int
    n_min_noiseless: int


def default_degree(s):
    """Local polynomial degree implied by the declared smoothness."""
    if s < 1.0:
        return 0
    if s < 2.0:
        return 1
    return 2


def C_gamma_f(tc):
    lead = tc.R_0 ** 3 * tc.C_f ** 2 / tc.C_f_prime
    curve_term = tc.length * tc.d ** 1.5 / tc.sigma_gamma ** 4
    tube_term = (tc.R_0 ** 5 * tc.C_f ** 2 * tc.d ** 4
                 / (tc.C_f_prime ** 3 * tc.sigma_gamma ** 8))
    return float(lead * max(curve_term, tube_term))


def M_star(tc):
    if tc.sigma_zeta <= 0:
        raise ValueError("M_star is a noisy-regime quantity; use "
                         "select_noiseless when sigma_zeta = 0")
    base = ((tc.C_f * tc.C_Y * tc.R_0) ** tc.s
            * (tc.seminorm_f + tc.sup_f * tc.seminorm_rho) / tc.sigma_zeta)
    return float(base ** (2.0 / (2.0 * tc.s + 1.0)))


def l_max(tc):
    scale = max(tc.sigma_zeta, tc.omega_f)
    if scale <= 0:
        raise ValueError("l_max needs sigma_zeta or omega_f positive")
    return float(tc.const("l_max") * tc.C_Y * tc.R_0 / scale)


def derived_constants(tc):
    """(C_gamma_f, M_star, l_max) for a noisy model."""
    return C_gamma_f(tc), M_star(tc), l_max(tc)


def _cap(raw, n, d):
    """Floor to an integer >= 1 while keeping >= 2d points per slice."""
    return max(1, min(int(raw), n // (2 * d)))


def select_noisy(tc, n):
    """Three-regime (l*, j*) choice for noisy observations.

    low_noise: few samples relative to model complexity, l ~ n / log^2 n;
    high_noise: slices have hit the noise width l_max, bins j grow as
    n^{1/(2s+1)}; mid: l ~ n^{1/(2s+1)} M*.  Exactly one branch fires.
    """
    if n < 1:
        raise ValueError("need a positive sample size")
    if tc.sigma_zeta <= 0:
        raise ValueError("select_noisy requires sigma_zeta > 0; use "
                         "select_noiseless")
    s = tc.s
    Cgf, M, lmax = derived_constants(tc)
    logn = math.log(n)
    rate = n ** (1.0 / (2.0 * s + 1.0))
    if n ** (2.0 * s / (2.0 * s + 1.0)) <= (tc.const("regime_low")
                                            * Cgf * M * logn ** 2):
        regime = "low_noise"
        l_raw = tc.const("l_low") * n / (Cgf * logn ** 2)
        j_raw = tc.const("j_const")
    elif rate >= tc.const("regime_high") * lmax / M:
        regime = "high_noise"
        l_raw = lmax
        j_raw = tc.const("j_high") * (M / lmax) * rate
    else:
        regime = "mid"
        l_raw = tc.const("l_mid") * M * rate
        j_raw = tc.const("j_const")
    return SelectedParams(l=_cap(l_raw, n, tc.d), j=max(1, int(j_raw)),
                          m=default_degree(s), regime=regime)


def select_noiseless(tc, n):
    """l* = n / (C_gamma_f log^{3/2} n) for exact observations of a
    perfectly monotone link; no upper bound on l besides the 2d-points-
    per-slice cap."""
    if n < 1:
        raise ValueError("need a positive sample size")
    if tc.sigma_zeta > 0:
        raise ValueError("observations are noisy; use select_noisy")
    if tc.omega_f > 0:
        raise ValueError("select_noiseless requires a perfectly monotone "
                         "link (omega_f = 0)")
    l_raw = tc.const("l_noiseless") * n / (C_gamma_f(tc)
                                           * math.log(n) ** 1.5) if n > 1 else 1
    return SelectedParams(l=_cap(l_raw, n, tc.d),
                          j=max(1, int(tc.const("j_const"))),
                          m=default_degree(tc.s), regime="noiseless")


def select_wide(tc):
    """Slice count when the tube is wider than the noise scale permits:
    l* = C_Y R_0 / max(sigma_zeta, omega_f), independent of n."""
    scale = max(tc.sigma_zeta, tc.omega_f)
    if scale <= 0:
        raise ValueError("wide selection needs sigma_zeta or omega_f > 0")
    l_raw = tc.const("l_wide") * tc.C_Y * tc.R_0 / scale
    return SelectedParams(l=max(1, int(l_raw)),
                          j=max(1, int(tc.const("j_const"))),
                          m=default_degree(tc.s), regime="wide")


def min_sample_size(rhs):
    """Smallest integer n with n / log^{3/2} n >= rhs (natural log)."""
    if rhs <= 0:
        raise ValueError("rhs must be positive")

    def g(n):
        return n / math.log(n) ** 1.5

    for small in (3, 4, 5):
        if g(small) >= rhs:
            return small
    lo, hi = 5, 10
    while g(hi) < rhs:           # g is increasing for n >= 5
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if g(mid) >= rhs:
            hi = mid
        else:
            lo = mid
    return hi


def assumption_report(model, tc):
    """Thin/wide assumption margins and minimum sample sizes.

    The thin-slice condition wants the tube width to dominate the noise
    scale: sigma_gamma >= 2 C_f max(sigma_zeta, omega_f).  The wide-slice
    condition wants the opposite, plus noise small against the reach.
    """
    if abs(model.sigma_gamma - tc.sigma_gamma) > 1e-9 * tc.sigma_gamma:
        raise ValueError("model and constants disagree on sigma_gamma")
    noise_scale = tc.C_f * max(tc.sigma_zeta, tc.omega_f)
    lcv_margin = tc.sigma_gamma - 2.0 * noise_scale
    sc_margin_noise = tc.const("sc_c1") * noise_scale - tc.sigma_gamma
    sc_margin_reach = tc.const("sc_c2") * tc.reach - noise_scale
    rhs = C_gamma_f(tc) * tc.C_f * tc.length / (tc.C_f_prime * tc.sigma_gamma)
    n_min = min_sample_size(rhs)
    return AssumptionReport(
        lcv_ok=lcv_margin > 0,
        lcv_margin=lcv_margin,
        sc_ok=sc_margin_noise > 0 and sc_margin_reach >= 0,
        sc_margin_noise=sc_margin_noise,
        sc_margin_reach=sc_margin_reach,
        omega_ok=0 < tc.C_f_prime <= tc.C_f < math.inf,
        n_min_noisy=n_min,
        n_min_noiseless=n_min,
    )


def saturation_level(tc, seminorm_s1=None):
    """Curve-approximation error floor of the noisy-regime guarantee:
    |f|_{C^{s^1}}^2 ((sigma_gamma C_f / reach) max(sigma_zeta, omega_f))^
    {2 (s^1)} with s^1 = min(s, 1).  Zero when the curve is a line."""
    s1 = min(tc.s, 1.0)
    if seminorm_s1 is None:
        seminorm_s1 = tc.seminorm_f
    if math.isinf(tc.reach):
        return 0.0
    base = tc.sigma_gamma * tc.C_f / tc.reach * max(tc.sigma_zeta, tc.omega_f)
    return seminorm_s1 ** 2 * base ** (2.0 * s1)


def constants_from_model(model, abs_const=None, grid=2048):
    """TheoryConstants of a synthetic model from oracle knowledge.

    R_0 combines the curve's largest centered-spread eigenvalue with the
    tube width; C_Y R_0 is the response range proxy sup|f| + sigma_zeta.
    Link constants come from the numeric probes, except omega_f which is 0
    exactly for the strictly monotone built-in link kinds.
    """
    curve = model.curve
    pts = curve.points - curve.points.mean(axis=0)
    lam1 = float(np.linalg.eigvalsh(pts.T @ pts / pts.shape[0])[-1])
    R_0 = math.sqrt(lam1 + model.sigma_gamma ** 2)

    link = model.link
    fs = np.asarray(link(np.linspace(0.0, curve.length, grid)))
    sup_f = float(np.abs(fs).max())
    C_Y = (sup_f + model.sigma_zeta) / R_0

    c_f, c_f_prime, omega_hat = estimate_monotonicity_constants(
        link, 0.0, curve.length)
    omega_f = 0.0 if link.kind in _MONOTONE_KINDS else omega_hat
    seminorm_f = estimate_holder_seminorm(link, link.s, 0.0, curve.length)

    return TheoryConstants(
        d=curve.d, s=link.s, length=curve.length, reach=model.reach,
        sigma_gamma=model.sigma_gamma, sigma_zeta=model.sigma_zeta,
        R_0=R_0, C_Y=C_Y, C_f=c_f, C_f_prime=c_f_prime, omega_f=omega_f,
        seminorm_f=seminorm_f, sup_f=sup_f, seminorm_rho=0.0,
        abs_const=dict(abs_const) if abs_const else {})
