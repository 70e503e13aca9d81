"""Rotationally symmetric asymptotically flat metrics as an exact testbed.

Metrics have the form  g = A(r) dr^2 + r^2 dsigma^2  on [r0, infinity) x S^2
with A(r) = 1 / (1 - 2 m(r) / r) for a mass function m(r).  Coordinate
spheres have area 4 pi r^2, mean curvature H = (2/r) sqrt(1/A) (sum-of-
principal-curvatures convention) and Hawking mass identically equal to m(r).
The scalar curvature is R = 4 m'(r) / r^2 (verified symbolically in the test
suite), so m' >= 0, Hawking-mass monotonicity along the coordinate-sphere
flow and nonnegative scalar curvature are all the same condition here.

Presets: ``schwarzschild(m)`` (constant mass function, scalar-flat) and
``flat`` (m = 0).  Tabulated mass functions use a monotonicity-preserving
cubic (PCHIP) through samples on [r0, R_max] with constant extension beyond
R_max, which pins the ADM limit and gives exact sign control of m'.

Geometric units G = c = 1 throughout.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .errors import NumericalError

FOUR_PI = 4.0 * math.pi
SIXTEEN_PI = 16.0 * math.pi

_QUAD_OPTS = dict(epsabs=1e-14, epsrel=1e-13, limit=200)
_HORIZON_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class SymmetricMetric:
    """A(r) dr^2 + r^2 dsigma^2 with A = 1/(1 - 2 m(r)/r) on [r0, infinity).

    Valid metrics satisfy 2 m(r) < r for r > r0; equality is allowed only at
    the inner boundary (a horizon).  Build instances via schwarzschild_metric,
    flat_metric or tabulated_metric.
    """

    r0: float
    kind: str                       # "schwarzschild" | "flat" | "tabulated"
    mass_param: float = 0.0
    r_samples: np.ndarray | None = field(default=None, repr=False)
    m_samples: np.ndarray | None = field(default=None, repr=False)
    _spline: PchipInterpolator | None = field(default=None, repr=False)
    _spline_deriv: Callable | None = field(default=None, repr=False)

    def mass(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "tabulated":
            r_max = self.r_samples[-1]
            return np.where(r >= r_max, self.m_samples[-1],
                            self._spline(np.minimum(r, r_max)))
        return np.full_like(r, self.mass_param)

    def mass_prime(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "tabulated":
            r_max = self.r_samples[-1]
            return np.where(r >= r_max, 0.0,
                            self._spline_deriv(np.minimum(r, r_max)))
        return np.zeros_like(r)

    def f(self, r):
        """1/A(r) = 1 - 2 m(r)/r; zero exactly at a horizon boundary."""
        return 1.0 - 2.0 * self.mass(r) / np.asarray(r, dtype=float)

    def A(self, r):
        return 1.0 / self.f(r)

    @property
    def r_max(self) -> float:
        """Radius beyond which the mass function is exactly constant."""
        if self.kind == "tabulated":
            return float(self.r_samples[-1])
        return self.r0

    @property
    def tail_mass(self) -> float:
        if self.kind == "tabulated":
            return float(self.m_samples[-1])
        return self.mass_param

    @property
    def has_horizon_boundary(self) -> bool:
        m0 = float(self.mass(self.r0))
        return m0 > 0 and abs(2.0 * m0 - self.r0) <= _HORIZON_RTOL * self.r0


def schwarzschild_metric(m: float, r0: float) -> SymmetricMetric:
    """Constant mass function m; requires r0 >= 2m (equality: horizon)."""
    if r0 <= 0:
        raise ValueError("inner radius must be positive")
    if m > 0 and r0 < 2.0 * m:
        raise ValueError(f"r0 = {r0} lies inside the horizon radius {2 * m}")
    return SymmetricMetric(r0=float(r0), kind="schwarzschild", mass_param=float(m))


def flat_metric(r0: float) -> SymmetricMetric:
    if r0 <= 0:
        raise ValueError("inner radius must be positive")
    return SymmetricMetric(r0=float(r0), kind="flat", mass_param=0.0)


def tabulated_metric(r_samples, m_samples) -> SymmetricMetric:
    """Metric from mass samples on [r0, R_max]; constant m beyond R_max.

    The inner boundary is the first sample radius.  2 m(r) < r is enforced on
    a dense grid of the interpolant (equality allowed only at r0).
    """
    r = np.asarray(r_samples, dtype=float)
    m = np.asarray(m_samples, dtype=float)
    if r.ndim != 1 or r.shape != m.shape or len(r) < 2:
        raise ValueError("need matching 1-D arrays with at least 2 samples")
    if not (np.diff(r) > 0).all():
        raise ValueError("sample radii must be strictly increasing")
    if r[0] <= 0:
        raise ValueError("sample radii must be positive")
    spline = PchipInterpolator(r, m)
    grid = np.linspace(r[0], r[-1], max(2048, 16 * len(r)))
    mg = spline(grid)
    slack = grid - 2.0 * mg
    inner_ok = slack[0] >= -_HORIZON_RTOL * r[0]
    if not inner_ok or (slack[1:] <= 0).any():
        raise ValueError("invalid metric: 2 m(r) >= r somewhere beyond the boundary")
    return SymmetricMetric(
        r0=float(r[0]), kind="tabulated",
        r_samples=r, m_samples=m,
        _spline=spline, _spline_deriv=spline.derivative(),
    )


def load_mass_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read mass-function samples from a CSV with header ``r,m``."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["r", "m"]:
        raise ValueError(f"{path}: expected CSV header 'r,m'")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    except (ValueError, TypeError) as exc:
        raise ValueError(f"{path}: malformed CSV row") from exc
    if len(data) < 2:
        raise ValueError(f"{path}: need at least 2 samples")
    return data[:, 0], data[:, 1]


def tabulated_metric_from_csv(path: str | Path) -> SymmetricMetric:
    r, m = load_mass_csv(path)
    return tabulated_metric(r, m)


# ---------------------------------------------------------------------------
# Pointwise geometry
# ---------------------------------------------------------------------------


class GeometrySample(NamedTuple):
    r: float
    area: float
    mean_curvature: float
    hawking_mass: float
    scalar_curvature: float


def geometry_at(metric: SymmetricMetric, r: float) -> GeometrySample:
    """Area, H, Hawking mass and scalar curvature at coordinate radius r.

    The Hawking mass is computed from its definition
    sqrt(area/16 pi) (1 - (1/16 pi) int H^2 dmu), which collapses to m(r)
    for coordinate spheres; the identity is asserted in the test suite.
    """
    if r < metric.r0:
        raise ValueError(f"r = {r} below the inner boundary r0 = {metric.r0}")
    fval = float(metric.f(r))
    if fval < 0:
        raise ValueError(f"metric undefined at r = {r}: 2 m(r) > r")
    area = FOUR_PI * r * r
    h = (2.0 / r) * math.sqrt(fval)
    willmore = h * h * area
    hawking = math.sqrt(area / SIXTEEN_PI) * (1.0 - willmore / SIXTEEN_PI)
    scalar = 4.0 * float(metric.mass_prime(r)) / (r * r)
    return GeometrySample(r, area, h, hawking, scalar)


# ---------------------------------------------------------------------------
# Radial harmonic potential and capacity
# ---------------------------------------------------------------------------


def _sqrtA_over_r2(metric: SymmetricMetric, s: float) -> float:
    return 1.0 / (s * s * math.sqrt(metric.f(s)))


def _integral_from_r0(metric: SymmetricMetric, upper: float) -> float:
    """int_{r0}^{upper} sqrt(A(s))/s^2 ds (upper may be inf).

    The substitution s = r0 + w^2 on the leading span integrates through the
    inverse-square-root singularity of a horizon boundary; beyond a tabulated
    R_max the mass is constant and the tail has a closed-form antiderivative
    sqrt(1 - 2 m/s) / m.
    """
    r0 = metric.r0
    if upper <= r0:
        return 0.0
    head_end = min(upper, 2.0 * r0)
    val, _ = quad(
        lambda w: 2.0 * w * _sqrtA_over_r2(metric, r0 + w * w),
        0.0, math.sqrt(head_end - r0), **_QUAD_OPTS)
    total = float(val)
    if upper <= head_end:
        return total

    if metric.kind == "tabulated":
        lo = head_end
        if lo < metric.r_max:
            # spline region: split at the knots (the interpolant is only C^1)
            mid_end = min(upper, metric.r_max)
            cuts = ([lo]
                    + [float(k) for k in metric.r_samples if lo < k < mid_end]
                    + [mid_end])
            for a, b in zip(cuts[:-1], cuts[1:]):
                seg, _ = quad(lambda s: _sqrtA_over_r2(metric, s), a, b,
                              **_QUAD_OPTS)
                total += float(seg)
            lo = mid_end
        if lo < upper:
            total += _constant_mass_tail(metric.tail_mass, lo, upper)
        return total

    seg, _ = quad(lambda s: _sqrtA_over_r2(metric, s), head_end,
                  math.inf if math.isinf(upper) else upper, **_QUAD_OPTS)
    return total + float(seg)


def _constant_mass_tail(m: float, lo: float, hi: float) -> float:
    """int sqrt(A)/s^2 ds for constant m; antiderivative sqrt(1-2m/s)/m."""
    def prim(s: float) -> float:
        if math.isinf(s):
            return 1.0 / m if m != 0 else 0.0
        return math.sqrt(1.0 - 2.0 * m / s) / m if m != 0 else -1.0 / s
    return prim(hi) - prim(lo)


def radial_capacity(metric: SymmetricMetric, boundary_value: float = 0.0
                    ) -> tuple[float, Callable[[float], float]]:
    """Harmonic potential with u = boundary_value on the inner sphere, 1 at
    infinity, and its far-field coefficient.

    Returns (C_alpha, u) where u(r) = alpha + (1 - alpha) I(r0, r)/I(r0, inf)
    with I(a, b) = int_a^b sqrt(A)/s^2 ds, and C_alpha = (1 - alpha)/I(r0,
    inf) is the coefficient in u = 1 - C_alpha/r + O(1/r^2).  alpha = 0
    gives the capacity of the boundary sphere.
    """
    alpha = boundary_value
    if not 0.0 <= alpha < 1.0:
        raise ValueError("boundary value must lie in [0, 1)")
    total = _integral_from_r0(metric, math.inf)
    if not math.isfinite(total) or total <= 0:
        raise NumericalError("divergent radial integral (metric not asymptotically flat?)")

    def u(r: float) -> float:
        if r < metric.r0:
            raise ValueError("potential evaluated below the inner boundary")
        return alpha + (1.0 - alpha) * _integral_from_r0(metric, r) / total

    return (1.0 - alpha) / total, u


# ---------------------------------------------------------------------------
# Schwarzschild closed forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SchwarzschildForms:
    """Closed-form harmonic data of the constant-mass metric.

    v(r) = sqrt(1 - 2m/r) is harmonic; u is the normalized potential
    (0 on the boundary, 1 at infinity); capacity = m/(1 - v(r0)) for m != 0
    and r0 for m = 0; f0 is u expressed in flow time and phi(r) = 2 log(r/r0)
    is the flow time of the coordinate sphere r, so u = f0 o phi.
    """

    m: float
    r0: float
    capacity: float
    v: Callable[[float], float]
    u: Callable[[float], float]
    f0: Callable[[float], float]
    phi: Callable[[float], float]


def schwarzschild_closed_forms(m: float, r0: float) -> SchwarzschildForms:
    if r0 <= 0:
        raise ValueError("inner radius must be positive")
    if m > 0 and r0 < 2.0 * m:
        raise ValueError(f"r0 = {r0} lies inside the horizon radius {2 * m}")

    def v(r: float) -> float:
        return math.sqrt(1.0 - 2.0 * m / r)

    v0 = v(r0)
    if m != 0.0:
        capacity = m / (1.0 - v0)

        def u(r: float) -> float:
            return (v(r) - v0) / (1.0 - v0)

        def f0(t: float) -> float:
            return (math.sqrt(1.0 - 2.0 * m / (r0 * math.exp(t / 2.0))) - v0) / (1.0 - v0)
    else:
        capacity = r0

        def u(r: float) -> float:
            return 1.0 - r0 / r

        def f0(t: float) -> float:
            return 1.0 - math.exp(-t / 2.0)

    def phi(r: float) -> float:
        return 2.0 * math.log(r / r0)

    # consistency of the two routes to the potential
    for r in np.geomspace(r0 * 1.0000001, r0 * 1e4, 40):
        if abs(u(float(r)) - f0(phi(float(r)))) > 1e-12:
            raise NumericalError("u != f0 o phi on the test grid")

    return SchwarzschildForms(m=m, r0=r0, capacity=capacity,
                              v=v, u=u, f0=f0, phi=phi)


# ---------------------------------------------------------------------------
# Mass
# ---------------------------------------------------------------------------


def adm_mass(metric: SymmetricMetric) -> float:
    """Total mass lim_{r -> inf} (r/2)(1 - 1/A(r)).

    For A = 1/(1 - 2m(r)/r) the flux-integral definition of the total mass
    reduces to this limit, which equals the constant tail value of the mass
    function.  The limit expression is evaluated at two tail radii and must
    agree there (the tail is exactly constant by construction).
    """
    r_far = 16.0 * max(metric.r0, metric.r_max, 1.0)
    vals = [(r / 2.0) * (1.0 - float(metric.f(r))) for r in (r_far, 8.0 * r_far)]
    if abs(vals[0] - vals[1]) > 1e-12 * max(1.0, abs(vals[0])):
        raise NumericalError("mass limit not settled at the tail")
    return vals[1]


@dataclass(frozen=True)
class RadialScan:
    """Geometry sampled along the coordinate-sphere flow r(t) = r0 e^{t/2}."""

    t: np.ndarray
    r: np.ndarray
    area: np.ndarray
    mean_curvature: np.ndarray
    hawking_mass: np.ndarray
    scalar_curvature: np.ndarray
    scalar_nonnegative: bool
    hawking_monotone: bool


def imcf_trace(metric: SymmetricMetric, t_max: float, steps: int) -> RadialScan:
    """Sample the flow of coordinate spheres up to flow time t_max.

    The area law area(t) = e^t area(0) holds analytically for r(t) =
    r0 e^{t/2} and is asserted to rounding error.  ``hawking_monotone`` is
    true iff the sampled Hawking mass never decreases beyond a 1e-12 * max
    slack; ``scalar_nonnegative`` applies the same slack to R.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    if steps < 2:
        raise ValueError("need at least 2 steps")
    t = np.linspace(0.0, float(t_max), int(steps))
    r = metric.r0 * np.exp(t / 2.0)
    samples = [geometry_at(metric, float(ri)) for ri in r]
    area = np.array([s.area for s in samples])
    expected = area[0] * np.exp(t)
    if not np.allclose(area, expected, rtol=1e-12, atol=0.0):
        raise NumericalError("coordinate-sphere area law violated")
    h = np.array([s.mean_curvature for s in samples])
    m_h = np.array([s.hawking_mass for s in samples])
    scal = np.array([s.scalar_curvature for s in samples])
    slack_m = 1e-12 * max(1.0, float(np.abs(m_h).max()))
    slack_r = 1e-12 * max(1.0, float(np.abs(scal).max()))
    return RadialScan(
        t=t, r=r, area=area, mean_curvature=h, hawking_mass=m_h,
        scalar_curvature=scal,
        scalar_nonnegative=bool((scal >= -slack_r).all()),
        hawking_monotone=bool((np.diff(m_h) >= -slack_m).all()),
    )


class MassBoundResult(NamedTuple):
    total_mass: float
    bound: float            # the far-field coefficient of the alpha-potential
    alpha: float
    holds: bool | None
    equality: bool | None
    status: str             # "ok" or "hypothesis violated"


def mass_bound_check(metric: SymmetricMetric, tolerance: float = 1e-9
                     ) -> MassBoundResult:
    """Check total mass >= (1 - alpha) * capacity for the symmetric metric.

    alpha = sqrt((1/16 pi) int H^2 dmu) on the boundary sphere, which equals
    sqrt(1/A(r0)); both routes are computed and cross-checked.  The
    hypothesis requires nonnegative boundary Hawking mass (alpha <= 1); a
    violation is reported as a distinct status, not a failure.  Equality is
    flagged for (numerically) constant mass functions, where the bound is
    attained.
    """
    g0 = geometry_at(metric, metric.r0)
    willmore = g0.mean_curvature**2 * g0.area
    alpha = math.sqrt(willmore / SIXTEEN_PI)
    alpha_direct = math.sqrt(float(metric.f(metric.r0)))
    if abs(alpha - alpha_direct) > 1e-12 * max(1.0, alpha):
        raise NumericalError("alpha cross-check failed")
    # roundoff slack: a boundary with m(r0) = 0 sits exactly on the hypothesis
    if g0.hawking_mass < -1e-12 * max(1.0, metric.r0):
        return MassBoundResult(adm_mass(metric), math.nan, alpha,
                               None, None, "hypothesis violated")
    cap, _ = radial_capacity(metric, 0.0)
    bound = (1.0 - alpha) * cap
    total = adm_mass(metric)
    holds = bool(total >= bound - tolerance)
    if metric.kind == "tabulated":
        grid = np.linspace(metric.r0, metric.r_max, 512)
        dev = float(np.abs(metric.mass(grid) - metric.tail_mass).max())
        is_model = dev <= 1e-9 * max(1.0, abs(metric.tail_mass))
    else:
        is_model = True
    equality = bool(is_model and abs(total - bound) < tolerance)
    return MassBoundResult(total, bound, alpha, holds, equality, "ok")


class StaticCheck(NamedTuple):
    min_n_squared: float
    willmore_term: float
    equality: bool


def static_check(m: float, r0: float) -> StaticCheck:
    """Static-potential identity on the constant-mass family.

    N = sqrt(1 - 2m/r) is the static potential; min over the boundary of N^2
    equals (1/16 pi) int H^2 dmu there, both sides being 1 - 2m/r0.  The two
    sides are computed through independent routes and compared at 1e-12.
    """
    if m < 0:
        raise ValueError("static family requires m >= 0")
    if r0 <= 0 or (m > 0 and r0 < 2.0 * m):
        raise ValueError("requires r0 >= 2m > 0 or r0 > 0 for m = 0")
    min_n_sq = 1.0 - 2.0 * m / r0
    g0 = geometry_at(schwarzschild_metric(m, r0), r0)
    willmore_term = g0.mean_curvature**2 * g0.area / SIXTEEN_PI
    return StaticCheck(min_n_sq, willmore_term,
                       abs(min_n_sq - willmore_term) <= 1e-12)
