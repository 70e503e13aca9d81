"""One-dimensional variational capacity bounds driven by level-set profiles.

Restricting the capacity infimum to test functions of the form f(psi), where
the level surfaces of psi form a one-parameter family {Sigma_t}, collapses
the problem to one variable.  With

    T(t) = (1/4 pi) int_{Sigma_t} |grad psi| dmu

the energy of f(psi) is int_0^infty f'(t)^2 T(t) dt, and the optimal profile
f(t) = Lambda int_0^t T(s)^-1 ds with Lambda = (int_0^infty T^-1)^-1 yields

    C <= (int_0^infty T(t)^-1 dt)^-1 .

Three families are provided: ``steiner`` (parallel surfaces of a convex
body, T quadratic in t), ``imcf`` (inverse-mean-curvature-flow comparison
profile parametrized by initial area and Hawking mass), and ``tabulated``
(sampled T with a declared exponential tail).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad

from .bem import solve_capacity
from .errors import NumericalError
from .mesh import SurfaceMeasures, TriMesh, measure

FOUR_PI = 4.0 * math.pi
SIXTEEN_PI = 16.0 * math.pi

_QUAD_OPTS = dict(epsabs=1e-14, epsrel=1e-12, limit=200)
_SPLIT = 1.0   # flow time below which the sqrt-substitution is used (imcf)


@dataclass(frozen=True)
class ProfileFamily:
    """A one-parameter profile t -> T(t) on [0, infinity).

    kind "steiner":   T(t) = (area + total_mean_curvature * t + 4 pi t^2)/4 pi
    kind "imcf":      T(t) = 2 r0 e^{t/2} sqrt(1 - 2 m0 / (r0 e^{t/2})),
                      r0 = sqrt(area0 / 4 pi); requires r0 >= 2 m0 for m0 > 0
                      (equality is the horizon family, where T(0) = 0 with an
                      integrable inverse).
    kind "tabulated": samples (t_k, T_k) starting at t = 0, extended beyond
                      t_max by the exponential tail T(t_max) e^{t - t_max}.
    """

    kind: str
    params: tuple[float, ...] = ()
    ts: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    def T(self, t):
        """Profile value(s); vectorized over ``t``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "steiner":
            area, tmc = self.params
            return (area + tmc * t + FOUR_PI * t * t) / FOUR_PI
        if self.kind == "imcf":
            r0, m0 = self.params
            r = r0 * np.exp(t / 2.0)
            return 2.0 * r * np.sqrt(np.maximum(1.0 - 2.0 * m0 / r, 0.0))
        lo = np.interp(t, self.ts, 1.0 / self.values)  # 1/T linear in t
        tail = self.values[-1] * np.exp(t - self.ts[-1])
        return np.where(t <= self.ts[-1], 1.0 / lo, tail)


def steiner_profile(area: float, total_mean_curvature: float) -> ProfileFamily:
    """Parallel-surface profile from area and int H dmu."""
    if area <= 0:
        raise ValueError("area must be positive")
    if total_mean_curvature < 0:
        # a negative linear coefficient can push T through zero
        vertex = area - total_mean_curvature**2 / (16.0 * math.pi)
        if vertex <= 0:
            raise ValueError("profile not positive: T(t) has a root for t >= 0")
    return ProfileFamily("steiner", (float(area), float(total_mean_curvature)))


def imcf_profile(area0: float, m0: float) -> ProfileFamily:
    """Flow comparison profile from initial area and initial Hawking mass."""
    if area0 <= 0:
        raise ValueError("initial area must be positive")
    r0 = math.sqrt(area0 / FOUR_PI)
    if m0 > 0 and r0 < 2.0 * m0:
        raise ValueError(f"requires sqrt(area0/4 pi) >= 2 m0, got r0 = {r0}")
    return ProfileFamily("imcf", (r0, float(m0)))


def tabulated_profile(ts, values) -> ProfileFamily:
    """Sampled profile; the declared tail beyond t_max is T(t_max) e^(t - t_max)."""
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if ts.ndim != 1 or ts.shape != values.shape or len(ts) < 2:
        raise ValueError("need matching 1-D arrays with at least 2 samples")
    if ts[0] != 0.0:
        raise ValueError("samples must start at t = 0")
    if not (np.diff(ts) > 0).all():
        raise ValueError("sample times must be strictly increasing")
    if not (values > 0).all():
        raise ValueError("profile not positive: all T samples must be > 0")
    return ProfileFamily("tabulated", (), ts=ts, values=values)


def _inv_T(family: ProfileFamily, t):
    """1/T(t) in a form that stays finite as t -> infinity."""
    if family.kind == "imcf":
        r0, m0 = family.params
        decay = np.exp(-np.asarray(t, dtype=float) / 2.0)
        return decay / (2.0 * r0 * np.sqrt(1.0 - (2.0 * m0 / r0) * decay))
    return 1.0 / family.T(t)


def _inv_T_integral(family: ProfileFamily, upper: float = math.inf) -> float:
    """int_0^upper T(t)^-1 dt.

    For the imcf kind the substitution t = tau^2 removes the integrable
    endpoint singularity of the horizon family; tabulated kinds use the
    trapezoid rule on 1/T plus the closed-form tail integral.
    """
    if family.kind == "tabulated":
        ts, vals = family.ts, family.values
        inv = 1.0 / vals
        cum = np.concatenate([[0.0], np.cumsum(np.diff(ts) * (inv[:-1] + inv[1:]) / 2.0)])
        if upper >= ts[-1]:
            tail = inv[-1] if math.isinf(upper) else inv[-1] * (1.0 - math.exp(-(upper - ts[-1])))
            return float(cum[-1] + tail)
        k = int(np.searchsorted(ts, upper, side="right") - 1)
        inv_at = float(np.interp(upper, ts, inv))
        return float(cum[k] + (upper - ts[k]) * (inv[k] + inv_at) / 2.0)

    def inv_T(t):
        return _inv_T(family, t)

    if family.kind == "steiner":
        if math.isinf(upper):
            val, _ = quad(inv_T, 0.0, math.inf, **_QUAD_OPTS)
        else:
            val, _ = quad(inv_T, 0.0, upper, **_QUAD_OPTS)
        return float(val)

    # imcf: sqrt-substitution on [0, min(upper, _SPLIT)]
    head = min(upper, _SPLIT)
    val, _ = quad(lambda tau: 2.0 * tau * inv_T(tau * tau),
                  0.0, math.sqrt(head), **_QUAD_OPTS)
    total = float(val)
    if upper > _SPLIT:
        if math.isinf(upper):
            rest, _ = quad(inv_T, _SPLIT, math.inf, **_QUAD_OPTS)
        else:
            rest, _ = quad(inv_T, _SPLIT, upper, **_QUAD_OPTS)
        total += float(rest)
    return total


def optimal_profile_bound(family: ProfileFamily) -> tuple[float, float]:
    """Capacity bound (int T^-1)^-1 of a profile family.

    Returns (bound, Lambda); the two coincide for the optimal profile.
    A divergent integral is an error, not a zero bound: a family with
    divergent int T^-1 carries no information.
    """
    total = _inv_T_integral(family)
    if not math.isfinite(total) or total <= 0:
        raise NumericalError("divergent or nonpositive int T^-1: useless family")
    bound = 1.0 / total
    return bound, bound


def evaluate_optimal_f(family: ProfileFamily, t: float) -> float:
    """Optimal profile f(t) = Lambda int_0^t T(s)^-1 ds.

    f(0) = 0, f is nondecreasing and f(t) -> 1 as t -> infinity.
    """
    if t < 0:
        raise ValueError("flow time must be nonnegative")
    bound, lam = optimal_profile_bound(family)
    if t == 0.0:
        return 0.0
    return min(lam * _inv_T_integral(family, upper=float(t)), 1.0)


def _log_T(family: ProfileFamily, t: float) -> float:
    """log T(t), stable for flow times far beyond floating-point e^t range."""
    if family.kind == "imcf":
        r0, m0 = family.params
        return (math.log(2.0 * r0) + t / 2.0
                + 0.5 * math.log1p(-(2.0 * m0 / r0) * math.exp(-t / 2.0)))
    area, tmc = family.params
    return math.log((area + tmc * t + FOUR_PI * t * t) / FOUR_PI)


def optimal_fprime(family: ProfileFamily) -> Callable[[float], float]:
    """Derivative Lambda / T(t) of the optimal profile, in overflow-safe form."""
    _, lam = optimal_profile_bound(family)

    def fprime(t: float) -> float:
        return lam * float(_inv_T(family, t))

    return fprime


def profile_energy(family: ProfileFamily, fprime: Callable[[float], float]) -> float:
    """Energy int_0^infty f'(t)^2 T(t) dt of a profile (closed-form kinds).

    For the optimal profile (f' = Lambda/T) this equals the profile bound;
    any admissible perturbation can only increase it.  The integrand is
    evaluated in log space so that decaying f' against exponentially growing
    T underflows to zero instead of overflowing.
    """
    if family.kind == "tabulated":
        raise ValueError("use tabulated_energy for tabulated families")

    def integrand(t):
        fp = fprime(t)
        if fp == 0.0:
            return 0.0
        return math.exp(2.0 * math.log(abs(fp)) + _log_T(family, t))

    if family.kind == "imcf":
        head, _ = quad(lambda tau: 2.0 * tau * integrand(tau * tau),
                       0.0, math.sqrt(_SPLIT), **_QUAD_OPTS)
        rest, _ = quad(integrand, _SPLIT, math.inf, **_QUAD_OPTS)
        return float(head + rest)
    val, _ = quad(integrand, 0.0, math.inf, **_QUAD_OPTS)
    return float(val)


def tabulated_energy(family: ProfileFamily, f_nodes) -> float:
    """Discrete profile energy for a tabulated family.

    ``f_nodes`` holds f at the sample times (f(0) must be 0).  Each segment
    contributes (delta f)^2 / R_k with resistance R_k = trapezoid of 1/T over
    the segment, and the tail contributes (1 - f_end)^2 T(t_max), the optimal
    continuation cost under the declared exponential tail.  The discrete
    minimizer is exactly the trapezoid-accumulated optimal profile, so the
    minimum equals the profile bound to rounding error.
    """
    if family.kind != "tabulated":
        raise ValueError("tabulated_energy requires a tabulated family")
    f = np.asarray(f_nodes, dtype=float)
    ts, vals = family.ts, family.values
    if f.shape != ts.shape:
        raise ValueError("f_nodes must match the sample grid")
    if f[0] != 0.0:
        raise ValueError("admissible profiles satisfy f(0) = 0")
    inv = 1.0 / vals
    resist = np.diff(ts) * (inv[:-1] + inv[1:]) / 2.0
    energy = float(np.sum(np.diff(f) ** 2 / resist))
    energy += (1.0 - f[-1]) ** 2 * float(vals[-1])
    return energy


# ---------------------------------------------------------------------------
# Closed-form bounds
# ---------------------------------------------------------------------------


def bray_miao_bound(area: float, willmore: float) -> float:
    """Capacity upper bound sqrt(area/16 pi) * (1 + sqrt(willmore/16 pi)).

    Sharp exactly on round spheres in flat space (willmore = 16 pi) and on
    the rotationally symmetric model metrics.
    """
    if area <= 0:
        raise ValueError("area must be positive")
    if willmore < 0:
        raise ValueError("willmore energy must be nonnegative")
    return math.sqrt(area / SIXTEEN_PI) * (1.0 + math.sqrt(willmore / SIXTEEN_PI))


def szego_bound(area: float, half_total_mean_curvature: float) -> float:
    """Convex-surface capacity bound (M/4 pi) * 2 eps / log((1+eps)/(1-eps)).

    M is half the total mean curvature and eps^2 = 1 - 4 pi area / M^2,
    which is nonnegative for convex surfaces (Minkowski inequality).  The
    eps -> 0 limit (round sphere) is the analytic value M/4 pi.
    """
    m = half_total_mean_curvature
    if m <= 0:
        raise ValueError("half total mean curvature must be positive")
    eps_sq = 1.0 - FOUR_PI * area / (m * m)
    if eps_sq < 0:
        raise ValueError("not convex-consistent input: M^2 < 4 pi area")
    eps = math.sqrt(eps_sq)
    if eps == 0.0:
        return m / FOUR_PI
    return (m / FOUR_PI) * 2.0 * eps / math.log((1.0 + eps) / (1.0 - eps))


def imcf_closed_form_bound(area0: float, m0: float) -> float:
    """Closed form of the imcf-profile bound.

    With r0 = sqrt(area0/4 pi) and v = sqrt(1 - 2 m0/r0) the bound is
    m0 / (1 - v) for m0 != 0 and r0 for m0 = 0; it agrees with
    optimal_profile_bound(imcf_profile(area0, m0)) to quadrature accuracy
    because the optimal profile attains the infimum.
    """
    if area0 <= 0:
        raise ValueError("area must be positive")
    r0 = math.sqrt(area0 / FOUR_PI)
    if m0 == 0.0:
        return r0
    if m0 > 0 and r0 < 2.0 * m0:
        raise ValueError("metric undefined: requires r0 >= 2 m0")
    v0 = math.sqrt(1.0 - 2.0 * m0 / r0)
    return m0 / (1.0 - v0)


class HawkingCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def hawking_capacity_check(measures: SurfaceMeasures, capacity: float,
                           tolerance: float = 1e-9) -> HawkingCheck:
    """Check |m_H| >= |1 - alpha| * C with alpha = sqrt(willmore/16 pi)."""
    if capacity <= 0:
        raise ValueError("capacity must be positive")
    alpha = math.sqrt(measures.willmore / SIXTEEN_PI)
    lhs = abs(measures.hawking_mass)
    rhs = abs(1.0 - alpha) * capacity
    return HawkingCheck(lhs, rhs, lhs >= rhs - tolerance)


# ---------------------------------------------------------------------------
# Aggregate report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """Every applicable capacity bound for one mesh, with its inputs."""

    measures: SurfaceMeasures
    lower_volume: float
    lower_hawking: float
    bray_miao: float
    profile_bound: float | None
    szego: float | None
    szego_omitted_reason: str | None
    capacity_bem: float | None
    bem_error_estimate: float | None
    flags: dict


# Discretization slack for the convexity-consistency gate: curvature jumps
# (rounded-box edges) leave O(1) boundary-layer dips in the pointwise
# discrete H that do not refine away, and near-equality surfaces (spheres)
# measure eps^2 = 1 - 4 pi A / M^2 slightly negative.  The raw min_h and
# measured invariants are always reported verbatim.
H_NEGATIVE_SLACK = 0.05      # relative to max vertex curvature
MINKOWSKI_SLACK = 0.02       # allowed eps^2 deficit, clamped to the M/4pi limit


def bound_report(mesh: TriMesh, with_bem: bool = False,
                 tolerance: float = 1e-6) -> BoundReport:
    """Measure a mesh and evaluate all applicable capacity bounds.

    The Szego bound is omitted (with a reason) unless the mesh is
    convexity-consistent: genus zero, no mean-curvature dip beyond the
    discretization slack, and M^2 >= 4 pi area up to the slack (a small
    deficit is the discrete shadow of the sphere equality case and clamps
    to the eps = 0 value M/4 pi, flagged as ``szego_clamped``).  The profile
    bound uses the parallel-surface family built from the measured
    invariants; its validity equally rests on convexity.
    """
    m = measure(mesh)
    lower_volume = (3.0 * m.volume / FOUR_PI) ** (1.0 / 3.0)
    bm = bray_miao_bound(m.area, m.willmore)
    half_m = m.total_mean_curvature / 2.0

    reasons = []
    if m.genus != 0:
        reasons.append(f"genus {m.genus} surface is not convex")
    if m.min_h < -H_NEGATIVE_SLACK * max(m.max_h, 0.0):
        reasons.append("mean curvature is negative beyond discretization slack")
    eps_sq = None
    if half_m <= 0:
        reasons.append("nonpositive total mean curvature")
    else:
        eps_sq = 1.0 - FOUR_PI * m.area / (half_m * half_m)
        if eps_sq < -MINKOWSKI_SLACK:
            reasons.append("M^2 < 4 pi area (fails the Minkowski consistency check)")
    convex_consistent = not reasons

    szego = None
    szego_clamped = False
    if convex_consistent:
        if eps_sq >= 0:
            szego = szego_bound(m.area, half_m)
        else:
            szego = half_m / FOUR_PI
            szego_clamped = True
    profile = None
    if m.total_mean_curvature > 0:
        profile, _ = optimal_profile_bound(
            steiner_profile(m.area, m.total_mean_curvature))

    capacity = None
    bem_err = None
    hawking_holds = None
    if with_bem:
        sol = solve_capacity(mesh, tolerance)
        capacity = sol.capacity
        bem_err = sol.error_estimate
        # near the sphere equality case both sides agree only to
        # discretization error, so the check carries the BEM error bound
        hawking_holds = hawking_capacity_check(m, capacity,
                                               tolerance=bem_err).holds

    flags = {
        "convex_consistent": convex_consistent,
        "h_nonnegative": bool(m.min_h >= 0),
        "szego_clamped": szego_clamped,
        "hawking_check_holds": hawking_holds,
        "bray_miao_gap": None if capacity is None else bm / capacity - 1.0,
        "szego_gap": None if (capacity is None or szego is None)
                     else szego / capacity - 1.0,
        "ordering_ok": None,
    }
    if capacity is not None:
        slack = bem_err if bem_err is not None else 0.0
        upper = min(x for x in (szego, bm) if x is not None)
        flags["ordering_ok"] = bool(
            lower_volume <= capacity + slack and capacity <= upper + slack)

    return BoundReport(
        measures=m,
        lower_volume=lower_volume,
        lower_hawking=m.hawking_mass,
        bray_miao=bm,
        profile_bound=profile,
        szego=szego,
        szego_omitted_reason=None if convex_consistent else "; ".join(reasons),
        capacity_bem=capacity,
        bem_error_estimate=bem_err,
        flags=flags,
    )
