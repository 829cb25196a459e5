"""Closed forms and quadrature for the temporal interference correlation.

The received interference at two instants separated by a lag t decomposes,
through the second-order structure of the vehicle stream, into

  covariance(t) = same_vehicle(t) + distant_pairs(t) + close_pairs(t) - mean**2,

where same_vehicle collects the contribution of one vehicle observed twice,
close_pairs the nearest-neighbor separations below two minimum gaps (where
the hardcore structure matters), and distant_pairs everything farther out
(where the stream is well approximated by its squared intensity). Three
evaluation routes are provided per term: exact quadrature against the full
pair correlation, closed forms with the squared-intensity far field
("pcf-approx"), and the small-occupancy expansion ("expansion").
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ParameterError
from .model import (NetworkGeometry, TimeLagWindow, TrafficModel,
                    _pair_correlation_array, mean_interference)
from .specfun import (DEFAULT_QUADRATURE, QuadratureSpec, _GK_WK, _GK_X,
                      hyp2f1, integrate_finite, integrate_semi_infinite)

__all__ = [
    "CovarianceBreakdown",
    "AnalyticCurve",
    "same_vehicle_term",
    "distant_pairs_exact",
    "distant_pairs_expansion",
    "close_pairs_numeric",
    "close_pairs_ahead_approx",
    "close_pairs_behind_approx",
    "close_pairs_expansion",
    "covariance",
    "variance",
    "rho_ppp",
    "rho",
    "curve",
]

COVARIANCE_METHODS = ("exact-quadrature", "pcf-approx", "expansion")
RHO_METHODS = ("ppp", "expansion", "pcf-approx")


@dataclass(frozen=True)
class CovarianceBreakdown:
    """Interference covariance at one lag, split by contribution.

    covariance always equals
    same_vehicle + distant_pairs + close_pairs - mean_sq
    up to floating point roundoff; the addends are retained for audit.
    """

    same_vehicle: float
    distant_pairs: float
    close_pairs: float
    mean_sq: float
    covariance: float
    method: str

    def __post_init__(self) -> None:
        if self.method not in COVARIANCE_METHODS:
            raise ParameterError(f"unknown covariance method {self.method!r}")
        recomputed = self.same_vehicle + self.distant_pairs + self.close_pairs - self.mean_sq
        scale = max(abs(self.covariance), abs(self.same_vehicle), self.mean_sq, 1e-300)
        if not abs(recomputed - self.covariance) <= 1e-9 * scale:
            raise ParameterError(
                f"inconsistent breakdown: sum {recomputed!r} vs covariance {self.covariance!r}"
            )


@dataclass(frozen=True)
class AnalyticCurve:
    """A correlation-coefficient curve on an ascending lag grid."""

    t_grid: np.ndarray
    values: np.ndarray
    method: str
    traffic: TrafficModel | None
    geometry: NetworkGeometry

    def __post_init__(self) -> None:
        t_grid = np.asarray(self.t_grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if t_grid.ndim != 1 or t_grid.shape != values.shape:
            raise ParameterError("t_grid and values must be 1-D arrays of equal length")
        if t_grid.size > 1 and not np.all(np.diff(t_grid) > 0):
            raise ParameterError("t_grid must be strictly ascending")
        if not np.all(np.isfinite(values)):
            raise ParameterError("curve values must be finite")
        if np.any(np.abs(values) > 1.0 + 1e-9):
            raise ParameterError("correlation values must lie within [-1, 1]")
        t_grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "t_grid", t_grid)
        object.__setattr__(self, "values", values)


def _require_lag(t: float, lo: float, hi: float, what: str) -> None:
    if not (math.isfinite(t) and lo <= t <= hi):
        raise DomainError(f"{what} requires lag in [{lo!r}, {hi!r}] s, got {t!r}")


def same_vehicle_term(t: float, traffic: TrafficModel, geom: NetworkGeometry) -> float:
    """Covariance contribution of a single vehicle observed at both instants.

    Valid for lags in [0, t_max]. Equals the Poisson-stream covariance; the
    hardcore structure does not enter a single-vehicle average.
    """
    window = TimeLagWindow.from_params(traffic, geom)
    _require_lag(t, 0.0, window.t_max, "same_vehicle_term")
    eta = geom.pathloss_exponent
    r0 = geom.guard_radius
    shift = t * geom.speed
    return (2.0 * traffic.intensity * r0 ** (1.0 - 2.0 * eta) / (2.0 * eta - 1.0)
            * hyp2f1(2.0 * eta - 1.0, eta, 2.0 * eta, -shift / r0))


def _distant_excess_exact(t: float, traffic: TrafficModel, geom: NetworkGeometry) -> float:
    """distant_pairs_exact minus the squared mean, without forming either."""
    eta = geom.pathloss_exponent
    r0 = geom.guard_radius
    lam = traffic.intensity
    gap2 = 2.0 * traffic.min_gap
    shift = t * geom.speed
    z_far = -(gap2 + shift) / r0
    z_near = (gap2 - shift) / r0
    lead = lam * lam * r0 ** (2.0 - 2.0 * eta)
    group1 = lead / (eta - 1.0) ** 2 * (
        hyp2f1(2.0 * eta - 2.0, eta, 2.0 * eta - 1.0, z_far)
        - hyp2f1(2.0 * eta - 2.0, eta, 2.0 * eta - 1.0, z_near)
    )
    group2 = 2.0 * lead / ((2.0 * eta - 1.0) * (eta - 1.0)) * (
        z_near * hyp2f1(2.0 * eta - 1.0, eta, 2.0 * eta, z_near)
        - z_far * hyp2f1(2.0 * eta - 1.0, eta, 2.0 * eta, z_far)
    )
    return group1 + group2


def distant_pairs_exact(t: float, traffic: TrafficModel, geom: NetworkGeometry) -> float:
    """Pair contribution from separations above two minimum gaps.

    Closed form of the squared mean minus the squared-intensity weight of
    the excluded near band, valid for lags in [t_lo, t_hi]. The stream
    beyond two minimum gaps is replaced by its squared-intensity far field,
    which is what the pcf-approx covariance route uses.
    """
    window = TimeLagWindow.from_params(traffic, geom)
    _require_lag(t, window.t_lo, window.t_hi, "distant_pairs_exact")
    mean = mean_interference(traffic, geom)
    return mean * mean + _distant_excess_exact(t, traffic, geom)


def _distant_excess_expansion(t: float, traffic: TrafficModel, geom: NetworkGeometry) -> float:
    eta = geom.pathloss_exponent
    r0 = geom.guard_radius
    return (-8.0 * traffic.intensity ** 2 * traffic.min_gap
            * r0 ** (1.0 - 2.0 * eta) / (2.0 * eta - 1.0)
            * hyp2f1(2.0 * eta - 1.0, eta, 2.0 * eta, -t * geom.speed / r0))


def distant_pairs_expansion(t: float, traffic: TrafficModel, geom: NetworkGeometry) -> float:
    """First-order (in min_gap / guard_radius) form of distant_pairs_exact."""
    window = TimeLagWindow.from_params(traffic, geom)
    _require_lag(t, window.t_lo, window.t_hi, "distant_pairs_expansion")
    mean = mean_interference(traffic, geom)
    return mean * mean + _distant_excess_expansion(t, traffic, geom)


def _normalized_gain(x: np.ndarray, eta: float) -> np.ndarray:
    """Guard-zone power law in units of the guard radius."""
    ax = np.abs(x)
    out = np.zeros_like(ax)
    outside = ax > 1.0
    np.place(out, outside, ax[outside] ** (-eta))
    return out


def _close_pair_quadrature(t: float, traffic: TrafficModel, geom: NetworkGeometry,
                           spec: QuadratureSpec, bands: str) -> float:
    """Nested quadrature of the neighbor-band pair integrals.

    bands selects the ahead band (separations in (min_gap, 2 min_gap) in
    front of the reference vehicle), the behind band, or both. All lengths
    are scaled by the guard radius so the integrals are O(1).
    """
    lam = traffic.intensity
    c = traffic.min_gap
    if c == 0.0:
        return 0.0
    eta = geom.pathloss_exponent
    r0 = geom.guard_radius
    rate = traffic.gap_rate
    b = c / r0
    shift = t * geom.speed / r0
    w = rate * r0

    def inner(s: float) -> float:
        total = 0.0
        if bands in ("ahead", "both"):
            total += integrate_finite(
                lambda v: _normalized_gain(s + v + shift, eta) * np.exp(-w * (v - b)),
                b, 2.0 * b, spec)
        if bands in ("behind", "both"):
            total += integrate_finite(
                lambda v: _normalized_gain(s + v + shift, eta) * np.exp(-w * (-v - b)),
                -2.0 * b, -b, spec)
        return total

    def outer(s_values: np.ndarray) -> np.ndarray:
        return np.array([s ** (-eta) * inner(float(s)) for s in s_values])

    band_mass = (1.0 - math.exp(-w * b)) / w * (2.0 if bands == "both" else 1.0)
    result = integrate_semi_infinite(outer, 1.0, spec,
                                     tail_power=2.0 * eta,
                                     tail_coef=1.0001 * band_mass)
    return lam * rate * r0 ** (2.0 - 2.0 * eta) * result.value


def close_pairs_numeric(t: float, traffic: TrafficModel, geom: NetworkGeometry,
                        spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Pair contribution from neighbor separations below two minimum gaps.

    Evaluated by nested quadrature of the two neighbor bands against the
    exact first-order band of the pair correlation (only first neighbors
    can sit closer than two minimum gaps), then doubled to cover reference
    vehicles on both sides of the receiver. Valid for lags in [t_lo, t_hi],
    where both bands clear the guard zone at the shifted instant.
    """
    window = TimeLagWindow.from_params(traffic, geom)
    _require_lag(t, window.t_lo, window.t_hi, "close_pairs_numeric")
    return 2.0 * _close_pair_quadrature(t, traffic, geom, spec, "both")


def close_pairs_ahead_approx(t: float, traffic: TrafficModel, geom: NetworkGeometry) -> float:
    """Closed-form large-distance approximation of the ahead-neighbor band.

    One quarter of the close-pairs term comes from the neighbor ahead of a
    reference vehicle to the right of the receiver; this is its second-order
    closed form, accurate to O((rate * guard_radius)**-2) relative.
    """
    window = TimeLagWindow.from_params(traffic, geom)
    _require_lag(t, window.t_lo, window.t_hi, "close_pairs_ahead_approx")
    eta = geom.pathloss_exponent
    r0 = geom.guard_radius
    c = traffic.min_gap
    if c == 0.0:
        return 0.0
    rate = traffic.gap_rate
    decay = math.exp(-c * rate)
    z = -(c + t * geom.speed) / r0
    return traffic.intensity * r0 ** (-2.0 * eta) * (
        (1.0 - decay) * r0 / (2.0 * eta - 1.0)
        * hyp2f1(eta, 2.0 * eta - 1.0, 2.0 * eta, z)
        + (c * rate * decay - 1.0 + decay) / (2.0 * rate)
        * hyp2f1(2.0 * eta, eta + 1.0, 2.0 * eta + 1.0, z)
    )


def close_pairs_behind_approx(t: float, traffic: TrafficModel, geom: NetworkGeometry) -> float:
    """Mirror of close_pairs_ahead_approx for the neighbor behind."""
    window = TimeLagWindow.from_params(traffic, geom)
    _require_lag(t, window.t_lo, window.t_hi, "close_pairs_behind_approx")
    eta = geom.pathloss_exponent
    r0 = geom.guard_radius
    c = traffic.min_gap
    if c == 0.0:
        return 0.0
    rate = traffic.gap_rate
    decay = math.exp(-c * rate)
    z = (c - t * geom.speed) / r0
    return traffic.intensity * r0 ** (-2.0 * eta) * (
        (1.0 - decay) * r0 / (2.0 * eta - 1.0)
        * hyp2f1(eta, 2.0 * eta - 1.0, 2.0 * eta, z)
        + (1.0 - c * rate * decay - decay) / (2.0 * rate)
        * hyp2f1(2.0 * eta, eta + 1.0, 2.0 * eta + 1.0, z)
    )


def close_pairs_expansion(t: float, traffic: TrafficModel, geom: NetworkGeometry) -> float:
    """Second-order (in occupancy) closed form of the close-pairs term.

    Equals occupancy * (2 + occupancy) times the same-vehicle term.
    """
    window = TimeLagWindow.from_params(traffic, geom)
    _require_lag(t, window.t_lo, window.t_hi, "close_pairs_expansion")
    eta = geom.pathloss_exponent
    r0 = geom.guard_radius
    lam = traffic.intensity
    c = traffic.min_gap
    return (2.0 * lam * lam * c * (2.0 + lam * c) * r0 ** (1.0 - 2.0 * eta)
            / (2.0 * eta - 1.0)
            * hyp2f1(2.0 * eta - 1.0, eta, 2.0 * eta, -t * geom.speed / r0))


def _deviation_reach(traffic: TrafficModel, tol: float = 1e-10, cap: int = 64) -> int:
    """Number of minimum-gap bands until the pair correlation sits on its asymptote.

    Returns the smallest k with two consecutive bands whose deviation from
    the squared intensity stays below tol relative, capped at cap bands.
    """
    lam2 = traffic.intensity ** 2
    c = traffic.min_gap
    quiet = 0
    for k in range(1, cap + 1):
        probes = c * (k + np.linspace(0.02, 0.98, 9))
        dev = np.max(np.abs(_pair_correlation_array(probes, traffic) - lam2))
        if dev <= tol * lam2:
            quiet += 1
            if quiet == 2:
                return k - 1
        else:
            quiet = 0
    return cap


_UNIT_NODES = 0.5 + 0.5 * _GK_X
_UNIT_WEIGHTS = 0.5 * _GK_WK


def _segment_nodes(v0: np.ndarray, v1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Kronrod nodes and weights for a batch of segments (one row each)."""
    v0 = np.asarray(v0, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    width = (v1 - v0)[:, None]
    return v0[:, None] + width * _UNIT_NODES[None, :], width * _UNIT_WEIGHTS[None, :]


def _exact_pair_integral(t: float, traffic: TrafficModel, geom: NetworkGeometry,
                         spec: QuadratureSpec, first_band_only: bool,
                         use_full_density: bool) -> float:
    """Two-sided pair integral against the exact pair correlation.

    Integrates gain(x) * (gain(y + shift) + gain(y - shift)) over reference
    positions x beyond the guard radius and neighbor offsets y - x within
    the deviation reach of the pair correlation, weighting either by the
    full pair density (use_full_density) or by its deviation from the
    squared intensity. The two shifted gains fold the x < 0 half-line onto
    x > 0. Lengths are scaled by the guard radius. The offset integral uses
    a fixed Kronrod rule per smooth piece (pieces are cut at band edges and
    at the guard-zone crossings of either shifted gain), which resolves
    these analytic pieces to roundoff; the reference-position integral is
    adaptive.
    """
    lam2 = traffic.intensity ** 2
    c = traffic.min_gap
    if c == 0.0:
        return 0.0
    eta = geom.pathloss_exponent
    r0 = geom.guard_radius
    b = c / r0
    shift = t * geom.speed / r0
    if first_band_only:
        start_band, reach = 1, 2
    else:
        start_band, reach = 0, _deviation_reach(traffic)

    def weight_of(v_abs: np.ndarray) -> np.ndarray:
        density = _pair_correlation_array(r0 * v_abs, traffic)
        return density if use_full_density else density - lam2

    bands = np.arange(start_band, reach, dtype=float)
    pos_lo, pos_hi = bands * b, (bands + 1.0) * b
    base_lo = np.concatenate([-pos_hi[::-1], pos_lo])
    base_hi = np.concatenate([-pos_lo[::-1], pos_hi])
    base_nodes, base_weights = _segment_nodes(base_lo, base_hi)
    base_weight_values = weight_of(np.abs(base_nodes)) * base_weights

    # Beyond this reference position neither shifted gain can cross the
    # guard boundary inside the offset range, so no segment needs cutting
    # and the cached per-segment weights apply unmasked.
    split_end = 1.0 + shift + reach * b + 1e-9

    def integrand_far(s_values: np.ndarray) -> np.ndarray:
        args_plus = s_values[:, None, None] + base_nodes[None, :, :] + shift
        args_minus = s_values[:, None, None] + base_nodes[None, :, :] - shift
        gains = args_plus ** (-eta) + np.abs(args_minus) ** (-eta)
        inner = np.einsum("npk,pk->n", gains, base_weight_values)
        return s_values ** (-eta) * inner

    def integrand_near(s_values: np.ndarray) -> np.ndarray:
        out = np.empty_like(s_values)
        for i, s in enumerate(np.asarray(s_values, dtype=float)):
            cuts = (1.0 - s - shift, -1.0 - s - shift,
                    1.0 - s + shift, -1.0 - s + shift)
            gains = (_normalized_gain(s + base_nodes + shift, eta)
                     + _normalized_gain(s + base_nodes - shift, eta))
            total = 0.0
            for j, (lo_v, hi_v) in enumerate(zip(base_lo, base_hi)):
                inside = sorted(x for x in cuts if lo_v < x < hi_v)
                if not inside:
                    total += float(np.dot(gains[j], base_weight_values[j]))
                    continue
                points = [lo_v] + inside + [hi_v]
                nodes, weights = _segment_nodes(np.array(points[:-1]),
                                                np.array(points[1:]))
                piece_gains = (_normalized_gain(s + nodes + shift, eta)
                               + _normalized_gain(s + nodes - shift, eta))
                total += float(np.sum(piece_gains * weight_of(np.abs(nodes)) * weights))
            out[i] = s ** (-eta) * total
        return out

    near = integrate_finite(integrand_near, 1.0, split_end, spec)
    far = integrate_semi_infinite(integrand_far, split_end, spec,
                                  tail_power=2.0 * eta).value
    return r0 ** (2.0 - 2.0 * eta) * (near + far)


def variance(traffic: TrafficModel, geom: NetworkGeometry, method: str = "approx") -> float:
    """Interference variance (zero-lag).

    "approx" includes the hardcore thinning factor (1 - occupancy);
    "ppp" is the Poisson-stream variance at the same intensity.
    """
    eta = geom.pathloss_exponent
    base = 4.0 * traffic.intensity * geom.guard_radius ** (1.0 - 2.0 * eta) / (2.0 * eta - 1.0)
    if method == "approx":
        return base * (1.0 - traffic.intensity * traffic.min_gap)
    if method == "ppp":
        return base
    raise ParameterError(f"unknown variance method {method!r}; expected 'approx' or 'ppp'")


def covariance(t: float, traffic: TrafficModel, geom: NetworkGeometry,
               method: str = "pcf-approx",
               spec: QuadratureSpec = DEFAULT_QUADRATURE) -> CovarianceBreakdown:
    """Interference covariance at lag t, with its contribution breakdown.

    Methods: "exact-quadrature" integrates the pair terms against the exact
    pair correlation (valid on [0, t_max]); "pcf-approx" uses the closed
    distant-pair form plus nested quadrature of the neighbor bands;
    "expansion" uses the second-order occupancy expansion of both (each
    valid on [t_lo, t_hi]). The squared mean is cancelled symbolically, so
    the result does not suffer the near-equal-difference loss.
    """
    window = TimeLagWindow.from_params(traffic, geom)
    mean = mean_interference(traffic, geom)
    mean_sq = mean * mean
    if method == "exact-quadrature":
        _require_lag(t, 0.0, window.t_max, "covariance (exact-quadrature)")
        base = same_vehicle_term(t, traffic, geom)
        deviation = _exact_pair_integral(t, traffic, geom, spec,
                                         first_band_only=False, use_full_density=False)
        close = _exact_pair_integral(t, traffic, geom, spec,
                                     first_band_only=True, use_full_density=True)
        cov = base + deviation
        return CovarianceBreakdown(
            same_vehicle=base,
            distant_pairs=cov - base - close + mean_sq,
            close_pairs=close,
            mean_sq=mean_sq,
            covariance=cov,
            method=method,
        )
    if method == "pcf-approx":
        _require_lag(t, window.t_lo, window.t_hi, "covariance (pcf-approx)")
        base = same_vehicle_term(t, traffic, geom)
        excess = _distant_excess_exact(t, traffic, geom)
        close = close_pairs_numeric(t, traffic, geom, spec)
    elif method == "expansion":
        _require_lag(t, window.t_lo, window.t_hi, "covariance (expansion)")
        base = same_vehicle_term(t, traffic, geom)
        excess = _distant_excess_expansion(t, traffic, geom)
        close = close_pairs_expansion(t, traffic, geom)
    else:
        raise ParameterError(
            f"unknown covariance method {method!r}; expected one of {COVARIANCE_METHODS}"
        )
    return CovarianceBreakdown(
        same_vehicle=base,
        distant_pairs=mean_sq + excess,
        close_pairs=close,
        mean_sq=mean_sq,
        covariance=base + excess + close,
        method=method,
    )


def rho_ppp(t: float, geom: NetworkGeometry) -> float:
    """Correlation coefficient of a Poisson stream: intensity-free.

    Equals 0.5 at zero lag (the independent-fading floor) and decays with
    the lag; valid on [0, t_max].
    """
    t_max = 2.0 * geom.guard_radius / geom.speed
    _require_lag(t, 0.0, t_max, "rho_ppp")
    eta = geom.pathloss_exponent
    return 0.5 * hyp2f1(2.0 * eta - 1.0, eta, 2.0 * eta,
                        -t * geom.speed / geom.guard_radius)


def rho(t: float, traffic: TrafficModel, geom: NetworkGeometry,
        method: str = "pcf-approx",
        spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Temporal correlation coefficient of the interference at lag t.

    "ppp" ignores the hardcore structure entirely; "expansion" scales the
    Poisson coefficient by (1 - occupancy); "pcf-approx" divides the
    pcf-approx covariance by the thinned variance. The latter two are valid
    on [t_lo, t_hi].
    """
    if method == "ppp":
        return rho_ppp(t, geom)
    if method == "expansion":
        window = TimeLagWindow.from_params(traffic, geom)
        _require_lag(t, window.t_lo, window.t_hi, "rho (expansion)")
        return (1.0 - traffic.intensity * traffic.min_gap) * rho_ppp(t, geom)
    if method == "pcf-approx":
        breakdown = covariance(t, traffic, geom, "pcf-approx", spec)
        return breakdown.covariance / variance(traffic, geom, "approx")
    raise ParameterError(f"unknown rho method {method!r}; expected one of {RHO_METHODS}")


def curve(t_grid: Sequence[float], traffic: TrafficModel, geom: NetworkGeometry,
          method: str = "pcf-approx",
          spec: QuadratureSpec = DEFAULT_QUADRATURE) -> AnalyticCurve:
    """Correlation coefficient on an ascending lag grid.

    The first grid point outside the method's lag domain aborts the whole
    curve with a DomainError naming its index.
    """
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1:
        raise ParameterError("t_grid must be a 1-D sequence")
    values = np.empty_like(grid)
    for i, t in enumerate(grid):
        try:
            values[i] = rho(float(t), traffic, geom, method, spec)
        except DomainError as exc:
            raise DomainError(f"t_grid[{i}] = {t!r}: {exc}") from exc
    return AnalyticCurve(t_grid=grid, values=values, method=method,
                         traffic=traffic, geometry=geom)
