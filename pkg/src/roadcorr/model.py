"""Domain types for a 1-D stream of vehicles with a minimum spacing.

Vehicle positions form a renewal process whose gaps are a hard minimum
spacing plus an exponential overshoot. The receiver sits at the origin and
ignores transmitters closer than a guard radius; beyond it, power decays as
a pure power law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "TrafficModel",
    "NetworkGeometry",
    "TimeLagWindow",
    "pathloss",
    "pair_correlation",
    "normalized_pair_correlation",
    "mean_interference",
]


@dataclass(frozen=True)
class TrafficModel:
    """Stationary vehicle stream on the line.

    intensity is the mean number of vehicles per meter, min_gap the hard
    minimum distance between successive vehicles, and gap_rate the rate of
    the exponential part of each gap (gap = min_gap + Exp(gap_rate)). The
    three are linked by intensity = gap_rate / (1 + gap_rate * min_gap);
    construct via from_intensity or from_gap_rate to keep them consistent.
    """

    intensity: float
    min_gap: float
    gap_rate: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.intensity) and self.intensity > 0):
            raise ParameterError(f"intensity must be positive, got {self.intensity!r}")
        if not (math.isfinite(self.min_gap) and self.min_gap >= 0):
            raise ParameterError(f"min_gap must be nonnegative, got {self.min_gap!r}")
        if self.intensity * self.min_gap >= 1.0:
            raise ParameterError(
                "intensity * min_gap must stay below 1 (jammed road), got "
                f"{self.intensity * self.min_gap!r}"
            )
        if not (math.isfinite(self.gap_rate) and self.gap_rate > 0):
            raise ParameterError(f"gap_rate must be positive, got {self.gap_rate!r}")
        expected = self.intensity / (1.0 - self.intensity * self.min_gap)
        if abs(self.gap_rate - expected) > 1e-12 * expected:
            raise ParameterError(
                f"inconsistent rates: gap_rate {self.gap_rate!r} does not match "
                f"intensity {self.intensity!r} with min_gap {self.min_gap!r}"
            )

    @classmethod
    def from_intensity(cls, intensity: float, min_gap: float) -> "TrafficModel":
        """Build from vehicles-per-meter; derives the exponential gap rate."""
        if not (math.isfinite(intensity) and intensity > 0):
            raise ParameterError(f"intensity must be positive, got {intensity!r}")
        if not (math.isfinite(min_gap) and min_gap >= 0):
            raise ParameterError(f"min_gap must be nonnegative, got {min_gap!r}")
        if intensity * min_gap >= 1.0:
            raise ParameterError(
                f"intensity * min_gap must stay below 1, got {intensity * min_gap!r}"
            )
        return cls(intensity=intensity, min_gap=min_gap,
                   gap_rate=intensity / (1.0 - intensity * min_gap))

    @classmethod
    def from_gap_rate(cls, gap_rate: float, min_gap: float) -> "TrafficModel":
        """Build from the exponential gap rate; derives the intensity."""
        if not (math.isfinite(gap_rate) and gap_rate > 0):
            raise ParameterError(f"gap_rate must be positive, got {gap_rate!r}")
        if not (math.isfinite(min_gap) and min_gap >= 0):
            raise ParameterError(f"min_gap must be nonnegative, got {min_gap!r}")
        return cls(intensity=gap_rate / (1.0 + gap_rate * min_gap), min_gap=min_gap,
                   gap_rate=gap_rate)

    @property
    def occupancy(self) -> float:
        """Fraction of road length covered by minimum gaps (intensity * min_gap)."""
        return self.intensity * self.min_gap


@dataclass(frozen=True)
class NetworkGeometry:
    """Receiver geometry and propagation law.

    guard_radius is the distance below which a transmitter does not
    interfere, pathloss_exponent the power-law decay rate (> 2 so the
    interference variance exists), and speed the common vehicle speed.
    """

    guard_radius: float
    pathloss_exponent: float
    speed: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.guard_radius) and self.guard_radius > 0):
            raise ParameterError(f"guard_radius must be positive, got {self.guard_radius!r}")
        if not (math.isfinite(self.pathloss_exponent) and self.pathloss_exponent > 2):
            raise ParameterError(
                f"pathloss_exponent must exceed 2, got {self.pathloss_exponent!r}"
            )
        if not (math.isfinite(self.speed) and self.speed > 0):
            raise ParameterError(f"speed must be positive, got {self.speed!r}")


@dataclass(frozen=True)
class TimeLagWindow:
    """Time-lag regime boundaries for the correlation formulas.

    t_lo is the lag beyond which the nearest-neighbor bands have fully
    cleared their zero-lag overlap (2 * min_gap / speed), t_hi the lag at
    which a neighbor band first reaches the far guard boundary
    (2 * (guard_radius - min_gap) / speed), and t_max the lag at which a
    vehicle can cross the whole guard zone (2 * guard_radius / speed).
    The closed-form pair approximations hold on [t_lo, t_hi].
    """

    t_lo: float
    t_hi: float
    t_max: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.t_lo <= self.t_hi <= self.t_max) or not math.isfinite(self.t_max):
            raise DomainError(
                f"window must satisfy 0 <= t_lo <= t_hi <= t_max, got "
                f"({self.t_lo!r}, {self.t_hi!r}, {self.t_max!r})"
            )

    @classmethod
    def from_params(cls, traffic: TrafficModel, geom: NetworkGeometry) -> "TimeLagWindow":
        if traffic.min_gap > geom.guard_radius / 2.0:
            raise DomainError(
                f"min_gap {traffic.min_gap!r} exceeds half the guard radius "
                f"{geom.guard_radius!r}; the lag window would be empty"
            )
        return cls(
            t_lo=2.0 * traffic.min_gap / geom.speed,
            t_hi=2.0 * (geom.guard_radius - traffic.min_gap) / geom.speed,
            t_max=2.0 * geom.guard_radius / geom.speed,
        )

    @property
    def spacing_ratio(self) -> float:
        """Minimum spacing over guard radius (equals t_lo / t_max)."""
        return self.t_lo / self.t_max


def pathloss(r, geom: NetworkGeometry):
    """Power-law gain |r| ** -exponent outside the guard zone, 0 inside.

    The boundary |r| == guard_radius counts as inside (gain 0). Accepts a
    scalar or a numpy array; returns the matching shape.
    """
    arr = np.asarray(r, dtype=float)
    dist = np.abs(arr)
    out = np.zeros_like(dist)
    outside = dist > geom.guard_radius
    np.place(out, outside, dist[outside] ** (-geom.pathloss_exponent))
    if np.isscalar(r) or arr.ndim == 0:
        return float(out)
    return out


def _pair_correlation_array(d: np.ndarray, traffic: TrafficModel,
                            asymptote_cutoff: float = 64.0) -> np.ndarray:
    """Vectorized core of pair_correlation; d must be nonnegative."""
    d = np.asarray(d, dtype=float)
    lam = traffic.intensity
    c = traffic.min_gap
    out = np.full(d.shape, lam * lam)
    if c == 0.0:
        return out
    out[d < c] = 0.0
    mid = (d >= c) & (d <= asymptote_cutoff * c)
    if not np.any(mid):
        return out
    dm = d[mid]
    rate = traffic.gap_rate
    k_max = int(math.floor(float(np.max(dm)) / c))
    total = rate * np.exp(-rate * (dm - c))
    for j in range(2, k_max + 1):
        rem = dm - j * c
        sel = rem > 0.0
        if not np.any(sel):
            continue
        log_term = (j * math.log(rate) + (j - 1.0) * np.log(rem[sel])
                    - rate * rem[sel] - math.lgamma(j))
        total[sel] += np.exp(log_term)
    out[mid] = lam * total
    return out


def pair_correlation(d: float, traffic: TrafficModel, *, asymptote_cutoff: float = 64.0) -> float:
    """Second-order product density of the vehicle stream at separation d.

    Zero below the minimum spacing; on (k, k+1] minimum gaps it sums the k
    shifted Erlang renewal densities (higher orders evaluated in the log
    domain so they cannot overflow), times the intensity. Beyond
    asymptote_cutoff minimum gaps the squared-intensity asymptote is
    returned directly. With min_gap == 0 the stream is Poisson and the
    density is flat.
    """
    if not (math.isfinite(d) and d >= 0):
        raise ParameterError(f"separation must be nonnegative, got {d!r}")
    return float(_pair_correlation_array(np.array([d]), traffic, asymptote_cutoff)[0])


def normalized_pair_correlation(d_over_c: float, traffic: TrafficModel) -> float:
    """Pair correlation at d_over_c minimum gaps, scaled by intensity * gap_rate.

    The scaling makes the value at the minimum spacing equal 1 and the
    far-field asymptote equal 1 - intensity * min_gap. Identically 1 for a
    Poisson stream (min_gap == 0).
    """
    if not (math.isfinite(d_over_c) and d_over_c >= 0):
        raise ParameterError(f"d_over_c must be nonnegative, got {d_over_c!r}")
    if traffic.min_gap == 0.0:
        return 1.0
    d = d_over_c * traffic.min_gap
    return pair_correlation(d, traffic) / (traffic.intensity * traffic.gap_rate)


def mean_interference(traffic: TrafficModel, geom: NetworkGeometry) -> float:
    """Mean received interference power (unit transmit power, unit-mean fading).

    Depends on the stream only through its intensity:
    2 * intensity * guard_radius ** (1 - exponent) / (exponent - 1).
    """
    eta = geom.pathloss_exponent
    return 2.0 * traffic.intensity * geom.guard_radius ** (1.0 - eta) / (eta - 1.0)
