"""Extreme-event statistics and attractor-merging diagnostics on the E4 loop."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .orbits import Orbit


@dataclass(frozen=True)
class EEReport:
    mean: float
    std: float
    threshold: float
    multiplier: float
    n_events: int
    event_indices: np.ndarray
    max_value: float
    n_samples: int

    @property
    def event_probability(self) -> float:
        return self.n_events / self.n_samples


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    probs: np.ndarray
    n_samples: int

    def mass_above(self, x: float) -> float:
        """Probability in bins whose right edge lies above ``x`` (straddling bin included)."""
        return float(self.probs[self.edges[1:] > x].sum())

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


@dataclass(frozen=True)
class CrisisReport:
    frac_positive: float
    n_sign_switches: int
    cluster_gap: float  # NaN when one sign is never visited
    merged: bool


def ee_report(series, multiplier: float = 8.0) -> EEReport:
    """Events are samples strictly above ``mean + multiplier * std`` (population std)."""
    x = np.asarray(series, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least two samples")
    if not multiplier > 0:
        raise ValueError("multiplier must be positive")
    mean = float(x.mean())
    std = float(x.std())
    threshold = mean + multiplier * std
    idx = np.flatnonzero(x > threshold)
    return EEReport(mean, std, threshold, multiplier, len(idx), idx, float(x.max()), len(x))


def probability_histogram(series, n_bins: int = 200) -> Histogram:
    """Uniform bins over ``[min, max]``, probabilities summing to one.

    A constant series gets a single bin ``[v - 0.5, v + 0.5]``.
    """
    x = np.asarray(series, dtype=float)
    if len(x) == 0:
        raise ValueError("empty series")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return Histogram(np.array([lo - 0.5, lo + 0.5]), np.array([1.0]), len(x))
    counts, edges = np.histogram(x, bins=n_bins, range=(lo, hi))
    return Histogram(edges, counts / len(x), len(x))


def sign_statistics(values, switch_min: int = 10) -> CrisisReport:
    """Crisis diagnostics on a real series (normally Im E4)."""
    y = np.asarray(values, dtype=float)
    y = y[y != 0]
    if len(y) == 0:
        return CrisisReport(math.nan, 0, math.nan, False)
    pos = y > 0
    n_pos = int(pos.sum())
    switches = int(np.count_nonzero(pos[1:] != pos[:-1]))
    if n_pos == 0 or n_pos == len(y):
        return CrisisReport(n_pos / len(y), switches, math.nan, False)
    gap = float(y[pos].mean() - y[~pos].mean())
    return CrisisReport(n_pos / len(y), switches, gap, switches >= switch_min)


def crisis_report(orbit: Orbit, switch_min: int = 10) -> CrisisReport:
    if orbit.diverged:
        raise ValueError("crisis diagnostics need a non-diverged orbit")
    return sign_statistics(orbit.e4.imag, switch_min)


def state_plane_dump(orbit: Orbit) -> np.ndarray:
    """``(n_keep, 2)`` array of ``(Re E4, Im E4)`` in iteration order."""
    if orbit.diverged:
        raise ValueError("state-plane dump needs a non-diverged orbit")
    return np.column_stack([orbit.e4.real, orbit.e4.imag])


def is_bimodal(hist: Histogram, min_peak_fraction: float = 0.25) -> bool:
    """Two local maxima separated by a trough below half the smaller peak.

    Only maxima reaching ``min_peak_fraction`` of the tallest bin count, so
    single-bin noise in a unimodal histogram is not mistaken for a mode.
    """
    p = np.asarray(hist.probs)
    if len(p) < 3:
        return False
    padded = np.concatenate([[-1.0], p, [-1.0]])
    is_max = (p >= padded[:-2]) & (p >= padded[2:]) & (p >= min_peak_fraction * p.max())
    peaks = np.flatnonzero(is_max)
    for a_i, a in enumerate(peaks):
        for b in peaks[a_i + 1:]:
            if p[a:b + 1].min() < 0.5 * min(p[a], p[b]):
                return True
    return False
