"""Envelope extraction and exponential-rate fitting for oscillatory decays."""

from __future__ import annotations

import numpy as np

__all__ = ["boxcar_average", "demodulate", "log_linear_rate"]


def boxcar_average(t: np.ndarray, y: np.ndarray, period: float):
    """Moving average over one oscillation period on a uniform grid.

    Returns (t_centers, averaged); the averaged signal is shorter by one
    window.  Kills a cos(2 Omega t) ripple to second order in the window.
    """
    t = np.asarray(t, dtype=float)
    dt = t[1] - t[0]
    k = max(1, int(round(period / dt)))
    if k > y.size:
        raise ValueError("averaging window longer than the signal")
    kernel = np.full(k, 1.0 / k)
    avg = np.convolve(y, kernel, mode="valid")
    centers = t[: avg.size] + 0.5 * (k - 1) * dt
    return centers, avg


def demodulate(t: np.ndarray, signal: np.ndarray, carrier: float):
    """Envelope of a signal oscillating at ``carrier``.

    Shifts the carrier to DC, low-passes with a one-period boxcar and
    returns (t_centers, |envelope|).  The counter-rotating residue is
    suppressed by both its own smallness and the filter.
    """
    z = np.asarray(signal) * np.exp(1j * carrier * np.asarray(t, dtype=float))
    period = 2.0 * np.pi / carrier
    centers, avg = boxcar_average(t, z, period)
    return centers, np.abs(avg)


def log_linear_rate(t: np.ndarray, y: np.ndarray, window: tuple[float, float] | None = None) -> float:
    """Exponential decay rate by least squares on log(y).

    ``window`` restricts the fit to t in [t0, t1].  y must be positive
    on the fitted range.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is not None:
        mask = (t >= window[0]) & (t <= window[1])
        t, y = t[mask], y[mask]
    if t.size < 3:
        raise ValueError("not enough points in the fit window")
    if np.any(y <= 0):
        raise ValueError("signal must be positive for a log fit")
    slope, _ = np.polyfit(t, np.log(y), 1)
    return float(-slope)
