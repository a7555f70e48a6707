"""Interface quantities: Roe speed, entropy detector and viscosity level.

At an interface point with inside / outside normal-derivative traces
``p_minus`` / ``p_plus``:

* Roe speed ``H~``: divided difference of H across the traces, or the mean
  of the one-sided derivatives when the traces agree.
* ``delta = max(0, H~ - H'(p_minus), H'(p_plus) - H~)`` flags expansions.
* ``S = max(delta, |H~|)``; the penalty uses ``visc = S - |H~|``, which is
  nonzero only where ``|H~| < delta``.

Everything is vectorized over arrays of interface points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EQUAL_TRACE_RTOL = 1e-12


@dataclass(frozen=True)
class RoeData:
    roe_speed: np.ndarray
    delta: np.ndarray
    s_level: np.ndarray

    @property
    def visc(self):
        return self.s_level - np.abs(self.roe_speed)


def equal_traces(p_minus, p_plus):
    tol = EQUAL_TRACE_RTOL * np.maximum(1.0, np.maximum(np.abs(p_minus), np.abs(p_plus)))
    return np.abs(p_plus - p_minus) <= tol


def roe_from_values(p_minus, p_plus, h_minus, h_plus, dh_minus, dh_plus):
    """RoeData from one-sided H values and normal derivatives."""
    p_minus = np.asarray(p_minus, dtype=float)
    p_plus = np.asarray(p_plus, dtype=float)
    jump = p_plus - p_minus
    same = equal_traces(p_minus, p_plus)
    safe = np.where(same, 1.0, jump)
    roe = np.where(same, 0.5 * (dh_plus + dh_minus), (h_plus - h_minus) / safe)
    delta = np.maximum(0.0, np.maximum(roe - dh_minus, dh_plus - roe))
    s_level = np.maximum(delta, np.abs(roe))
    return RoeData(roe, delta, s_level)


def roe_data(ham, p_minus, p_plus, tangential_avg=0.0, x_minus=0.0, x_plus=None):
    """Roe data for a 1D model or a DirectionalHamiltonian.

    For 1D models the coordinates are scalars/arrays and ``x_minus`` /
    ``x_plus`` are evaluated as left / right limits. For directional models
    they are ``(x, y)`` tuples and the tangential average enters H.
    """
    if x_plus is None:
        x_plus = x_minus
    h_m = ham.normal_value(p_minus, tangential_avg, x_minus, -1)
    h_p = ham.normal_value(p_plus, tangential_avg, x_plus, +1)
    dh_m = ham.normal_slope(p_minus, tangential_avg, x_minus, -1)
    dh_p = ham.normal_slope(p_plus, tangential_avg, x_plus, +1)
    return roe_from_values(p_minus, p_plus, h_m, h_p, dh_m, dh_p)


def upwind_weights(roe):
    """(min(H~, 0), max(H~, 0)) for the outflow / inflow interface terms."""
    speed = roe.roe_speed if isinstance(roe, RoeData) else np.asarray(roe)
    return np.minimum(speed, 0.0), np.maximum(speed, 0.0)


def penalty_coeff(roe, C, length_scale):
    """C * length_scale * (S - |H~|)."""
    if C < 0:
        raise ValueError(f"penalty constant must be nonnegative, got {C}")
    return C * length_scale * roe.visc
