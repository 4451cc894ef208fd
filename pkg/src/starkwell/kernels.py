"""Propagator kernels, the Moshinsky function, and the closed field-free forms.

Conventions (dimensionless units hbar = m = 1, well strength 1):

* the uniform-field one-step kernel between two spatial points over a time
  step ``dt`` is

      K_f(x, x'; dt) = sqrt(1/(2*pi*i*dt)) * exp( i (x-x')**2 / (2 dt)
                        + i f (x+x') dt / 2 - i f**2 dt**3 / 24 ),

  with the shorthands K_f(x; u) = K_f(x, 0; u) and K_f(u) = K_f(0, 0; u);
* the Moshinsky function is

      M(x; k; t) = (1/2) * exp(i (k x - k**2 t / 2))
                   * erfc( (x - k t) / sqrt(2 i t) );

* all fractional powers of complex quantities take the principal branch
  (sqrt(w) = exp(log(w)/2) with the standard log cut along the negative
  real axis), so sqrt(1/(2*pi*i*dt)) carries phase exp(-i*pi/4) for
  dt > 0.
"""

from __future__ import annotations

import math

import numpy as np

from .specfun import cerfc, repeated_erfc_sequence

__all__ = [
    "k0",
    "kf",
    "kf_point",
    "kf_origin",
    "moshinsky",
    "phi_f",
    "exact_field_free_propagator",
    "field_free_series",
    "gauge_transform",
    "drift_momentum",
    "drift_position",
    "drift_action",
]


def drift_momentum(t, f):
    """Classical momentum f*t gained from the field after time t."""
    return f * t


def drift_position(t, f):
    """Classical displacement f*t**2/2 accumulated from rest."""
    return 0.5 * f * t * t


def drift_action(t, f):
    """Classical action f**2 t**3 / 6 of the accelerated trajectory."""
    return f * f * t**3 / 6.0


def k0(x, xp, dt):
    """Free one-step kernel K_0(x, x'; dt); ``dt`` must be positive."""
    dt = np.asarray(dt, dtype=float)
    if np.any(dt <= 0.0):
        raise ValueError("time step must be positive")
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    pref = np.sqrt(1.0 / (2.0 * math.pi * 1j * dt))
    out = pref * np.exp(1j * (x - xp) ** 2 / (2.0 * dt))
    return complex(out) if out.ndim == 0 else out


def kf(x, xp, dt, f):
    """Uniform-field one-step kernel K_f(x, x'; dt); ``dt`` must be positive."""
    dt = np.asarray(dt, dtype=float)
    if np.any(dt <= 0.0):
        raise ValueError("time step must be positive")
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    pref = np.sqrt(1.0 / (2.0 * math.pi * 1j * dt))
    phase = (
        (x - xp) ** 2 / (2.0 * dt)
        + 0.5 * f * (x + xp) * dt
        - f * f * dt**3 / 24.0
    )
    out = pref * np.exp(1j * phase)
    return complex(out) if out.ndim == 0 else out


def kf_point(x, dt, f):
    """One-point kernel K_f(x; u) = K_f(x, 0; u)."""
    return kf(x, 0.0, dt, f)


def kf_origin(dt, f):
    """On-axis kernel K_f(u) = K_f(0, 0; u)."""
    dt = np.asarray(dt, dtype=float)
    if np.any(dt <= 0.0):
        raise ValueError("time step must be positive")
    out = np.sqrt(1.0 / (2.0 * math.pi * 1j * dt)) * np.exp(
        -1j * f * f * dt**3 / 24.0
    )
    return complex(out) if out.ndim == 0 else out


def moshinsky(x, k, t):
    """Moshinsky function M(x; k; t) for real x, complex k, and t > 0."""
    t = float(t)
    if t <= 0.0:
        raise ValueError("time must be positive")
    x = np.asarray(x, dtype=float)
    k = complex(k)
    root = np.sqrt(2j * t)
    out = 0.5 * np.exp(1j * (k * x - 0.5 * k * k * t)) * cerfc((x - k * t) / root)
    return complex(out) if np.ndim(x) == 0 else out


def phi_f(x, t, f):
    """Freely decaying well state pushed by the field (no rescattering).

    This is the initial bound state exp(-|x|) propagated by the
    field-plus-free kernel alone: the field-free decaying combination
    M(x; -i; t) + M(-x; -i; t) boosted onto the accelerated frame with
    momentum f*t, displacement f*t**2/2, and action phase f**2 t**3/6.
    At t = 0 it reduces to the bound state itself.
    """
    x = np.asarray(x, dtype=float)
    if t == 0.0:
        out = np.exp(-np.abs(x)) + 0.0j
        return complex(out) if out.ndim == 0 else out
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    xc = drift_position(t, f)
    phase = x * drift_momentum(t, f) - drift_action(t, f)
    rel = x - xc
    out = np.exp(1j * phase) * (moshinsky(rel, -1j, t) + moshinsky(-rel, -1j, t))
    return complex(out) if out.ndim == 0 else out


def exact_field_free_propagator(x, xp, t):
    """Closed form of the zero-field well propagator.

    The free kernel plus a single Moshinsky correction encoding all
    rescattering off the well:

        K_0(x, x'; t) + M(|x| + |x'|; i; t).

    The bound state exp(-|x|) is exactly stationary under this kernel up
    to the phase exp(i t / 2).
    """
    return k0(x, xp, t) + moshinsky(np.abs(x) + np.abs(xp), 1j, t)


def field_free_series(x, xp, t, terms: int = 30):
    """Rescattering series of the zero-field well propagator.

    Sums the first ``terms`` orders of the repeated-integral expansion

        K_0 + (1/2) * sum_{n>=0} (-2 z2)**n i^n erfc(z1),

    with z1 = (|x| + |x'|) / sqrt(2 i t) and z2 = -i t / sqrt(2 i t).  The
    sum converges super-geometrically to the Moshinsky correction of
    :func:`exact_field_free_propagator`.
    """
    if terms < 1:
        raise ValueError("need at least one term")
    t = float(t)
    if t <= 0.0:
        raise ValueError("time must be positive")
    x = float(x)
    xp = float(xp)
    root = complex(np.sqrt(2j * t))
    z1 = (abs(x) + abs(xp)) / root
    z2 = -1j * t / root
    seq = repeated_erfc_sequence(terms - 1, z1)
    powers = (-2.0 * z2) ** np.arange(terms)
    return complex(k0(x, xp, t)) + 0.5 * complex(np.sum(powers * seq))


def gauge_transform(values, x, t, f, inverse: bool = False):
    """Multiply amplitudes by the frame factor exp(+- i x f t).

    With ``inverse=False`` attaches the drift-momentum phase
    exp(i x p_c(t)), mapping amplitudes from the accelerated frame back to
    the lab frame; ``inverse=True`` applies the conjugate factor.
    """
    sign = -1.0 if inverse else 1.0
    return np.asarray(values) * np.exp(1j * sign * np.asarray(x) * f * t)
