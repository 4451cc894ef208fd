"""Quadrature engines for oscillatory, endpoint-singular, and simplex integrals.

Three entry points cover everything the propagator expansion needs:

* :func:`integrate_1d` -- adaptive panel integration built on a nested
  Clenshaw-Curtis 17/33 pair, with an optional phase-budget guard that
  forces subdivision of panels spanning more than one oscillation cycle
  before their (deceptively small) error estimates are trusted.
* :func:`integrate_singular_half` -- integrals with inverse-square-root
  endpoint singularities at both ends, regularized exactly by the
  substitution tau = t*sin(theta)**2.
* :func:`simplex_integrate` -- integrals over the ordered-time simplex
  t >= tau_1 >= ... >= tau_d >= 0 in up to four dimensions, using the
  iterated sine-squared substitution (which also absorbs the
  inverse-square-root kernel singularities along the chain) and tensor
  Gauss-Legendre rules with node doubling for the error estimate.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_legendre

__all__ = [
    "QuadResult",
    "SimplexSpec",
    "integrate_1d",
    "integrate_singular_half",
    "simplex_integrate",
]

#: phase span (radians) above which a panel must be subdivided when a
#: phase budget is supplied, regardless of its error estimate
PHASE_BUDGET = 2.0 * math.pi

_MAX_PANELS = 20_000


@dataclass(frozen=True)
class QuadResult:
    """Outcome of a quadrature: value, error estimate, cost, honesty flag."""

    value: complex
    est_error: float
    evaluations: int
    converged: bool = True


@lru_cache(maxsize=8)
def _clencurt(n: int):
    """Clenshaw-Curtis nodes/weights on [-1, 1] with n intervals (n even)."""
    theta = np.pi * np.arange(n + 1) / n
    x = np.cos(theta)
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    for k in range(1, n // 2):
        v -= 2.0 * np.cos(2.0 * k * theta[1:-1]) / (4.0 * k * k - 1.0)
    v -= np.cos(n * theta[1:-1]) / (n * n - 1.0)
    w[1:-1] = 2.0 * v / n
    w[0] = w[-1] = 1.0 / (n * n - 1.0)
    return x, w


def _panel(func, lo: float, hi: float, vectorized: bool):
    """Nested 17/33-point Clenshaw-Curtis estimate on one panel."""
    x32, w32 = _clencurt(32)
    _, w16 = _clencurt(16)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    xm = mid + half * x32
    if vectorized:
        fx = np.asarray(func(xm), dtype=complex)
    else:
        fx = np.array([func(x) for x in xm], dtype=complex)
    val = half * complex(np.sum(w32 * fx))
    coarse = half * complex(np.sum(w16 * fx[::2]))
    return val, abs(val - coarse)


def integrate_1d(
    func: Callable,
    a: float,
    b: float,
    tol: float = 1e-10,
    *,
    vectorized: bool = False,
    initial_intervals: int = 1,
    depth_cap: int = 30,
    phase_span: Callable[[float, float], float] | None = None,
) -> QuadResult:
    """Adaptive integral of ``func`` over [a, b].

    ``phase_span(lo, hi)``, when given, must bound the phase accumulated by
    the integrand across the panel; panels with span above
    :data:`PHASE_BUDGET` are split before their error estimates are
    believed.  ``initial_intervals`` seeds the subdivision (useful when the
    caller already knows the oscillation scale).  Set ``vectorized`` when
    ``func`` accepts numpy arrays.
    """
    if a == b:
        return QuadResult(0.0j, 0.0, 0, True)
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0

    counter = itertools.count()
    heap: list = []  # (-priority, tiebreak, lo, hi, depth, value, err)
    frozen: list = []  # depth-capped panels: (lo, value, err)
    evals = 0
    total = 0.0j
    err_total = 0.0
    violations = 0

    def push(lo: float, hi: float, depth: int) -> None:
        nonlocal evals, total, err_total, violations
        val, err = _panel(func, lo, hi, vectorized)
        evals += 33
        total += val
        err_total += err
        violated = (
            phase_span is not None
            and depth < depth_cap
            and phase_span(lo, hi) > PHASE_BUDGET
        )
        if violated:
            violations += 1
        priority = math.inf if violated else err
        heapq.heappush(heap, (-priority, next(counter), lo, hi, depth, val, err, violated))

    edges = np.linspace(a, b, max(1, initial_intervals) + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        push(float(lo), float(hi), 0)

    while heap:
        if violations == 0 and err_total <= tol * max(1.0, abs(total)):
            break
        if len(heap) + len(frozen) >= _MAX_PANELS:
            break
        _, _, lo, hi, depth, val, err, violated = heapq.heappop(heap)
        if depth >= depth_cap:
            frozen.append((lo, val, err))
            continue
        total -= val
        err_total -= err
        if violated:
            violations -= 1
        mid = 0.5 * (lo + hi)
        push(lo, mid, depth + 1)
        push(mid, hi, depth + 1)

    pieces = [(lo, val, err) for _, _, lo, _, _, val, err, _ in heap]
    pieces.extend(frozen)
    pieces.sort(key=lambda p: p[0])
    value = complex(sum(p[1] for p in pieces))
    est = float(sum(p[2] for p in pieces))
    ok = violations == 0 and est <= tol * max(1.0, abs(value))
    return QuadResult(sign * value, est, evals, ok)


def integrate_singular_half(
    g: Callable,
    t: float,
    tol: float = 1e-10,
    *,
    vectorized: bool = False,
    initial_intervals: int = 1,
) -> QuadResult:
    """Integral of g(tau) / sqrt((t - tau) * tau) over tau in (0, t).

    The substitution tau = t*sin(theta)**2 removes both endpoint
    singularities exactly, leaving 2 * integral of g(t sin^2 theta) over
    theta in [0, pi/2].
    """
    if t <= 0.0:
        raise ValueError("upper limit must be positive")

    def h(theta):
        s = np.sin(theta)
        return g(t * s * s)

    r = integrate_1d(
        h,
        0.0,
        0.5 * math.pi,
        tol,
        vectorized=vectorized,
        initial_intervals=initial_intervals,
    )
    return QuadResult(2.0 * r.value, 2.0 * r.est_error, r.evaluations, r.converged)


@dataclass(frozen=True)
class SimplexSpec:
    """Integral of ``integrand(tau_1, .., tau_d)`` over the ordered-time
    simplex ``horizon >= tau_1 >= ... >= tau_d >= 0``.

    The integrand must broadcast over numpy arrays.
    """

    dimension: int
    horizon: float
    integrand: Callable

    def __post_init__(self) -> None:
        if not 1 <= self.dimension <= 4:
            raise ValueError("simplex integration supports one to four dimensions")
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")


@lru_cache(maxsize=32)
def _gl_quarter(m: int):
    """Gauss-Legendre nodes/weights mapped to [0, pi/2]."""
    x, w = roots_legendre(m)
    return 0.25 * math.pi * (x + 1.0), 0.25 * math.pi * w


def _simplex_value(spec: SimplexSpec, m: int) -> complex:
    theta, w = _gl_quarter(m)
    d = spec.dimension
    grids = np.meshgrid(*([theta] * d), indexing="ij", sparse=True)
    wgrids = np.meshgrid(*([w] * d), indexing="ij", sparse=True)
    taus = []
    weight = np.asarray(1.0 + 0.0j)
    prev = spec.horizon
    for j in range(d):
        s, c = np.sin(grids[j]), np.cos(grids[j])
        tau = prev * s * s
        weight = weight * wgrids[j] * 2.0 * prev * s * c
        taus.append(tau)
        prev = tau
    vals = spec.integrand(*taus)
    return complex(np.sum(weight * vals))


def simplex_integrate(
    spec: SimplexSpec,
    tol: float = 1e-8,
    orders: tuple[int, ...] = (12, 18, 27, 40),
) -> QuadResult:
    """Node-doubling tensor quadrature over the ordered-time simplex.

    Runs the iterated sine-squared substitution at increasing
    Gauss-Legendre orders until two consecutive values agree to ``tol``.
    """
    evals = 0
    prev_val = None
    err = math.inf
    for m in orders:
        val = _simplex_value(spec, m)
        evals += m**spec.dimension
        if prev_val is not None:
            err = abs(val - prev_val)
            if err <= tol * max(1.0, abs(val)):
                return QuadResult(val, err, evals, True)
        prev_val = val
    return QuadResult(prev_val, err, evals, False)
