"""Time-ordered rescattering integrals and the memory kernel of the well.

The amplitude for returning to the well after n - 1 intermediate contacts
during a time ``t`` is the ordered kernel product

    I_n(t) = int_{t >= tau_1 >= .. >= tau_{n-1} >= 0}
             K_f(t - tau_1) K_f(tau_1 - tau_2) .. K_f(tau_{n-1}),

with I_1 = K_f(t).  The memory kernel built from them,

    Lambda(tau) = delta(tau) + i K_f(tau) + sum_{n>=2} i**n I_n(tau),

drives every observable in :mod:`starkwell.dynamics`.  This module supplies

* exact closed/series forms: :func:`i2` (Bessel form),
  :func:`i2_exact_series`, :func:`i3_exact`, :func:`i3_partial_wave`;
* the all-orders factorized approximant :func:`in_approx` (exact in the
  zero-field limit, leading order in the accumulated field phase);
* a quadrature route :func:`in_recursive_oracle` that builds I_n for
  n <= 6 from the half-step recursions, independent of every series above;
* the assembled kernel on a grid, :func:`lambda_a`, and the on-axis
  propagator value :func:`k00`;
* :func:`lambda_exact`, which iterates the one-step convolution
  I_n = K_f * I_{n-1} on a sqrt-time table and sums all orders without
  the leading-partial-wave truncation (the accuracy reference that
  :mod:`starkwell.dynamics` builds on).

Phase conventions: all fractional powers take principal branches; the
zero-field limit I_n(t, 0) = t**(n/2-1) / ((2i)**(n/2) Gamma(n/2)) pins
every prefactor below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import kf_origin
from .quad import QuadResult, integrate_1d
from .specfun import (
    MultiFParams,
    PfqParams,
    SeriesEval,
    bessel_j,
    multi_f,
    pfq,
)

__all__ = [
    "LambdaProfile",
    "PRACTICAL_PHASE_BOUND",
    "i2",
    "i2_exact_series",
    "i3_exact",
    "i3_partial_wave",
    "in_approx",
    "in_recursive_oracle",
    "lambda_a",
    "lambda_exact",
    "regular_limit",
    "k00",
]

#: largest accumulated field phase f**2 t**3 / 24 for which the exact
#: triple hypergeometric route keeps enough significant digits in doubles
PRACTICAL_PHASE_BOUND = 50.0

#: hard ceiling on the rescattering order summed by :func:`lambda_a`
_MAX_ORDER = 240


def i2(t, f):
    """One-contact return integral I_2, in closed Bessel form.

    I_2(t) = (1/2i) exp(-5i f**2 t**3 / 192) J_0(f**2 t**3 / 64);
    independent of t when f = 0.  Accepts array ``t``.
    """
    b = f * f * np.asarray(t, dtype=float) ** 3
    out = (1.0 / 2.0j) * np.exp(-5j * b / 192.0) * bessel_j(0, b / 64.0)
    return complex(out) if out.ndim == 0 else out


def i2_exact_series(t: float, f: float, tol: float = 1e-12) -> SeriesEval:
    """I_2 as the double hypergeometric sum (series route, for validation).

    Expanding both cubic field phases and using the Legendre triplication
    of the resulting beta moments gives a two-variable sum with shared
    lower weights (1/3, 2/3, 1) in the total degree and upper family
    (1/6, 1/2, 5/6) with argument f**2 t**3 / (24 i) on each side.
    """
    z = f * f * t**3 / 24.0j
    fam = (1.0 / 6.0, 0.5, 5.0 / 6.0)
    params = MultiFParams(
        shared_upper=(),
        shared_lower=(1.0 / 3.0, 2.0 / 3.0, 1.0),
        upper=(fam, fam),
        lower=((), ()),
        arguments=(z, z),
    )
    r = multi_f(params, tol=tol)
    pref = 1.0 / 2.0j
    return SeriesEval(pref * r.value, r.terms_used, abs(pref) * r.est_error, r.converged)


def i3_exact(t: float, f: float, tol: float = 1e-12) -> SeriesEval:
    """Two-contact return integral I_3 as the exact triple hypergeometric sum.

    Valid while the accumulated phase f**2 t**3 / 24 stays below
    :data:`PRACTICAL_PHASE_BOUND`; beyond that the shell sums cancel past
    double precision and the call raises instead of returning noise.
    """
    phase = f * f * t**3 / 24.0
    if phase > PRACTICAL_PHASE_BOUND:
        raise ValueError(
            f"accumulated field phase {phase:.3g} exceeds the practical "
            f"bound {PRACTICAL_PHASE_BOUND} for the exact series"
        )
    z = -1j * phase
    fam = (1.0 / 6.0, 0.5, 5.0 / 6.0)
    params = MultiFParams(
        shared_upper=(),
        shared_lower=(0.5, 5.0 / 6.0, 7.0 / 6.0),
        upper=(fam, fam, fam),
        lower=((), (), ()),
        arguments=(z, z, z),
    )
    r = multi_f(params, tol=tol)
    pref = math.sqrt(t / (2.0 * math.pi)) * np.exp(-0.75j * math.pi)
    return SeriesEval(pref * r.value, r.terms_used, abs(pref) * r.est_error, r.converged)


#: upper parameters of the six-term partial-wave series
_PW_UPPER = (1.0 / 3.0, 0.5, 0.5, 2.0 / 3.0, 5.0 / 6.0, 7.0 / 6.0)


def _pw_lower(l: int) -> tuple[float, ...]:
    s = 2.0 * l / 3.0
    return (0.5 - s, 5.0 / 6.0 - s, 7.0 / 6.0 - s, 0.5 + s, 5.0 / 6.0 + s, 7.0 / 6.0 + s)


def i3_partial_wave(
    t: float, f: float, tol: float = 1e-12, l_max: int | None = None
) -> SeriesEval:
    """I_3 as a Bessel partial-wave sum (independent route for validation).

    Separating the angular harmonic content of the three-fold cubic phase
    gives

        I_3 = sqrt(t/2 pi) e^{-3 i pi/4} e^{-5 i f^2 t^3/192} *
              [ J_0(b) F_0 + sum_{l>=1} 2 i^{-l} J_l(b) F_l / (1 - 16 l**2) ],

    with b = f**2 t**3 / 64, F_0 the 2F2 of upper (1/3, 2/3) and lower
    (5/6, 7/6), and F_l the 6F6 with uppers (1/3, 1/2, 1/2, 2/3, 5/6, 7/6)
    and lowers (1/2, 5/6, 7/6) shifted by -+ 2l/3, all at argument
    i f**2 t**3 / 32.
    """
    b = f * f * t**3 / 64.0
    z6 = 1j * f * f * t**3 / 32.0
    if l_max is None:
        l_max = int(b) + 60

    f0 = pfq(PfqParams((1.0 / 3.0, 2.0 / 3.0), (5.0 / 6.0, 7.0 / 6.0), z6), tol=tol)
    total = bessel_j(0, b) * f0.value
    est = abs(bessel_j(0, b)) * f0.est_error
    ok = f0.converged
    terms = f0.terms_used
    small_run = 0
    for l in range(1, l_max + 1):
        jl = bessel_j(l, b)
        fl = pfq(PfqParams(_PW_UPPER, _pw_lower(l), z6), tol=tol)
        coef = 2.0 * (-1j) ** l * jl / (1.0 - 16.0 * l * l)
        term = coef * fl.value
        total += term
        est += abs(coef) * fl.est_error
        ok = ok and fl.converged
        terms += fl.terms_used
        if abs(term) <= tol * max(1.0, abs(total)) and l >= b:
            small_run += 1
            if small_run == 3:
                break
        else:
            small_run = 0
    else:
        ok = False
    pref = math.sqrt(t / (2.0 * math.pi)) * complex(np.exp(-0.75j * math.pi)) * complex(
        np.exp(-5j * f * f * t**3 / 192.0)
    )
    return SeriesEval(pref * total, terms, abs(pref) * est, ok)


def in_approx(n: int, t: float, f: float, tol: float = 1e-12) -> SeriesEval:
    """Factorized approximant to I_n for n >= 3.

    Exact in the zero-field limit, where it reduces to
    t**(n/2-1) / ((2i)**(n/2) Gamma(n/2)); for f != 0 it resums the field
    phase to leading order in the contact hierarchy:

        I_n ~ I_2(t, f) * (t/2i)**(n/2-1) / Gamma(n/2) *
              4F4( 1/2, (n-1)/6, (n+1)/6, (n+3)/6 ;
                   1,   n/6,     (n+2)/6, (n+4)/6 ; i f**2 t**3 / 32 ).

    Equal upper/lower parameters (n = 5 gives the pair (n+1)/6 = 1) cancel
    exactly in the term recursion, so no special casing is needed.
    """
    if n < 3:
        raise ValueError("the factorized approximant starts at n = 3")
    upper = (0.5, (n - 1) / 6.0, (n + 1) / 6.0, (n + 3) / 6.0)
    lower = (1.0, n / 6.0, (n + 2) / 6.0, (n + 4) / 6.0)
    r = pfq(PfqParams(upper, lower, 1j * f * f * t**3 / 32.0), tol=tol)
    pref = i2(t, f) * (t / 2.0j) ** (0.5 * n - 1.0) / math.gamma(0.5 * n)
    return SeriesEval(pref * r.value, r.terms_used, abs(pref) * r.est_error, r.converged)


# ---------------------------------------------------------------------------
# quadrature route: half-step recursions
# ---------------------------------------------------------------------------
#
# Splitting the ordered product at its outermost (odd case) or two
# outermost (even case) time arguments gives
#
#   I_{2m+1}(t) = sqrt(2t/(pi i)) int_0^{pi/2} dphi sin(phi)
#                 exp(-i f^2 t^3 cos^6(phi)/24) I_{2m}(t sin^2 phi),
#   I_{2m+2}(t) = (t/2i) int_0^{pi/2} dphi sin(2 phi)
#                 exp(-5 i f^2 t^3 cos^6(phi)/192)
#                 J_0(f^2 t^3 cos^6(phi)/64) I_{2m}(t sin^2 phi),
#
# which reach I_3..I_6 from the closed I_2 with one or two nested
# quadratures and no hypergeometric machinery at all.


def _recursion_quad(inner, t, f, tol, odd: bool, vectorized: bool) -> QuadResult:
    a = f * f * t**3

    if odd:
        pref = complex(np.sqrt(2.0 * t / (math.pi * 1j)))

        def g(phi):
            c6 = np.cos(phi) ** 6
            return np.sin(phi) * np.exp(-1j * a * c6 / 24.0) * inner(t * np.sin(phi) ** 2)

    else:
        pref = t / 2.0j

        def g(phi):
            c6 = np.cos(phi) ** 6
            return (
                np.sin(2.0 * phi)
                * np.exp(-5j * a * c6 / 192.0)
                * bessel_j(0, a * c6 / 64.0)
                * inner(t * np.sin(phi) ** 2)
            )

    def span(lo, hi):
        return abs(a) / 12.0 * abs(math.cos(lo) ** 6 - math.cos(hi) ** 6)

    init = max(1, int(abs(a) / 24.0))
    r = integrate_1d(
        g,
        0.0,
        0.5 * math.pi,
        tol,
        vectorized=vectorized,
        initial_intervals=init,
        phase_span=span,
    )
    return QuadResult(pref * r.value, abs(pref) * r.est_error, r.evaluations, r.converged)


def in_recursive_oracle(n: int, t: float, f: float, tol: float = 1e-9) -> QuadResult:
    """I_n for 2 <= n <= 6 from the half-step recursions alone.

    n = 2 returns the closed Bessel form; n = 3, 4 are single quadratures
    over it; n = 5, 6 nest a second quadrature.  Fully independent of the
    hypergeometric series, so it serves as the cross-check oracle in the
    strong-field regime where those series cancel catastrophically.
    """
    if not 2 <= n <= 6:
        raise ValueError("the recursion oracle covers orders 2 through 6")
    if n == 2:
        return QuadResult(i2(t, f), 1e-16, 1, True)

    def inner2(u):
        return i2(u, f)

    if n in (3, 4):
        return _recursion_quad(inner2, t, f, tol, odd=(n == 3), vectorized=True)

    evals = 0
    inner_tol = tol / 3.0

    def inner4(u):
        nonlocal evals
        if u == 0.0:
            return 0.0j
        r = _recursion_quad(inner2, u, f, inner_tol, odd=False, vectorized=True)
        evals += r.evaluations
        return r.value

    r = _recursion_quad(inner4, t, f, tol, odd=(n == 5), vectorized=False)
    return QuadResult(r.value, r.est_error, r.evaluations + evals, r.converged)


# ---------------------------------------------------------------------------
# assembled memory kernel
# ---------------------------------------------------------------------------


@dataclass
class LambdaProfile:
    """Smooth part of the memory kernel tabulated on a time grid.

    ``smooth`` holds Lambda(tau) - delta(tau) = i K_f(tau) + regular(tau);
    ``regular`` is the same with the integrable i K_f spike removed, which
    is the quantity worth interpolating (it tends to i/2 as tau -> 0).
    ``diagnostics`` carries one :class:`~starkwell.specfun.SeriesEval` per
    grid point.
    """

    grid: np.ndarray
    smooth: np.ndarray
    regular: np.ndarray
    f: float
    n_max: int
    tol: float
    diagnostics: list[SeriesEval] = field(repr=False, default_factory=list)

    @property
    def converged(self) -> bool:
        return all(d.converged for d in self.diagnostics)


def _regular_sum(tau: float, f: float, n_max: int, tol: float) -> SeriesEval:
    """sum_{n>=2} i**n I_n(tau), with per-order switching.

    Uses the closed I_2, the exact triple series for I_3 while the field
    phase allows it, and the factorized approximant beyond; extends past
    ``n_max`` automatically until three consecutive orders fall below
    tolerance (hard ceiling :data:`_MAX_ORDER`).
    """
    total = -i2(tau, f)  # i**2 I_2
    est = 1e-16
    terms = 1
    converged = True
    phase = f * f * tau**3 / 24.0
    if tau > 0.0 and phase <= PRACTICAL_PHASE_BOUND:
        r3 = i3_exact(tau, f, tol=tol)
    elif tau > 0.0:
        r3 = in_approx(3, tau, f, tol=tol)
    else:
        r3 = SeriesEval(0.0j, 1, 0.0, True)
    total += -1j * r3.value  # i**3 I_3
    est += r3.est_error
    terms += r3.terms_used
    converged = converged and r3.converged

    if tau == 0.0:
        return SeriesEval(total, terms, est, converged)

    small_run = 0
    n = 3
    ceiling = max(n_max, _MAX_ORDER)
    while n < ceiling:
        n += 1
        rn = in_approx(n, tau, f, tol=tol)
        term = 1j**n * rn.value
        total += term
        est += rn.est_error
        terms += rn.terms_used
        converged = converged and rn.converged
        if abs(term) <= tol * max(1.0, abs(total)):
            small_run += 1
            if small_run == 3 and n >= min(n_max, 6):
                return SeriesEval(total, terms, est, converged)
        else:
            small_run = 0
    return SeriesEval(total, terms, est, False)


def _checked_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-d array")
    if np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be strictly positive and increasing")
    return grid


def lambda_a(
    grid,
    f: float,
    n_max: int = 24,
    tol: float = 1e-10,
) -> LambdaProfile:
    """Assemble the smooth memory kernel on ``grid`` (strictly positive taus).

    Returns a :class:`LambdaProfile` with the full smooth part
    i K_f + sum_{n>=2} i**n I_n, its regular remainder, and per-point
    series diagnostics.
    """
    grid = _checked_grid(grid)
    regular = np.empty(grid.size, dtype=complex)
    diags: list[SeriesEval] = []
    for idx, tau in enumerate(grid):
        r = _regular_sum(float(tau), f, n_max, tol)
        regular[idx] = r.value
        diags.append(r)
    smooth = 1j * kf_origin(grid, f) + regular
    return LambdaProfile(
        grid=grid,
        smooth=smooth,
        regular=regular,
        f=f,
        n_max=n_max,
        tol=tol,
        diagnostics=diags,
    )


def lambda_exact(
    grid,
    f: float,
    tol: float = 1e-10,
    n_ceiling: int = 400,
) -> LambdaProfile:
    """Assemble the smooth memory kernel by recursing the exact I_n.

    Instead of the leading-partial-wave approximant used by
    :func:`lambda_a`, every order is produced from the previous one by the
    one-step convolution

        I_n(t) = sqrt(2 t / (pi i)) int_0^{pi/2} dphi sin(phi)
                 exp(-i f**2 t**3 cos(phi)**6 / 24) I_{n-1}(t sin(phi)**2),

    evaluated with Gauss-Legendre on an internal sqrt-time table (orders
    are smooth in sigma = sqrt(tau), so each profile is splined and the
    next one read off the spline at the scaled nodes).  The base order is
    the closed Bessel form of I_2.  Orders are summed until three
    consecutive ones fall below ``tol`` everywhere on the table.

    The result carries the same fields as :func:`lambda_a`; ``n_max``
    records the highest order actually summed.
    """
    from scipy.interpolate import CubicSpline
    from scipy.special import roots_legendre

    grid = _checked_grid(grid)
    t_max = float(np.max(grid))
    sig_max = math.sqrt(t_max)

    # table resolution: keep the fastest spline-sampled phase well resolved
    dphase = f * f * sig_max**5 / 4.0
    h_target = 0.06 / max(1.0, dphase)
    n_pts = int(np.clip(sig_max / h_target + 1.0, 361, 4001))
    sig = np.linspace(0.0, sig_max, n_pts)
    taus = sig**2

    m_nodes = int(np.clip(48 + 1.6 * f * f * t_max**3 / 24.0, 48, 512))
    xg, wg = roots_legendre(m_nodes)
    phi = 0.25 * math.pi * (xg + 1.0)
    wphi = 0.25 * math.pi * wg
    sin_phi = np.sin(phi)
    cos6 = np.cos(phi) ** 6

    # fixed per-step factors: sqrt(2 t / (pi i)) and the phase weight
    pref = np.sqrt(2.0 * taus / (math.pi * 1j))
    weight = (wphi * sin_phi)[None, :] * np.exp(
        -1j * f * f * taus[:, None] ** 3 * cos6[None, :] / 24.0
    )
    nodes_sigma = sig[:, None] * sin_phi[None, :]

    current = i2(taus, f)
    current[0] = -0.5j
    total = -current  # i**2 I_2
    n = 2
    small = np.zeros(n_pts, dtype=int)
    tail = 0.0
    converged = False
    while n < n_ceiling:
        n += 1
        spline = CubicSpline(sig, current)
        current = pref * np.sum(weight * spline(nodes_sigma), axis=1)
        current[0] = 0.0
        total += 1j**n * current
        mags = np.abs(current)
        floor = tol * np.maximum(1.0, np.abs(total))
        small = np.where(mags <= floor, small + 1, 0)
        if np.all(small >= 3):
            tail = float(np.max(mags))
            converged = True
            break
    n_used = n

    r_spline = CubicSpline(sig, total)
    regular = r_spline(np.sqrt(grid))
    est = max(tail, 1e-15)
    diags = [
        SeriesEval(regular[i], n_used - 1, est, converged)
        for i in range(grid.size)
    ]
    smooth = 1j * kf_origin(grid, f) + regular
    return LambdaProfile(
        grid=grid,
        smooth=smooth,
        regular=regular,
        f=f,
        n_max=n_used,
        tol=tol,
        diagnostics=diags,
    )


def regular_limit() -> complex:
    """Limit of the regular kernel part as tau -> 0+, equal to i/2."""
    return 0.5j


def k00(t: float, f: float, n_max: int = 24, tol: float = 1e-10) -> SeriesEval:
    """On-axis propagator value K(0, t | 0, 0) = K_f(t) + sum_{n>=2} i**(n-1) I_n.

    Shares the per-order switching of :func:`lambda_a`; in the zero-field
    limit it reproduces the closed field-free form at x = x' = 0.
    """
    if t <= 0.0:
        raise ValueError("time must be positive")
    r = _regular_sum(t, f, n_max, tol)
    value = kf_origin(t, f) - 1j * r.value
    return SeriesEval(value, r.terms_used, r.est_error, r.converged)
