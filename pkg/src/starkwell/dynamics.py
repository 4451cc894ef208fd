"""Observables of the quenched well: survival amplitudes, wavefunction, decay.

Everything here is assembled from two ingredients computed once per field
strength: the freely pushed bound state phi_f (no rescattering, closed
form) and the on-axis rescattered amplitude

    Q(tau) = phi_f(0, tau) + int_0^tau phi_f(0, tau - u) Lambda_s(u) du,

where Lambda_s is the smooth part of the memory kernel from
:mod:`starkwell.lam`.  Q is tabulated on a sqrt-time grid (it carries
sqrt(tau) terms at small tau) and splined; the survival amplitude, the
spatial correction profile, and all norm integrals reduce to one- and
two-dimensional quadratures over that spline:

* A(t) = A_phi(t) + A_delta(t), with A_delta = i int phi_f(0, t-tau) Q(tau);
* corr(x, t) = i int_0^t K_f(x; eps) Q(t - eps) deps;
* <phi, corr> = i int_0^t conj(phi_f(0, tau)) Q(tau) dtau  and
  ||corr||**2 = 2 Re int dtau' conj(Q(tau')) int_0^tau' K_f(tau'-tau) Q(tau) dtau,
  both obtained by composing kernels on the axis instead of integrating
  over x (the one-step kernels compose to K_f of the time difference).

The wavefunction ansatz is psi_a = phi_f + c(t) * corr with the real
constant c(t) = -2 Re<phi, corr> / ||corr||**2, which restores unit norm
exactly and tends to 1 as t -> 0+.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .kernels import (
    drift_action,
    drift_momentum,
    drift_position,
    kf,
    kf_origin,
    moshinsky,
)
from .lam import LambdaProfile, lambda_a, lambda_exact, regular_limit
from .quad import QuadResult, integrate_1d
from .specfun import cerfc

__all__ = [
    "DecayModel",
    "AxisContext",
    "IonizationCurve",
    "WavefunctionSlice",
    "wkb_model",
    "amplitude_phi",
    "phi_origin",
    "axis_context",
    "amplitude_delta",
    "correlation_amplitude",
    "normalization_constant",
    "wavefunction_a",
    "propagator_a",
    "ionization_curve",
    "find_ripples",
    "decay_slope",
]

_SQRT_2PI_I = complex(np.sqrt(2.0 * math.pi * 1j))  # principal, phase +pi/4


@dataclass(frozen=True)
class DecayModel:
    """Exponential reference model of the field-induced decay.

    ``rate`` is the tunneling rate exp(-2/(3|f|)) and ``level_shift`` the
    quadratic depression -5 f**2 / 8 of the well level.
    """

    field: float
    rate: float
    level_shift: float

    def reference(self, times):
        """Survival probability exp(-rate * t) of the reference model."""
        return np.exp(-self.rate * np.asarray(times, dtype=float))


def wkb_model(f: float) -> DecayModel:
    """Tunneling reference model; undefined at zero field."""
    if f == 0.0:
        raise ValueError("the tunneling model needs a nonzero field")
    return DecayModel(
        field=f,
        rate=math.exp(-2.0 / (3.0 * abs(f))),
        level_shift=-0.625 * f * f,
    )


# ---------------------------------------------------------------------------
# the freely pushed state on the axis and its overlap amplitude
# ---------------------------------------------------------------------------


def phi_origin(ts, f):
    """phi_f(0, t) for an array of times (vectorized on-axis evaluation)."""
    ts = np.asarray(ts, dtype=float)
    scalar = ts.ndim == 0
    ts = np.atleast_1d(ts).astype(float)
    out = np.empty(ts.shape, dtype=complex)
    zero = ts == 0.0
    out[zero] = 1.0
    tt = ts[~zero]
    if tt.size:
        xc = drift_position(tt, f)
        root = np.sqrt(2j * tt)
        # M(x; -i; t) = (1/2) exp(x + i t/2) erfc((x + i t)/sqrt(2 i t))
        m_plus = 0.5 * np.exp(xc + 0.5j * tt) * cerfc((xc + 1j * tt) / root)
        m_minus = 0.5 * np.exp(-xc + 0.5j * tt) * cerfc((-xc + 1j * tt) / root)
        out[~zero] = np.exp(-1j * drift_action(tt, f)) * (m_plus + m_minus)
    return complex(out[0]) if scalar else out


def amplitude_phi(t: float, f: float) -> complex:
    """Overlap of the bound state with the freely pushed state, <b|phi_f(t)>.

    Closed form for u = f t not small:

        A_phi = (4/u) e^{-i f^2 t^3/6} [ M(u t/2; -i; t)/(2i + u)
                                        - M(-u t/2; -i; t)/(2i - u) ];

    for |u| < 1e-3 the removable 1/u singularity is evaluated through the
    series of the bracket (exact at u = 0), keeping full precision through
    the zero-field limit.  A_phi(0) = 1.
    """
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    if t == 0.0:
        return 1.0 + 0.0j
    u = f * t
    action = complex(np.exp(-1j * drift_action(t, f)))
    if abs(u) >= 1e-3:
        h_p = moshinsky(0.5 * u * t, -1j, t)
        h_m = moshinsky(-0.5 * u * t, -1j, t)
        return (4.0 / u) * action * (h_p / (2j + u) - h_m / (2j - u))
    # series in u around the zero-field limit; h(s) = M(s; -i; t)
    h0 = moshinsky(0.0, -1j, t)
    g = 1.0 / _SQRT_2PI_I / math.sqrt(t)  # gaussian (2 pi i t)**-1/2
    h1 = h0 - g
    h2 = h1
    h3 = h2 + g / (1j * t)
    n0 = 2j * t * h1 - 2.0 * h0
    n2 = 1j * h3 * t**3 / 12.0 - h2 * t**2 / 4.0
    return 4.0 * action * (n0 + u * u * n2) / (-4.0 - u * u)


# ---------------------------------------------------------------------------
# the rescattered on-axis amplitude Q and its spline context
# ---------------------------------------------------------------------------


@dataclass
class AxisContext:
    """Per-field cache: memory-kernel profile and the splined Q(tau).

    Splines are parametrized by sigma = sqrt(tau); ``q_values`` and
    ``regular_values`` sit on ``sigma_grid**2``.
    """

    f: float
    t_max: float
    profile: LambdaProfile
    sigma_grid: np.ndarray
    q_values: np.ndarray
    regular_values: np.ndarray
    tol: float
    _q_spline: CubicSpline = field(repr=False, default=None)
    _r_spline: CubicSpline = field(repr=False, default=None)

    def q(self, tau):
        """Rescattered on-axis amplitude Q at tau (tau <= t_max)."""
        return self._q_spline(np.sqrt(tau))

    def q_sigma(self, sigma):
        """Q as a function of sigma = sqrt(tau)."""
        return self._q_spline(sigma)

    def q_sigma_derivative(self, sigma):
        return self._q_spline(sigma, 1)

    def regular_sigma(self, sigma):
        """Regular part of the memory kernel at sigma = sqrt(tau)."""
        return self._r_spline(sigma)

    @property
    def converged(self) -> bool:
        return self.profile.converged


def _phase_budget_theta(tau: float, f: float):
    """Phase-span bound for integrands over theta with u = tau sin**2(theta)."""
    a6 = f * f * tau**3
    half = 0.5 * tau

    def span(lo: float, hi: float) -> float:
        s_lo, s_hi = math.sin(lo) ** 6, math.sin(hi) ** 6
        c_lo, c_hi = math.cos(lo) ** 6, math.cos(hi) ** 6
        return (
            abs(a6) / 24.0 * abs(s_hi - s_lo)
            + abs(a6) / 6.0 * abs(c_hi - c_lo)
            + half * abs(math.cos(lo) ** 2 - math.cos(hi) ** 2)
        )

    return span


def axis_context(
    f: float,
    t_max: float,
    n_points: int = 361,
    n_max: int = 24,
    tol: float = 1e-10,
    method: str = "recursion",
) -> AxisContext:
    """Build the per-field cache needed by every on-axis observable.

    Tabulates the memory kernel on a sqrt-uniform grid up to ``t_max``,
    splines its regular part, then solves for Q(tau) pointwise:

        Q(tau) = phi_f(0, tau)
                 + i int_0^tau phi_f(0, tau - u) K_f(u) du      (sin**2 map)
                 + int_0^tau phi_f(0, tau - u) R(u) du          (sqrt map),

    and splines Q over sigma = sqrt(tau).

    ``method`` selects the kernel build: ``"recursion"`` (default) sums
    the exact orders via :func:`starkwell.lam.lambda_exact`;
    ``"series"`` uses the leading-partial-wave profile of
    :func:`starkwell.lam.lambda_a`.
    """
    if t_max <= 0.0:
        raise ValueError("t_max must be positive")
    if n_points < 32:
        raise ValueError("the sqrt-time grid needs at least 32 points")
    sigma = np.linspace(0.0, math.sqrt(t_max), n_points)
    taus = sigma**2
    if method == "recursion":
        profile = lambda_exact(taus[1:], f, tol=tol)
    elif method == "series":
        profile = lambda_a(taus[1:], f, n_max=n_max, tol=tol)
    else:
        raise ValueError("method must be 'recursion' or 'series'")
    regular = np.concatenate([[regular_limit()], profile.regular])
    r_spline = CubicSpline(sigma, regular)

    q_vals = np.empty(n_points, dtype=complex)
    q_vals[0] = 1.0
    quad_tol = max(tol, 1e-11)
    for i in range(1, n_points):
        tau = float(taus[i])
        span = _phase_budget_theta(tau, f)
        init = 1 + int((f * f * tau**3 / 6.0 + 0.5 * tau) / math.pi)

        def spike(theta, tau=tau):
            s = np.sin(theta)
            return (
                phi_origin(tau * np.cos(theta) ** 2, f)
                * np.exp(-1j * f * f * tau**3 * s**6 / 24.0)
                * np.cos(theta)
            )

        r1 = integrate_1d(
            spike, 0.0, 0.5 * math.pi, quad_tol,
            vectorized=True, initial_intervals=init, phase_span=span,
        )
        spike_part = (2j * tau / (_SQRT_2PI_I * math.sqrt(tau))) * r1.value

        sig_i = float(sigma[i])

        def smooth(s, tau=tau):
            return 2.0 * s * phi_origin(tau - s * s, f) * r_spline(s)

        r2 = integrate_1d(
            smooth, 0.0, sig_i, quad_tol,
            vectorized=True, initial_intervals=max(1, init // 2),
        )
        q_vals[i] = phi_origin(tau, f) + spike_part + r2.value

    q_spline = CubicSpline(sigma, q_vals)
    return AxisContext(
        f=f,
        t_max=t_max,
        profile=profile,
        sigma_grid=sigma,
        q_values=q_vals,
        regular_values=regular,
        tol=tol,
        _q_spline=q_spline,
        _r_spline=r_spline,
    )


def _require_context(context: AxisContext | None, f: float, t: float) -> AxisContext:
    if context is None:
        return axis_context(f, t_max=max(t, 1e-6))
    if context.f != f:
        raise ValueError("context was built for a different field strength")
    if t > context.t_max * (1.0 + 1e-12):
        raise ValueError("context does not cover the requested time")
    return context


def amplitude_delta(
    t: float, f: float, context: AxisContext | None = None, tol: float = 1e-9
) -> complex:
    """Rescattering part of the survival amplitude,
    A_delta(t) = i int_0^t phi_f(0, t - tau) Q(tau) dtau."""
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    if t == 0.0:
        return 0.0j
    ctx = _require_context(context, f, t)

    def g(s):
        return 2.0 * s * phi_origin(t - s * s, f) * ctx.q_sigma(s)

    init = 1 + int(f * f * t**3 / 20.0 + t / 4.0)
    r = integrate_1d(
        g, 0.0, math.sqrt(t), tol, vectorized=True, initial_intervals=init
    )
    return 1j * r.value


# ---------------------------------------------------------------------------
# spatial correction profile and normalization
# ---------------------------------------------------------------------------


def _kernel_moments(x: float, delta: float):
    """Closed forms of int_0^delta eps**m K_0(x; eps) deps for m = 0, 1.

    With w = |x| / sqrt(2 i delta) (principal root):

        mu_0 = i |x| [ erfc(w) - exp(-w**2) / (sqrt(pi) w) ],
        mu_1 = (|x|**3 / (2 sqrt(pi))) *
               [ -exp(-w**2)/(3 w**3) - (2/3)(-exp(-w**2)/w + sqrt(pi) erfc(w)) ].
    """
    ax = abs(x)
    w = ax / complex(np.sqrt(2j * delta))
    g = complex(np.exp(-w * w))
    ec = cerfc(w)
    i2 = -g / w + math.sqrt(math.pi) * ec
    i4 = -g / (3.0 * w**3) - (2.0 / 3.0) * i2
    mu0 = 1j * ax * (ec - g / (math.sqrt(math.pi) * w))
    mu1 = ax**3 / (2.0 * math.sqrt(math.pi)) * i4
    return mu0, mu1


def _oscillatory_kernel_integral(
    y: float,
    f: float,
    w_func,
    w0: complex,
    w1: complex,
    limit: float,
    tol: float,
    extra_span=None,
    vectorized: bool = True,
):
    """int_0^limit W(v) K_f(y; v) dv for y != 0 and W smooth.

    The v -> 0 endpoint oscillates without bound through exp(i y^2 / 2v).
    Below a cutoff eps_1 the integral is done in closed form: the field-free
    kernel moments mu_0, mu_1 (exact erfc expressions) are taken against
    the linearization of W(v) exp(i f y v / 2), whose slope picks up the
    extra i f y / 2 w0 term; eps_1 is capped so every neglected quadratic
    term (W'', the squared linear field phase, the cubic field phase)
    costs less than ``tol``.  [eps_1, limit] is adaptive quadrature with a
    phase budget (``extra_span`` adds W's own phase variation).  Returns
    (value, est_error, evaluations).
    """
    caps = [0.5 * limit, (tol / 0.3) ** 0.4]
    if f != 0.0:
        caps.append((30.0 * tol / (f * f)) ** (2.0 / 7.0))
        caps.append((5.0 * tol / (f * y) ** 2) ** 0.4)
    eps1 = max(min(caps), 1e-13 * limit)
    mu0, mu1 = _kernel_moments(y, eps1)
    endpoint = w0 * mu0 + (w1 + 0.5j * f * y * w0) * mu1

    def span(lo, hi):
        s = (
            0.5 * y * y * abs(1.0 / lo - 1.0 / hi)
            + 0.5 * abs(f * y) * (hi - lo)
            + f * f * abs(hi**3 - lo**3) / 24.0
        )
        if extra_span is not None:
            s += extra_span(lo, hi)
        return s

    def integrand(v):
        return w_func(v) * kf(y, 0.0, v, f)

    r = integrate_1d(
        integrand, eps1, limit, tol, vectorized=vectorized,
        initial_intervals=8, phase_span=span,
    )
    return endpoint + r.value, r.est_error + 0.5 * tol, r.evaluations


def correlation_amplitude(
    x: float, t: float, f: float, context: AxisContext | None = None, tol: float = 1e-7
) -> complex:
    """Spatial correction profile corr(x, t) = i int_0^t K_f(x; eps) Q(t-eps) deps.

    Splits at t/2: the eps -> 0 half goes through
    :func:`_oscillatory_kernel_integral` (endpoint kernel moments against
    the linearized Q), the eps -> t half is mapped by eps = t - u**2 so the
    sqrt structure of Q at small argument is flattened.
    """
    if t <= 0.0:
        raise ValueError("time must be positive")
    ctx = _require_context(context, f, t)
    half = 0.5 * t
    root_half = math.sqrt(half)

    if x == 0.0:
        def near(s):
            return (2.0 / _SQRT_2PI_I) * np.exp(-1j * f * f * s**6 / 24.0) * ctx.q(
                t - s * s
            )

        r1 = integrate_1d(near, 0.0, root_half, tol, vectorized=True)

        def far0(u):
            return 2.0 * u * kf_origin(t - u * u, f) * ctx.q_sigma(u)

        r2 = integrate_1d(far0, 0.0, root_half, tol, vectorized=True)
        return 1j * (r1.value + r2.value)

    sig_t = math.sqrt(t)
    q_t = complex(ctx.q_sigma(sig_t))
    qdot_t = complex(ctx.q_sigma_derivative(sig_t)) / (2.0 * sig_t)

    def q_shift(v):
        return ctx.q(t - v)

    def q_span(lo, hi):
        # Q's own phase moves at most like phi_f(0, .): rate 1/2 + f^2 tau^2 / 2
        return (hi - lo) * (0.5 + 0.5 * f * f * t * t)

    near_val, _, _ = _oscillatory_kernel_integral(
        x, f, q_shift, q_t, -qdot_t, half, tol, extra_span=q_span
    )

    ax = abs(x)

    def far(u):
        eps = t - u * u
        return 2.0 * u * kf(ax, 0.0, eps, f) * ctx.q_sigma(u)

    def phase_far(lo, hi):
        elo, ehi = t - hi * hi, t - lo * lo
        return (
            0.5 * x * x * abs(1.0 / elo - 1.0 / ehi)
            + 0.5 * abs(f) * ax * (ehi - elo)
            + f * f * abs(ehi**3 - elo**3) / 24.0
        )

    r_far = integrate_1d(
        far, 0.0, root_half, tol, vectorized=True,
        initial_intervals=4, phase_span=phase_far,
    )
    return 1j * (near_val + r_far.value)


def _phi_corr_overlap(t: float, ctx: AxisContext, tol: float) -> complex:
    """<phi_f(t), corr(t)> reduced to the axis:
    i int_0^t conj(phi_f(0, tau)) Q(tau) dtau."""
    f = ctx.f

    def g(s):
        return 2.0 * s * np.conj(phi_origin(s * s, f)) * ctx.q_sigma(s)

    init = 1 + int(f * f * t**3 / 20.0 + t / 4.0)
    r = integrate_1d(
        g, 0.0, math.sqrt(t), tol, vectorized=True, initial_intervals=init
    )
    return 1j * r.value


def _corr_norm_sq(t: float, ctx: AxisContext, n_base: int = 48) -> float:
    """||corr(t)||**2 via on-axis kernel composition (tensor quadrature).

    2 Re int_0^t dtau' conj(Q(tau')) int_0^tau' K_f(tau' - tau) Q(tau) dtau,
    with both the outer tau' and the inner time difference mapped through
    square roots; the grid is fully separable in (sigma, xi).
    """
    from scipy.special import roots_legendre

    f = ctx.f
    n = min(256, n_base + int(f * f * t**3 / 24.0 + t / 2.0))
    xg, wg = roots_legendre(n)
    sig = 0.5 * math.sqrt(t) * (xg + 1.0)
    wsig = 0.5 * math.sqrt(t) * wg
    xi = 0.5 * (xg + 1.0)
    wxi = 0.5 * wg

    v = sig[:, None] * xi[None, :]
    rest = sig[:, None] * np.sqrt(1.0 - xi[None, :] ** 2)
    inner_vals = (
        (2.0 / _SQRT_2PI_I)
        * np.exp(-1j * f * f * v**6 / 24.0)
        * ctx.q_sigma(rest)
    )
    inner = sig * (inner_vals @ wxi)
    total = np.sum(wsig * 2.0 * sig * np.conj(ctx.q_sigma(sig)) * inner)
    return float(2.0 * total.real)


def normalization_constant(
    t: float, f: float, context: AxisContext | None = None, tol: float = 1e-8
) -> float:
    """Real constant c(t) making phi_f + c * corr exactly unit norm.

    c = -2 Re<phi, corr> / ||corr||**2; tends to 1 as t -> 0+ and stays
    defined (c := 1) while the correction vanishes identically.
    """
    if t <= 0.0:
        raise ValueError("time must be positive")
    ctx = _require_context(context, f, t)
    denom = _corr_norm_sq(t, ctx)
    if denom <= 1e-300:
        return 1.0
    overlap = _phi_corr_overlap(t, ctx, tol)
    return -2.0 * overlap.real / denom


@dataclass(frozen=True)
class WavefunctionSlice:
    """psi_a = phi_f + c * corr evaluated on a spatial grid at one time."""

    x: np.ndarray
    t: float
    f: float
    values: np.ndarray
    phi_part: np.ndarray
    corr_part: np.ndarray
    c: float


def wavefunction_a(
    x_grid,
    t: float,
    f: float,
    context: AxisContext | None = None,
    tol: float = 1e-7,
) -> WavefunctionSlice:
    """Normalized wavefunction ansatz on a spatial grid at time t."""
    from .kernels import phi_f as phi_full

    if t <= 0.0:
        raise ValueError("time must be positive")
    ctx = _require_context(context, f, t)
    x_grid = np.asarray(x_grid, dtype=float)
    corr = np.array(
        [correlation_amplitude(float(x), t, f, ctx, tol) for x in x_grid]
    )
    phi = np.asarray(phi_full(x_grid, t, f), dtype=complex)
    c = normalization_constant(t, f, ctx, tol)
    return WavefunctionSlice(
        x=x_grid, t=t, f=f, values=phi + c * corr, phi_part=phi, corr_part=corr, c=c
    )


# ---------------------------------------------------------------------------
# two-point propagator with one memory-kernel insertion
# ---------------------------------------------------------------------------


def propagator_a(
    x: float,
    xp: float,
    t: float,
    f: float,
    context: AxisContext | None = None,
    tol: float = 1e-6,
) -> QuadResult:
    """Propagator K(x, t | x', 0) resummed through the memory kernel:

        K_f(x, x'; t)
        + i int_0^t dtau K_f(x; t - tau)
              [ K_f(x'; tau) + int_0^tau Lambda_s(u) K_f(x'; tau - u) du ],

    i.e. one insertion of the full contact kernel Lambda = delta + Lambda_s
    between free flights.  In the zero-field limit this reproduces the
    closed field-free form.
    """
    if t <= 0.0:
        raise ValueError("time must be positive")
    ctx = _require_context(context, f, t)
    evals = 0
    est = 0.0
    ok = True

    def kf_dt_slope(a: float, dt: float) -> complex:
        """d/d(dt) of K_f(a, 0; dt)."""
        base = complex(kf(a, 0.0, dt, f))
        return base * (
            -0.5 / dt
            + 1j * (-a * a / (2.0 * dt * dt) + 0.5 * f * a - f * f * dt * dt / 8.0)
        )

    def half_product(a: float, b: float) -> complex:
        """int_0^{t/2} K_f(a; t - v) K_f(b; v) dv, oscillatory end at v=0."""
        nonlocal evals, est

        def w(v):
            return kf(a, 0.0, t - v, f)

        if b == 0.0:
            def g(s):
                return (
                    (2.0 / _SQRT_2PI_I)
                    * np.exp(-1j * f * f * s**6 / 24.0)
                    * w(s * s)
                )

            r = integrate_1d(
                g, 0.0, math.sqrt(0.5 * t), tol, vectorized=True,
                initial_intervals=2 + int(f * f * t**3 / 24.0),
            )
            evals += r.evaluations
            est += r.est_error
            return r.value

        def w_span(lo, hi):
            tlo, thi = t - hi, t - lo
            return (
                0.5 * a * a * abs(1.0 / tlo - 1.0 / thi)
                + 0.5 * abs(f * a) * (hi - lo)
                + f * f * abs(thi**3 - tlo**3) / 24.0
            )

        w0 = complex(kf(a, 0.0, t, f))
        w1 = -kf_dt_slope(a, t)
        val, e, n = _oscillatory_kernel_integral(
            b, f, w, w0, w1, 0.5 * t, tol, extra_span=w_span
        )
        evals += n
        est += e
        return val

    # single-contact term: i int_0^t K_f(x; t-v) K_f(x'; v) dv, folded at t/2
    delta_term = 1j * (half_product(x, xp) + half_product(xp, x))

    # memory-kernel insertion: i int_0^t dtau K_f(x; t - tau) B(tau) with
    #   B(tau) = i int_0^tau K_f(x'; tau - u) K_f(u) du
    #           + int_0^tau K_f(x'; u) R(tau - u) du
    inner_tol = tol / 5.0
    inner_est = 0.0

    def inner(tau: float) -> complex:
        nonlocal evals, inner_est
        if tau <= 0.0:
            return 0.0j
        root_half = math.sqrt(0.5 * tau)
        acc_est = 0.0

        # spike part, [0, tau/2]: u = s**2 flattens the kernel-product root
        def ga(s):
            return (
                (2.0 / _SQRT_2PI_I)
                * np.exp(-1j * f * f * s**6 / 24.0)
                * kf(xp, 0.0, tau - s * s, f)
            )

        ra = integrate_1d(
            ga, 0.0, root_half, inner_tol, vectorized=True,
            initial_intervals=2 + int(f * f * tau**3 / 24.0),
        )
        evals += ra.evaluations
        acc_est += ra.est_error
        spike = ra.value

        # spike part, [tau/2, tau] -> v = tau - u in [0, tau/2]
        if xp == 0.0:
            def gb(s):
                return (
                    (2.0 / _SQRT_2PI_I)
                    * np.exp(-1j * f * f * s**6 / 24.0)
                    * kf_origin(tau - s * s, f)
                )

            rb = integrate_1d(
                gb, 0.0, root_half, inner_tol, vectorized=True,
                initial_intervals=2 + int(f * f * tau**3 / 24.0),
            )
            evals += rb.evaluations
            acc_est += rb.est_error
            spike += rb.value
        else:
            w0 = complex(kf_origin(tau, f))
            w1 = w0 * (0.5 / tau + 1j * f * f * tau * tau / 8.0)

            def wb(v):
                return kf_origin(tau - v, f)

            def wb_span(lo, hi):
                return f * f * abs((tau - lo) ** 3 - (tau - hi) ** 3) / 24.0

            val, e, n = _oscillatory_kernel_integral(
                xp, f, wb, w0, w1, 0.5 * tau, inner_tol, extra_span=wb_span
            )
            evals += n
            acc_est += e
            spike += val

        # regular part: [tau/2, tau] via u = tau - s**2 (R side smooth in s)
        def gc(s):
            return (
                2.0 * s
                * kf(xp, 0.0, tau - s * s, f)
                * ctx.regular_sigma(s)
            )

        rc = integrate_1d(
            gc, 0.0, root_half, inner_tol, vectorized=True,
            initial_intervals=2,
        )
        evals += rc.evaluations
        acc_est += rc.est_error
        regular = rc.value

        # regular part: [0, tau/2], kernel endpoint at u -> 0
        sig_tau = math.sqrt(tau)
        r_tau = complex(ctx.regular_sigma(sig_tau))
        rdot_tau = complex(ctx._r_spline(sig_tau, 1)) / (2.0 * sig_tau)
        if xp == 0.0:
            def gd(s):
                return (
                    (2.0 / _SQRT_2PI_I)
                    * np.exp(-1j * f * f * s**6 / 24.0)
                    * ctx.regular_sigma(np.sqrt(tau - s * s))
                )

            rd = integrate_1d(
                gd, 0.0, root_half, inner_tol, vectorized=True,
                initial_intervals=2,
            )
            evals += rd.evaluations
            acc_est += rd.est_error
            regular += rd.value
        else:
            def wd(v):
                return ctx.regular_sigma(np.sqrt(tau - v))

            val, e, n = _oscillatory_kernel_integral(
                xp, f, wd, r_tau, -rdot_tau, 0.5 * tau, inner_tol
            )
            evals += n
            acc_est += e
            regular += val

        inner_est = max(inner_est, acc_est)
        return 1j * spike + regular

    def outer(s: float) -> complex:
        return 2.0 * s * complex(kf(x, 0.0, s * s, f)) * inner(t - s * s)

    r2 = integrate_1d(outer, 0.0, math.sqrt(t), tol, vectorized=False)
    est += r2.est_error + inner_est * math.sqrt(t)
    ok = ok and r2.converged
    evals += r2.evaluations

    value = complex(kf(x, xp, t, f)) + delta_term + 1j * r2.value
    return QuadResult(value, est, evals, ok)


# ---------------------------------------------------------------------------
# ionization curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IonizationCurve:
    """Survival amplitude and ionization probability on a time grid."""

    times: np.ndarray
    f: float
    amplitude: np.ndarray
    probability: np.ndarray
    decay_reference: np.ndarray
    normalization: np.ndarray
    point_converged: np.ndarray

    @property
    def converged(self) -> bool:
        return bool(np.all(self.point_converged))


#: ionization probabilities may undershoot 0 or overshoot 1 by at most this
#: much numerical slack before clamping; larger excursions flag the point
PROBABILITY_SLACK = 1e-12


def ionization_curve(
    times,
    f: float,
    n_max: int = 24,
    tol: float = 1e-10,
    context: AxisContext | None = None,
) -> IonizationCurve:
    """Ionization probability 1 - |A(t)|**2 along a time grid.

    Also carries the tunneling reference exp(-Gamma t) (ones at f = 0) and
    the per-time normalization constant c(t) of the wavefunction ansatz.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty 1-d array")
    if np.any(times <= 0.0) or np.any(np.diff(times) <= 0.0):
        raise ValueError("times must be strictly positive and increasing")
    t_max = float(times[-1])
    ctx = context if context is not None else axis_context(
        f, t_max, n_max=n_max, tol=tol
    )
    amp = np.empty(times.size, dtype=complex)
    prob = np.empty(times.size)
    norm_c = np.empty(times.size)
    flags = np.ones(times.size, dtype=bool)
    for i, t in enumerate(times):
        t = float(t)
        a = amplitude_phi(t, f) + amplitude_delta(t, f, ctx, tol=max(tol, 1e-10))
        amp[i] = a
        p = 1.0 - abs(a) ** 2
        if p < -PROBABILITY_SLACK or p > 1.0 + PROBABILITY_SLACK:
            flags[i] = False
        prob[i] = min(max(p, 0.0), 1.0)
        norm_c[i] = normalization_constant(t, f, ctx, tol=1e-7)
    flags &= ctx.converged
    if f != 0.0:
        ref = wkb_model(f).reference(times)
    else:
        ref = np.ones_like(times)
    return IonizationCurve(
        times=times,
        f=f,
        amplitude=amp,
        probability=prob,
        decay_reference=ref,
        normalization=norm_c,
        point_converged=flags,
    )


def find_ripples(curve: IonizationCurve, threshold: float = 1e-6) -> np.ndarray:
    """Times of local maxima of the survival probability |A|**2.

    The survival curve is smoothed with a centered window of three before
    peak-finding; a peak must exceed both neighbours by ``threshold``.
    These are the rescattering ripples on top of the monotone decay.
    """
    surv = np.abs(curve.amplitude) ** 2
    if surv.size < 3:
        return np.empty(0)
    sm = surv.copy()
    sm[1:-1] = (surv[:-2] + surv[1:-1] + surv[2:]) / 3.0
    hits = (sm[1:-1] > sm[:-2] + threshold) & (sm[1:-1] > sm[2:] + threshold)
    return curve.times[1:-1][hits]


def decay_slope(curve: IonizationCurve, t_lo: float, t_hi: float) -> float:
    """Least-squares slope of log |A(t)|**2 over the window [t_lo, t_hi]."""
    mask = (curve.times >= t_lo) & (curve.times <= t_hi)
    if np.count_nonzero(mask) < 2:
        raise ValueError("window must contain at least two grid points")
    ts = curve.times[mask]
    ys = np.log(np.abs(curve.amplitude[mask]) ** 2)
    coef = np.polyfit(ts, ys, 1)
    return float(coef[0])
