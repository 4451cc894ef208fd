"""Scalar special functions and truncated-series evaluators.

The propagator expansion needs three layers of machinery: reliable scalar
special functions (complex gamma, complementary error function, Airy and
Bessel functions), the family of repeated integrals of erfc, and
generalized hypergeometric series.  The latter come in two flavours: the
ordinary pFq of one argument, and a multivariate sum over several pFq-type
series tied together by shared Pochhammer weights in the *total* degree,

    F = sum_{k_1..k_n >= 0} (a0)_K / (b0)_K *
        prod_j [ (a_j)_{k_j} / (b_j)_{k_j} * z_j**k_j / k_j! ],   K = k_1+..+k_n.

All series evaluators return a :class:`SeriesEval` carrying the value, the
number of terms consumed, an error estimate, and an honest convergence
flag.  The error estimate includes a floor proportional to the largest
partial sum, so strongly cancelling series (large oscillatory arguments)
report the accuracy actually attained rather than the size of the last
term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

__all__ = [
    "SeriesEval",
    "PfqParams",
    "MultiFParams",
    "gamma_c",
    "recip_gamma",
    "pochhammer",
    "cerfc",
    "repeated_erfc",
    "repeated_erfc_sequence",
    "bessel_j",
    "airy",
    "pfq",
    "multi_f",
]

#: relative tolerance at which series evaluators stop by default
DEFAULT_SERIES_TOL = 1e-12

#: hard cap on the number of terms of a single-argument series
MAX_SERIES_TERMS = 10_000

#: hard cap on the total degree of a multivariate series
MAX_TOTAL_DEGREE = 300

#: unit roundoff floor applied per unit of the largest partial sum
_CANCELLATION_EPS = 5e-16


@dataclass(frozen=True)
class SeriesEval:
    """Outcome of a truncated series evaluation."""

    value: complex
    terms_used: int
    est_error: float
    converged: bool


def gamma_c(z: complex) -> complex:
    """Gamma function of a complex argument.

    Raises ValueError at the poles (nonpositive integers) and on overflow,
    since no finite double represents the result there.
    """
    w = complex(sc.gamma(complex(z)))
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise ValueError(f"gamma pole or overflow at z = {z!r}")
    return w


def recip_gamma(z: complex) -> complex:
    """Reciprocal gamma function, entire; exactly zero at the gamma poles."""
    return complex(sc.rgamma(complex(z)))


def pochhammer(a: complex, k: int) -> complex:
    """Rising factorial (a)_k = a (a+1) ... (a+k-1), with (a)_0 = 1.

    Computed as a plain product so that a nonpositive-integer ``a`` yields
    an exact zero once the factor chain crosses the origin.
    """
    if k < 0:
        raise ValueError("pochhammer order must be nonnegative")
    out = complex(1.0)
    a = complex(a)
    for j in range(k):
        out *= a + j
    return out


def cerfc(z):
    """Complementary error function of a complex argument.

    Wraps the Faddeeva-based library routine (accurate to close to machine
    precision over the range used here).  Accepts scalars or arrays.
    Raises OverflowError when exp(-z**2) exceeds the double range, because
    no finite value can represent the result.
    """
    out = sc.erfc(np.asarray(z, dtype=complex))
    if not np.all(np.isfinite(out)):
        raise OverflowError("erfc overflow: |exp(-z**2)| exceeds double range")
    if np.ndim(z) == 0:
        return complex(out)
    return out


def _is_nonpositive_integer(w: complex) -> bool:
    w = complex(w)
    return w.imag == 0.0 and w.real <= 0.0 and w.real == round(w.real)


# ---------------------------------------------------------------------------
# repeated integrals of the complementary error function
# ---------------------------------------------------------------------------
#
# i^n erfc obeys  2n f_n(z) = f_{n-2}(z) - 2 z f_{n-1}(z)  with
# f_0 = erfc and f_{-1}(z) = (2/sqrt(pi)) exp(-z**2).  For Re z >= 0 the
# target is the minimal solution as n grows, so upward recursion is
# unstable; instead the top two orders are computed directly from the
# integral representation
#
#     i^n erfc(z) = (2/sqrt(pi)) / n! * int_0^inf s**n exp(-(s+z)**2) ds,
#
# and the recurrence is run downward (where contamination by the dominant
# solution decays), with the final scale pinned by f_0 = erfc(z).  For
# Re z < 0 the minimal/dominant roles swap; there we recurse forward on
# the polynomial combination
#
#     h_n(z) = i^n erfc(z) + (-1)^n i^n erfc(-z),
#
# which satisfies the same recurrence with h_{-1} = 0, h_0 = 2 and *is*
# dominant on that side, then subtract the reflected minimal solution.


def _inerfc_integral(n: int, z: complex) -> complex:
    """i^n erfc(z) for Re z >= 0 and n >= 1 from the integral representation.

    The integrand exp(n log s - (s+z)**2) is evaluated relative to its
    peak on piecewise Gauss-Legendre panels short enough to resolve the
    exp(-2 i s Im z) oscillation.
    """
    from scipy.special import roots_legendre

    x, y = z.real, z.imag
    s_star = max(0.5 * (-x + math.sqrt(x * x + 2.0 * n)), 1e-3)
    log_peak = n * math.log(s_star) - (s_star + x) ** 2 + y * y
    s_cut = s_star + 14.0 + 0.5 * math.sqrt(n)
    panel = min(1.5, 3.0 / max(1.0, 2.0 * abs(y)))
    n_panels = int(math.ceil(s_cut / panel))
    edges = np.linspace(0.0, s_cut, n_panels + 1)
    xg, wg = roots_legendre(24)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    s = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    g = n * np.log(s) - (s + z) ** 2 - log_peak
    val = complex(np.sum(w * np.exp(g)))
    log_scale = log_peak + math.log(2.0 / math.sqrt(math.pi)) - math.lgamma(n + 1.0)
    return val * complex(np.exp(log_scale))


def _inerfc_seq_right(n: int, z: complex) -> np.ndarray:
    """Orders 0..n of i^n erfc for Re z >= 0."""
    if z == 0.0:
        return np.asarray(
            [2.0**-j / math.gamma(0.5 * j + 1.0) for j in range(n + 1)],
            dtype=complex,
        )
    f0 = cerfc(z)
    seq = np.empty(n + 1, dtype=complex)
    seq[0] = f0
    if n == 0:
        return seq
    if n == 1:
        seq[1] = repeated_erfc(-1, z) / 2.0 - z * f0
        return seq
    seq[n] = _inerfc_integral(n, z)
    seq[n - 1] = _inerfc_integral(n - 1, z)
    for k in range(n - 1, 1, -1):
        seq[k - 1] = 2.0 * (k + 1) * seq[k + 1] + 2.0 * z * seq[k]
    # one more step reaches order 0; pin the overall scale with exact erfc
    trial0 = 4.0 * seq[2] + 2.0 * z * seq[1]
    if trial0 == 0.0:
        raise ValueError(f"repeated erfc normalization failed at z = {z!r}")
    seq[1:] *= f0 / trial0
    return seq


def _inerfc_polynomial(n: int, z: complex) -> np.ndarray:
    """Orders 0..n of h_n(z) = i^n erfc(z) + (-1)^n i^n erfc(-z)."""
    h = np.zeros(n + 1, dtype=complex)
    h[0] = 2.0
    if n >= 1:
        h[1] = -2.0 * z
    for k in range(2, n + 1):
        h[k] = (h[k - 2] - 2.0 * z * h[k - 1]) / (2.0 * k)
    return h


def repeated_erfc_sequence(n: int, z: complex) -> np.ndarray:
    """Array of i^k erfc(z) for k = 0..n."""
    if n < 0:
        raise ValueError("order must be nonnegative")
    z = complex(z)
    if z.real >= 0.0:
        return _inerfc_seq_right(n, z)
    refl = _inerfc_seq_right(n, -z)
    h = _inerfc_polynomial(n, z)
    signs = np.where(np.arange(n + 1) % 2 == 0, 1.0, -1.0)
    return h - signs * refl


def repeated_erfc(n: int, z: complex) -> complex:
    """n-fold repeated integral of erfc, i^n erfc(z).

    Supports n = -1 (the Gaussian (2/sqrt(pi)) exp(-z**2)) and all n >= 0.
    """
    z = complex(z)
    if n == -1:
        w = -z * z
        if w.real > 709.0:
            raise OverflowError("erfc overflow: |exp(-z**2)| exceeds double range")
        return 2.0 / math.sqrt(math.pi) * complex(np.exp(w))
    return complex(repeated_erfc_sequence(n, z)[n])


def bessel_j(order: float, x) -> float:
    """Bessel function of the first kind, real order and argument."""
    return sc.jv(order, x)


def airy(z: complex) -> tuple[complex, complex]:
    """Airy functions (Ai, Bi) of a complex argument.

    Raises OverflowError where Bi overflows the double range.
    """
    ai, _, bi, _ = sc.airy(complex(z))
    if not (np.isfinite(ai) and np.isfinite(bi)):
        raise OverflowError(f"airy overflow at z = {z!r}")
    return complex(ai), complex(bi)


# ---------------------------------------------------------------------------
# generalized hypergeometric series
# ---------------------------------------------------------------------------


def _validate_lower(lower, upper) -> None:
    """Reject lower parameters that hit a pole before the series terminates."""
    term_orders = [
        int(-round(a.real)) for a in map(complex, upper) if _is_nonpositive_integer(a)
    ]
    first_stop = min(term_orders) if term_orders else None
    for b in map(complex, lower):
        if _is_nonpositive_integer(b):
            pole_at = int(-round(b.real)) + 1
            if first_stop is None or pole_at <= first_stop:
                raise ValueError(
                    f"lower parameter {b!r} is a nonpositive integer and the "
                    "series does not terminate first"
                )


@dataclass(frozen=True)
class PfqParams:
    """Parameters of a generalized hypergeometric series pFq."""

    upper: tuple[complex, ...]
    lower: tuple[complex, ...]
    argument: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "upper", tuple(complex(a) for a in self.upper))
        object.__setattr__(self, "lower", tuple(complex(b) for b in self.lower))
        object.__setattr__(self, "argument", complex(self.argument))
        _validate_lower(self.lower, self.upper)


def pfq(
    params: PfqParams,
    tol: float = DEFAULT_SERIES_TOL,
    max_terms: int = MAX_SERIES_TERMS,
) -> SeriesEval:
    """Evaluate pFq by direct term recursion.

    Stops once three consecutive terms fall below ``tol * max(1, |sum|)``,
    or exactly when a nonpositive-integer upper parameter terminates the
    series.  The error estimate never drops below the roundoff floor set
    by the largest intermediate partial sum, so heavy cancellation is
    reported rather than hidden.
    """
    a = np.asarray(params.upper, dtype=complex)
    b = np.asarray(params.lower, dtype=complex)
    z = complex(params.argument)

    term = complex(1.0)
    total = term
    peak = abs(total)
    terms_used = 1
    small_run = 0
    for k in range(max_terms):
        num = complex(np.prod(a + k)) if a.size else complex(1.0)
        den = complex(np.prod(b + k)) if b.size else complex(1.0)
        if num == 0.0:
            return SeriesEval(
                value=total,
                terms_used=terms_used,
                est_error=_CANCELLATION_EPS * peak,
                converged=True,
            )
        term = term * (num / (den * (k + 1.0))) * z
        total += term
        terms_used += 1
        peak = max(peak, abs(total))
        if abs(term) <= tol * max(1.0, abs(total)):
            small_run += 1
            if small_run == 3:
                est = max(3.0 * abs(term), _CANCELLATION_EPS * peak)
                return SeriesEval(total, terms_used, est, True)
        else:
            small_run = 0
        if not (math.isfinite(total.real) and math.isfinite(total.imag)):
            return SeriesEval(total, terms_used, math.inf, False)
    est = max(abs(term), _CANCELLATION_EPS * peak)
    return SeriesEval(total, terms_used, est, False)


@dataclass(frozen=True)
class MultiFParams:
    """Parameters of the shared-weight multivariate hypergeometric sum.

    ``upper[j]``/``lower[j]``/``arguments[j]`` describe the j-th inner
    series; ``shared_upper``/``shared_lower`` are the Pochhammer families
    evaluated at the total degree.  Convergence for all finite arguments
    requires ``1 + q0 + q_j - p0 - p_j >= 0`` for every j, which is
    enforced at construction.
    """

    shared_upper: tuple[complex, ...]
    shared_lower: tuple[complex, ...]
    upper: tuple[tuple[complex, ...], ...]
    lower: tuple[tuple[complex, ...], ...]
    arguments: tuple[complex, ...]

    def __post_init__(self) -> None:
        n = len(self.arguments)
        if not 1 <= n <= 4:
            raise ValueError("between one and four arguments are supported")
        if len(self.upper) != n or len(self.lower) != n:
            raise ValueError("need one upper/lower family per argument")
        object.__setattr__(
            self, "shared_upper", tuple(complex(a) for a in self.shared_upper)
        )
        object.__setattr__(
            self, "shared_lower", tuple(complex(b) for b in self.shared_lower)
        )
        object.__setattr__(
            self, "upper", tuple(tuple(complex(a) for a in fam) for fam in self.upper)
        )
        object.__setattr__(
            self, "lower", tuple(tuple(complex(b) for b in fam) for fam in self.lower)
        )
        object.__setattr__(
            self, "arguments", tuple(complex(z) for z in self.arguments)
        )
        _validate_lower(self.shared_lower, self.shared_upper)
        p0, q0 = len(self.shared_upper), len(self.shared_lower)
        for j in range(n):
            _validate_lower(self.lower[j], self.upper[j] + self.shared_upper)
            if 1 + q0 + len(self.lower[j]) - p0 - len(self.upper[j]) < 0:
                raise ValueError(
                    f"argument {j}: series diverges for all nonzero arguments "
                    "(too many upper parameters)"
                )


def _coefficient_ladder(upper, lower, z, kmax):
    """Mantissa/exponent form of c_k = (a)_k/((b)_k k!) z**k for k = 0..kmax.

    Returns (mantissa, exponent) with c_k = mantissa[k] * 2.0**exponent[k];
    keeping magnitudes in exponent form avoids overflow from the factorial
    growth of individual factors long before the shell sums converge.
    """
    a = np.asarray(upper, dtype=complex)
    b = np.asarray(lower, dtype=complex)
    mant = np.zeros(kmax + 1, dtype=complex)
    expo = np.zeros(kmax + 1, dtype=float)
    cur_m, cur_e = complex(1.0), 0.0
    mant[0] = cur_m
    for k in range(kmax):
        num = complex(np.prod(a + k)) if a.size else complex(1.0)
        den = complex(np.prod(b + k)) if b.size else complex(1.0)
        cur_m *= (num / (den * (k + 1.0))) * z
        am = abs(cur_m)
        if am == 0.0:
            break  # terminated; remaining entries stay zero
        shift = math.floor(math.log2(am))
        cur_m *= 2.0 ** (-shift)
        cur_e += shift
        mant[k + 1] = cur_m
        expo[k + 1] = cur_e
    return mant, expo


def _shell_rows(K: int, ladders):
    """Yield vectorized rows covering all compositions of total degree K."""
    n = len(ladders)
    if n == 1:
        m, e = ladders[0]
        yield m[K : K + 1], e[K : K + 1]
        return
    if n == 2:
        (m1, e1), (m2, e2) = ladders
        yield m1[: K + 1] * m2[K::-1], e1[: K + 1] + e2[K::-1]
        return
    head = ladders[0]
    for k1 in range(K + 1):
        for row_m, row_e in _shell_rows(K - k1, ladders[1:]):
            yield head[0][k1] * row_m, head[1][k1] + row_e


def multi_f(
    params: MultiFParams,
    tol: float = DEFAULT_SERIES_TOL,
    max_degree: int = MAX_TOTAL_DEGREE,
) -> SeriesEval:
    """Evaluate the shared-weight multivariate hypergeometric sum.

    The sum is organized by shells of fixed total degree K; each shell is
    the shared Pochhammer ratio at K times a convolution of the per-series
    coefficient ladders.  Stops after three consecutive shells fall below
    ``tol * max(1, |sum|)``.
    """
    ladders = [
        _coefficient_ladder(params.upper[j], params.lower[j], params.arguments[j], max_degree)
        for j in range(len(params.arguments))
    ]
    shared_m, shared_e = _coefficient_ladder(
        params.shared_upper, params.shared_lower, 1.0, max_degree
    )
    # the factorial in the ladder is not part of the shared weight: undo it
    shared_fix = np.cumsum(np.log2(np.arange(max_degree + 1, dtype=float).clip(min=1.0)))
    shared_e = shared_e + shared_fix

    total = complex(0.0)
    peak = 0.0
    small_run = 0
    shells = 0
    last = math.inf
    for K in range(max_degree + 1):
        rows = list(_shell_rows(K, ladders))
        e_max = max(float(np.max(r_e)) for _, r_e in rows)
        s = complex(0.0)
        for r_m, r_e in rows:
            s += complex(np.sum(r_m * np.exp2(r_e - e_max)))
        shell = shared_m[K] * s * 2.0 ** (shared_e[K] + e_max)
        total += shell
        shells = K + 1
        peak = max(peak, abs(total))
        last = abs(shell)
        if not (math.isfinite(total.real) and math.isfinite(total.imag)):
            return SeriesEval(total, shells, math.inf, False)
        if last <= tol * max(1.0, abs(total)):
            small_run += 1
            if small_run == 3:
                est = max(3.0 * last, _CANCELLATION_EPS * peak)
                return SeriesEval(total, shells, est, True)
        else:
            small_run = 0
    est = max(last, _CANCELLATION_EPS * peak)
    return SeriesEval(total, shells, est, False)
