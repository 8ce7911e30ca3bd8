"""Closed-form radial extremals and the optimal constant among radial
functions.

The theta-independent extremal of the cylinder quotient is the sech-power
profile

    w*(t) = (Lambda p / 2)^(1/(p-2)) * cosh(sqrt(Lambda)(p-2) t / 2)^(-2/(p-2)),

the unique even positive solution of -w'' + Lambda w = w^(p-1) with maximum
at t = 0 pinned by Lambda w(0)^2 / 2 = w(0)^p / p.  Its p-mass over the
cylinder has the closed form

    4 |S^(N-1)| (2 Lambda p)^(p/(p-2)) * c_p / (2 p sqrt(Lambda)),

where c_p = int_0^1 (1 + s^((p-2)/p))^(-2p/(p-2)) ds is an increasing
function of p that also admits a Gamma-function form; the Gamma form is the
only numerically viable route as p -> 2+, where 2^(2p/(p-2)) overflows any
linear-domain evaluation.  Both routes are implemented and cross-checked.

All powers with potentially huge exponents are evaluated in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError
from .params import CknParams, CylParams, ckn_from_cyl, critical_a

#: c_p_quadrature refuses p below this: the linear-domain integrand (and the
#: value of c_p itself, < 1e-300) underflows; use c_p_gamma instead.
CP_QUADRATURE_MIN_PMINUS2 = 1e-3


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere S^(N-1): 2 pi^(N/2) / Gamma(N/2)."""
    if N < 2:
        raise DomainError(f"sphere_area requires N >= 2, got {N}")
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def _log_cosh(z: np.ndarray) -> np.ndarray:
    """log(cosh(z)), overflow-safe: |z| + log1p(exp(-2|z|)) - log 2."""
    az = np.abs(z)
    return az + np.log1p(np.exp(-2.0 * az)) - math.log(2.0)


def w_star(c: CylParams, t) -> np.ndarray | float:
    """The radial extremal profile w*(t); even, positive, decaying like
    exp(-sqrt(Lambda)|t|).

    Evaluated in the log domain so that large |t| underflows gracefully to 0
    instead of overflowing the cosh.
    """
    c.require_open_range("w_star")
    t_arr = np.asarray(t, dtype=float)
    log_amp = math.log(0.5 * c.lam * c.p) / (c.p - 2.0)
    z = 0.5 * c.sqrt_lam * (c.p - 2.0) * t_arr
    out = np.exp(log_amp - (2.0 / (c.p - 2.0)) * _log_cosh(z))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RadialProfile:
    """The radial extremal as a value object: amplitude w*(0) and the
    exponential decay rate sqrt(Lambda)."""

    cyl: CylParams
    amplitude: float
    decay_rate: float

    @classmethod
    def from_cyl(cls, c: CylParams) -> "RadialProfile":
        c.require_open_range("RadialProfile")
        amplitude = (0.5 * c.lam * c.p) ** (1.0 / (c.p - 2.0))
        return cls(cyl=c, amplitude=amplitude, decay_rate=c.sqrt_lam)

    def __call__(self, t) -> np.ndarray | float:
        return w_star(self.cyl, t)

    def pinning_residual(self) -> float:
        """Lambda w(0)^2/2 - w(0)^p/p; zero for the exact profile."""
        w0 = self.amplitude
        return 0.5 * self.cyl.lam * w0 * w0 - w0 ** self.cyl.p / self.cyl.p


def kappa_star(q: CknParams) -> float:
    """Normalization constant of the radial extremal in the original
    variables: (N(N-2-2a)^2 / (N-2(1+a-b)))^((N-2(1+a-b)) / (4(1+a-b)))."""
    d = 1.0 + q.a - q.b
    if d <= 0.0:
        raise DomainError("kappa_star requires b < a + 1")
    m = q.N - 2.0 * d
    if m <= 0.0:
        raise DomainError("kappa_star requires N - 2(1+a-b) > 0")
    base = q.N * (q.N - 2.0 - 2.0 * q.a) ** 2 / m
    return base ** (m / (4.0 * d))


def u_star(q: CknParams, r) -> np.ndarray | float:
    """Radial extremal u*(r) in the original variables,

        u*(r) = kappa* (1 + r^(2(N-2-2a)(1+a-b)/(N-2(1+a-b))))^(-(N-2(1+a-b))/(2(1+a-b))).

    Requires an interior point with a < a_c; r must be positive.  The
    log-radial change of variables t = log r maps this profile onto w*.
    """
    if q.region != "interior":
        raise DomainError(f"u_star requires an interior point, got region {q.region!r}")
    if q.a > critical_a(q.N):
        raise DomainError(f"u_star requires a < a_c = {critical_a(q.N)}, got a = {q.a}")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0.0):
        raise DomainError("u_star requires r > 0")
    d = 1.0 + q.a - q.b
    m = q.N - 2.0 * d
    inner = 2.0 * (q.N - 2.0 - 2.0 * q.a) * d / m
    outer = m / (2.0 * d)
    # log(1 + r^inner) via logaddexp keeps huge r^inner in range.
    log_term = np.logaddexp(0.0, inner * np.log(r_arr))
    out = np.exp(math.log(kappa_star(q)) - outer * log_term)
    return out if out.ndim else float(out)


def c_p_quadrature(p: float) -> float:
    """c_p by adaptive quadrature of int_0^1 (1+s^((p-2)/p))^(-2p/(p-2)) ds,
    absolute error <= 1e-12.

    Rejects p - 2 < 1e-3, where the integrand exponent overflows any
    linear-domain evaluation; c_p_gamma covers that regime.  (For p - 2
    within roughly [1e-3, 4e-3] the value of c_p itself is below the float64
    normal range; the returned underflowed value still meets the absolute
    error contract.)
    """
    if p - 2.0 < CP_QUADRATURE_MIN_PMINUS2:
        raise DomainError(
            f"c_p_quadrature requires p - 2 >= {CP_QUADRATURE_MIN_PMINUS2}; "
            "use c_p_gamma near p = 2"
        )
    expo = 2.0 * p / (p - 2.0)
    inner = (p - 2.0) / p

    def integrand(s: float) -> float:
        return math.exp(-expo * math.log1p(s ** inner))

    val, abserr = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    if abserr > 1e-12:  # pragma: no cover - QUADPACK meets this easily here
        raise ConvergenceError(
            f"c_p quadrature at p = {p} reports error estimate {abserr} > 1e-12"
        )
    return val


def log_c_p_gamma(p: float) -> float:
    """log c_p from the Gamma form, finite for p arbitrarily close to 2:

        c_p = 2^(-2p/(p-2)) sqrt(pi) Gamma(x+1/2)/Gamma(x),  x = 1/2 + p/(p-2).

    Uses the C library log-Gamma (documented relative accuracy ~1e-15 on
    [0.5, 100], well inside the 1e-13 budget).
    """
    if p <= 2.0:
        raise DomainError(f"c_p requires p > 2, got p = {p}")
    x = 0.5 + p / (p - 2.0)
    return (
        -2.0 * p / (p - 2.0) * math.log(2.0)
        + 0.5 * math.log(math.pi)
        + math.lgamma(x + 0.5)
        - math.lgamma(x)
    )


def c_p_gamma(p: float) -> float:
    """c_p evaluated entirely in the log domain via the Gamma form.

    The returned float underflows to 0 once log c_p < log(min subnormal)
    (p - 2 below roughly 4e-3); relative precision degrades only for
    p - 2 < 1e-12 where x itself loses digits.
    """
    return math.exp(log_c_p_gamma(p))


def c_p_normalized(p: float) -> float:
    """The rescaled quantity 2^(2p/(p-2)) sqrt(p-2) c_p, computed in the log
    domain; tends to sqrt(2 pi) as p -> 2+."""
    if p <= 2.0:
        raise DomainError(f"c_p_normalized requires p > 2, got p = {p}")
    return math.exp(
        2.0 * p / (p - 2.0) * math.log(2.0) + 0.5 * math.log(p - 2.0) + log_c_p_gamma(p)
    )


def lp_mass_1d_closed_form(c: CylParams) -> float:
    """int_R w*(t)^p dt from the closed form (2 Lambda p)^(p/(p-2)) * 2 c_p /
    (p sqrt(Lambda)), assembled in the log domain."""
    c.require_open_range("lp_mass_1d_closed_form")
    log_val = (
        c.p / (c.p - 2.0) * math.log(2.0 * c.lam * c.p)
        + math.log(2.0)
        + log_c_p_gamma(c.p)
        - math.log(c.p * c.sqrt_lam)
    )
    return math.exp(log_val)


def lp_mass_1d_quadrature(c: CylParams) -> float:
    """int_R w*(t)^p dt by adaptive quadrature, truncated where the integrand
    falls below 1e-18 of its peak (the decay is exp(-p sqrt(Lambda) t), so
    the cutoff is explicit)."""
    c.require_open_range("lp_mass_1d_quadrature")
    # cosh(alpha t)^(-2p/(p-2)) <= 1e-18  <=>  logcosh(alpha t) >= (p-2)/(2p) * 18 ln 10
    alpha = 0.5 * c.sqrt_lam * (c.p - 2.0)
    t_cut = ((c.p - 2.0) / (2.0 * c.p) * 18.0 * math.log(10.0) + math.log(2.0)) / alpha + 1.0

    def integrand(t: float) -> float:
        return float(w_star(c, t)) ** c.p

    val, _ = integrate.quad(integrand, 0.0, t_cut, epsabs=1e-14, epsrel=1e-13, limit=200)
    return 2.0 * val


@dataclass(frozen=True)
class RadialConstants:
    """Derived scalar constants of the radial extremal.

    inv_c_star is the inverse optimal constant among radial functions,
    |S^(N-1)|^(1-2/p) ||w*||_{L^p(R)}^(p-2); lp_mass_cyl is the cylinder
    p-mass ||w*||^p_{L^p(C)} (by direct quadrature; the closed form is
    exposed separately for cross-checking).
    """

    inv_c_star: float
    lp_norm_1d: float
    lp_mass_cyl: float
    c_p: float
    kappa_star: float


def radial_constants(c: CylParams) -> RadialConstants:
    """Fill all radial constants for cylinder parameters in the open range."""
    c.require_open_range("radial_constants")
    mass_1d = lp_mass_1d_quadrature(c)
    lp_norm_1d = mass_1d ** (1.0 / c.p)
    area = sphere_area(c.N)
    inv_c_star = area ** (1.0 - 2.0 / c.p) * lp_norm_1d ** (c.p - 2.0)
    return RadialConstants(
        inv_c_star=inv_c_star,
        lp_norm_1d=lp_norm_1d,
        lp_mass_cyl=area * mass_1d,
        c_p=c_p_gamma(c.p),
        kappa_star=kappa_star(ckn_from_cyl(c)),
    )


def lp_mass_cyl_closed_form(c: CylParams) -> float:
    """||w*||^p_{L^p(C)} = 4 |S^(N-1)| (2 Lambda p)^(p/(p-2)) c_p /
    (2 p sqrt(Lambda)); the independent closed-form route."""
    return sphere_area(c.N) * lp_mass_1d_closed_form(c)


def inv_c_star_closed_form(c: CylParams) -> float:
    """Inverse radial optimal constant assembled from the closed-form mass
    (log domain), avoiding quadrature entirely."""
    c.require_open_range("inv_c_star_closed_form")
    log_mass = (
        c.p / (c.p - 2.0) * math.log(2.0 * c.lam * c.p)
        + math.log(2.0)
        + log_c_p_gamma(c.p)
        - math.log(c.p * c.sqrt_lam)
    )
    log_val = (1.0 - 2.0 / c.p) * math.log(sphere_area(c.N)) + (c.p - 2.0) / c.p * log_mass
    return math.exp(log_val)
