"""Linearized stability analysis around the radial profile.

Expanding a zero-spherical-mean perturbation of w* in spherical harmonics
decouples the second-variation quadratic form

    Q[psi] = ||grad psi||^2 + Lambda ||psi||^2 - (p-1) int (w*)^(p-2) psi^2

into 1D problems indexed by the harmonic degree k >= 1: each contributes

    ||f'||^2 + gamma_k ||f||^2 - (p-1) int (w*)^(p-2) f^2,
    gamma_k = Lambda + k(k + N - 2).

Since (p-1)(w*)^(p-2) = beta V with beta = Lambda p (p-1)/2 and the
sech-squared potential V(t) = cosh((p-2) sqrt(Lambda) t / 2)^(-2), the
bottom of each sector is the ground state of the classic solvable
Schroedinger problem -f'' - beta V f = lambda f, whose first eigenvalue is
-p^2 Lambda / 4 with eigenfunction V^(p/(2(p-2))).  The k = 1 sector is the
least stable, giving the closed form

    mu^1 = gamma_1 - p^2 Lambda / 4 = N - 1 - (p^2 - 4) Lambda / 4,

which vanishes exactly on the instability curve Lambda = 4(N-1)/(p^2-4).

The numerical counterpart discretizes the 1D operator with second-order
central differences and Dirichlet ends and extracts the bottom eigenvalue by
bisection on the Sturm sequence plus inverse-iteration refinement; no
general-purpose eigensolver is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainError, NoBoundStateError
from .grid import Field, OneDGrid
from .params import CylParams
from .radial import _log_cosh, w_star

#: Discrete eigenvalues above -ESSENTIAL_SPECTRUM_FACTOR * h^2 are treated
#: as artifacts of the truncated operator, not bound states.
ESSENTIAL_SPECTRUM_FACTOR = 10.0


@dataclass(frozen=True)
class ModeProblem:
    """The reduced 1D eigenproblem of the harmonic-degree-k sector."""

    cyl: CylParams
    k: int = 1

    def __post_init__(self) -> None:
        self.cyl.require_open_range("ModeProblem")
        if self.k < 1:
            raise DomainError(f"harmonic index k must be >= 1, got {self.k}")

    @property
    def gamma_k(self) -> float:
        return self.cyl.lam + self.k * (self.k + self.cyl.N - 2.0)

    @property
    def beta(self) -> float:
        """Potential strength Lambda p (p-1) / 2."""
        c = self.cyl
        return 0.5 * c.lam * c.p * (c.p - 1.0)

    @property
    def alpha(self) -> float:
        """Potential width parameter (p-2) sqrt(Lambda) / 2."""
        c = self.cyl
        return 0.5 * (c.p - 2.0) * c.sqrt_lam

    def potential(self, t) -> np.ndarray:
        """V(t) = cosh(alpha t)^(-2), with 0 < V <= 1 and V(0) = 1."""
        z = self.alpha * np.asarray(t, dtype=float)
        return np.exp(-2.0 * _log_cosh(z))


@dataclass
class EigenResult:
    """Ground eigenpair of the discretized mode problem."""

    lambda0: float
    f: np.ndarray          # eigenfunction on the full grid (zero at the ends)
    grid: OneDGrid
    mu1: float             # gamma_k + lambda0

    def is_sign_definite(self, rel_tol: float = 1e-10) -> bool:
        cutoff = rel_tol * np.max(np.abs(self.f))
        return not (np.any(self.f > cutoff) and np.any(self.f < -cutoff))


def mu1_closed_form(c: CylParams) -> float:
    """Bottom of the zero-mean quadratic form: N - 1 - (p^2 - 4) Lambda / 4."""
    if c.p <= 2.0 or c.lam <= 0.0:
        raise DomainError("mu1_closed_form requires p > 2 and Lambda > 0")
    return c.N - 1.0 - 0.25 * (c.p * c.p - 4.0) * c.lam


def proposition_regime_ok(c: CylParams) -> bool:
    """Whether Lambda > (N-2)^2/4, the regime in which the closed form for
    mu^1 is stated; the formula is evaluated for all Lambda > 0 regardless,
    and callers may surface this flag."""
    return c.lam > 0.25 * (c.N - 2.0) ** 2


def psi1(c: CylParams, t) -> np.ndarray | float:
    """Radial part of the destabilizing mode, V(t)^(p/(2(p-2))); the angular
    factor is a degree-1 spherical harmonic.  Proportional to (w*)^(p/2)."""
    c.require_open_range("psi1")
    z = 0.5 * (c.p - 2.0) * c.sqrt_lam * np.asarray(t, dtype=float)
    out = np.exp(-(c.p / (c.p - 2.0)) * _log_cosh(z))
    return out if out.ndim else float(out)


def _sturm_count(diag: np.ndarray, off_sq: float, x: float) -> int:
    """Number of eigenvalues of the symmetric tridiagonal matrix (constant
    off-diagonal) strictly below x, via the LDL^T pivot recurrence."""
    tiny = 1e-300
    q = diag[0] - x
    count = 1 if q < 0.0 else 0
    for d in diag[1:]:
        if q == 0.0:
            q = tiny
        q = d - x - off_sq / q
        if q < 0.0:
            count += 1
    return count


def _ground_eigenvalue_bisection(diag: np.ndarray, off: float,
                                 lo: float, hi: float) -> float:
    """Bisect for the smallest eigenvalue in (lo, hi]; assumes at least one
    eigenvalue below hi and none below lo."""
    off_sq = off * off
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _sturm_count(diag, off_sq, mid) >= 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def poschl_teller_ground(mp: ModeProblem, grid: OneDGrid) -> EigenResult:
    """Ground eigenpair of -f'' - beta V f on [-T, T], second-order central
    differences with Dirichlet ends.

    The bottom eigenvalue is located by Sturm-sequence bisection on the
    tridiagonal matrix and refined by inverse iteration plus a Rayleigh
    quotient; accuracy is O(h^2).  Raises NoBoundStateError when no
    eigenvalue lies below the essential-spectrum proxy -10 h^2 (a truncated
    operator produces spurious near-zero modes that must not be reported as
    bound states).
    """
    h = grid.h
    if mp.alpha * h > 0.05:
        raise DomainError(
            f"grid spacing h = {h} too coarse for potential width 1/alpha = "
            f"{1.0 / mp.alpha}"
        )
    # Ground-state decay rate of the solvable problem; the Dirichlet
    # truncation error is exp(-2 kappa T), so demand a modest margin.
    s = 0.5 * (-1.0 + math.sqrt(1.0 + 4.0 * mp.beta / mp.alpha ** 2))
    kappa = mp.alpha * s
    if kappa * grid.T < 10.0:
        raise DomainError(
            f"grid half-width T = {grid.T} too small: decay margin "
            f"kappa*T = {kappa * grid.T:.2f} < 10"
        )
    t = grid.points()
    t_in = t[1:-1]
    v = mp.potential(t_in)
    diag = 2.0 / h ** 2 - mp.beta * v
    off = -1.0 / h ** 2

    guard = -ESSENTIAL_SPECTRUM_FACTOR * h * h
    if _sturm_count(diag, off * off, guard) < 1:
        raise NoBoundStateError(
            f"no eigenvalue below the essential-spectrum proxy {guard}"
        )
    lam0 = _ground_eigenvalue_bisection(diag, off, lo=-mp.beta - 1.0, hi=guard)

    # Inverse iteration at a slightly detuned shift, then Rayleigh quotient.
    n = diag.size
    shift = lam0 - max(1e-10, 1e-8 * abs(lam0))
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1, :] = diag - shift
    ab[2, :-1] = off
    f = np.exp(-(mp.alpha * s) * np.abs(t_in))  # analytic-decay seed
    for _ in range(3):
        f = solve_banded((1, 1), ab, f)
        f /= math.sqrt(float(f @ f))
    tf = diag * f
    tf[:-1] += off * f[1:]
    tf[1:] += off * f[:-1]
    lam0 = float(f @ tf)

    if lam0 >= guard:
        raise NoBoundStateError(
            f"refined eigenvalue {lam0} not below the essential-spectrum "
            f"proxy {guard}"
        )

    full = np.zeros(grid.n)
    full[1:-1] = f
    if full[np.argmax(np.abs(full))] < 0.0:
        full = -full
    full /= math.sqrt(h * float(full @ full))  # L2(R) normalization
    return EigenResult(lambda0=lam0, f=full, grid=grid, mu1=mp.gamma_k + lam0)


def q_form(psi: Field, c: CylParams) -> float:
    """Discrete second-variation quadratic form Q[psi] on the solver grid.

    Requires psi to have zero spherical mean at each t (relative tolerance
    1e-8); for the normalized destabilizing mode this reproduces mu^1 up to
    discretization error.
    """
    c.require_open_range("q_form")
    g = psi.grid
    vals = psi.values
    sph = g.sphere
    coeffs = sph.to_coeff(vals)
    total = math.sqrt(float(g.tweights @ np.sum(coeffs * coeffs, axis=1)))
    if total == 0.0:
        raise DomainError("q_form requires a nonzero field")
    mean_part = math.sqrt(float(g.tweights @ (coeffs[:, 0] * coeffs[:, 0])))
    if mean_part > 1e-8 * total:
        raise DomainError(
            f"q_form requires zero spherical mean: mean fraction "
            f"{mean_part / total:.3e} exceeds 1e-8"
        )
    diff = np.diff(vals, axis=0)
    grad_t = float((np.sum(diff * diff, axis=0) @ sph.weights) / g.h)
    grad_theta = float(g.tweights @ np.sum(coeffs * coeffs * sph.eigs[None, :], axis=1))
    mass = float(g.tweights @ ((vals * vals) @ sph.weights))
    w = w_star(c, g.t)
    weight = (w ** (c.p - 2.0))[:, None]
    potential = float(g.tweights @ ((weight * vals * vals) @ sph.weights))
    return grad_t + grad_theta + c.lam * mass - (c.p - 1.0) * potential
