"""Numerical tracing of the symmetry/symmetry-breaking boundary.

For each exponent p the threshold

    Lambda*(p) = sup { Lambda > 0 : the quotient has a radial minimizer }

is bracketed by bisection on the symmetry-breaking predicate: descend from
the radial profile perturbed in the least-stable direction and ask whether
the final energy undercuts the closed-form radial constant by more than the
breaking margin.  The predicate is monotone in Lambda (once a non-radial
extremal exists at some Lambda it exists for all larger Lambda at the same
p), so bisection is valid; the estimate is reported as a bracket midpoint
with its width, never as a point value, because descent can only ever
certify breaking, i.e. upper bounds on Lambda*.

The spectral threshold (zero of the closed-form bottom eigenvalue of the
linearization) equals 4(N-1)/(p^2-4) and is tabulated alongside for the
conjecture gap report; no assertion that the two coincide is ever made by
this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import BracketError, ConvergenceError, DomainError
from .grid import Grid, OneDGrid
from .params import CylParams, critical_a, critical_p, fs_lambda
from .solver import MinimizeOptions, minimize, perturbed_radial_init
from .spectral import ModeProblem, mu1_closed_form, poschl_teller_ground


@dataclass
class BoundaryOptions:
    """Grid resolution and descent settings used by every predicate
    evaluation of a scan (recorded in the outputs)."""

    nt: int = 2001
    nphi: int = 32
    decay_margin: float = 25.0
    perturbation: float = 0.1
    breaking_margin: float = 1e-3
    max_iter: int = 20000
    #: widen a failed bracket geometrically up to hi = widen_cap * Lambda_FS
    widen_cap: float = 4.0

    def minimize_options(self) -> MinimizeOptions:
        return MinimizeOptions(max_iter=self.max_iter,
                               breaking_margin=self.breaking_margin)


@dataclass
class BoundaryPoint:
    """One scanned exponent: the bisection bracket for Lambda*, the spectral
    threshold, and both expressed in the (a, b) chart."""

    p: float
    lambda_star_num: float
    bracket_width: float
    lambda_fs: float
    mu1_zero: float
    a_star_num: float
    a_fs: float
    margin: float
    converged: bool
    resolution: dict
    note: str = ""
    trace: list = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "lambda_star_num": self.lambda_star_num,
            "bracket_width": self.bracket_width,
            "lambda_fs": self.lambda_fs,
            "mu1_zero": self.mu1_zero,
            "a_star_num": self.a_star_num,
            "a_fs": self.a_fs,
            "margin": self.margin,
            "converged": self.converged,
            "resolution": self.resolution,
            "note": self.note,
        }


@dataclass
class BoundaryCurve:
    """Scan result over an increasing p grid, all points at one resolution."""

    N: int
    tol: float
    points: list[BoundaryPoint]

    CSV_COLUMNS = ("p", "lambda_star_num", "bracket_width", "lambda_fs",
                   "a_star_num", "a_fs", "margin", "converged")

    def rows(self) -> list[tuple]:
        out = []
        for pt in self.points:
            out.append((pt.p, pt.lambda_star_num, pt.bracket_width,
                        pt.lambda_fs, pt.a_star_num, pt.a_fs, pt.margin,
                        pt.converged))
        return out

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "tol": self.tol,
            "points": [pt.as_dict() for pt in self.points],
        }


def detect_breaking(c: CylParams, grid: Grid | None = None,
                    opts: BoundaryOptions | None = None) -> tuple[bool, float]:
    """Symmetry-breaking predicate at fixed parameters.

    Descends from w* + perturbation * (degree-1 mode) and reports
    (broke_symmetry, relative energy margin).  A non-converged descent is
    indeterminate: the grid is refined once (nt and nphi doubled) and, if
    still non-converged, a ConvergenceError propagates; the answer is never
    fabricated from a non-converged state.
    """
    if opts is None:
        opts = BoundaryOptions()
    if grid is None:
        grid = Grid.for_cyl(c, nt=opts.nt, nphi=opts.nphi, margin=opts.decay_margin)
    report = minimize(c, perturbed_radial_init(grid, c, opts.perturbation),
                      opts.minimize_options())
    if not report.converged:
        fine = Grid(grid.N, grid.T, 2 * grid.nt - 1, 2 * grid.nphi)
        report = minimize(c, perturbed_radial_init(fine, c, opts.perturbation),
                          opts.minimize_options())
        if not report.converged:
            raise ConvergenceError(
                f"descent did not converge at (N={c.N}, p={c.p}, "
                f"Lambda={c.lam}) even after grid refinement"
            )
    return report.broke_symmetry, report.relative_gap


def _check_p(N: int, p: float) -> None:
    if not (2.0 < p < critical_p(N)):
        raise DomainError(
            f"p = {p} outside the open range (2, {critical_p(N)}) for N = {N}"
        )


def lambda_star_estimate(N: int, p: float, bracket: tuple[float, float],
                         tol: float, opts: BoundaryOptions | None = None) -> BoundaryPoint:
    """Bisection estimate of Lambda*(p) to bracket width <= tol.

    Preconditions: no breaking at the lower endpoint, breaking at the upper
    one.  Endpoints violating this are widened geometrically; if even
    hi = widen_cap * Lambda_FS shows no breaking the grid is declared too
    coarse and a BracketError is raised (an explicit failure, never a
    fabricated value).
    """
    if opts is None:
        opts = BoundaryOptions()
    _check_p(N, p)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0.0 < lo < hi):
        raise BracketError(f"degenerate bracket ({lo}, {hi})")
    if tol <= 0.0:
        raise DomainError(f"tol must be positive, got {tol}")

    lam_fs = fs_lambda(N, p)
    trace: list[tuple[float, bool]] = []
    margins: dict[float, float] = {}

    def predicate(lam: float) -> bool:
        flag, gap = detect_breaking(CylParams(N, lam, p), opts=opts)
        trace.append((lam, flag))
        if flag:
            margins[lam] = gap
        return flag

    cap = opts.widen_cap * lam_fs
    while predicate(lo):
        lo *= 0.5
        if lo < lam_fs / 100.0:
            raise BracketError(
                f"breaking detected all the way down to Lambda = {lo * 2.0}; "
                "no symmetric endpoint found"
            )
    while not predicate(hi):
        hi *= 2.0
        if hi > cap:
            raise BracketError(
                f"no symmetry breaking detected up to Lambda = {hi / 2.0} "
                f"(cap {cap}); grid too coarse"
            )

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid

    trace.sort(key=lambda item: item[0])
    flags = [f for _, f in trace]
    if flags != sorted(flags):
        raise ConvergenceError(
            f"breaking predicate not monotone along the bisection trace at "
            f"(N={N}, p={p}): {trace}"
        )

    lam_star = 0.5 * (lo + hi)
    return BoundaryPoint(
        p=p,
        lambda_star_num=lam_star,
        bracket_width=hi - lo,
        lambda_fs=lam_fs,
        mu1_zero=mu1_threshold(N, p),
        a_star_num=critical_a(N) - math.sqrt(lam_star),
        a_fs=critical_a(N) - math.sqrt(lam_fs),
        margin=margins.get(hi, math.nan),
        converged=True,
        resolution={"nt": opts.nt, "nphi": opts.nphi,
                    "decay_margin": opts.decay_margin,
                    "breaking_margin": opts.breaking_margin, "tol": tol},
        trace=trace,
    )


def default_bracket(N: int, p: float) -> tuple[float, float]:
    """Initial bisection bracket straddling the spectral threshold."""
    lam_fs = fs_lambda(N, p)
    return 0.5 * lam_fs, 1.5 * lam_fs


def scan(N: int, p_grid, tol: float, opts: BoundaryOptions | None = None) -> BoundaryCurve:
    """Trace the boundary over an increasing p grid.

    Per-point failures (bracket or convergence) are recorded in place with
    NaN estimates and the failure note; the scan itself never aborts.
    """
    if opts is None:
        opts = BoundaryOptions()
    p_list = [float(p) for p in p_grid]
    if sorted(p_list) != p_list or len(set(p_list)) != len(p_list):
        raise DomainError("p_grid must be strictly increasing")
    points = []
    for p in p_list:
        _check_p(N, p)
        try:
            points.append(lambda_star_estimate(N, p, default_bracket(N, p), tol, opts))
        except (BracketError, ConvergenceError) as exc:
            points.append(BoundaryPoint(
                p=p,
                lambda_star_num=math.nan,
                bracket_width=math.nan,
                lambda_fs=fs_lambda(N, p),
                mu1_zero=mu1_threshold(N, p),
                a_star_num=math.nan,
                a_fs=critical_a(N) - math.sqrt(fs_lambda(N, p)),
                margin=math.nan,
                converged=False,
                resolution={"nt": opts.nt, "nphi": opts.nphi,
                            "decay_margin": opts.decay_margin,
                            "breaking_margin": opts.breaking_margin, "tol": tol},
                note=f"{type(exc).__name__}: {exc}",
            ))
    return BoundaryCurve(N=N, tol=tol, points=points)


def mu1_threshold(N: int, p: float) -> float:
    """Zero of the closed-form bottom eigenvalue mu^1 in Lambda: solving
    N - 1 - (p^2-4) Lambda / 4 = 0 gives 4(N-1)/(p^2-4)."""
    if p <= 2.0:
        raise DomainError(f"mu1_threshold requires p > 2, got p = {p}")
    return 4.0 * (N - 1.0) / (p * p - 4.0)


def mu1_numeric(N: int, p: float, lam: float, grid: OneDGrid | None = None) -> float:
    """mu^1 from the discretized 1D eigensolver (gamma_1 + ground
    eigenvalue); the independent cross-check of the closed form."""
    c = CylParams(N, lam, p)
    mp = ModeProblem(c, k=1)
    if grid is None:
        # alpha * h <= 0.01 and a comfortable decay margin for the mode.
        h = min(0.01, 0.01 / mp.alpha)
        T = max(20.0, 12.0 / max(mp.alpha, 1e-8))
        grid = OneDGrid.from_spacing(T, h)
    return poschl_teller_ground(mp, grid).mu1


def mu1_sign_change_bracket(N: int, p: float, lo: float, hi: float,
                            grid: OneDGrid | None = None) -> bool:
    """Whether the numerical mu^1 changes sign over [lo, hi] in Lambda."""
    return mu1_numeric(N, p, lo, grid) > 0.0 > mu1_numeric(N, p, hi, grid)
