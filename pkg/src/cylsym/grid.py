"""Discretization of the truncated cylinder [-T, T] x S^(N-1).

Fields are restricted to the axisymmetric sector: they depend on t and on
the polar angle only (the first unstable angular direction lives there, so
the radial vs. non-radial question is decidable in this sector).  The
angular factor is handled spectrally:

* N >= 3: Gauss-Jacobi nodes/weights in x = cos(phi) with the surface
  measure (1-x^2)^((N-3)/2) absorbed into the weights (plain Gauss-Legendre
  for N = 3), and an orthonormal basis of zonal harmonics (Gegenbauer
  polynomials) whose Laplace-Beltrami eigenvalues are k(k+N-2).
* N = 2: uniform nodes on the full circle with the trigonometric basis and
  eigenvalues k^2.

With nphi nodes the basis is square and exactly unitary under the discrete
inner product, so spherical means, angular Laplacians and angular Dirichlet
forms are all exact for band-limited fields; the sum of the angular weights
reproduces the sphere area to machine precision for every N.

The t direction is a uniform grid with trapezoid weights; derivative terms
are handled by the solver (second-order differences).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_gegenbauer, eval_legendre, roots_jacobi

from .errors import DomainError
from .params import CylParams
from .radial import sphere_area

#: Default decay margin sqrt(Lambda) * T for grids built from parameters.
DECAY_MARGIN = 25.0


class SphereFactor:
    """Angular quadrature/basis bundle for the sphere factor of the cylinder.

    Attributes
    ----------
    nodes : angular coordinates (x = cos(phi) for N >= 3, phi on [0, 2pi)
        for N = 2)
    weights : quadrature weights, summing to the sphere area
    basis : (nphi, nphi) matrix of orthonormal eigenfunctions (columns)
    eigs : Laplace-Beltrami eigenvalue of each basis column
    """

    def __init__(self, N: int, nphi: int):
        if N < 2:
            raise DomainError(f"SphereFactor requires N >= 2, got {N}")
        if nphi < 4:
            raise DomainError(f"SphereFactor requires nphi >= 4, got {nphi}")
        self.N = N
        self.nphi = nphi
        if N == 2:
            self.nodes, self.weights, self.basis, self.eigs = _circle_basis(nphi)
        else:
            self.nodes, self.weights, self.basis, self.eigs = _polar_basis(N, nphi)
        # Precomputed operators acting on nodal rows: values @ matrix.
        self._to_coeff = self.weights[:, None] * self.basis
        self._lap = (self._to_coeff * self.eigs[None, :]) @ self.basis.T
        self._mean = np.outer(self._to_coeff[:, 0], self.basis[:, 0])

    def to_coeff(self, values: np.ndarray) -> np.ndarray:
        """Expand nodal values (last axis) in the orthonormal basis."""
        return values @ self._to_coeff

    def from_coeff(self, coeffs: np.ndarray) -> np.ndarray:
        return coeffs @ self.basis.T

    def laplacian(self, values: np.ndarray) -> np.ndarray:
        """Apply -Delta_theta (positive semidefinite) along the last axis."""
        return values @ self._lap

    def mean_projection(self, values: np.ndarray) -> np.ndarray:
        """Project onto theta-independent fields (spherical mean at each t)."""
        return values @ self._mean

    def polar_angles(self) -> np.ndarray:
        """Nodes expressed as angles in [0, pi] (N >= 3) or [0, 2pi) (N = 2)."""
        if self.N == 2:
            return self.nodes
        return np.arccos(np.clip(self.nodes, -1.0, 1.0))


def _polar_basis(N: int, nphi: int):
    alpha = 0.5 * (N - 3)
    x, wq = roots_jacobi(nphi, alpha, alpha)
    order = np.argsort(x)
    x, wq = x[order], wq[order]
    weights = wq * sphere_area(N - 1)
    k = np.arange(nphi)
    if N == 3:
        raw = eval_legendre(k[None, :], x[:, None])
    else:
        raw = eval_gegenbauer(k[None, :], 0.5 * (N - 2), x[:, None])
    norms = np.sqrt(np.sum(weights[:, None] * raw * raw, axis=0))
    basis = raw / norms[None, :]
    eigs = k * (k + N - 2.0)
    return x, weights, basis, eigs


def _circle_basis(nphi: int):
    phi = 2.0 * math.pi * np.arange(nphi) / nphi
    weights = np.full(nphi, 2.0 * math.pi / nphi)
    cols = [np.full(nphi, 1.0 / math.sqrt(2.0 * math.pi))]
    eigs = [0.0]
    kmax = (nphi - 1) // 2
    for k in range(1, kmax + 1):
        cols.append(np.cos(k * phi) / math.sqrt(math.pi))
        eigs.append(float(k * k))
        cols.append(np.sin(k * phi) / math.sqrt(math.pi))
        eigs.append(float(k * k))
    if nphi % 2 == 0:
        m = nphi // 2
        cols.append(np.cos(m * phi) / math.sqrt(2.0 * math.pi))
        eigs.append(float(m * m))
    basis = np.stack(cols, axis=1)
    return phi, weights, basis, np.asarray(eigs)


class Grid:
    """Tensor grid on the truncated cylinder: uniform t in [-T, T] (nt odd,
    so a center node exists for recentering) times a SphereFactor."""

    def __init__(self, N: int, T: float, nt: int, nphi: int):
        if T <= 0.0 or not math.isfinite(T):
            raise DomainError(f"grid half-length T must be positive, got {T}")
        if nt < 9 or nt % 2 == 0:
            raise DomainError(f"nt must be odd and >= 9, got {nt}")
        self.N = N
        self.T = float(T)
        self.nt = nt
        self.nphi = nphi
        self.sphere = SphereFactor(N, nphi)
        self.t = np.linspace(-self.T, self.T, nt)
        self.h = 2.0 * self.T / (nt - 1)
        tw = np.full(nt, self.h)
        tw[0] = tw[-1] = 0.5 * self.h
        self.tweights = tw

    @classmethod
    def for_cyl(cls, c: CylParams, nt: int = 2001, nphi: int = 32,
                margin: float = DECAY_MARGIN) -> "Grid":
        """Grid sized so that sqrt(Lambda) * T equals the decay margin."""
        return cls(c.N, margin / c.sqrt_lam, nt, nphi)

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature of a nodal array over the truncated cylinder."""
        return float(self.tweights @ (values @ self.sphere.weights))

    def decay_margin(self, c: CylParams) -> float:
        return c.sqrt_lam * self.T

    def metadata(self) -> dict:
        return {"N": self.N, "T": self.T, "nt": self.nt, "nphi": self.nphi}

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Grid)
            and (self.N, self.nt, self.nphi) == (other.N, other.nt, other.nphi)
            and self.T == other.T
        )


@dataclass
class Field:
    """Nodal values of a function on a Grid, tagged with its (N, Lambda, p)
    context."""

    grid: Grid
    values: np.ndarray
    cyl: CylParams

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.nt, self.grid.nphi):
            raise DomainError(
                f"field shape {self.values.shape} does not match grid "
                f"({self.grid.nt}, {self.grid.nphi})"
            )
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field contains non-finite entries")
        if self.cyl.N != self.grid.N:
            raise DomainError("field context dimension differs from grid dimension")

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.cyl)

    def l2_norm(self) -> float:
        return math.sqrt(self.grid.integrate(self.values * self.values))

    def lp_norm(self, p: float | None = None) -> float:
        q = self.cyl.p if p is None else p
        return self.grid.integrate(np.abs(self.values) ** q) ** (1.0 / q)


@dataclass(frozen=True)
class OneDGrid:
    """Uniform 1D grid on [-T, T] (endpoints included) for the reduced
    eigenproblem."""

    T: float
    n: int

    def __post_init__(self) -> None:
        if self.T <= 0.0:
            raise DomainError(f"T must be positive, got {self.T}")
        if self.n < 16:
            raise DomainError(f"n must be >= 16, got {self.n}")

    @classmethod
    def from_spacing(cls, T: float, h: float) -> "OneDGrid":
        n = int(round(2.0 * T / h)) + 1
        return cls(T=T, n=n)

    @property
    def h(self) -> float:
        return 2.0 * self.T / (self.n - 1)

    def points(self) -> np.ndarray:
        return np.linspace(-self.T, self.T, self.n)


def save_field(field: Field, csv_path, sidecar_path=None) -> None:
    """Write a field as CSV rows (t, phi, value) plus a JSON sidecar with the
    grid metadata; binary-free and reloadable with load_field."""
    from ._serialize import format_float

    csv_path = str(csv_path)
    if sidecar_path is None:
        sidecar_path = csv_path + ".json"
    angles = field.grid.sphere.polar_angles()
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,phi,value\n")
        for i, t in enumerate(field.grid.t):
            for j, phi in enumerate(angles):
                fh.write(
                    f"{format_float(t)},{format_float(phi)},"
                    f"{format_float(field.values[i, j])}\n"
                )
    meta = {
        "grid": field.grid.metadata(),
        "cyl": {"N": field.cyl.N, "lambda": field.cyl.lam, "p": field.cyl.p},
    }
    with open(str(sidecar_path), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_field(csv_path, sidecar_path=None) -> Field:
    """Reconstruct a Field written by save_field, validating that the node
    coordinates in the CSV match the grid rebuilt from the sidecar."""
    csv_path = str(csv_path)
    if sidecar_path is None:
        sidecar_path = csv_path + ".json"
    with open(str(sidecar_path), "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    g = meta["grid"]
    grid = Grid(g["N"], g["T"], g["nt"], g["nphi"])
    cyl = CylParams(meta["cyl"]["N"], meta["cyl"]["lambda"], meta["cyl"]["p"])
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    if data.shape != (grid.nt * grid.nphi, 3):
        raise DomainError(f"field CSV has shape {data.shape}, expected "
                          f"({grid.nt * grid.nphi}, 3)")
    t_col = data[:, 0].reshape(grid.nt, grid.nphi)
    phi_col = data[:, 1].reshape(grid.nt, grid.nphi)
    if not np.allclose(t_col, grid.t[:, None], atol=1e-12, rtol=0.0):
        raise DomainError("t coordinates in CSV do not match the sidecar grid")
    if not np.allclose(phi_col, grid.sphere.polar_angles()[None, :], atol=1e-12, rtol=0.0):
        raise DomainError("angular coordinates in CSV do not match the sidecar grid")
    values = data[:, 2].reshape(grid.nt, grid.nphi)
    return Field(grid, values, cyl)
