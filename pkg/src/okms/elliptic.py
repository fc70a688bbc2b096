"""Neumann elliptic machinery: cosine-spectral transforms on boxes and
cumulative-flux solves on radial grids.

The box operators diagonalize -Laplace in the orthonormal DCT-II basis, so
Neumann conditions are exact and the k=0 (mass) mode is exactly invariant
under every solve.  The zero mode of any inverse-Laplacian output is pinned
to 0, i.e. outputs are mean-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .core import BoxGrid, RadialGrid, ScalarField, field_mean, unit_sphere_area
from .errors import NonZeroMeanError, UnsupportedDomainError

TOL_MEAN = 1.0e-10


def _require_box(f: ScalarField) -> BoxGrid:
    if not isinstance(f.grid, BoxGrid):
        raise UnsupportedDomainError("operation requires a box grid")
    return f.grid


_eig_cache: dict = {}


def eigenvalues(grid: BoxGrid) -> np.ndarray:
    """mu_k = sum_i (pi k_i / L_i)^2 per cosine mode, shaped like the grid."""
    key = (grid.lengths, grid.cells)
    mu = _eig_cache.get(key)
    if mu is None:
        axes = [
            (np.pi * np.arange(c) / l) ** 2 for c, l in zip(grid.cells, grid.lengths)
        ]
        mu = axes[0]
        for a in axes[1:]:
            mu = mu[..., None] + a
        _eig_cache[key] = mu
    return mu


@dataclass
class SpectralField:
    """Cosine-basis coefficients of a box field (orthonormal DCT-II)."""

    grid: BoxGrid
    coeffs: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return eigenvalues(self.grid)


def to_spectral(f: ScalarField) -> SpectralField:
    grid = _require_box(f)
    coeffs = scipy.fft.dctn(f.values, type=2, norm="ortho")
    return SpectralField(grid, coeffs)


def from_spectral(F: SpectralField) -> ScalarField:
    values = scipy.fft.idctn(F.coeffs, type=2, norm="ortho")
    return ScalarField(F.grid, values)


def _check_mean_zero(f: ScalarField, tol=TOL_MEAN) -> None:
    mean = field_mean(f)
    if abs(mean) > tol:
        raise NonZeroMeanError(mean, tol)


def neumann_poisson_solve(f: ScalarField, tol_mean=TOL_MEAN) -> ScalarField:
    """Solve -Laplace v = f with Neumann conditions and mean(v) = 0."""
    grid = _require_box(f)
    _check_mean_zero(f, tol_mean)
    mu = eigenvalues(grid)
    F = to_spectral(f)
    vk = np.zeros_like(F.coeffs)
    nz = mu > 0
    vk[nz] = F.coeffs[nz] / mu[nz]
    return from_spectral(SpectralField(grid, vk))


def laplacian_apply(f: ScalarField) -> ScalarField:
    """Spectral Laplacian: multiply by -mu_k in cosine space."""
    grid = _require_box(f)
    F = to_spectral(f)
    return from_spectral(SpectralField(grid, -eigenvalues(grid) * F.coeffs))


def gradient_norm_sq(f: ScalarField) -> float:
    """Integral of |grad f|^2 via the spectral representation."""
    grid = _require_box(f)
    F = to_spectral(f)
    return grid.cell_volume * float(np.sum(eigenvalues(grid) * F.coeffs**2))


def hminus1_inner(f: ScalarField, g: ScalarField, tol_mean=TOL_MEAN) -> float:
    """H^-1 inner product of two mean-zero box fields: sum f_k g_k / mu_k."""
    grid = _require_box(f)
    if g.grid is not f.grid and g.grid != f.grid:
        raise UnsupportedDomainError("fields live on different grids")
    _check_mean_zero(f, tol_mean)
    _check_mean_zero(g, tol_mean)
    mu = eigenvalues(grid)
    Fk = to_spectral(f).coeffs
    Gk = to_spectral(g).coeffs
    nz = mu > 0
    return grid.cell_volume * float(np.sum(Fk[nz] * Gk[nz] / mu[nz]))


def hminus1_norm_sq(f: ScalarField, tol_mean=TOL_MEAN) -> float:
    return hminus1_inner(f, f, tol_mean=tol_mean)


# --- radial counterparts -------------------------------------------------
#
# On the radial mesh the Neumann Poisson problem reduces to one cumulative
# flux integral: r^(N-1) v'(r) = -int_0^r s^(N-1) f(s) ds.  All radial
# H^-1 quantities below are built from that flux.


def _radial_flux(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """g(r_j) = int_0^{r_j} s^(N-1) f(s) ds by the trapezoid rule."""
    n = grid.space_dim
    integrand = grid.r ** (n - 1) * values
    out = np.zeros_like(integrand)
    np.cumsum(0.5 * grid.h * (integrand[1:] + integrand[:-1]), out=out[1:])
    return out


def radial_poisson_solve(f: ScalarField, tol_mean=TOL_MEAN) -> ScalarField:
    """Solve -Laplace v = f on the ball, radial, Neumann, mean(v) = 0."""
    grid = f.grid
    if not isinstance(grid, RadialGrid):
        raise UnsupportedDomainError("radial_poisson_solve requires a radial grid")
    _check_mean_zero(f, tol_mean)
    g = _radial_flux(grid, f.values)
    n = grid.space_dim
    with np.errstate(divide="ignore", invalid="ignore"):
        vprime = -g / grid.r ** (n - 1)
    vprime[0] = 0.0  # flux vanishes like r^N at the origin
    v = np.zeros_like(vprime)
    np.cumsum(0.5 * grid.h * (vprime[1:] + vprime[:-1]), out=v[1:])
    out = ScalarField(grid, v)
    out.values -= field_mean(out)
    return out


def radial_hminus1_norm_sq(f: ScalarField, tol_mean=TOL_MEAN) -> float:
    """H^-1 norm squared of a mean-zero radial field: int |grad Δ^-1 f|^2."""
    grid = f.grid
    if not isinstance(grid, RadialGrid):
        raise UnsupportedDomainError("radial_hminus1_norm_sq requires a radial grid")
    _check_mean_zero(f, tol_mean)
    g = _radial_flux(grid, f.values)
    n = grid.space_dim
    # integrand omega_N r^(1-N) g(r)^2 vanishes like r^(N+1) at the origin
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = unit_sphere_area(n) * g**2 / grid.r ** (n - 1)
    integrand[0] = 0.0
    return float(np.trapezoid(integrand, dx=grid.h))


_face_cache: dict = {}


def _face_areas(grid: RadialGrid) -> np.ndarray:
    """omega_N r^(N-1) at the interior cell faces r_{j+1/2}."""
    key = (grid.space_dim, grid.nodes)
    a = _face_cache.get(key)
    if a is None:
        r_face = 0.5 * (grid.r[1:] + grid.r[:-1])
        a = unit_sphere_area(grid.space_dim) * r_face ** (grid.space_dim - 1)
        _face_cache[key] = a
    return a


def radial_laplacian_apply(f: ScalarField) -> ScalarField:
    """Divergence-form radial Laplacian with zero-flux boundary faces.

    Cell balance (F_{j+1/2} - F_{j-1/2}) / w_j with face fluxes
    F = omega_N r^(N-1) du/dr; the fluxes telescope, so the weighted sum of
    the output is exactly zero (discrete mass conservation)."""
    grid = f.grid
    if not isinstance(grid, RadialGrid):
        raise UnsupportedDomainError("radial grid required")
    flux = _face_areas(grid) * np.diff(f.values) / grid.h
    out = np.zeros_like(f.values)
    out[:-1] += flux
    out[1:] -= flux
    return ScalarField(grid, out / grid.cell_weights())


def radial_laplacian_matrix(grid: RadialGrid):
    """Sparse matrix of -radial_laplacian_apply (positive semidefinite in the
    cell-weight inner product)."""
    import scipy.sparse

    a = _face_areas(grid) / grid.h
    w = grid.cell_weights()
    diag = np.zeros(grid.nodes)
    diag[:-1] += a
    diag[1:] += a
    return scipy.sparse.diags_array(
        [-a / w[1:], diag / w, -a / w[:-1]], offsets=[-1, 0, 1], format="csr"
    )


def radial_gradient_norm_sq(f: ScalarField) -> float:
    """Integral of |grad f|^2 over the ball via face-centred differences."""
    grid = f.grid
    if not isinstance(grid, RadialGrid):
        raise UnsupportedDomainError("radial grid required")
    n = grid.space_dim
    r_face = 0.5 * (grid.r[1:] + grid.r[:-1])
    df = np.diff(f.values) / grid.h
    return float(np.sum(unit_sphere_area(n) * r_face ** (n - 1) * df**2 * grid.h))
