"""Riemann theta series with characteristics and termwise derivatives.

theta[a; b](z; T) = sum over n in Z^g of
    exp(2 pi i ((1/2) (n+a)^T T (n+a) + (n+a)^T (z+b))).

The sum is truncated to a box ||n - n0||_inf <= R centered on the index n0
that maximizes the Gaussian envelope, so moderate shifts of z cost nothing
in accuracy. A tail estimate from the outermost shell is checked against the
requested tolerance.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import TruncationInsufficient

DEFAULT_TOL = 1e-12


@lru_cache(maxsize=64)
def _lattice(genus: int, radius: int) -> np.ndarray:
    axis = np.arange(-radius, radius + 1)
    grids = np.meshgrid(*([axis] * genus), indexing="ij")
    return np.stack([grid.ravel() for grid in grids], axis=1)


def suggested_radius(t_matrix, tol: float = DEFAULT_TOL) -> int:
    """Truncation radius from the Gaussian tail bound of the series."""
    t_matrix = np.atleast_2d(np.asarray(t_matrix, dtype=complex))
    lam_min = float(np.min(np.linalg.eigvalsh(t_matrix.imag)))
    if lam_min <= 0:
        raise ValueError("Im T must be positive definite")
    return int(np.ceil(np.sqrt(-np.log(tol) / (np.pi * lam_min)))) + 2


def _theta_sum(deriv, a, b, z, t_matrix, radius, tol):
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    t_matrix = np.atleast_2d(np.asarray(t_matrix, dtype=complex))
    g = z.size
    if radius is None:
        radius = suggested_radius(t_matrix, tol)
    center = np.round(-a - np.linalg.solve(t_matrix.imag, (z + b).imag))
    n = _lattice(g, int(radius)) + center
    na = n + a
    quad = 0.5 * np.einsum("ki,ij,kj->k", na, t_matrix, na)
    lin = na @ (z + b)
    terms = np.exp(2j * np.pi * (quad + lin))
    prefactor = np.ones(terms.size, dtype=complex)
    for idx in deriv:
        prefactor = prefactor * (2j * np.pi * na[:, idx])
    terms = prefactor * terms
    value = terms.sum()
    l1 = float(np.abs(terms).sum())
    shell = np.max(np.abs(n - center), axis=1) >= radius
    tail = float(np.max(np.abs(terms[shell]))) * float(np.sum(shell))
    if tail > tol * max(l1, 1e-300):
        raise TruncationInsufficient(
            f"theta tail estimate {tail:.3e} exceeds tol {tol:.1e} "
            f"(radius {radius})")
    return value, l1


def theta_char(a, b, z, t_matrix, radius: int | None = None,
               tol: float = DEFAULT_TOL) -> complex:
    """Theta with characteristics a (quadratic slot) and b (linear slot)."""
    value, _ = _theta_sum((), a, b, z, t_matrix, radius, tol)
    return value


def theta_char_with_scale(a, b, z, t_matrix, radius: int | None = None,
                          tol: float = DEFAULT_TOL) -> tuple[complex, float]:
    """Theta value together with the L1 mass of the summed terms.

    The ratio |theta| / L1 measures cancellation and is the robust test for
    proximity to the theta divisor.
    """
    return _theta_sum((), a, b, z, t_matrix, radius, tol)


def theta_deriv(multi_index, a, b, z, t_matrix, radius: int | None = None,
                tol: float = DEFAULT_TOL) -> complex:
    """Termwise partial derivative of theta in the z variables.

    ``multi_index`` lists 1-based coordinate labels, repetitions allowed;
    the empty tuple reproduces ``theta_char``.
    """
    deriv = tuple(int(i) - 1 for i in multi_index)
    if any(i < 0 for i in deriv):
        raise ValueError("multi_index entries are 1-based coordinate labels")
    value, _ = _theta_sum(deriv, a, b, z, t_matrix, radius, tol)
    return value
