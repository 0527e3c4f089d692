"""Function bases, panels of random curves, and operator-valued norms.

Curves live in L2[0,1] and are stored as coefficient vectors in a shared
orthonormal basis.  A panel holds n time points of p component curves, so its
coefficient array has shape (n, p, r).  Cross-covariance kernels between two
components are r x r coefficient matrices; collections of such kernels are
stored as (p, p, r, r) arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConfigurationError",
    "NumericalError",
    "BasisSpec",
    "fourier_basis",
    "user_grid_basis",
    "FunctionalPanel",
    "KernelFn",
    "hs_norm",
    "composite_norm_s_max",
    "composite_norm_s_1",
    "norm_h_inf",
]

GRAM_TOL = 1e-8


class ConfigurationError(ValueError):
    """Invalid configuration or arguments; maps to CLI exit code 2."""


class NumericalError(RuntimeError):
    """Numerical failure (divergence, instability); maps to CLI exit code 3."""


def _trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    # composite trapezoid weights; sum equals grid span
    w = np.zeros_like(grid)
    w[1:] += 0.5 * np.diff(grid)
    w[:-1] += 0.5 * np.diff(grid)
    return w


@dataclass(frozen=True, eq=False)
class BasisSpec:
    """Orthonormal basis of L2[0,1] with an attached quadrature rule.

    Parameters
    ----------
    kind : str
        "fourier" or "user_grid".
    r : int
        Number of basis functions.
    grid : ndarray, shape (G,)
        Quadrature nodes in [0, 1], increasing.
    weights : ndarray, shape (G,)
        Nonnegative quadrature weights summing to 1.
    values : ndarray, shape (r, G)
        Basis functions evaluated on the grid.
    """

    kind: str
    r: int
    grid: np.ndarray
    weights: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.r < 1:
            raise ConfigurationError("basis size r must be >= 1")
        if self.kind not in ("fourier", "user_grid"):
            raise ConfigurationError(f"unknown basis kind {self.kind!r}")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-10:
            raise ConfigurationError("quadrature weights must be nonnegative and sum to 1")
        gram = (self.values * self.weights) @ self.values.T
        if np.max(np.abs(gram - np.eye(self.r))) > GRAM_TOL:
            raise ConfigurationError(
                "basis is not orthonormal under the attached quadrature rule"
            )
        for a in ("grid", "weights", "values"):
            getattr(self, a).setflags(write=False)

    @property
    def grid_size(self) -> int:
        return self.grid.size

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate the basis at arbitrary points in [0, 1].

        Returns an array of shape (r, *points.shape).  Fourier bases are
        evaluated exactly; user-grid bases by linear interpolation.
        """
        points = np.asarray(points, dtype=float)
        if self.kind == "fourier":
            return _fourier_values(self.r, points)
        out = np.empty((self.r,) + points.shape)
        for a in range(self.r):
            out[a] = np.interp(points.ravel(), self.grid, self.values[a]).reshape(points.shape)
        return out


def _fourier_values(r: int, u: np.ndarray) -> np.ndarray:
    # sqrt(2) sin(2 pi u), sqrt(2) cos(2 pi u), sqrt(2) sin(4 pi u), ...
    out = np.empty((r,) + u.shape)
    for a in range(r):
        k = a // 2 + 1
        if a % 2 == 0:
            out[a] = np.sqrt(2.0) * np.sin(2.0 * np.pi * k * u)
        else:
            out[a] = np.sqrt(2.0) * np.cos(2.0 * np.pi * k * u)
    return out


def fourier_basis(r: int = 4, grid_size: int = 101) -> BasisSpec:
    """Mean-zero Fourier basis with a uniform trapezoid quadrature rule.

    The default r=4 gives sqrt(2){sin 2pi u, cos 2pi u, sin 4pi u, cos 4pi u}.
    """
    grid = np.linspace(0.0, 1.0, grid_size)
    weights = _trapezoid_weights(grid)
    values = _fourier_values(r, grid)
    return BasisSpec(kind="fourier", r=r, grid=grid, weights=weights, values=values)


def user_grid_basis(values: np.ndarray, grid: np.ndarray | None = None,
                    weights: np.ndarray | None = None) -> BasisSpec:
    """Basis supplied as values on a grid; must pass the orthonormality check."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ConfigurationError("values must have shape (r, G)")
    r, G = values.shape
    if grid is None:
        grid = np.linspace(0.0, 1.0, G)
    grid = np.asarray(grid, dtype=float)
    if weights is None:
        weights = _trapezoid_weights(grid)
    weights = np.asarray(weights, dtype=float)
    return BasisSpec(kind="user_grid", r=r, grid=grid, weights=weights, values=values.copy())


@dataclass(frozen=True, eq=False)
class FunctionalPanel:
    """n x p panel of curves as basis coefficients, optionally with grid samples.

    Parameters
    ----------
    coeffs : ndarray, shape (n, p, r)
        Real coefficients of curve (t, j) in the shared basis.
    basis : BasisSpec
    grid_values : ndarray, shape (n, p, G), optional
        Curve values on ``basis.grid`` when the panel came from a smoother;
        coefficients alone define the panel otherwise.
    """

    coeffs: np.ndarray
    basis: BasisSpec
    grid_values: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 3:
            raise ConfigurationError("coeffs must have shape (n, p, r)")
        if c.shape[2] != self.basis.r:
            raise ConfigurationError("coefficient width does not match basis size")
        object.__setattr__(self, "coeffs", c)
        c.setflags(write=False)
        if self.grid_values is not None:
            self.grid_values.setflags(write=False)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def p(self) -> int:
        return self.coeffs.shape[1]

    @property
    def r(self) -> int:
        return self.coeffs.shape[2]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Curve values X_tj at given points; shape (n, p, *points.shape)."""
        vals = self.basis.evaluate(points)  # (r, ...)
        return np.tensordot(self.coeffs, vals, axes=(2, 0))


@dataclass(frozen=True, eq=False)
class KernelFn:
    """Integral kernel K(u, v) = sum_ab coeff[a, b] psi_a(u) psi_b(v)."""

    coeff: np.ndarray
    basis: BasisSpec

    def __post_init__(self):
        c = np.asarray(self.coeff)
        if c.shape != (self.basis.r, self.basis.r):
            raise ConfigurationError("kernel coefficient matrix must be r x r")
        object.__setattr__(self, "coeff", c)
        c.setflags(write=False)

    def on_grid(self) -> np.ndarray:
        """Kernel values on the basis grid; shape (G, G)."""
        V = self.basis.values
        return V.T @ self.coeff @ V

    def apply(self, x_coeff: np.ndarray) -> np.ndarray:
        """Coefficient action of the integral operator on a curve."""
        return self.coeff @ x_coeff


def hs_norm(kernel) -> float:
    """Hilbert-Schmidt norm of a kernel.

    In an orthonormal basis this is the Frobenius norm of the coefficient
    matrix.  Accepts a KernelFn or a raw coefficient matrix.
    """
    coeff = kernel.coeff if isinstance(kernel, KernelFn) else np.asarray(kernel)
    return float(np.sqrt(np.sum(np.abs(coeff) ** 2)))


def _entry_hs_norms(mat: np.ndarray) -> np.ndarray:
    # (p, p, r, r) -> (p, p) matrix of entrywise HS norms
    mat = np.asarray(mat)
    if mat.ndim != 4:
        raise ConfigurationError("expected a (p, p, r, r) kernel matrix")
    return np.sqrt(np.sum(np.abs(mat) ** 2, axis=(2, 3)))


def composite_norm_s_max(mat: np.ndarray) -> float:
    """Largest entrywise Hilbert-Schmidt norm of a (p, p, r, r) kernel matrix."""
    return float(np.max(_entry_hs_norms(mat)))


def composite_norm_s_1(mat: np.ndarray) -> float:
    """Maximum column sum of entrywise Hilbert-Schmidt norms (operator 1-norm)."""
    return float(np.max(np.sum(_entry_hs_norms(mat), axis=0)))


def norm_h_inf(coeffs: np.ndarray) -> float:
    """Largest component L2 norm of a p-vector of curves given as (p, r) coefficients."""
    coeffs = np.asarray(coeffs)
    if coeffs.ndim != 2:
        raise ConfigurationError("expected a (p, r) coefficient slice")
    return float(np.max(np.sqrt(np.sum(np.abs(coeffs) ** 2, axis=1))))
