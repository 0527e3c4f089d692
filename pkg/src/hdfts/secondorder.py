"""Autocovariance and spectral density estimation for coefficient panels.

The sample autocovariance at lag h averages outer products of coefficient
slices with denominator (n - |h|).  The spectral estimator is a lag-window
transform

    f_hat(theta) = (2 pi)^{-1} sum_{|h| <= m0} K(h / m0) Sigma_hat^(h) e^{-i h theta}

with a taper K from a small family of window kernels.  Analytic second-order
truths for the benchmark VAR panel close the loop for simulation studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import BasisSpec, ConfigurationError, FunctionalPanel, KernelFn, NumericalError
from .simulate import SCORE_SCALES, FourierVarDgp

__all__ = [
    "AutocovSet",
    "LagWindowKernel",
    "RECTANGULAR",
    "BARTLETT",
    "PARZEN",
    "FLAT_TOP",
    "kernel_by_name",
    "SpectralDensity",
    "sample_autocov",
    "autocov_diagonals",
    "lag_window_spectral",
    "spectral_diagonals",
    "default_m0",
    "default_theta_grid",
    "TruncationReport",
    "truncation_error",
    "score_stationary_cov",
    "true_score_spectral",
    "true_second_order",
]


@dataclass(frozen=True, eq=False)
class AutocovSet:
    """Autocovariance kernels for lags -H..H.

    ``values`` has shape (2H+1, p, p, r, r); index h + H selects lag h.
    ``n`` is the producing sample size (None for analytic truths).
    """

    values: np.ndarray
    n: int | None
    basis: BasisSpec | None = None

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 5 or v.shape[0] % 2 != 1 or v.shape[1] != v.shape[2] or v.shape[3] != v.shape[4]:
            raise ConfigurationError("values must have shape (2H+1, p, p, r, r)")
        object.__setattr__(self, "values", v)
        v.setflags(write=False)

    @property
    def H(self) -> int:
        return (self.values.shape[0] - 1) // 2

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def r(self) -> int:
        return self.values.shape[3]

    def at(self, h: int) -> np.ndarray:
        """Kernel coefficient matrix stack for lag h, shape (p, p, r, r)."""
        if abs(h) > self.H:
            raise ConfigurationError(f"lag {h} not stored (H={self.H})")
        return self.values[h + self.H]

    def kernel(self, h: int, j: int, k: int) -> KernelFn:
        if self.basis is None:
            raise ConfigurationError("autocovariance set carries no basis")
        return KernelFn(coeff=self.at(h)[j, k], basis=self.basis)


@dataclass(frozen=True)
class LagWindowKernel:
    """Symmetric taper on [-1, 1] with K(0) = 1 and sup K <= 1.

    ``tau`` is the flatness order of 1 - K(x) = O(|x|^tau) near 0; infinite
    for windows exactly flat around the origin.
    """

    kind: str
    tau: float

    def weight(self, x) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float))
        if self.kind == "rectangular":
            w = (x <= 1.0).astype(float)
        elif self.kind == "bartlett":
            w = np.clip(1.0 - x, 0.0, None)
        elif self.kind == "parzen":
            w = np.where(
                x <= 0.5,
                1.0 - 6.0 * x**2 + 6.0 * x**3,
                2.0 * np.clip(1.0 - x, 0.0, None) ** 3,
            )
        elif self.kind == "flattop":
            w = np.where(x <= 0.5, 1.0, 2.0 * np.clip(1.0 - x, 0.0, None))
        else:
            raise ConfigurationError(f"unknown lag-window kernel {self.kind!r}")
        return w


RECTANGULAR = LagWindowKernel("rectangular", math.inf)
BARTLETT = LagWindowKernel("bartlett", 1.0)
PARZEN = LagWindowKernel("parzen", 2.0)
FLAT_TOP = LagWindowKernel("flattop", math.inf)

_KERNELS = {k.kind: k for k in (RECTANGULAR, BARTLETT, PARZEN, FLAT_TOP)}


def kernel_by_name(name: str) -> LagWindowKernel:
    try:
        return _KERNELS[name.lower()]
    except KeyError:
        raise ConfigurationError(
            f"unknown kernel {name!r}; choose from {sorted(_KERNELS)}"
        ) from None


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    """Spectral density kernels on a frequency grid.

    ``values`` has shape (len(theta_grid), p, p, r, r), complex.
    """

    theta_grid: np.ndarray
    values: np.ndarray
    m0: int | None = None
    kernel: LagWindowKernel | None = None
    basis: BasisSpec | None = None

    def __post_init__(self):
        g = np.asarray(self.theta_grid, dtype=float)
        v = np.asarray(self.values)
        if v.ndim != 5 or v.shape[0] != g.size:
            raise ConfigurationError("values must have shape (n_theta, p, p, r, r)")
        object.__setattr__(self, "theta_grid", g)
        object.__setattr__(self, "values", v)
        g.setflags(write=False)
        v.setflags(write=False)

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def r(self) -> int:
        return self.values.shape[3]

    def entry_sup_norms(self) -> np.ndarray:
        """sup over the grid of entrywise HS norms; shape (p, p)."""
        per_theta = np.sqrt(np.sum(np.abs(self.values) ** 2, axis=(3, 4)))
        return per_theta.max(axis=0)


def default_m0(n: int) -> int:
    """Default truncation lag, ceil(log n)."""
    if n < 1:
        raise ConfigurationError("n must be positive")
    return int(math.ceil(math.log(n)))


def default_theta_grid(m0: int) -> np.ndarray:
    """Frequencies pi*h/(4*m0) for h = 0..8*m0, covering [0, 2pi].

    The sup of any trigonometric polynomial of order 2*m0 over [0, 2pi] is at
    most sqrt(2) times its max over this grid, so grid maxima control the
    continuum.
    """
    if m0 < 1:
        raise ConfigurationError("m0 must be >= 1 for the default grid")
    h = np.arange(8 * m0 + 1)
    return np.pi * h / (4.0 * m0)


def sample_autocov(
    panel: FunctionalPanel,
    H: int,
    center: bool = False,
    allow_out_of_regime: bool = False,
) -> AutocovSet:
    """Sample autocovariance kernels for lags -H..H.

    For h >= 0 the coefficient-space formula is

        Sigma_hat^(h)[j, k] = (n - h)^{-1} sum_t outer(coeffs[t, j], coeffs[t+h, k])

    summing over the t for which both indices are in range; negative lags
    follow from the transpose relation.

    Parameters
    ----------
    panel : FunctionalPanel
    H : int
        Maximum absolute lag; the estimation theory assumes H < n/2.
    center : bool
        Subtract the sample mean curve first (the model assumes mean zero,
        so the default leaves the panel untouched).
    allow_out_of_regime : bool
        Permit H >= n/2.
    """
    n, p, r = panel.n, panel.p, panel.r
    if H < 0:
        raise ConfigurationError("H must be nonnegative")
    if H >= n:
        raise ConfigurationError("H must be smaller than n")
    if H >= n / 2 and not allow_out_of_regime:
        raise ConfigurationError(
            "lag out of theorem regime (H >= n/2); pass allow_out_of_regime=True to override"
        )
    coeffs = panel.coeffs
    if center:
        coeffs = coeffs - coeffs.mean(axis=0, keepdims=True)
    flat = coeffs.reshape(n, p * r)
    out = np.empty((2 * H + 1, p, p, r, r))
    for h in range(H + 1):
        m = flat[: n - h].T @ flat[h:] / (n - h)
        S = m.reshape(p, r, p, r).transpose(0, 2, 1, 3)
        out[H + h] = S
        if h > 0:
            out[H - h] = S.transpose(1, 0, 3, 2)
    return AutocovSet(values=out, n=n, basis=panel.basis)


def autocov_diagonals(panel: FunctionalPanel, H: int, center: bool = False) -> np.ndarray:
    """Within-variable autocovariance blocks only; shape (2H+1, p, r, r).

    Fast path for pipelines that need just the (j, j) entries.
    """
    n, p, r = panel.n, panel.p, panel.r
    if not 0 <= H < n:
        raise ConfigurationError("need 0 <= H < n")
    coeffs = panel.coeffs
    if center:
        coeffs = coeffs - coeffs.mean(axis=0, keepdims=True)
    out = np.empty((2 * H + 1, p, r, r))
    for h in range(H + 1):
        S = np.einsum("tja,tjb->jab", coeffs[: n - h], coeffs[h:]) / (n - h)
        out[H + h] = S
        if h > 0:
            out[H - h] = S.transpose(0, 2, 1)
    return out


def _window_weights(kernel: LagWindowKernel, m0: int) -> tuple[np.ndarray, np.ndarray]:
    lags = np.arange(-m0, m0 + 1)
    if m0 == 0:
        return lags, np.ones(1)
    return lags, kernel.weight(lags / m0)


def lag_window_spectral(
    acov: AutocovSet,
    kernel: LagWindowKernel = RECTANGULAR,
    m0: int | None = None,
    theta_grid: np.ndarray | None = None,
    allow_out_of_regime: bool = False,
) -> SpectralDensity:
    """Lag-window spectral density estimate on a frequency grid.

    ``m0`` defaults to ceil(log n); ``theta_grid`` to the proof-anchored grid
    of ``default_theta_grid``.  Requires ``acov`` to hold lags up to m0, and
    m0 < n/3 unless overridden.
    """
    if m0 is None:
        if acov.n is None:
            raise ConfigurationError("m0 required when the autocovariance has no sample size")
        m0 = default_m0(acov.n)
    if m0 < 0:
        raise ConfigurationError("m0 must be nonnegative")
    if acov.H < m0:
        raise ConfigurationError(f"autocovariance lags only reach {acov.H} < m0 = {m0}")
    if acov.n is not None and m0 >= acov.n / 3 and not allow_out_of_regime:
        raise ConfigurationError(
            "m0 out of theorem regime (m0 >= n/3); pass allow_out_of_regime=True to override"
        )
    if theta_grid is None:
        theta_grid = default_theta_grid(max(m0, 1))
    theta_grid = np.asarray(theta_grid, dtype=float)
    lags, w = _window_weights(kernel, m0)
    stack = acov.values[acov.H + lags[0] : acov.H + lags[-1] + 1]
    phases = np.exp(-1j * np.outer(theta_grid, lags)) * w
    values = np.tensordot(phases, stack, axes=(1, 0)) / (2.0 * np.pi)
    return SpectralDensity(
        theta_grid=theta_grid, values=values, m0=m0, kernel=kernel, basis=acov.basis
    )


def spectral_diagonals(
    diag_acov: np.ndarray,
    kernel: LagWindowKernel,
    m0: int,
    theta_grid: np.ndarray,
) -> np.ndarray:
    """Lag-window transform of diagonal blocks only; shape (n_theta, p, r, r)."""
    diag_acov = np.asarray(diag_acov)
    H = (diag_acov.shape[0] - 1) // 2
    if H < m0:
        raise ConfigurationError(f"diagonal autocovariance lags only reach {H} < m0 = {m0}")
    lags, w = _window_weights(kernel, m0)
    stack = diag_acov[H + lags[0] : H + lags[-1] + 1]
    phases = np.exp(-1j * np.outer(np.asarray(theta_grid, float), lags)) * w
    return np.tensordot(phases, stack, axes=(1, 0)) / (2.0 * np.pi)


@dataclass(frozen=True)
class TruncationReport:
    """Combined truncation and smoothing error of a lag-window design.

    ``value`` is the max over (j, k) of the out-of-window tail plus the
    in-window taper deficit; ``tail_estimate`` extrapolates the lag norms
    beyond the stored horizon geometrically.
    """

    value: float
    tail_estimate: float


def truncation_error(
    true_acov: AutocovSet,
    kernel: LagWindowKernel,
    m0: int,
) -> TruncationReport:
    """Evaluate the window bias functional on an analytic autocovariance."""
    H = true_acov.H
    if H < m0:
        raise ConfigurationError("true autocovariance must extend beyond m0")
    norms = np.sqrt(np.sum(np.abs(true_acov.values) ** 2, axis=(3, 4)))  # (2H+1, p, p)
    lags = np.arange(-H, H + 1)
    outside = np.abs(lags) > m0
    inside = ~outside
    w = kernel.weight(lags[inside] / m0) if m0 > 0 else np.ones(inside.sum())
    per_entry = norms[outside].sum(axis=0) + ((1.0 - w)[:, None, None] * norms[inside]).sum(axis=0)
    # geometric extrapolation of the positive-lag tail beyond H
    tail = 0.0
    last = norms[-1].max()
    prev = norms[-2].max() if H >= 1 else 0.0
    if last > 0 and prev > 0:
        ratio = last / prev
        if ratio < 1.0:
            tail = 2.0 * last * ratio / (1.0 - ratio)
    return TruncationReport(value=float(per_entry.max()), tail_estimate=float(tail))


def _require_symmetric(A: np.ndarray):
    # analytic truths below assume the transition commutes with its transpose
    if not np.allclose(A, A.T, atol=1e-12, rtol=0.0):
        raise ConfigurationError(
            "analytic second-order truths are implemented for symmetric transitions only"
        )


def score_stationary_cov(dgp: FourierVarDgp, tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """Stationary score covariance: fixed point of G -> rho^2 A G A^T + 1.5 I."""
    B = dgp.rho * dgp.A
    G = np.zeros((dgp.p, dgp.p))
    for _ in range(max_iter):
        nxt = B @ G @ B.T + 1.5 * np.eye(dgp.p)
        if np.max(np.abs(nxt - G)) <= tol:
            return nxt
        G = nxt
    raise NumericalError("stationary covariance iteration did not converge")


def true_score_spectral(dgp: FourierVarDgp, theta_grid: np.ndarray) -> np.ndarray:
    """Score-level spectral density matrices; shape (n_theta, p, p), complex.

    g(theta) = (1.5 / 2 pi) (I - rho A e^{-i theta})^{-1} (I - rho A^T e^{i theta})^{-1}
    """
    _require_symmetric(dgp.A)
    theta_grid = np.asarray(theta_grid, dtype=float)
    B = dgp.rho * dgp.A
    eye = np.eye(dgp.p)
    out = np.empty((theta_grid.size, dgp.p, dgp.p), dtype=complex)
    for i, th in enumerate(theta_grid):
        left = np.linalg.inv(eye - B * np.exp(-1j * th))
        out[i] = (1.5 / (2.0 * np.pi)) * left @ left.conj().T
    return out


def _scores_to_kernels(score_mats: np.ndarray) -> np.ndarray:
    """Lift score-level (..., p, p) matrices to (..., p, p, r, r) kernel stacks.

    The basis components are independent, so each kernel coefficient matrix is
    diagonal with entries c_l^2 times the score matrix entry.
    """
    score_mats = np.asarray(score_mats)
    r = SCORE_SCALES.size
    out = np.zeros(score_mats.shape + (r, r), dtype=score_mats.dtype)
    for a in range(r):
        out[..., a, a] = SCORE_SCALES[a] ** 2 * score_mats
    return out


def true_second_order(
    dgp: FourierVarDgp,
    H: int,
    theta_grid: np.ndarray | None = None,
) -> tuple[AutocovSet, SpectralDensity]:
    """Analytic autocovariance (lags -H..H) and spectral density of the DGP.

    The stationary score covariance solves the discrete Lyapunov equation;
    higher lags follow from Gamma_h = (rho A)^h Gamma_0 and the spectral
    density from the closed-form score transfer function.
    """
    _require_symmetric(dgp.A)
    if theta_grid is None:
        theta_grid = default_theta_grid(max(default_m0(dgp.n), 1))
    B = dgp.rho * dgp.A
    G0 = score_stationary_cov(dgp)
    gammas = np.empty((2 * H + 1, dgp.p, dgp.p))
    power = np.eye(dgp.p)
    gammas[H] = G0
    for h in range(1, H + 1):
        power = B @ power
        gammas[H + h] = power @ G0
        gammas[H - h] = gammas[H + h].T
    acov = AutocovSet(values=_scores_to_kernels(gammas), n=None)
    g = true_score_spectral(dgp, theta_grid)
    spec = SpectralDensity(
        theta_grid=np.asarray(theta_grid, float),
        values=_scores_to_kernels(g),
        m0=None,
        kernel=None,
    )
    return acov, spec
