"""Dynamic functional PCA in the frequency domain.

Each within-variable spectral density block f_{theta,jj} is eigendecomposed
per frequency; eigenfunction phases are canonicalized along the frequency
grid; inverse Fourier transforms of the eigenfunctions give filter
coefficients whose convolution with the panel yields time-domain scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import ConfigurationError, FunctionalPanel, NumericalError
from .secondorder import (
    RECTANGULAR,
    LagWindowKernel,
    SpectralDensity,
    autocov_diagonals,
    default_m0,
    spectral_diagonals,
)

__all__ = [
    "DfpcaModel",
    "ScoreAutocov",
    "EigengapReport",
    "uniform_theta_grid",
    "eigendecompose_diagonals",
    "align_phase",
    "filter_coefficients",
    "estimate_scores",
    "score_autocov",
    "eigengap_report",
    "fit_dfpca",
]

PHASE_TOL = 1e-10
HERMITIAN_TOL = 1e-8
N_FREQ_DEFAULT = 512


def uniform_theta_grid(n_freq: int = N_FREQ_DEFAULT) -> np.ndarray:
    """n_freq equispaced frequencies covering [0, 2pi)."""
    if n_freq < 2:
        raise ConfigurationError("need at least 2 frequencies")
    return 2.0 * np.pi * np.arange(n_freq) / n_freq


@dataclass(frozen=True, eq=False)
class DfpcaModel:
    """Fitted frequency-domain PCA model.

    Arrays are indexed (theta, j, m[, coefficient]); ``filters`` is indexed
    (L + l, j, m, coefficient) for l = -L..L.  ``scores[s, j, m]`` holds the
    score at time t = L + 1 + s (1-based), s = 0..n-2L-1.
    """

    M: int
    L: int
    theta_grid: np.ndarray
    eigvals: np.ndarray
    eigfuns: np.ndarray
    filters: np.ndarray
    scores: np.ndarray
    max_imag: float
    min_eigval_raw: float
    n: int

    @property
    def first_t(self) -> int:
        # 1-based time index of scores[0]
        return self.L + 1


@dataclass(frozen=True, eq=False)
class ScoreAutocov:
    """Lag-h cross-covariances of estimated scores, shape (p, p, M, M)."""

    h: int
    sigma: np.ndarray


def _diag_blocks(spec) -> np.ndarray:
    if isinstance(spec, SpectralDensity):
        p = spec.p
        return spec.values[:, np.arange(p), np.arange(p)]
    blocks = np.asarray(spec)
    if blocks.ndim != 4 or blocks.shape[2] != blocks.shape[3]:
        raise ConfigurationError("expected SpectralDensity or (n_theta, p, r, r) diagonal blocks")
    return blocks


def eigendecompose_diagonals(spec, M: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Per-frequency Hermitian eigenpairs of the diagonal spectral blocks.

    Returns eigenvalues (n_theta, p, M) sorted descending with negatives
    clipped to zero, unit-norm eigenvectors (n_theta, p, M, r), and the most
    negative raw eigenvalue seen (diagnostic; an exactly PSD input gives 0).

    Raises for blocks that are non-Hermitian beyond tolerance 1e-8.
    """
    blocks = _diag_blocks(spec)
    n_theta, p, r, _ = blocks.shape
    if not 1 <= M <= r:
        raise ConfigurationError("M must lie in 1..r")
    herm_defect = np.max(np.abs(blocks - blocks.conj().transpose(0, 1, 3, 2)))
    if herm_defect > HERMITIAN_TOL:
        raise NumericalError(
            f"diagonal spectral blocks non-Hermitian (defect {herm_defect:.2e} > 1e-8)"
        )
    # eigh returns ascending eigenvalues; flip to descending
    vals, vecs = np.linalg.eigh(0.5 * (blocks + blocks.conj().transpose(0, 1, 3, 2)))
    vals = vals[..., ::-1]
    vecs = vecs[..., ::-1]
    min_raw = float(vals.min())
    vals = np.clip(vals, 0.0, None)
    # reindex eigenvectors to (theta, j, m, coefficient)
    vecs = np.moveaxis(vecs, -1, 2)
    return vals[..., :M], vecs[:, :, :M, :], min_raw


def align_phase(eigfuns: np.ndarray, tol: float = PHASE_TOL) -> np.ndarray:
    """Canonical eigenfunction phases along the frequency grid.

    At the first frequency the largest-magnitude coefficient is rotated to
    the positive real axis; each subsequent frequency is rotated so its inner
    product with the previous one is real and nonnegative.  Inner products
    (or anchor entries) of magnitude below ``tol`` leave the phase unchanged.
    Idempotent: aligned input comes back unchanged.
    """
    u = np.asarray(eigfuns)
    if u.ndim != 4:
        raise ConfigurationError("expected eigenfunctions of shape (n_theta, p, M, r)")
    n_theta = u.shape[0]
    anchor = u[0]
    idx = np.argmax(np.abs(anchor), axis=-1)
    lead = np.take_along_axis(anchor, idx[..., None], axis=-1)[..., 0]
    mags = np.abs(lead)
    g0 = np.where(mags >= tol, np.conj(lead) / np.where(mags == 0, 1.0, mags), 1.0)
    if n_theta == 1:
        return u * g0[None, ..., None]
    z = np.sum(np.conj(u[1:]) * u[:-1], axis=-1)  # <u_{k-1}, u_k> per (k, j, m)
    zmag = np.abs(z)
    steps = np.where(zmag >= tol, z / np.where(zmag == 0, 1.0, zmag), 1.0)
    g = np.empty((n_theta,) + g0.shape, dtype=complex)
    g[0] = g0
    g[1:] = g0 * np.cumprod(steps, axis=0)
    return u * g[..., None]


def filter_coefficients(
    eigfuns: np.ndarray,
    theta_grid: np.ndarray,
    L: int,
    enforce_symmetry: bool = True,
) -> np.ndarray:
    """Inverse Fourier coefficients of the eigenfunctions for lags |l| <= L.

    Approximates (2 pi)^{-1} integral of phi(theta) e^{-i l theta} d theta by
    the Riemann sum on the uniform periodic grid (equal to the trapezoid rule
    there).  With ``enforce_symmetry`` the pair (l, -l) is averaged so that
    filters[-l] = conj(filters[l]) holds exactly; disable it to read off raw
    transform coefficients.

    Returns an array of shape (2L+1, p, M, r) indexed by L + l.
    """
    u = np.asarray(eigfuns)
    theta_grid = np.asarray(theta_grid, dtype=float)
    n_theta = theta_grid.size
    if u.shape[0] != n_theta:
        raise ConfigurationError("eigenfunction stack and frequency grid disagree")
    expected = 2.0 * np.pi * np.arange(n_theta) / n_theta
    if not np.allclose(theta_grid, expected, atol=1e-10):
        raise ConfigurationError("filter integrals require the uniform grid over [0, 2pi)")
    if L < 0:
        raise ConfigurationError("L must be nonnegative")
    if n_theta < 4 * max(L, 1):
        raise ConfigurationError("frequency grid too coarse for the requested L")
    ell = np.arange(-L, L + 1)
    # (2L+1, n_theta) transform matrix, then contract over theta
    phases = np.exp(-1j * np.outer(ell, theta_grid)) / n_theta
    filt = np.tensordot(phases, u, axes=(1, 0))
    if enforce_symmetry:
        sym = 0.5 * (filt + np.conj(filt[::-1]))
        filt = sym
    return filt


def estimate_scores(
    panel: FunctionalPanel,
    filters: np.ndarray,
    allow_out_of_regime: bool = False,
) -> tuple[np.ndarray, float]:
    """Score series from filtered lagged inner products.

    scores[s, j, m] estimates the m-th component score of variable j at time
    t = L + 1 + s via sum_{l=-L}^{L} <X_{t-l,j}, filters[L+l, j, m]> with the
    conjugate-linear inner product.  Imaginary residue (small when filters
    are conjugate-symmetric and come from a symmetric eigenfunction family)
    is dropped; its maximum magnitude is returned as a diagnostic.
    """
    filters = np.asarray(filters)
    if filters.ndim != 4 or filters.shape[0] % 2 != 1:
        raise ConfigurationError("filters must have shape (2L+1, p, M, r)")
    L = (filters.shape[0] - 1) // 2
    n = panel.n
    if L >= n / 4 and not allow_out_of_regime:
        raise ConfigurationError(
            "L out of theorem regime (L >= n/4); pass allow_out_of_regime=True to override"
        )
    n_scores = n - 2 * L
    if n_scores < 1:
        raise ConfigurationError("empty score range: need n > 2L")
    coeffs = panel.coeffs
    p, M = filters.shape[1], filters.shape[2]
    acc = np.zeros((n_scores, p, M), dtype=complex)
    for offset, l in enumerate(range(-L, L + 1)):
        block = coeffs[L - l : L - l + n_scores]
        acc += np.einsum("tja,jma->tjm", block, np.conj(filters[offset]))
    max_imag = float(np.max(np.abs(acc.imag))) if acc.size else 0.0
    return acc.real.copy(), max_imag


def score_autocov(scores: np.ndarray, h: int) -> ScoreAutocov:
    """Lag-h score cross-covariances, denominator (number of terms).

    sigma[j, k, m, l] = mean over aligned times of scores[t, j, m] *
    scores[t+h, k, l]; no conjugation (scores are real).
    """
    scores = np.asarray(scores)
    if scores.ndim != 3:
        raise ConfigurationError("scores must have shape (n_scores, p, M)")
    S = scores.shape[0]
    if h < 0 or S - h < 1:
        raise ConfigurationError("degenerate score range for this lag")
    sigma = np.einsum("sjm,skl->jkml", scores[: S - h], scores[h:]) / (S - h)
    return ScoreAutocov(h=h, sigma=sigma)


@dataclass(frozen=True, eq=False)
class EigengapReport:
    """Worst-case adjacent eigenvalue gaps per component.

    ``alpha_min[m-1]`` is the infimum over frequencies and variables of the
    adjacent-gap statistic for component m; ``delta[m-1]`` its reciprocal
    (inf where degenerate).  Components with gaps below 1e-6 are flagged.
    """

    alpha_min: np.ndarray
    delta: np.ndarray
    degenerate: np.ndarray


def eigengap_report(eigvals: np.ndarray, M: int, gap_floor: float = 1e-6) -> EigengapReport:
    """Gap statistics alpha_jm(theta) and their reciprocals delta_m.

    For m = 1 the gap is lambda_1 - lambda_2; for m >= 2 it is the smaller of
    the gaps to the neighbours.  A virtual eigenvalue 0 sits below the last
    column (finite-rank operators), so pass all r columns when using m = r.
    """
    vals = np.asarray(eigvals)
    if vals.ndim != 3:
        raise ConfigurationError("expected eigenvalues of shape (n_theta, p, K)")
    K = vals.shape[2]
    if not 1 <= M <= K:
        raise ConfigurationError("M must lie in 1..K")
    padded = np.concatenate([vals, np.zeros(vals.shape[:2] + (1,))], axis=2)
    gaps_above = padded[:, :, :-1] - padded[:, :, 1:]  # lambda_m - lambda_{m+1}, m = 1..K
    alpha = np.empty(M)
    for m in range(1, M + 1):
        if m == 1:
            a = gaps_above[:, :, 0]
        else:
            a = np.minimum(gaps_above[:, :, m - 2], gaps_above[:, :, m - 1])
        alpha[m - 1] = np.abs(a).min()
    degenerate = alpha < gap_floor
    delta = np.where(degenerate, np.inf, 1.0 / np.where(alpha == 0, 1.0, alpha))
    return EigengapReport(alpha_min=alpha, delta=delta, degenerate=degenerate)


def fit_dfpca(
    panel: FunctionalPanel,
    M: int = 4,
    L: int | None = None,
    n_freq: int = N_FREQ_DEFAULT,
    kernel: LagWindowKernel = RECTANGULAR,
    m0: int | None = None,
    center: bool = False,
    allow_out_of_regime: bool = False,
) -> DfpcaModel:
    """Full pipeline: spectral diagonals, eigenpairs, alignment, filters, scores.

    Defaults: L = ceil(n^{1/4}), m0 = ceil(log n), 512 uniform frequencies.
    Only the (j, j) spectral blocks are formed, so the cost stays linear in p.
    """
    n = panel.n
    if L is None:
        L = int(math.ceil(n**0.25))
    if m0 is None:
        m0 = default_m0(n)
    theta = uniform_theta_grid(n_freq)
    diag = autocov_diagonals(panel, m0, center=center)
    fdiag = spectral_diagonals(diag, kernel, m0, theta)
    vals, vecs, min_raw = eigendecompose_diagonals(fdiag, M)
    aligned = align_phase(vecs)
    filters = filter_coefficients(aligned, theta, L)
    scores, max_imag = estimate_scores(panel, filters, allow_out_of_regime=allow_out_of_regime)
    return DfpcaModel(
        M=M,
        L=L,
        theta_grid=theta,
        eigvals=vals,
        eigfuns=aligned,
        filters=filters,
        scores=scores,
        max_imag=max_imag,
        min_eigval_raw=min_raw,
        n=n,
    )
