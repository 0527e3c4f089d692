"""Seeded simulators for the benchmark processes.

Three generators are provided:

* :class:`FourierVarDgp`, a rank-4 Fourier panel whose basis scores follow a
  vector autoregression with heavy-tailed (Student t, 6 df) innovations,
* :class:`VmaProcess`, a functional moving average of finite order,
* :class:`VfarProcess`, a functional autoregression of order one.

All three expose innovation-level simulation (``sample_innovations`` plus the
deterministic map ``outputs_from_innovations``) so that coupling-based
dependence measures can swap a single innovation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import (
    BasisSpec,
    ConfigurationError,
    FunctionalPanel,
    fourier_basis,
)

__all__ = [
    "GaussianInnovations",
    "benchmark_transition_matrix",
    "FourierVarDgp",
    "VmaProcess",
    "VfarProcess",
    "simulate_vma",
    "simulate_vfar",
    "decaying_vma_kernels",
]

# variance scaling of the four basis scores, (3l/2)^{-1/2}
SCORE_SCALES = (1.5 * np.arange(1, 5)) ** -0.5
BURN_IN_DEFAULT = 500


def _rng_pair(seed):
    """Two independent child streams: one for burn-in, one for the kept window.

    Drawing the burn-in from its own stream keeps the retained innovations
    identical when burn_in changes, so longer burn-in alters the panel only
    through the geometrically damped initial state.
    """
    ss = np.random.SeedSequence(seed)
    burn_ss, main_ss = ss.spawn(2)
    return np.random.default_rng(burn_ss), np.random.default_rng(main_ss)


def benchmark_transition_matrix(p: int) -> np.ndarray:
    """Block-diagonal score transition used by the benchmark panel generator.

    Each 50 x 50 block is the sum of two rank-1 terms v v^T / |v|^2 built from
    the all-ones vector and (cos 2, cos 4, ..., cos 100), so the block has unit
    spectral norm up to the small overlap of the two directions.

    Parameters
    ----------
    p : int
        Panel dimension; must be a multiple of 50.
    """
    if p % 50 != 0 or p <= 0:
        raise ConfigurationError("benchmark transition requires p to be a multiple of 50")
    j = np.arange(1, 51)
    v1 = np.ones(50)
    v2 = np.cos(2.0 * j)
    block = np.outer(v1, v1) / (v1 @ v1) + np.outer(v2, v2) / (v2 @ v2)
    return np.kron(np.eye(p // 50), block)


def _student_t6(rng: np.random.Generator, shape) -> np.ndarray:
    # exact t(6) via normal / sqrt(chi2/6); one stream, fixed draw order
    z = rng.standard_normal(shape)
    w = rng.chisquare(6, shape)
    return z / np.sqrt(w / 6.0)


@dataclass(frozen=True, eq=False)
class GaussianInnovations:
    """Mean-zero iid Gaussian innovation curves given by basis coefficients.

    ``scales`` may be a scalar or an (r,) vector of per-coefficient standard
    deviations.
    """

    r: int
    scales: float | np.ndarray = 1.0

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        out = rng.standard_normal(tuple(shape) + (self.r,))
        return out * np.asarray(self.scales)


@dataclass(frozen=True, eq=False)
class FourierVarDgp:
    """Benchmark panel: X_tj = sum_l c_l xi_tjl psi_l with VAR(1) scores.

    The scores of each basis component evolve as xi_tl = rho A xi_{t-1,l} +
    eta_tl with iid t(6) entries, independently across l.  Panel coefficients
    are c_l xi_tjl in the 4-function Fourier basis, c_l = (3l/2)^{-1/2}.

    Parameters
    ----------
    n, p : int
        Sample size and dimension.
    rho : float
        Autoregressive strength in (0, 1).
    A : ndarray, optional
        Score transition matrix; defaults to the block benchmark matrix
        (requires p to be a multiple of 50).
    burn_in : int
    seed : int
    """

    n: int
    p: int
    rho: float
    seed: int
    A: np.ndarray | None = None
    burn_in: int = BURN_IN_DEFAULT
    num_basis: int = 4

    def __post_init__(self):
        if not (0.0 <= self.rho < 1.0):
            raise ConfigurationError("rho must lie in [0, 1)")
        if self.num_basis != 4:
            raise ConfigurationError("the benchmark generator is rank 4")
        A = self.A if self.A is not None else benchmark_transition_matrix(self.p)
        A = np.asarray(A, dtype=float)
        if A.shape != (self.p, self.p):
            raise ConfigurationError("A must be p x p")
        radius = np.max(np.abs(np.linalg.eigvals(self.rho * A)))
        if radius >= 1.0:
            raise ConfigurationError(
                f"unstable configuration: spectral radius of rho*A is {radius:.4f} >= 1"
            )
        object.__setattr__(self, "A", A)
        A.setflags(write=False)

    @property
    def memory(self) -> int:
        return self.burn_in

    def sample_innovations(self, rng: np.random.Generator, shape) -> np.ndarray:
        # score noise eta, shape (*shape, p, 4)
        return _student_t6(rng, tuple(shape) + (self.p, 4))

    def outputs_from_innovations(self, eta: np.ndarray) -> np.ndarray:
        """Run the score recursion from a zero state and scale by c_l.

        ``eta`` has shape (..., steps, p, 4); the first ``burn_in`` steps are
        treated as transient and dropped from the output.
        """
        steps = eta.shape[-3]
        B = self.rho * self.A
        state = np.zeros(eta.shape[:-3] + (self.p, 4))
        keep = steps - self.burn_in
        out = np.empty(eta.shape[:-3] + (keep, self.p, 4))
        for s in range(steps):
            state = np.einsum("jk,...kl->...jl", B, state) + eta[..., s, :, :]
            if s >= self.burn_in:
                out[..., s - self.burn_in, :, :] = state
        return out * SCORE_SCALES

    def simulate(self) -> FunctionalPanel:
        """Generate the panel; identical seeds give bit-identical output."""
        rng_burn, rng_main = _rng_pair(self.seed)
        eta = np.concatenate(
            [
                self.sample_innovations(rng_burn, (self.burn_in,)),
                self.sample_innovations(rng_main, (self.n,)),
            ],
            axis=0,
        )
        coeffs = self.outputs_from_innovations(eta)
        return FunctionalPanel(coeffs=coeffs, basis=fourier_basis(self.num_basis))


def _check_kernel_stack(kernels: np.ndarray, name: str) -> np.ndarray:
    kernels = np.asarray(kernels, dtype=float)
    if kernels.ndim != 5 or kernels.shape[1] != kernels.shape[2] or kernels.shape[3] != kernels.shape[4]:
        raise ConfigurationError(f"{name} must have shape (m, p, p, r, r)")
    if not np.all(np.isfinite(kernels)):
        raise ConfigurationError(f"{name} contains non-finite entries")
    return kernels


def entry_hs_matrix(kernel_mat: np.ndarray) -> np.ndarray:
    """Matrix of entrywise Hilbert-Schmidt norms of a (p, p, r, r) array."""
    return np.sqrt(np.sum(np.abs(np.asarray(kernel_mat)) ** 2, axis=(2, 3)))


@dataclass(frozen=True, eq=False)
class VmaProcess:
    """Functional moving average X_t = sum_{m=0}^{M} A_m(eps_{t-m}).

    ``kernels`` stacks the operator coefficient matrices as (M+1, p, p, r, r).
    """

    kernels: np.ndarray
    innovations: GaussianInnovations
    seed: int

    def __post_init__(self):
        k = _check_kernel_stack(self.kernels, "kernels")
        if k.shape[3] != self.innovations.r:
            raise ConfigurationError("kernel width does not match innovation basis size")
        object.__setattr__(self, "kernels", k)
        k.setflags(write=False)

    @property
    def order(self) -> int:
        return self.kernels.shape[0] - 1

    @property
    def p(self) -> int:
        return self.kernels.shape[1]

    @property
    def memory(self) -> int:
        return self.order

    def sample_innovations(self, rng: np.random.Generator, shape) -> np.ndarray:
        return self.innovations.sample(rng, tuple(shape) + (self.p,))

    def outputs_from_innovations(self, eps: np.ndarray) -> np.ndarray:
        steps = eps.shape[-3]
        keep = steps - self.order
        out = np.zeros(eps.shape[:-3] + (keep, self.p, eps.shape[-1]))
        for m in range(self.order + 1):
            lo = self.order - m
            out += np.einsum(
                "jkab,...tkb->...tja", self.kernels[m], eps[..., lo:lo + keep, :, :]
            )
        return out


@dataclass(frozen=True, eq=False)
class VfarProcess:
    """Functional autoregression X_t = A(X_{t-1}) + eps_t.

    ``kernel`` is the (p, p, r, r) coefficient array of the transition
    operator.  Stationarity is checked through the surrogate condition
    ||Atilde^j||_2 < 1 for some power j <= 20, where Atilde collects the
    entrywise Hilbert-Schmidt norms.
    """

    kernel: np.ndarray
    innovations: GaussianInnovations
    seed: int
    burn_in: int = BURN_IN_DEFAULT

    def __post_init__(self):
        k = _check_kernel_stack(np.asarray(self.kernel, dtype=float)[None], "kernel")[0]
        if k.shape[2] != self.innovations.r:
            raise ConfigurationError("kernel width does not match innovation basis size")
        object.__setattr__(self, "kernel", k)
        k.setflags(write=False)
        self.contraction_power()  # raises if not contractive

    @property
    def p(self) -> int:
        return self.kernel.shape[0]

    @property
    def memory(self) -> int:
        return self.burn_in

    def contraction_power(self) -> tuple[int, float]:
        """Smallest j <= 20 with ||Atilde^j||_2 < 1, and that norm."""
        At = entry_hs_matrix(self.kernel)
        power = np.eye(self.p)
        for j in range(1, 21):
            power = power @ At
            c = float(np.linalg.norm(power, 2))
            if c < 1.0:
                return j, c
        raise ConfigurationError(
            "no power j <= 20 of the HS-norm matrix is contractive; process may be nonstationary"
        )

    def sample_innovations(self, rng: np.random.Generator, shape) -> np.ndarray:
        return self.innovations.sample(rng, tuple(shape) + (self.p,))

    def outputs_from_innovations(self, eps: np.ndarray) -> np.ndarray:
        steps = eps.shape[-3]
        keep = steps - self.burn_in
        state = np.zeros(eps.shape[:-3] + (self.p, eps.shape[-1]))
        out = np.empty(eps.shape[:-3] + (keep, self.p, eps.shape[-1]))
        for s in range(steps):
            state = np.einsum("jkab,...kb->...ja", self.kernel, state) + eps[..., s, :, :]
            if s >= self.burn_in:
                out[..., s - self.burn_in, :, :] = state
        return out


def simulate_vma(proc: VmaProcess, n: int, basis: BasisSpec | None = None) -> FunctionalPanel:
    """Simulate n steps of a functional moving average in coefficient space."""
    if n < 1:
        raise ConfigurationError("n must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(proc.seed))
    eps = proc.sample_innovations(rng, (n + proc.order,))
    coeffs = proc.outputs_from_innovations(eps)
    return FunctionalPanel(coeffs=coeffs, basis=basis or fourier_basis(proc.innovations.r))


def simulate_vfar(proc: VfarProcess, n: int, basis: BasisSpec | None = None) -> FunctionalPanel:
    """Simulate n steps of the functional autoregression, burn-in discarded."""
    if n < 1:
        raise ConfigurationError("n must be positive")
    rng_burn, rng_main = _rng_pair(proc.seed)
    eps = np.concatenate(
        [
            proc.sample_innovations(rng_burn, (proc.burn_in,)),
            proc.sample_innovations(rng_main, (n,)),
        ],
        axis=0,
    )
    coeffs = proc.outputs_from_innovations(eps)
    return FunctionalPanel(coeffs=coeffs, basis=basis or fourier_basis(proc.innovations.r))


def decaying_vma_kernels(
    p: int,
    r: int,
    gamma: float,
    K_p: float,
    order: int,
    seed: int = 0,
) -> np.ndarray:
    """Moving-average kernel stack with ||A_m||_{S,inf} = K_p / (m+1)^gamma.

    Each lag draws a random (p, p, r, r) direction and rescales it so the
    maximum row sum of entrywise HS norms matches the prescribed decay
    profile exactly.
    """
    if gamma <= 1.0:
        raise ConfigurationError("gamma must exceed 1 for a summable decay profile")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    kernels = rng.standard_normal((order + 1, p, p, r, r))
    for m in range(order + 1):
        row_sums = np.max(np.sum(entry_hs_matrix(kernels[m]), axis=1))
        target = K_p / (m + 1.0) ** gamma
        kernels[m] *= 0.0 if row_sums == 0 else target / row_sums
    return kernels
