"""Coupling-based dependence measures and analytic bounds for linear models.

The central quantity is the distance, in the q-th moment, between the process
and a coupled copy in which the time-0 innovation is replaced by an
independent duplicate:

    omega_{t,q} = || max_j ||X_t,j - X'_t,j||_H ||_q .

Tail sums Omega_{m,q} = sum_{t >= m} omega_{t,q} and the weighted suprema
sup_m (m+1)^alpha Omega_{m,q} summarize moment and temporal decay jointly.
These are estimated by Monte Carlo over coupled replicate pairs; for moving
average and autoregressive models, closed-form bounds are also evaluated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .curves import ConfigurationError
from .simulate import VfarProcess, VmaProcess, entry_hs_matrix

__all__ = [
    "DependenceReport",
    "mc_dependence",
    "vma_bound",
    "vfar_bound",
]

T_MAX_DEFAULT = 50
REPLICATES_DEFAULT = 10_000
TAIL_HEALTH_RATIO = 1e-3


@dataclass(frozen=True, eq=False)
class DependenceReport:
    """Monte-Carlo estimates of the coupling dependence measures.

    ``omega[t]`` and ``delta_per_j[t, j]`` are the joint and per-variable
    coupling distances at horizon t; ``Omega_tail[m]`` the tail sums over the
    stored range.  ``Phi`` and ``M`` are the squared uniform and joint
    adjusted norms; ``Phi <= M`` always.
    """

    q: float
    alpha: float
    omega: np.ndarray
    Omega_tail: np.ndarray
    delta_per_j: np.ndarray
    adjusted_norm_joint: float
    adjusted_norm_uniform: float
    Phi: float
    M: float
    mc_replicates: int
    tail_healthy: bool

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "alpha": self.alpha,
            "omega": self.omega.tolist(),
            "Omega_tail": self.Omega_tail.tolist(),
            "delta_per_j": self.delta_per_j.tolist(),
            "adjusted_norm_joint": self.adjusted_norm_joint,
            "adjusted_norm_uniform": self.adjusted_norm_uniform,
            "Phi": self.Phi,
            "M": self.M,
            "mc_replicates": self.mc_replicates,
            "tail_healthy": self.tail_healthy,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def _adjusted_sup(tails: np.ndarray, alpha: float) -> float:
    m = np.arange(tails.shape[0], dtype=float)
    return float(np.max((m + 1.0) ** alpha * tails, initial=0.0))


def mc_dependence(
    model,
    q: float,
    alpha: float,
    t_max: int = T_MAX_DEFAULT,
    replicates: int = REPLICATES_DEFAULT,
    seed: int = 0,
    batch: int = 2_000,
) -> DependenceReport:
    """Estimate coupling dependence measures by Monte Carlo.

    The model must expose innovation-level simulation: ``memory``,
    ``sample_innovations(rng, shape)`` and ``outputs_from_innovations``; each
    replicate draws one innovation path, swaps the time-0 innovation for an
    independent copy, and measures the divergence of the two outputs over
    horizons 0..t_max.

    Sample q-norms are plain empirical moments, so all invariants
    (nonincreasing tails, per-variable <= joint) hold exactly on the draws.
    """
    if q <= 1:
        raise ConfigurationError("q must exceed 1")
    if alpha <= 0:
        raise ConfigurationError("alpha must be positive")
    for attr in ("memory", "sample_innovations", "outputs_from_innovations"):
        if not hasattr(model, attr):
            raise ConfigurationError(
                "unsupported model: innovation-level simulation is required for coupling"
            )
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    steps = model.memory + t_max + 1
    sum_joint = np.zeros(t_max + 1)
    sum_per_j = None
    done = 0
    while done < replicates:
        nrep = min(batch, replicates - done)
        eps = model.sample_innovations(rng, (nrep, steps))
        swapped = model.sample_innovations(rng, (nrep,))
        eps_prime = eps.copy()
        eps_prime[:, model.memory] = swapped
        diff = model.outputs_from_innovations(eps) - model.outputs_from_innovations(eps_prime)
        per_j = np.sqrt(np.sum(diff**2, axis=-1))  # (nrep, t_max+1, p)
        joint = per_j.max(axis=-1)
        if sum_per_j is None:
            sum_per_j = np.zeros((t_max + 1, per_j.shape[-1]))
        sum_joint += np.sum(joint**q, axis=0)
        sum_per_j += np.sum(per_j**q, axis=0)
        done += nrep
    omega = (sum_joint / replicates) ** (1.0 / q)
    delta = (sum_per_j / replicates) ** (1.0 / q)
    Omega_tail = np.cumsum(omega[::-1])[::-1]
    Delta_tail = np.cumsum(delta[::-1], axis=0)[::-1]
    joint_adj = _adjusted_sup(Omega_tail, alpha)
    per_j_adj = np.array([_adjusted_sup(Delta_tail[:, j], alpha) for j in range(delta.shape[1])])
    uniform_adj = float(per_j_adj.max())
    return DependenceReport(
        q=q,
        alpha=alpha,
        omega=omega,
        Omega_tail=Omega_tail,
        delta_per_j=delta,
        adjusted_norm_joint=joint_adj,
        adjusted_norm_uniform=uniform_adj,
        Phi=uniform_adj**2,
        M=joint_adj**2,
        mc_replicates=replicates,
        tail_healthy=bool(omega[-1] <= TAIL_HEALTH_RATIO * max(omega[0], 1e-300)),
    )


def _sup_weighted_hurwitz(alpha: float, gamma: float, rel_tol: float = 1e-6) -> float:
    """sup_m (m+1)^alpha * sum_{t >= m} (t+1)^{-gamma} to relative error rel_tol.

    The tail sum is the Hurwitz zeta value zeta(gamma, m+1).  An integral
    envelope (m+1)^alpha [(m+1)^{-gamma} + (m+1)^{1-gamma}/(gamma-1)] bounds
    every later term, so the scan stops once the envelope drops below the
    running supremum.
    """
    best = 0.0
    m = 0
    while True:
        val = (m + 1.0) ** alpha * float(hurwitz_zeta(gamma, m + 1.0))
        best = max(best, val)
        envelope = (m + 2.0) ** alpha * (
            (m + 2.0) ** (-gamma) + (m + 2.0) ** (1.0 - gamma) / (gamma - 1.0)
        )
        if envelope < best * (1.0 - rel_tol):
            return best
        m += 1
        if m > 10_000_000:
            raise ConfigurationError(
                "weighted tail supremum did not stabilize; alpha is too close to gamma-1"
            )


def vma_bound(
    proc: VmaProcess | None,
    q: float,
    alpha: float,
    gamma: float,
    K_p: float,
    mu_q: float,
    p: int | None = None,
) -> float:
    """Adjusted-norm bound for a moving average with decay K_p/(t+1)^gamma.

    Returns C(alpha, gamma) * K_p * p^{1/q} * mu_q^{1/q} with the constant
    evaluated as the explicit supremum sup_m (m+1)^alpha sum_{t>=m} (t+1)^{-gamma}
    to relative accuracy 1e-6.  ``mu_q`` is the q-th moment of the innovation
    sup-norm, supplied by the caller.
    """
    if gamma <= 1.0:
        raise ConfigurationError("divergent bound: gamma must exceed 1")
    if alpha > gamma - 1.0:
        raise ConfigurationError(
            "divergent bound: the weighted supremum is infinite for alpha > gamma - 1"
        )
    if K_p < 0 or mu_q < 0:
        raise ConfigurationError("K_p and mu_q must be nonnegative")
    if p is None:
        if proc is None:
            raise ConfigurationError("supply either the process or the dimension p")
        p = proc.p
    if K_p == 0.0:
        return 0.0
    c_alpha = _sup_weighted_hurwitz(alpha, gamma)
    return c_alpha * K_p * p ** (1.0 / q) * mu_q ** (1.0 / q)


def vfar_bound(proc: VfarProcess, q: float, alpha: float, mu_q: float) -> float:
    """Adjusted-norm bound for the order-1 autoregression.

    With Atilde the entrywise HS-norm matrix, c = ||Atilde^j||_2 < 1 at the
    smallest contractive power j and c' = max_{k <= j} ||Atilde^k||_2, the
    bound is c' * f(alpha) * sqrt(p) * mu_q^{1/q}, where

        f(alpha) = sup_m (m+1)^alpha c^{m/j - 1} / (1 - c^{1/j}).

    The leading moment constant is normalized to 1.  The scan over m stops
    when terms are decreasing and below 1e-12 of the running supremum.
    """
    At = entry_hs_matrix(proc.kernel)
    power = np.eye(proc.p)
    c = None
    c_prime = 0.0
    for j in range(1, 21):
        power = power @ At
        norm_j = float(np.linalg.norm(power, 2))
        c_prime = max(c_prime, norm_j)
        if norm_j < 1.0:
            c = norm_j
            break
    if c is None:
        raise ConfigurationError("no contractive power j <= 20 found")
    if c_prime == 0.0:
        return 0.0
    if c == 0.0:
        raise ConfigurationError(
            "nilpotent transition: the geometric bound formula degenerates at c = 0"
        )
    root = c ** (1.0 / j)
    f_alpha = 0.0
    m = 0
    while True:
        term = (m + 1.0) ** alpha * c ** (m / j - 1.0) / (1.0 - root)
        f_alpha = max(f_alpha, term)
        if m > 0 and term < prev_term and term < 1e-12 * f_alpha:
            break
        prev_term = term
        m += 1
        if m > 10_000_000:
            raise ConfigurationError("geometric bound scan did not terminate")
    return c_prime * f_alpha * np.sqrt(proc.p) * mu_q ** (1.0 / q)
