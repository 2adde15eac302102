"""Leontief algebra and spectral certificates for the industry network.

Everything here is dense linear algebra on desk-scale matrices. The
production path inverts (I - beta*A) by LU factorization with partial
pivoting; truncated power-series summation appears only in the test suite as
an independent oracle. Spectral checks certify the properties the dynamics
module relies on: rho(A) < 1, (I - beta*A) an invertible M-matrix, and
(beta*A - I) stable and diagonally stable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import Economy, InternalConsistencyError, IOTable


class IllConditionedWarning(UserWarning):
    """The linear system is close to singular; results may lose digits."""


#: residual tolerance for the exact algebraic identities checked below
_IDENTITY_TOL = 1e-10


def spectral_radius(A: np.ndarray) -> float:
    """Largest eigenvalue modulus of A."""
    return float(np.abs(np.linalg.eigvals(np.asarray(A, dtype=float))).max())


def leontief_inverse(
    A: np.ndarray, beta: float = 1.0, cond_threshold: float = 1e12
) -> np.ndarray:
    """Total-requirements matrix (I - beta*A)^-1 for a substochastic A.

    beta in [0, 1] damps the network; beta = 1 is admissible because
    rho(A) < 1 already guarantees invertibility. Warns when the system's
    condition number exceeds ``cond_threshold``.
    """
    A = np.asarray(A, dtype=float)
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    n = A.shape[0]
    M = np.eye(n) - beta * A
    cond = np.linalg.cond(M)
    if cond > cond_threshold:
        warnings.warn(
            f"(I - beta*A) has condition number {cond:.3e} above {cond_threshold:.1e}",
            IllConditionedWarning,
            stacklevel=2,
        )
    return np.linalg.solve(M, np.eye(n))


def output_multipliers(H: np.ndarray) -> np.ndarray:
    """Row sums of the Leontief inverse: supply-chain length per industry."""
    return np.asarray(H, dtype=float).sum(axis=1)


def weighted_multiplier(
    multipliers: np.ndarray,
    consumption_shares: np.ndarray,
    io_table: IOTable | None = None,
    rel_tol: float = 1e-8,
) -> float:
    """Consumption-weighted mean output multiplier.

    When a monetary table is supplied, the accounting identity
    (weighted multiplier) = (total output) / (final consumption) is asserted
    within ``rel_tol``.
    """
    multipliers = np.asarray(multipliers, dtype=float)
    shares = np.asarray(consumption_shares, dtype=float)
    if multipliers.shape != shares.shape:
        raise ValueError("multipliers and consumption shares must have equal length")
    value = float(multipliers @ shares)
    if io_table is not None:
        ratio = io_table.total_output / io_table.total_consumption
        if abs(value - ratio) > rel_tol * max(abs(value), abs(ratio)):
            raise InternalConsistencyError(
                f"weighted multiplier {value:.12g} disagrees with output/consumption "
                f"ratio {ratio:.12g}"
            )
    return value


def domar_weights(economy: Economy) -> np.ndarray:
    """Sales-to-consumption ratios: theta solves theta' (I - A) = c'.

    When the economy carries preference weights equal to its consumption
    shares, the preference-based weights must coincide; this is asserted.
    """
    n = economy.n
    theta = np.linalg.solve(np.eye(n) - economy.A.T, economy.consumption_shares)
    if economy.preferences is not None and np.allclose(
        economy.preferences, economy.consumption_shares, rtol=0.0, atol=1e-12
    ):
        theta_pref = preference_domar_weights(economy)
        gap = float(np.abs(theta - theta_pref).max())
        if gap > _IDENTITY_TOL:
            raise InternalConsistencyError(
                f"flow-based and preference-based Domar weights disagree by {gap:.3e}"
            )
    return theta


def preference_domar_weights(economy: Economy) -> np.ndarray:
    """Domar weights implied by logarithmic preferences.

    Market clearing gives theta_i = psi_i + sum_j a_ji theta_j, the same
    fixed point the flow-based weights satisfy with consumption shares; the
    two routes therefore agree whenever the spending shares equal the
    preference weights.
    """
    if economy.preferences is None:
        raise ValueError("economy carries no preference weights")
    n = economy.n
    return np.linalg.solve(np.eye(n) - economy.A.T, economy.preferences)


@dataclass(frozen=True)
class NetworkStats:
    """Derived network quantities at a given damping level.

    Residuals of the defining fixed points (H = I + A H and
    theta' = c' + theta' A) are retained for reporting.
    """

    beta: float
    H: np.ndarray
    H_beta: np.ndarray
    multipliers: np.ndarray
    weighted_multiplier: float
    domar: np.ndarray
    neumann_residual: float
    domar_residual: float

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "H": self.H.tolist(),
            "H_beta": self.H_beta.tolist(),
            "multipliers": self.multipliers.tolist(),
            "weighted_multiplier": self.weighted_multiplier,
            "domar": self.domar.tolist(),
            "residuals": {
                "neumann_fixed_point": self.neumann_residual,
                "domar_fixed_point": self.domar_residual,
            },
        }


def compute_stats(
    economy: Economy, beta: float = 1.0, io_table: IOTable | None = None
) -> NetworkStats:
    """Compute all network statistics and verify their fixed-point identities."""
    n = economy.n
    H = leontief_inverse(economy.A, 1.0)
    H_beta = H if beta == 1.0 else leontief_inverse(economy.A, beta)
    mult = output_multipliers(H)
    theta = domar_weights(economy)
    lbar = weighted_multiplier(mult, economy.consumption_shares, io_table)

    neumann = float(np.abs(H - (np.eye(n) + economy.A @ H)).max())
    domar_fp = float(
        np.abs(theta - (economy.consumption_shares + economy.A.T @ theta)).max()
    )
    entrywise_floor = float(H.min())
    problems = []
    if neumann > _IDENTITY_TOL:
        problems.append(f"H fixed-point residual {neumann:.3e}")
    if domar_fp > _IDENTITY_TOL:
        problems.append(f"Domar fixed-point residual {domar_fp:.3e}")
    if entrywise_floor < -1e-12:
        problems.append(f"H has negative entry {entrywise_floor:.3e}")
    if float(np.diag(H).min()) < 1.0 - 1e-12 or float(mult.min()) < 1.0 - 1e-12:
        problems.append("diagonal of H or a multiplier fell below 1")
    if problems:
        raise InternalConsistencyError("; ".join(problems))

    return NetworkStats(
        beta=float(beta),
        H=H,
        H_beta=H_beta,
        multipliers=mult,
        weighted_multiplier=lbar,
        domar=theta,
        neumann_residual=neumann,
        domar_residual=domar_fp,
    )


# ---------------------------------------------------------------------------
# Spectral diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralReport:
    """Spectral certificates for the damped interaction matrix.

    ``m_matrix`` certifies (I - beta*A): nonnegative inverse and positive
    leading principal minors. ``diagonally_stable_analytic`` is the
    authoritative certificate (negative diagonal, nonnegative off-diagonal,
    stable); sampling with random positive diagonal rescalings corroborates
    it. The eigenvalue-shift check confirms eig(k2*A - k1*I) = k2*eig(A) - k1
    as multisets.
    """

    beta: float
    rho: float
    interaction_max_real: float
    m_matrix_inverse_nonnegative: bool
    m_matrix_min_inverse_entry: float
    m_matrix_minors_positive: bool
    m_matrix_min_minor: float
    stable: bool
    diagonally_stable_analytic: bool
    diagonally_stable_sampled: bool
    sampled_max_real: float
    n_samples: int
    sample_seed: int
    shift_k1: float
    shift_k2: float
    shift_deviation: float
    shift_ok: bool

    @property
    def all_certified(self) -> bool:
        return (
            self.rho < 1.0
            and self.interaction_max_real < 0.0
            and self.m_matrix_inverse_nonnegative
            and self.m_matrix_minors_positive
            and self.stable
            and self.diagonally_stable_analytic
            and self.diagonally_stable_sampled
            and self.shift_ok
        )

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "spectral_radius": self.rho,
            "interaction_max_real_part": self.interaction_max_real,
            "m_matrix": {
                "inverse_nonnegative": self.m_matrix_inverse_nonnegative,
                "min_inverse_entry": self.m_matrix_min_inverse_entry,
                "minors_positive": self.m_matrix_minors_positive,
                "min_leading_minor": self.m_matrix_min_minor,
            },
            "stability": {
                "stable": self.stable,
                "diagonally_stable_analytic": self.diagonally_stable_analytic,
                "diagonally_stable_sampled": self.diagonally_stable_sampled,
                "sampled_max_real_part": self.sampled_max_real,
                "n_samples": self.n_samples,
                "sample_seed": self.sample_seed,
            },
            "eigenvalue_shift": {
                "k1": self.shift_k1,
                "k2": self.shift_k2,
                "max_deviation": self.shift_deviation,
                "ok": self.shift_ok,
            },
            "all_certified": self.all_certified,
        }


def eigenvalue_shift_deviation(A: np.ndarray, k1: float, k2: float) -> float:
    """Max multiset distance between eig(k2*A - k1*I) and k2*eig(A) - k1."""
    A = np.asarray(A, dtype=float)
    kappa = np.linalg.eigvals(A)
    shifted = np.linalg.eigvals(k2 * A - k1 * np.eye(A.shape[0]))
    lhs = np.sort_complex(shifted)
    rhs = np.sort_complex(k2 * kappa - k1)
    return float(np.abs(lhs - rhs).max())


def spectral_report(
    A: np.ndarray,
    beta: float = 1.0,
    k1: float = 1.0,
    k2: float | None = None,
    n_samples: int = 100,
    seed: int = 0,
) -> SpectralReport:
    """Assemble spectral certificates for A at the given damping level.

    k1 and k2 parametrize the eigenvalue-shift check; the default
    (k1 = 1, k2 = beta) covers exactly the interaction matrix beta*A - I.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if k2 is None:
        k2 = beta if beta > 0 else 1.0
    if k2 <= 0:
        raise ValueError(f"k2 must be positive, got {k2}")

    rho = spectral_radius(A)
    interaction = beta * A - np.eye(n)
    eigs = np.linalg.eigvals(interaction)
    max_real = float(eigs.real.max())

    M = np.eye(n) - beta * A
    Minv = np.linalg.solve(M, np.eye(n))
    min_entry = float(Minv.min())
    inverse_nonneg = min_entry >= -1e-12
    minors = [float(np.linalg.det(M[: k + 1, : k + 1])) for k in range(n)]
    min_minor = min(minors)
    minors_positive = min_minor > 0.0

    stable = max_real < 0.0
    # Sufficient condition: stable, nonnegative off diagonal, negative diagonal.
    off = interaction - np.diag(np.diag(interaction))
    analytic = stable and float(off.min()) >= 0.0 and float(np.diag(interaction).max()) < 0.0

    rng = np.random.default_rng(seed)
    sampled_max = -np.inf
    for _ in range(n_samples):
        y = np.exp(rng.uniform(np.log(0.1), np.log(10.0), n))
        sampled = np.linalg.eigvals(y[:, None] * interaction)
        sampled_max = max(sampled_max, float(sampled.real.max()))
    sampled_ok = n_samples == 0 or sampled_max < 0.0

    shift_dev = eigenvalue_shift_deviation(A, k1, k2)

    return SpectralReport(
        beta=float(beta),
        rho=rho,
        interaction_max_real=max_real,
        m_matrix_inverse_nonnegative=inverse_nonneg,
        m_matrix_min_inverse_entry=min_entry,
        m_matrix_minors_positive=minors_positive,
        m_matrix_min_minor=min_minor,
        stable=stable,
        diagonally_stable_analytic=analytic,
        diagonally_stable_sampled=sampled_ok,
        sampled_max_real=float(sampled_max) if n_samples else float("nan"),
        n_samples=n_samples,
        sample_seed=seed,
        shift_k1=float(k1),
        shift_k2=float(k2),
        shift_deviation=shift_dev,
        shift_ok=shift_dev <= 1e-10,
    )
