"""Covariance estimation from snapshot panels.

The observed process is not ergodic (each path carries its own random
amplitudes and frequencies), so covariances are estimated by averaging
across snapshots.  From the estimated Toeplitz covariance we read off the
noise floor, the signal variance, a numerical rank and from it the prior
half-bandwidth.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .kernel import EigenSystem, ToeplitzCovariance, eigensystem
from .signal import SnapshotPanel

__all__ = [
    "CovEstimate",
    "center_panel",
    "toeplitz_cov_estimate",
    "outer_product_cov_estimate",
    "noise_floor",
    "rank_by_ratio",
    "bandwidth_from_rank",
    "estimate_covariance",
    "arccos_center_estimate",
    "NoSpectralKnee",
]


class NoSpectralKnee(ValueError):
    """Raised when a spectrum is flat and no rank can be read from it."""


@dataclass(frozen=True)
class CovEstimate:
    sigma_hat: ToeplitzCovariance
    eigen: EigenSystem
    noise_floor: float
    signal_variance: float
    rank_hat: int
    W_hat: float
    nu: int = 1
    flags: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "first_column": self.sigma_hat.first_column.tolist(),
            "eigenvalues": self.eigen.values.tolist(),
            "noise_floor": self.noise_floor,
            "signal_variance": self.signal_variance,
            "rank_hat": self.rank_hat,
            "W_hat": self.W_hat,
            "nu": self.nu,
            "flags": list(self.flags),
        }


def _data(panel):
    return panel.data if isinstance(panel, SnapshotPanel) else np.atleast_2d(np.asarray(panel, float))


def center_panel(panel):
    """Subtract each snapshot's own time mean."""
    Y = _data(panel)
    Yc = Y - Y.mean(axis=1, keepdims=True)
    if isinstance(panel, SnapshotPanel):
        return SnapshotPanel(Yc, panel.omega, panel.a, panel.b, dict(panel.meta))
    return Yc


def toeplitz_cov_estimate(panel) -> ToeplitzCovariance:
    """Cross-sectional mean of per-path lag products.

    Each path contributes ``sigma_k(tau) = 1/(N - tau) sum_t y(t + tau) y(t)``
    for ``tau = 0..N-1``; the panel is used as given, so center it first.
    """
    Y = _data(panel)
    L, N = Y.shape
    # FFT autocorrelation; zero-padding to 2N avoids circular wraparound
    nfft = 1 << int(np.ceil(np.log2(2 * N)))
    F = np.fft.rfft(Y, n=nfft, axis=1)
    acf = np.fft.irfft(np.abs(F) ** 2, n=nfft, axis=1)[:, :N]
    lag_sums = acf.mean(axis=0)
    return ToeplitzCovariance(lag_sums / (N - np.arange(N)))


def outer_product_cov_estimate(panel) -> np.ndarray:
    """``(1/L) sum_k y_k y_k^T``; PSD but not Toeplitz."""
    Y = _data(panel)
    S = Y.T @ Y / Y.shape[0]
    return 0.5 * (S + S.T)


def noise_floor(eigen: EigenSystem) -> float:
    """Smallest eigenvalue, floored at zero."""
    return float(max(eigen.values[-1], 0.0))


def rank_by_ratio(eigen: EigenSystem, search_max: int | None = None) -> int:
    """Index ``k`` maximizing ``lam_k^2 / lam_{k+1}^2`` (1-based).

    The search covers ``k = 1..search_max`` and defaults to ``ceil(N/2)``.
    Pass ``search_max = N - 1`` for the full range.  Only indices whose
    next eigenvalue is positive are eligible, since the ratio of squares is
    meaningless once the estimated spectrum crosses zero.  Ties go to the
    smallest index.
    """
    lam = np.asarray(eigen.values, dtype=float)
    N = lam.size
    if N < 2:
        raise NoSpectralKnee("need at least two eigenvalues")
    kmax = (N + 1) // 2 if search_max is None else int(search_max)
    kmax = min(max(kmax, 1), N - 1)
    head = lam[: kmax + 1]
    if np.ptp(head) <= 1e-14 * max(abs(head).max(), 1e-300):
        raise NoSpectralKnee("no spectral knee: eigenvalues are all equal")
    num, den = head[:-1], head[1:]
    ratio = np.full(kmax, -np.inf)
    ok = den > 0
    ratio[ok] = num[ok] ** 2 / den[ok] ** 2
    if not np.any(ok):
        raise NoSpectralKnee("no positive eigenvalues in the search range")
    return int(np.argmax(ratio)) + 1


def bandwidth_from_rank(rank_hat: int, nu: int, N: int) -> float:
    """Invert ``rank = 2 nu W N / pi``; clamped to ``(0, pi/2]``."""
    if rank_hat < 1:
        raise ValueError("rank_hat must be >= 1")
    return float(min(np.pi / 2 * rank_hat / (nu * N), np.pi / 2))


def estimate_covariance(
    panel,
    nu: int = 1,
    *,
    search_max: int | None = None,
    rank: int | None = None,
    estimator: str = "toeplitz",
    center: bool = True,
) -> CovEstimate:
    """Run the whole covariance stage: estimate, eigen-analysis, rank and bandwidth.

    ``estimator`` selects ``"toeplitz"`` (default) or ``"outer"``; the
    latter is re-Toeplitzified by diagonal averaging so that lag values
    are still available.  ``rank`` overrides the ratio rule.
    """
    Y = center_panel(_data(panel)) if center else _data(panel)
    N = Y.shape[1]
    if estimator == "toeplitz":
        sigma_hat = toeplitz_cov_estimate(Y)
        eig = sigma_hat.eigen()
    elif estimator == "outer":
        S = outer_product_cov_estimate(Y)
        sigma_hat = ToeplitzCovariance(np.array([np.diagonal(S, k).mean() for k in range(N)]))
        eig = eigensystem(S)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    flags = []
    lam_min = noise_floor(eig)
    sx2 = sigma_hat.first_column[0] - lam_min
    if sx2 < 0:
        warnings.warn("estimated signal variance negative; clamped to 0", RuntimeWarning)
        flags.append("signal_variance_clamped")
        sx2 = 0.0
    if rank is None:
        rank = rank_by_ratio(eig, search_max)
    rank = int(min(max(rank, 1), N - 1))
    W_hat = bandwidth_from_rank(rank, nu, N)
    return CovEstimate(sigma_hat, eig, lam_min, float(sx2), rank, W_hat, int(nu), tuple(flags))


def arccos_center_estimate(est: CovEstimate, return_flag: bool = False):
    """Coarse single-frequency center from the lag-1 covariance.

    Uses ``sigma_x(1) = sigma2 cos(theta) sin(W)/W`` with the lag-1 value of
    the estimated covariance (noise only touches lag 0).  The arccos
    argument is clamped to ``[-1, 1]``; with ``return_flag`` the clamp is
    reported as a second return value.
    """
    if est.signal_variance <= 0:
        raise ValueError("signal variance estimate is not positive; center undefined")
    W = est.W_hat
    arg = est.sigma_hat.first_column[1] / est.signal_variance * (W / np.sin(W))
    clamped = abs(arg) > 1
    if clamped:
        warnings.warn(f"arccos argument {arg:.4g} clamped to [-1, 1]", RuntimeWarning)
    theta = float(np.arccos(np.clip(arg, -1.0, 1.0)))
    return (theta, bool(clamped)) if return_flag else theta
