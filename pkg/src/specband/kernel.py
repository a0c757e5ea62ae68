"""Modulated-sinc covariance kernels and band-concentration matrices.

A uniform prior on a frequency band of half-width ``W`` around ``theta``
turns a random sinusoid into a stationary process with covariance
``sigma2 * cos(theta*tau) * sin(W*tau)/(W*tau)``.  Up to a scale factor the
corresponding Toeplitz matrix is the time/band concentration matrix of the
symmetric support set, whose spectrum is a plateau at one followed by an
abrupt collapse near index ``N * m(J) / 2pi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "PriorHyperParams",
    "FrequencyBand",
    "ToeplitzCovariance",
    "EigenSystem",
    "modulated_sinc",
    "modulated_sinc_cov",
    "build_signal_cov",
    "build_observed_cov",
    "bandpass_impulse_response",
    "concentration_matrix",
    "eigensystem",
    "eigen_count_at_least",
    "verify_trace_identities",
    "theoretical_rank",
]


@dataclass(frozen=True)
class PriorHyperParams:
    """Hyperparameters of the uniform frequency prior.

    Parameters
    ----------
    centers : array_like
        Center frequencies ``theta_l`` in radians/sample.
    half_bandwidth : float
        Common half-width ``W`` of every prior support interval.
    amp_variance : float
        Variance ``sigma2`` of each amplitude ``a_l``, ``b_l``.
    noise_variance : float
        Variance of the additive white noise.
    check : bool
        When False only the variances are validated.  Used for degenerate
        configurations (``theta = 0``, ``W = 0`` or ``W = pi``).
    """

    centers: np.ndarray
    half_bandwidth: float
    amp_variance: float = 1.0
    noise_variance: float = 0.0
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        centers = np.atleast_1d(np.asarray(self.centers, dtype=float))
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "half_bandwidth", float(self.half_bandwidth))
        if centers.ndim != 1 or centers.size == 0:
            raise ValueError("centers must be a nonempty vector")
        if not self.amp_variance > 0:
            raise ValueError("amp_variance must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be nonnegative")
        if self.check:
            self._check_supports()

    def _check_supports(self):
        W = self.half_bandwidth
        theta = np.sort(self.centers)
        if not 0 < W < np.pi:
            raise ValueError(f"half_bandwidth {W} outside (0, pi)")
        if np.any(theta <= W) or np.any(theta + W >= np.pi):
            raise ValueError("each center must satisfy W < theta < pi - W")
        if np.any(np.diff(theta) <= 2 * W):
            raise ValueError("prior supports overlap: need |theta_i - theta_j| > 2W")

    @property
    def nu(self) -> int:
        return self.centers.size

    def support(self) -> "FrequencyBand":
        """Symmetrized support ``S = U_l [+-theta_l - W, +-theta_l + W]``."""
        W = self.half_bandwidth
        ivs = []
        for th in self.centers:
            ivs.append((th - W, th + W))
            ivs.append((-th - W, -th + W))
        return FrequencyBand(ivs)


@dataclass(frozen=True)
class FrequencyBand:
    """Finite union of disjoint closed subintervals of ``[-pi, pi]``."""

    intervals: tuple

    def __post_init__(self):
        ivs = sorted((float(a), float(b)) for a, b in self.intervals)
        if not ivs:
            raise ValueError("band needs at least one interval")
        for a, b in ivs:
            if not -np.pi - 1e-12 <= a < b <= np.pi + 1e-12:
                raise ValueError(f"interval ({a}, {b}) is not inside [-pi, pi]")
        for (_, b0), (a1, _) in zip(ivs[:-1], ivs[1:]):
            if a1 <= b0:
                raise ValueError("band intervals overlap")
        object.__setattr__(self, "intervals", tuple(ivs))

    @classmethod
    def symmetric(cls, positive_intervals) -> "FrequencyBand":
        """Mirror a set of intervals in ``[0, pi]`` about the origin."""
        ivs = []
        for a, b in positive_intervals:
            if a == 0:
                ivs.append((-b, b))
            else:
                ivs.extend([(a, b), (-b, -a)])
        return cls(ivs)

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    @property
    def fraction(self) -> float:
        """Normalized measure ``m(J) / 2pi``."""
        return self.measure / (2 * np.pi)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        mirrored = sorted((-b, -a) for a, b in self.intervals)
        return all(
            abs(a - c) <= tol and abs(b - d) <= tol
            for (a, b), (c, d) in zip(self.intervals, mirrored)
        )


@dataclass(frozen=True)
class ToeplitzCovariance:
    """Symmetric Toeplitz matrix stored by its first column."""

    first_column: np.ndarray

    def __post_init__(self):
        col = np.asarray(self.first_column, dtype=float)
        if col.ndim != 1 or col.size < 1:
            raise ValueError("first_column must be a nonempty vector")
        object.__setattr__(self, "first_column", col)

    @property
    def N(self) -> int:
        return self.first_column.size

    def to_dense(self) -> np.ndarray:
        return scipy.linalg.toeplitz(self.first_column)

    def eigen(self) -> "EigenSystem":
        return eigensystem(self.to_dense())

    def is_psd(self, rtol: float = 1e-8) -> bool:
        """PSD up to ``-rtol * K(0)``; large Toeplitz spectra dip slightly below zero."""
        lam = np.linalg.eigvalsh(self.to_dense())
        return bool(lam.min() >= -rtol * max(abs(self.first_column[0]), 1e-300))


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues in nonincreasing order with matching orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def N(self) -> int:
        return self.values.size


def eigensystem(matrix) -> EigenSystem:
    """Full symmetric eigendecomposition sorted nonincreasingly.

    Ties keep the order returned by the solver (stable sort), so repeated
    runs on the same matrix give the same column order.
    """
    matrix = np.asarray(matrix, dtype=float)
    lam, Q = np.linalg.eigh(matrix)
    order = np.argsort(-lam, kind="stable")
    return EigenSystem(lam[order], Q[:, order])


def modulated_sinc(tau, centers, W, sigma2=1.0):
    """``sigma2 * sinc(W tau) * sum_l cos(theta_l tau)``, vectorized over ``tau``."""
    tau = np.asarray(tau, dtype=float)
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    # np.sinc is the normalized sinc: sin(pi x)/(pi x)
    envelope = np.sinc(W * tau / np.pi)
    carrier = np.cos(np.multiply.outer(tau, centers)).sum(axis=-1)
    return sigma2 * envelope * carrier


def modulated_sinc_cov(params: PriorHyperParams, tau):
    """Signal covariance ``K(tau)`` implied by the prior (noise excluded)."""
    return modulated_sinc(tau, params.centers, params.half_bandwidth, params.amp_variance)


def _check_size(N):
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N}")
    return int(N)


def build_signal_cov(params: PriorHyperParams, N: int) -> ToeplitzCovariance:
    N = _check_size(N)
    return ToeplitzCovariance(modulated_sinc_cov(params, np.arange(N)))


def build_observed_cov(params: PriorHyperParams, N: int) -> ToeplitzCovariance:
    """Covariance of the noisy observations, ``K_N + sigma_w^2 I``."""
    col = build_signal_cov(params, N).first_column.copy()
    col[0] += params.noise_variance
    return ToeplitzCovariance(col)


def bandpass_impulse_response(band: FrequencyBand, t):
    """Impulse response ``(1/2pi) int_J exp(i t w) dw`` of the ideal band filter.

    Evaluated in closed form interval by interval; ``t`` may be an array of
    integer lags.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    nz = t != 0
    tn = t[nz]
    for a, b in band.intervals:
        out[nz] += (np.exp(1j * tn * b) - np.exp(1j * tn * a)) / (1j * tn)
    out[~nz] = band.measure
    return out / (2 * np.pi)


def concentration_matrix(band: FrequencyBand, N: int) -> ToeplitzCovariance:
    """Real symmetric Toeplitz matrix ``R[j, k] = rho(j - k)`` for a symmetric band."""
    N = _check_size(N)
    if not band.is_symmetric():
        raise ValueError("concentration_matrix requires a band symmetric about 0")
    rho = bandpass_impulse_response(band, np.arange(N))
    return ToeplitzCovariance(rho.real)


def eigen_count_at_least(es: EigenSystem, gamma: float) -> int:
    """Number ``M(gamma, N)`` of eigenvalues no less than ``gamma``."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    return int(np.count_nonzero(es.values >= gamma))


def verify_trace_identities(band: FrequencyBand, N: int) -> dict:
    """Compare the spectrum of ``R`` with its first- and second-moment limits.

    ``trace_gap`` is ``|sum(lam) - N m(J)/2pi|`` and is exact up to rounding.
    ``sqsum_gap`` is ``|mean(lam**2) - m(J)/2pi|``, which only vanishes as
    ``N`` grows.  Together they bound the number of eigenvalues strictly
    between 0 and 1, since ``sum lam (1 - lam)`` is their difference.
    """
    R = concentration_matrix(band, N)
    lam = np.linalg.eigvalsh(R.to_dense())
    frac = band.fraction
    return {
        "N": int(N),
        "fraction": frac,
        "trace": float(lam.sum()),
        "trace_gap": float(abs(lam.sum() - N * frac)),
        "sqsum_gap": float(abs(np.mean(lam**2) - frac)),
        "transition_mass": float(np.sum(lam * (1 - lam))),
    }


def theoretical_rank(nu: int, W: float, N: int) -> int:
    """Asymptotic numerical rank ``round(2 nu W N / pi)`` clamped to ``[1, N]``."""
    n = int(np.floor(2 * nu * W * N / np.pi + 0.5))
    return min(max(n, 1), int(N))
