"""Subspace estimation of the prior center frequencies.

A rank-``n`` truncation of the covariance is the covariance of an autonomous
state-space model ``xi(t+1) = A xi(t)``, ``x(t) = c xi(t)`` with ``A``
orthogonal.  Its observability matrix is spanned by the top eigenvectors
``H`` of the estimated covariance; ``A`` follows from the shift invariance
``H[1:] ~ H[:-1] A`` solved as an orthogonal Procrustes problem.  The
eigen-phases of ``A`` form a line spectrum that clusters inside the prior
supports, and the cluster means estimate the centers.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .covest import CovEstimate, estimate_covariance
from .kernel import EigenSystem

__all__ = [
    "ObservabilitySlice",
    "RotationRealization",
    "PhaseClusters",
    "SubspaceResult",
    "InsufficientSpectralContent",
    "truncate_eigenvectors",
    "solve_orthogonal_procrustes",
    "phase_angles",
    "cluster_phases",
    "optimal_partition_1d",
    "estimate_centers",
    "discrete_spectrum",
]

PHASE_EDGE_TOL = 1e-9


class InsufficientSpectralContent(ValueError):
    """Fewer usable phases than requested clusters."""


@dataclass(frozen=True)
class ObservabilitySlice:
    H: np.ndarray

    @property
    def n(self) -> int:
        return self.H.shape[1]


@dataclass(frozen=True)
class RotationRealization:
    A: np.ndarray
    c: np.ndarray
    singular_values: np.ndarray = field(default_factory=lambda: np.empty(0))
    degenerate: bool = False


@dataclass(frozen=True)
class PhaseClusters:
    phases: np.ndarray
    assignment: np.ndarray
    centers: np.ndarray
    counts: np.ndarray


def truncate_eigenvectors(eigen: EigenSystem, n: int) -> ObservabilitySlice:
    """Leading ``n`` eigenvectors as an ``N x n`` orthonormal slice."""
    N = eigen.vectors.shape[0]
    if not 1 <= n < N:
        raise ValueError(f"rank n={n} must satisfy 1 <= n < N={N}")
    return ObservabilitySlice(np.array(eigen.vectors[:, :n]))


def solve_orthogonal_procrustes(H, k: int | None = None, sv_tol: float = 1e-12) -> RotationRealization:
    """Orthogonal ``A`` minimizing ``||H[:k] A - H[1:k+1]||_F``.

    ``A = U V^T`` where ``U S V^T`` is the SVD of ``H[:k]^T H[1:k+1]``.
    ``k`` defaults to ``N - 1``.  Vanishing singular values make the
    minimizer non-unique; the factors are still used and the realization
    is flagged ``degenerate``.
    """
    H = H.H if isinstance(H, ObservabilitySlice) else np.asarray(H, dtype=float)
    N, n = H.shape
    k = N - 1 if k is None else int(k)
    if not 1 <= k <= N - 1:
        raise ValueError(f"shift depth k={k} must lie in [1, N-1]")
    U, s, Vt = np.linalg.svd(H[:k].T @ H[1 : k + 1])
    A = U @ Vt
    degenerate = bool(s.size and s[-1] <= sv_tol * max(s[0], 1e-300))
    if degenerate:
        warnings.warn("Procrustes cross-product is rank deficient", RuntimeWarning)
    return RotationRealization(A, H[0].copy(), s, degenerate)


def _eig_unitary(A):
    # complex Schur form of a normal matrix is diagonal with a unitary basis,
    # which keeps eigenvectors orthonormal even for repeated eigenvalues
    T, Z = scipy.linalg.schur(np.asarray(A, dtype=complex), output="complex")
    return np.diag(T), Z


def phase_angles(real: RotationRealization, return_edges: bool = False):
    """Strictly positive eigen-phases of ``A``, sorted, in ``(0, pi)``.

    Conjugate pairs are folded onto the positive member.  Phases within
    ``1e-9`` of ``0`` or ``pi`` belong to real eigenvalues ``+-1`` and are
    dropped; with ``return_edges`` they are returned as a second array.
    """
    ev, _ = _eig_unitary(real.A)
    ph = np.angle(ev)
    edge = (np.abs(ph) <= PHASE_EDGE_TOL) | (np.abs(ph) >= np.pi - PHASE_EDGE_TOL)
    pos = np.sort(ph[(ph > 0) & ~edge])
    if return_edges:
        return pos, np.sort(ph[edge])
    return pos


def _sse(x):
    return float(np.sum((x - x.mean()) ** 2)) if x.size else 0.0


def optimal_partition_1d(x, k: int) -> np.ndarray:
    """Exact 1-D k-means by dynamic programming over sorted data.

    Returns the ``k - 1`` split positions into the sorted array.
    """
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    s1 = np.concatenate([[0.0], np.cumsum(x)])
    s2 = np.concatenate([[0.0], np.cumsum(x * x)])

    def cost(i, j):  # sse of x[i:j]
        m = j - i
        return s2[j] - s2[i] - (s1[j] - s1[i]) ** 2 / m

    D = np.full((k + 1, n + 1), np.inf)
    B = np.zeros((k + 1, n + 1), dtype=int)
    D[0, 0] = 0.0
    for c in range(1, k + 1):
        for j in range(c, n + 1):
            best, arg = np.inf, c - 1
            for i in range(c - 1, j):
                v = D[c - 1, i] + cost(i, j)
                if v < best - 1e-15:
                    best, arg = v, i
            D[c, j], B[c, j] = best, arg
    cuts, j = [], n
    for c in range(k, 0, -1):
        j = B[c, j]
        cuts.append(j)
    return np.array(sorted(cuts)[1:], dtype=int)


def _labels_from_cuts(n, cuts):
    labels = np.zeros(n, dtype=int)
    for c in cuts:
        labels[c:] += 1
    return labels


def _lloyd_1d(x, labels, k, max_iter=100):
    # x sorted; contiguous clusters are preserved by nearest-center assignment
    for _ in range(max_iter):
        centers = np.array([x[labels == j].mean() for j in range(k)])
        mids = 0.5 * (centers[1:] + centers[:-1])
        new = np.searchsorted(mids, x, side="right")
        if np.array_equal(new, labels) or len(np.unique(new)) < k:
            break
        labels = new
    return labels


def cluster_phases(phases, nu: int, method: str = "gap") -> PhaseClusters:
    """Group sorted phases into ``nu`` contiguous clusters and average each.

    ``method``:

    * ``"gap"`` - cut at the ``nu - 1`` largest gaps, then Lloyd refinement.
    * ``"optimal"`` - exact minimum within-cluster sum of squares (DP).
    * ``"kmeans"`` - plain Lloyd iterations from quantile seeds; can stall
      in a local optimum when cluster sizes are very unequal.
    """
    x = np.sort(np.asarray(phases, dtype=float))
    n = x.size
    if nu < 1:
        raise ValueError("nu must be >= 1")
    if n < nu:
        raise InsufficientSpectralContent(
            f"insufficient spectral content: {n} phases for {nu} clusters"
        )
    if nu == 1:
        labels = np.zeros(n, dtype=int)
    elif method == "gap":
        gaps = np.diff(x)
        cuts = np.sort(np.argsort(-gaps, kind="stable")[: nu - 1] + 1)
        labels = _lloyd_1d(x, _labels_from_cuts(n, cuts), nu)
    elif method == "optimal":
        labels = _labels_from_cuts(n, optimal_partition_1d(x, nu))
    elif method == "kmeans":
        seeds = np.quantile(x, (np.arange(nu) + 0.5) / nu)
        mids = 0.5 * (seeds[1:] + seeds[:-1])
        labels = np.searchsorted(mids, x, side="right")
        if len(np.unique(labels)) < nu:
            labels = _labels_from_cuts(n, np.linspace(0, n, nu + 1)[1:-1].astype(int))
        labels = _lloyd_1d(x, labels, nu)
    else:
        raise ValueError(f"unknown clustering method {method!r}")
    counts = np.bincount(labels, minlength=nu)
    centers = np.array([x[labels == j].mean() for j in range(nu)])
    return PhaseClusters(x, labels, centers, counts)


def discrete_spectrum(real: RotationRealization, scale: float = 1.0):
    """Line spectrum of the realization with ``P = scale * I``.

    Returns ``(phases, weights)`` for all ``n`` eigenvalues of ``A``; the
    weight at ``phi_k`` is ``scale * |(c T)_k|^2`` with ``T`` the unitary
    eigenbasis, so the weights add up to ``c P c^T``.
    """
    ev, T = _eig_unitary(real.A)
    w = scale * np.abs(real.c @ T) ** 2
    ph = np.angle(ev)
    order = np.argsort(ph, kind="stable")
    return ph[order], w[order]


@dataclass(frozen=True)
class SubspaceResult:
    theta_hat: np.ndarray
    W_hat: float
    rank_hat: int
    clusters: PhaseClusters
    realization: RotationRealization
    spectrum_phases: np.ndarray
    spectrum_weights: np.ndarray
    cov: CovEstimate | None = None
    flags: tuple = ()

    def to_dict(self) -> dict:
        return {
            "theta_hat": self.theta_hat.tolist(),
            "W_hat": self.W_hat,
            "rank_hat": self.rank_hat,
            "phases": self.clusters.phases.tolist(),
            "weights": self.spectrum_weights.tolist(),
            "spectrum_phases": self.spectrum_phases.tolist(),
            "cluster_labels": self.clusters.assignment.tolist(),
            "flags": list(self.flags),
        }


def estimate_centers(
    data,
    nu: int,
    *,
    rank: int | None = None,
    k: int | None = None,
    method: str = "gap",
    search_max: int | None = None,
) -> SubspaceResult:
    """Subspace center-frequency estimate from a panel or a :class:`CovEstimate`.

    Steps: Toeplitz covariance, ratio rank and bandwidth, top-``n``
    eigenvectors, Procrustes shift solve, eigen-phases, clustering.
    """
    cov = data if isinstance(data, CovEstimate) else estimate_covariance(data, nu, search_max=search_max)
    flags = list(cov.flags)
    n = cov.rank_hat if rank is None else int(rank)
    sl = truncate_eigenvectors(cov.eigen, n)
    real = solve_orthogonal_procrustes(sl, k)
    if real.degenerate:
        flags.append("procrustes_degenerate")
    phases, edges = phase_angles(real, return_edges=True)
    if edges.size:
        flags.append(f"edge_phases={edges.size}")
    clusters = cluster_phases(phases, nu, method)
    scale = float(np.mean(cov.eigen.values[:n]) - cov.noise_floor)
    sp, sw = discrete_spectrum(real, max(scale, 0.0))
    W_hat = cov.W_hat if rank is None else float(min(np.pi / 2 * n / (nu * cov.eigen.N), np.pi / 2))
    # phases more than W_hat from their own center came from rank overestimation
    stray = sum(
        int(np.sum(np.abs(clusters.phases[clusters.assignment == j] - c) > W_hat))
        for j, c in enumerate(clusters.centers)
    )
    if stray:
        flags.append(f"stray_phases={stray}")
    return SubspaceResult(
        np.sort(clusters.centers), W_hat, n, clusters, real, sp, sw, cov, tuple(flags)
    )

