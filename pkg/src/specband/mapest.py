"""MAP refinement of the frequency vector inside the estimated prior box.

Under the uniform prior the MAP estimate minimizes the residual
``||y - V(omega) u||^2`` over the hypercube ``|omega_l - theta_l| <= W``.
The problem is solved by box-constrained Gauss-Newton steps on the
variable-projection objective: amplitudes are the least-squares fit for
the current frequencies, and the residual is linearized in ``omega``
through the derivative of ``V(omega) u``.  When the amplitudes are refitted
at every iterate that derivative is projected onto the orthogonal
complement of ``range(V)``, which restores quadratic convergence on
zero-residual problems.

Several snapshots share the same frequencies and have their own amplitude
columns; their squared residuals add (Frobenius norm).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import lsq_linear

__all__ = [
    "DesignMatrix",
    "MapProblem",
    "MapResult",
    "SingularDesign",
    "build_design",
    "amplitude_ls",
    "gradient_matrix",
    "box_projected_ls",
    "map_refine",
    "decaying_ridge",
]

COND_LIMIT = 1e12


class SingularDesign(np.linalg.LinAlgError):
    """The design matrix does not have full column rank."""


@dataclass(frozen=True)
class DesignMatrix:
    V: np.ndarray
    omega: np.ndarray
    near_degenerate: bool = False

    @property
    def nu(self) -> int:
        return self.omega.size

    @property
    def N(self) -> int:
        return self.V.shape[0]


def build_design(omega, N: int, check: bool = True) -> DesignMatrix:
    """``V = [C S]`` with ``C[t-1, l] = cos(omega_l t)``, ``S[t-1, l] = sin(omega_l t)``."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    t = np.arange(1, int(N) + 1)[:, None]
    V = np.hstack([np.cos(t * omega), np.sin(t * omega)])
    near = bool(np.any(np.minimum(np.abs(omega), np.abs(np.pi - np.abs(omega))) * N < 1e-6))
    if check:
        if np.unique(omega).size != omega.size:
            raise SingularDesign("duplicate frequencies make V rank deficient")
        if np.linalg.matrix_rank(V) < V.shape[1]:
            raise SingularDesign(f"V(omega) has rank {np.linalg.matrix_rank(V)} < {V.shape[1]}")
    return DesignMatrix(V, omega, near)


def amplitude_ls(V, y):
    """Least-squares amplitudes ``(V^T V)^{-1} V^T y``.

    ``y`` is one path of length ``N`` or an ``N x L`` matrix with one
    snapshot per column; the result has matching shape ``(2 nu,)`` or
    ``(2 nu, L)``.
    """
    V = V.V if isinstance(V, DesignMatrix) else np.asarray(V, dtype=float)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularDesign(f"normal equations singular (cond(V) = {cond:.3g})")
    u, *_ = np.linalg.lstsq(V, np.asarray(y, dtype=float), rcond=None)
    return u


def gradient_matrix(theta, u_hat, N: int) -> np.ndarray:
    """Jacobian of ``V(omega) u`` with respect to ``omega`` at ``theta``.

    Column ``l`` is ``D_N (-s_l a_l + c_l b_l)`` with ``D_N = diag(1..N)``.
    For ``u_hat`` of shape ``(2 nu, L)`` one Jacobian per snapshot is
    returned, stacked as ``(L, N, nu)``.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    nu = theta.size
    u = np.asarray(u_hat, dtype=float)
    if u.shape[0] != 2 * nu:
        raise ValueError(f"u_hat needs {2 * nu} rows, got {u.shape[0]}")
    t = np.arange(1, int(N) + 1)[:, None]
    C, S = np.cos(t * theta), np.sin(t * theta)
    a, b = u[:nu], u[nu:]
    if u.ndim == 1:
        return t * (-S * a + C * b)
    # (L, N, nu)
    return t * (-S[None] * a.T[:, None, :] + C[None] * b.T[:, None, :])


def box_projected_ls(M, residual, W, lam: float = 0.0, tol: float = 1e-12) -> np.ndarray:
    """Minimize ``||r - M x||^2 + lam ||x||^2`` subject to ``|x_l| <= W``.

    One unknown is solved in closed form by clipping.  Otherwise a bounded
    variable least-squares solve is used on the ridge-augmented system.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    r = np.asarray(residual, dtype=float).ravel()
    nu = M.shape[1]
    W = np.broadcast_to(np.asarray(W, dtype=float), (nu,))
    if nu == 1:
        g = float(M[:, 0] @ r)
        h = float(M[:, 0] @ M[:, 0]) + lam
        if h <= 0:
            return np.zeros(1)
        return np.clip(np.array([g / h]), -W, W)
    if lam > 0:
        M = np.vstack([M, np.sqrt(lam) * np.eye(nu)])
        r = np.concatenate([r, np.zeros(nu)])
    res = lsq_linear(M, r, bounds=(-W, W), method="bvls", tol=tol)
    return np.clip(res.x, -W, W)


def decaying_ridge(lam0_rel: float = 1e-2):
    """Schedule ``lam(k) = lam0 / (k + 1)`` with ``lam0 = lam0_rel * ||M^T M||``."""

    def schedule(k, MtM):
        return lam0_rel * np.linalg.norm(MtM, 2) / (k + 1)

    return schedule


@dataclass
class MapProblem:
    """Inputs of the box-constrained MAP search.

    ``y`` is a single path (length ``N``) or an ``N x L`` matrix of
    snapshots in columns.  ``ridge_schedule`` is ``None`` (no ridge), a
    sequence of nonnegative values indexed by iteration, or a callable
    ``(k, MtM) -> lam`` such as :func:`decaying_ridge`.
    """

    y: np.ndarray
    theta0: np.ndarray
    W: float
    ridge_schedule: object = None
    tol: float = 1e-8
    max_iters: int = 100
    reestimate_amplitudes: bool = True

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.theta0 = np.atleast_1d(np.asarray(self.theta0, dtype=float))
        if not self.W > 0:
            raise ValueError("box half-width W must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.ridge_schedule is not None and not callable(self.ridge_schedule):
            lam = np.asarray(self.ridge_schedule, dtype=float)
            if np.any(lam < 0) or np.any(np.diff(lam) > 0):
                raise ValueError("ridge schedule must be nonnegative and nonincreasing")

    @classmethod
    def from_panel(cls, panel, theta0, W, **kw) -> "MapProblem":
        data = getattr(panel, "data", panel)
        return cls(np.atleast_2d(np.asarray(data, dtype=float)).T, theta0, W, **kw)

    @property
    def N(self) -> int:
        return self.y.shape[0]

    def ridge(self, k, MtM) -> float:
        s = self.ridge_schedule
        if s is None:
            return 0.0
        if callable(s):
            return float(s(k, MtM))
        s = np.asarray(s, dtype=float)
        return float(s[min(k, s.size - 1)]) if s.size else 0.0


@dataclass
class MapResult:
    omega_map: np.ndarray
    iterations: int
    converged: bool
    objective_trace: list
    u_hat: np.ndarray
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "omega_map": self.omega_map.tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
            "objective_trace": [float(v) for v in self.objective_trace],
            "flags": list(self.flags),
        }


def _fit(Y, omega, u_fixed=None):
    V = build_design(omega, Y.shape[0], check=False).V
    u = amplitude_ls(V, Y) if u_fixed is None else u_fixed
    R = Y - V @ u
    return u, R, float(np.sum(R * R))


def _line_search(Y, theta0, W, omega, step, obj, u_fixed, max_halvings=40, max_doublings=30):
    """Backtrack from the full step; if it is accepted, keep doubling while the residual drops.

    Gauss-Newton curvature ``M^T M`` overstates the true curvature when the
    residual is large (snapshots with differing frequencies), which makes
    full steps far too short.  Candidates are clipped to the box.
    """
    lo, hi = theta0 - W, theta0 + W

    def at(t):
        cand = np.clip(omega + t * step, lo, hi)
        return (cand, *_fit(Y, cand, u_fixed))

    t = 1.0
    best = None
    for _ in range(max_halvings):
        trial = at(t)
        if trial[3] <= obj:
            best = trial
            break
        t *= 0.5
    if best is None:
        return None
    if t == 1.0:
        for _ in range(max_doublings):
            t *= 2.0
            trial = at(t)
            if trial[3] >= best[3] or np.array_equal(trial[0], best[0]):
                break
            best = trial
    return best


def map_refine(problem: MapProblem) -> MapResult:
    """Box-constrained Gauss-Newton search started at ``theta0``.

    Every iterate stays inside ``[theta0 - W, theta0 + W]``.  Steps are
    halved until the residual decreases; if no decrease is found the current
    point is taken as stationary.  Accepted full steps are extended by
    doubling while the residual keeps falling.  With ``reestimate_amplitudes=False`` the
    amplitudes fitted at ``theta0`` are kept for all iterations.
    """
    p = problem
    Y = p.y if p.y.ndim == 2 else p.y[:, None]
    N = Y.shape[0]
    theta0, W = p.theta0, float(p.W)
    omega = theta0.copy()
    flags = []
    u0, R, obj = _fit(Y, omega)
    u_fixed = None if p.reestimate_amplitudes else u0
    u = u0
    trace = [obj]
    converged = False
    it = 0
    for it in range(1, p.max_iters + 1):
        G = gradient_matrix(omega, u, N)  # (L, N, nu)
        if u_fixed is None:
            # amplitudes follow omega, so only the part of G outside range(V) moves the residual
            Q, _ = np.linalg.qr(build_design(omega, N, check=False).V)
            G = G - Q @ np.einsum("nk,lnj->lkj", Q, G)
        M = G.reshape(-1, omega.size)
        r = R.T.ravel()
        MtM = M.T @ M
        lam = p.ridge(it - 1, MtM)
        if lam == 0 and np.linalg.cond(MtM) > COND_LIMIT:
            lam = 1e-8 * max(np.trace(MtM), 1e-300)
            if "ridge_bump" not in flags:
                flags.append("ridge_bump")
        dev = omega - theta0
        # linearized residual at omega, unknown is the new deviation from theta0
        x = box_projected_ls(M, r + M @ dev, W, lam)
        step = x - dev
        found = _line_search(Y, theta0, W, omega, step, obj, u_fixed)
        if found is None:
            converged = True
            break
        cand, u_c, R_c, obj_c = found
        move = np.linalg.norm(cand - omega)
        omega, u, R, obj = cand, u_c, R_c, obj_c
        trace.append(obj)
        if move < p.tol:
            converged = True
            break
    if not converged:
        flags.append("max_iters")
    return MapResult(omega, it, converged, trace, u, flags)
