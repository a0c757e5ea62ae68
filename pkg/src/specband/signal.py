"""Synthetic snapshot panels from the random-frequency sinusoid model.

Every snapshot ``k`` draws its own frequencies ``omega_{k,l} ~ U[theta_l - W,
theta_l + W]`` and amplitudes ``a_{k,l}, b_{k,l}`` (zero mean, variance
``sigma2``), then adds i.i.d. Gaussian noise::

    y_k(t) = sum_l a_{k,l} cos(omega_{k,l} t) + b_{k,l} sin(omega_{k,l} t) + w_k(t),
    t = 1..N.

Random streams come from ``numpy``'s counter-based Philox bit generator keyed
through :class:`numpy.random.SeedSequence`, so panels can be split across
workers without changing any draw.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernel import PriorHyperParams

__all__ = [
    "PanelConfig",
    "SnapshotPanel",
    "make_rng",
    "draw_frequencies",
    "draw_amplitudes",
    "generate_panel",
    "snr_to_noise_variance",
]

AMP_LAWS = ("gaussian", "uniform")


def make_rng(seed, *key) -> np.random.Generator:
    """Philox generator for ``seed``; extra integers select an independent substream."""
    if isinstance(seed, np.random.Generator):
        return seed
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class PanelConfig:
    prior: PriorHyperParams
    N: int
    L: int
    amp_law: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("N must be an integer >= 2")
        if int(self.L) != self.L or self.L < 1:
            raise ValueError("L must be a positive integer")
        if self.amp_law not in AMP_LAWS:
            raise ValueError(f"amp_law must be one of {AMP_LAWS}")


@dataclass(frozen=True)
class SnapshotPanel:
    """``L x N`` data matrix plus the per-snapshot draws that produced it.

    ``omega``, ``a`` and ``b`` have shape ``(L, nu)`` and are ``None`` for
    panels loaded from disk without a truth sidecar.
    """

    data: np.ndarray
    omega: np.ndarray | None = None
    a: np.ndarray | None = None
    b: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        data = np.atleast_2d(np.asarray(self.data, dtype=float))
        object.__setattr__(self, "data", data)
        for name in ("omega", "a", "b"):
            v = getattr(self, name)
            if v is not None:
                v = np.atleast_2d(np.asarray(v, dtype=float))
                if v.shape[0] != data.shape[0]:
                    raise ValueError(f"{name} has {v.shape[0]} rows, data has {data.shape[0]}")
                object.__setattr__(self, name, v)

    @property
    def L(self) -> int:
        return self.data.shape[0]

    @property
    def N(self) -> int:
        return self.data.shape[1]


def draw_frequencies(prior: PriorHyperParams, rng, size=None) -> np.ndarray:
    """Independent uniform draws on each ``[theta_l - W, theta_l + W]``.

    With ``size`` given the result has shape ``(size, nu)``.
    """
    shape = prior.centers.shape if size is None else (size, prior.nu)
    u = rng.uniform(-1.0, 1.0, size=shape)
    return prior.centers + prior.half_bandwidth * u


def draw_amplitudes(law: str, sigma2: float, rng, size) -> np.ndarray:
    """Zero-mean amplitudes with variance ``sigma2``."""
    if law == "gaussian":
        return rng.normal(0.0, np.sqrt(sigma2), size=size)
    if law == "uniform":
        bound = np.sqrt(3.0 * sigma2)
        return rng.uniform(-bound, bound, size=size)
    raise ValueError(f"unknown amplitude law {law!r}")


def synthesize(omega, a, b, N: int) -> np.ndarray:
    """Noise-free rows ``sum_l a cos(omega t) + b sin(omega t)`` for ``t = 1..N``."""
    t = np.arange(1, N + 1)
    phase = np.asarray(omega)[..., None] * t  # (L, nu, N)
    x = np.asarray(a)[..., None] * np.cos(phase) + np.asarray(b)[..., None] * np.sin(phase)
    return x.sum(axis=-2)


def generate_panel(cfg: PanelConfig) -> SnapshotPanel:
    """Draw a full panel; identical ``cfg`` (seed included) gives identical bits."""
    prior = cfg.prior
    rng = make_rng(cfg.seed)
    # draw order is part of the reproducibility contract
    omega = draw_frequencies(prior, rng, size=cfg.L)
    a = draw_amplitudes(cfg.amp_law, prior.amp_variance, rng, (cfg.L, prior.nu))
    b = draw_amplitudes(cfg.amp_law, prior.amp_variance, rng, (cfg.L, prior.nu))
    noise = rng.normal(0.0, np.sqrt(prior.noise_variance), size=(cfg.L, cfg.N))
    data = synthesize(omega, a, b, cfg.N) + noise
    meta = {
        "centers": prior.centers.tolist(),
        "half_bandwidth": prior.half_bandwidth,
        "amp_variance": prior.amp_variance,
        "noise_variance": prior.noise_variance,
        "amp_law": cfg.amp_law,
        "seed": int(cfg.seed),
    }
    return SnapshotPanel(data, omega, a, b, meta)


def snr_to_noise_variance(snr_db: float, sigma2: float) -> float:
    """Noise variance for ``SNR = 20 log10(sigma / sigma_w)``."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    return float(sigma2 * 10.0 ** (-snr_db / 10.0))
