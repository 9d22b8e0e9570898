"""Input preprocessing and the cosine random-feature mapping primitive.

Two pieces live here. The sparse auto-encoder projects the data through a
random matrix, inverts that projection with an L1-regularized least-squares
fit, and uses the fitted matrix as a linear encoder. The feature windows
map a signal f to sqrt(2/d) * cos(omega^T f + b) with Gaussian frequencies
and uniform phases; inner products of such features concentrate around the
Gaussian kernel exp(-sigma^2 * ||x - y||^2 / 2).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError
from .solver import AdmmConfig, solve

__all__ = [
    "FrfWindow",
    "SaeEncoder",
    "sample_frf_window",
    "apply_frf_window",
    "composite_frf",
    "kernel_estimate",
    "fit_sae",
    "encode",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FrfWindow:
    """One cosine feature block: frequencies ``omega`` (in_dim x d), phases ``b`` (d,)."""

    omega: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        if self.omega.ndim != 2 or self.b.ndim != 1:
            raise ValueError("omega must be 2-D and b 1-D")
        if self.omega.shape[1] != self.b.shape[0]:
            raise ValueError(
                f"omega has {self.omega.shape[1]} columns but b has {self.b.shape[0]} entries"
            )
        if not np.all(np.isfinite(self.omega)):
            raise ValueError("omega must be finite")
        if np.any(self.b < 0.0) or np.any(self.b >= TWO_PI):
            raise ValueError("phases must lie in [0, 2*pi)")

    @property
    def in_dim(self) -> int:
        return self.omega.shape[0]

    @property
    def d(self) -> int:
        return self.omega.shape[1]


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_frf_window(in_dim: int, d: int, sigma: float, seed) -> FrfWindow:
    """Draw a window with omega ~ N(0, sigma^2) i.i.d. and b ~ U[0, 2*pi).

    ``seed`` may be an integer, a SeedSequence, or an existing Generator
    (the latter lets a builder draw many windows from one stream).
    """
    if in_dim < 1 or d < 1:
        raise ValueError(f"in_dim and d must be >= 1, got {in_dim}, {d}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    rng = _rng(seed)
    omega = rng.normal(0.0, sigma, size=(in_dim, d))
    b = rng.uniform(0.0, TWO_PI, size=d)
    return FrfWindow(omega=omega, b=b)


def apply_frf_window(w: FrfWindow, F_in: np.ndarray) -> np.ndarray:
    """Row i, column m of the result is sqrt(2/d) * cos(omega_m . f_i + b_m)."""
    F_in = np.asarray(F_in)
    if F_in.ndim != 2 or F_in.shape[1] != w.in_dim:
        raise ValueError(f"input must be N x {w.in_dim}, got shape {F_in.shape}")
    return np.sqrt(2.0 / w.d) * np.cos(F_in @ w.omega + w.b)


def composite_frf(windows, F_in: np.ndarray) -> np.ndarray:
    """Horizontal concatenation of every window's output, in window order."""
    windows = tuple(windows)
    if not windows:
        raise ValueError("need at least one window")
    first = windows[0]
    for w in windows[1:]:
        if w.in_dim != first.in_dim or w.d != first.d:
            raise ValueError("windows must share in_dim and d")
    return np.hstack([apply_frf_window(w, F_in) for w in windows])


def kernel_estimate(windows, x: np.ndarray, y: np.ndarray) -> float:
    """Estimate the shift-invariant kernel k(x, y) from pooled windows.

    Each window is an unbiased d-feature estimator, so the pooled estimate
    divides the composite inner product by the window count.
    """
    windows = tuple(windows)
    zx = composite_frf(windows, np.atleast_2d(x))[0]
    zy = composite_frf(windows, np.atleast_2d(y))[0]
    return float(zx @ zy) / len(windows)


@dataclass(frozen=True)
class SaeEncoder:
    """Linear encoder from the sparse inversion of a random projection.

    ``W_s`` (N_f x h) is the fixed random projection; ``W_star`` (h x N_f)
    solves the L1-regularized reconstruction of the input from Z = X W_s.
    Encoding maps X -> X W_star^T (N x h).
    """

    W_s: np.ndarray
    W_star: np.ndarray
    lambda_sae: float

    def __post_init__(self) -> None:
        if self.W_s.shape != (self.W_star.shape[1], self.W_star.shape[0]):
            raise ValueError(
                f"W_s shape {self.W_s.shape} inconsistent with W_star shape {self.W_star.shape}"
            )

    @property
    def input_dim(self) -> int:
        return self.W_s.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.W_s.shape[1]


def fit_sae(
    X: np.ndarray,
    h: int,
    lambda_sae: float,
    seed,
    solver_config: AdmmConfig | None = None,
) -> SaeEncoder:
    """Fit the encoder: draw W_s uniform on [-1, 1], form Z = X W_s, and solve
    min_W 0.5*||Z W - X||^2 + lambda_sae*||W||_1 for W_star with the ADMM solver.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.size == 0:
        raise ValueError(f"X must be a non-empty 2-D matrix, got shape {X.shape}")
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    if lambda_sae < 0:
        raise ValueError(f"lambda_sae must be non-negative, got {lambda_sae}")
    if not np.all(np.isfinite(X)):
        raise DataError("X contains non-finite entries")

    rng = _rng(seed)
    W_s = rng.uniform(-1.0, 1.0, size=(X.shape[1], h))
    Z = X @ W_s

    cfg = solver_config if solver_config is not None else AdmmConfig()
    cfg = replace(cfg, lam=lambda_sae, regularizer="l1")
    W_star = solve(Z, X, cfg).weights
    return SaeEncoder(W_s=W_s, W_star=W_star, lambda_sae=float(lambda_sae))


def encode(enc: SaeEncoder, X: np.ndarray) -> np.ndarray:
    """F = X W_star^T; exact matrix product, linear in X."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != enc.input_dim:
        raise ValueError(f"X must be N x {enc.input_dim}, got shape {X.shape}")
    return X @ enc.W_star.T
