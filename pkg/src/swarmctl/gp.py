"""Exact Gaussian-process regression with a Cholesky-factored kernel matrix."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

BASE_JITTER = 1e-8
MAX_JITTER_ESCALATIONS = 3


class ModelError(RuntimeError):
    pass


@dataclass(frozen=True)
class Kernel:
    type: str = "matern52"
    length_scales: tuple[float, ...] = (1.0,)
    signal_variance: float = 1.0

    def __post_init__(self):
        if self.type not in ("matern52", "squared_exponential"):
            raise ValueError(f"unknown kernel type {self.type!r}")
        ls = tuple(float(v) for v in np.atleast_1d(self.length_scales))
        if not all(v > 0 for v in ls):
            raise ValueError("length scales must be > 0")
        if not self.signal_variance > 0:
            raise ValueError("signal variance must be > 0")
        object.__setattr__(self, "length_scales", ls)

    def __call__(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        A = np.atleast_2d(A) / np.asarray(self.length_scales)
        B = np.atleast_2d(B) / np.asarray(self.length_scales)
        diff = A[:, None, :] - B[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        if self.type == "squared_exponential":
            return self.signal_variance * np.exp(-0.5 * sq)
        r = np.sqrt(5.0 * sq)
        return self.signal_variance * (1.0 + r + r * r / 3.0) * np.exp(-r)

    def with_length_scale(self, ls) -> Kernel:
        return replace(self, length_scales=tuple(np.atleast_1d(ls).astype(float)))


@dataclass
class GaussianProcessModel:
    kernel: Kernel
    noise_variance: float
    X: np.ndarray
    y: np.ndarray  # raw targets
    y_mean: float
    y_std: float
    chol: np.ndarray  # lower factor of K + (noise + jitter) I, standardized units
    alpha: np.ndarray
    jitter: float

    def predict(self, Xq) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and std at each row of Xq, in the units of y."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        Ks = self.kernel(Xq, self.X)
        mu = Ks @ self.alpha
        v = solve_triangular(self.chol, Ks.T, lower=True, check_finite=False)
        var = self.kernel.signal_variance - np.sum(v * v, axis=0)
        std = np.sqrt(np.maximum(var, 0.0))
        return self.y_mean + self.y_std * mu, self.y_std * std

    def log_marginal_likelihood(self) -> float:
        """In standardized units."""
        z = (self.y - self.y_mean) / self.y_std
        n = len(z)
        return float(-0.5 * z @ self.alpha - np.sum(np.log(np.diag(self.chol)))
                     - 0.5 * n * math.log(2.0 * math.pi))


def _standardize(y: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(y))
    std = float(np.std(y))
    if not std > 0 or not np.isfinite(std):
        std = 1.0
    return mean, std


def gp_fit(X: Sequence, y: Sequence[float], kernel: Kernel, noise_variance: float = 0.0
           ) -> GaussianProcessModel:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).reshape(-1)
    if len(X) != len(y) or len(y) < 1:
        raise ModelError(f"need matching, non-empty X and y (got {len(X)} and {len(y)})")
    if noise_variance < 0:
        raise ModelError("noise variance must be >= 0")
    mean, std = _standardize(y)
    z = (y - mean) / std
    K = kernel(X, X)
    K = 0.5 * (K + K.T)
    n = len(y)
    jitter = 0.0
    attempts = [0.0] + [BASE_JITTER * 10.0 ** k for k in range(MAX_JITTER_ESCALATIONS + 1)]
    for jitter in attempts:
        try:
            L = np.linalg.cholesky(K + (noise_variance + jitter) * np.eye(n))
            break
        except np.linalg.LinAlgError:
            continue
    else:
        raise ModelError(f"kernel matrix not positive definite even with jitter {attempts[-1]:g}")
    alpha = cho_solve((L, True), z, check_finite=False)
    return GaussianProcessModel(kernel, float(noise_variance), X, y, mean, std, L, alpha, jitter)


def gp_predict(model: GaussianProcessModel, x) -> tuple[float, float]:
    mu, std = model.predict(np.asarray(x, dtype=float).reshape(1, -1))
    return float(mu[0]), float(std[0])


def golden_section_minimize(f, lo: float, hi: float, iters: int = 30) -> float:
    """Minimize a unimodal f on [lo, hi]; deterministic, derivative-free."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def fit_length_scale(X, y, kernel: Kernel, noise_variance: float, lo: float, hi: float) -> Kernel:
    """Maximum-likelihood isotropic length scale, searched in log space on [lo, hi]."""
    def nll(log_ls):
        try:
            model = gp_fit(X, y, kernel.with_length_scale(math.exp(log_ls)), noise_variance)
        except ModelError:
            return math.inf
        return -model.log_marginal_likelihood()

    best = golden_section_minimize(nll, math.log(lo), math.log(hi))
    return kernel.with_length_scale(math.exp(best))
