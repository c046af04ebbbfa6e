"""Smoothing kernels and local weight constructions.

Two weight families are provided: Nadaraya-Watson weights (any covariate
dimension, via a product kernel and the maximum norm) and local linear
weights (scalar covariate only, may be negative).  Both normalise to sum
one.  The default kernel is the Gaussian density truncated where it drops
below 0.001, so its support is compact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyNeighborhood, SingularDesign

#: determinant threshold below which the local-linear design is singular
LL_SINGULAR_TOL = 1e-14

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class KernelSpec:
    """Symmetric compactly supported kernel.

    ``"truncated-gaussian"`` is the standard normal density restricted to
    the region where it exceeds ``truncation_threshold``; ``"rectangular"``
    is the uniform density on [-1, 1].
    """

    kind: str = "truncated-gaussian"
    truncation_threshold: float = 0.001

    def __post_init__(self):
        if self.kind not in ("truncated-gaussian", "rectangular"):
            raise ValueError("unknown kernel kind %r" % (self.kind,))
        if self.kind == "truncated-gaussian" and not 0.0 < self.truncation_threshold < 1.0 / _SQRT_2PI:
            raise ValueError("truncation threshold must be in (0, phi(0))")

    @property
    def support_radius(self):
        """Half-width of {u : K(u) > 0}."""
        if self.kind == "rectangular":
            return 1.0
        return math.sqrt(-2.0 * math.log(self.truncation_threshold * _SQRT_2PI))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "rectangular":
            return 0.5 * (np.abs(u) <= 1.0)
        dens = np.exp(-0.5 * u * u) / _SQRT_2PI
        return dens * (dens > self.truncation_threshold)


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Local weights attached to a sample and a covariate point."""

    weights: np.ndarray
    covariate_point: np.ndarray
    bandwidth: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        x = np.atleast_1d(np.asarray(self.covariate_point, dtype=float))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "covariate_point", x)
        object.__setattr__(self, "bandwidth", float(self.bandwidth))
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if (w != 0.0).any() and abs(w.sum() - 1.0) > 1e-10:
            raise ValueError("nonzero weights must sum to 1, got %r" % w.sum())

    def __len__(self):
        return self.weights.size


def _as_covariates(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        return X[:, None]
    if X.ndim == 2:
        return X
    raise ValueError("covariates must be a vector or an (n, d) matrix")


def nw_weights(x, X, h, kernel: KernelSpec = KernelSpec()) -> WeightVector:
    """Nadaraya-Watson weights at covariate point ``x``.

    Uses a product kernel across covariate coordinates; nonnegative and
    normalised to sum one.  Raises :class:`EmptyNeighborhood` when no
    observation falls inside the kernel support around ``x``, which signals
    a bandwidth too small at this point.
    """
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    X = _as_covariates(X)
    if X.shape[0] == 0:
        raise ValueError("need at least one observation")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != X.shape[1]:
        raise ValueError("covariate point has dimension %d, data has %d"
                         % (x.size, X.shape[1]))
    v = kernel((x[None, :] - X) / h).prod(axis=1)
    total = v.sum()
    if total == 0.0:
        raise EmptyNeighborhood(
            "no observation within kernel support around x=%r (h=%r)" % (x, h))
    return WeightVector(v / total, x, h)


def ll_weights(x, X, h, kernel: KernelSpec = KernelSpec()) -> WeightVector:
    """Local linear weights at scalar covariate point ``x``.

    Normalised to sum one and with vanishing first local moment
    ``sum_i W_i (x - X_i) = 0``; individual weights may be negative.
    Raises :class:`SingularDesign` when the local design is degenerate.
    """
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    X = _as_covariates(X)
    if X.shape[1] != 1:
        raise ValueError("local linear weights require a scalar covariate")
    n = X.shape[0]
    if n == 0:
        raise ValueError("need at least one observation")
    x = float(np.asarray(x).ravel()[0])
    dx = x - X[:, 0]
    k = kernel(dx / h)
    nh = n * h
    s0 = k.sum() / nh
    s1 = (k * dx).sum() / nh
    s2 = (k * dx * dx).sum() / nh
    det = s2 * s0 - s1 * s1
    if abs(det) < LL_SINGULAR_TOL:
        raise SingularDesign(
            "local design singular at x=%r (h=%r, det=%r)" % (x, h, det))
    w = k * (s2 - dx * s1) / (nh * det)
    return WeightVector(w, x, h)


def uniform_weights(n, x=0.0) -> WeightVector:
    """Equal weights 1/n (the unconditional, covariate-free case)."""
    if n < 1:
        raise ValueError("need at least one observation")
    return WeightVector(np.full(n, 1.0 / n), x, 1.0)
