"""Normalized factorial moments, joint moments, and the moment generating function.

The moment generating function of a photon-number distribution,

    M(mu) = sum_n (1 - mu)^n p(n) = sum_m g^(m) / m! * (-mu <n>)^m,

links the loss-tolerant normalized moments g^(m) to the state itself; at
mu = 2 it is the photon-number parity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidParameter, ZeroMeanState
from .fock import JointDistribution, PhotonDistribution, falling_factorial, mean_photon

__all__ = [
    "DEFAULT_MAX_ORDER",
    "MomentSet",
    "MgfCurve",
    "falling_factorial",
    "factorial_moment",
    "factorial_moments",
    "joint_moment",
    "car",
    "mgf_exact",
    "mgf_series",
    "mgf_partial_sums",
    "mgf_curve",
    "parity",
    "nonclassicality_flags",
]

DEFAULT_MAX_ORDER = 8


@dataclass(frozen=True)
class MomentSet:
    """Normalized factorial moments g^(1)..g^(max_order) together with the mean.

    ``g[0]`` is g^(1), which is 1 by construction.
    """

    g: tuple
    mean: float

    def __post_init__(self):
        g = tuple(float(x) for x in self.g)
        if not g:
            raise InvalidParameter("MomentSet needs at least g^(1)")
        if g[0] != 1.0:
            raise InvalidParameter(f"g^(1) must equal 1, got {g[0]!r}")
        if not all(math.isfinite(x) for x in g) or not math.isfinite(self.mean):
            raise InvalidParameter("moments must be finite")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "mean", float(self.mean))

    @classmethod
    def from_higher(cls, mean: float, higher: Sequence[float]) -> "MomentSet":
        """Build from g^(2), g^(3), ... (g^(1) = 1 is implied)."""
        return cls((1.0, *higher), mean)

    @property
    def max_order(self) -> int:
        return len(self.g)

    def order(self, m: int) -> float:
        """g^(m), with g^(0) = 1."""
        if m == 0:
            return 1.0
        if not 1 <= m <= self.max_order:
            raise InvalidParameter(f"order {m} not available (max {self.max_order})")
        return self.g[m - 1]


@dataclass(frozen=True)
class MgfCurve:
    """Samples of M(mu); ``truncation_order`` is None for the exact sum."""

    mu: np.ndarray
    values: np.ndarray
    truncation_order: int | None = None

    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.mu.tolist(), self.values.tolist()))


def factorial_moment(dist: PhotonDistribution, m: int) -> float:
    """g^(m) = sum n(n-1)...(n-m+1) p(n) / <n>^m."""
    if m < 1:
        raise InvalidParameter("moment order must be >= 1")
    mean = mean_photon(dist)
    if mean <= 0:
        raise ZeroMeanState("normalized moments are undefined for a zero-mean state")
    if m == 1:
        return 1.0
    num = float(np.dot(falling_factorial(dist.photon_numbers, m), dist.probs))
    return num / mean**m


def factorial_moments(dist: PhotonDistribution, max_order: int = DEFAULT_MAX_ORDER) -> MomentSet:
    mean = mean_photon(dist)
    return MomentSet(tuple(factorial_moment(dist, m) for m in range(1, max_order + 1)), mean)


def joint_moment(joint: JointDistribution, m: int, n: int) -> float:
    """g^(m,n) of the joint statistics, evaluated as G_s^T P G_i."""
    if m < 0 or n < 0:
        raise InvalidParameter("orders must be non-negative")
    k = np.arange(joint.k_max + 1)
    l = np.arange(joint.l_max + 1)
    mean_s = float(k @ joint.probs.sum(axis=1))
    mean_i = float(l @ joint.probs.sum(axis=0))
    if mean_s <= 0 or mean_i <= 0:
        raise ZeroMeanState("joint moments are undefined when either arm has zero mean")
    num = falling_factorial(k, m) @ joint.probs @ falling_factorial(l, n)
    return float(num) / (mean_s**m * mean_i**n)


def car(joint: JointDistribution) -> float:
    """Coincidences-to-accidentals ratio, g^(1,1)."""
    return joint_moment(joint, 1, 1)


def mgf_exact(dist: PhotonDistribution, mu):
    """M(mu) = sum_n (1 - mu)^n p(n); accepts scalar or array ``mu``."""
    mu_arr = np.asarray(mu, dtype=float)
    if np.any(mu_arr < 0) or np.any(mu_arr > 2):
        raise InvalidParameter("mu must lie in [0, 2]")
    n = dist.photon_numbers
    vals = np.power.outer(1.0 - mu_arr, n) @ dist.probs
    return float(vals) if np.ndim(vals) == 0 else vals


def mgf_series(mean: float, moments: MomentSet, mu, order: int):
    """Truncated series sum_{m=0}^{order} g^(m)/m! (-mu mean)^m.

    No convergence check is made; see :func:`mgf_partial_sums` to inspect it.
    """
    if order < 0:
        raise InvalidParameter("order must be >= 0")
    if order > moments.max_order:
        raise InvalidParameter(f"order {order} exceeds available moments ({moments.max_order})")
    x = -np.asarray(mu, dtype=float) * mean
    total = np.zeros_like(x)
    for m in range(order + 1):
        total = total + moments.order(m) / math.factorial(m) * x**m
    return float(total) if np.ndim(total) == 0 else total


def mgf_partial_sums(mean: float, moments: MomentSet, mu: float, max_order: int | None = None) -> list[float]:
    """Partial sums of the series at ``mu`` for orders 0..max_order."""
    max_order = moments.max_order if max_order is None else max_order
    return [mgf_series(mean, moments, mu, k) for k in range(max_order + 1)]


def mgf_curve(dist: PhotonDistribution, mu: Iterable[float], order: int | None = None) -> MgfCurve:
    """M(mu) sampled on ``mu``: exact if ``order`` is None, else the truncated series."""
    mu = np.asarray(list(mu), dtype=float)
    if order is None:
        values = np.atleast_1d(mgf_exact(dist, mu))
    else:
        ms = factorial_moments(dist, max(order, 1))
        values = np.atleast_1d(mgf_series(ms.mean, ms, mu, order))
    return MgfCurve(mu, values, order)


def parity(dist: PhotonDistribution) -> float:
    """Photon-number parity M(2) = sum (-1)^n p(n)."""
    signs = np.where(dist.photon_numbers % 2 == 0, 1.0, -1.0)
    return float(signs @ dist.probs)


def nonclassicality_flags(dist: PhotonDistribution) -> dict:
    """Both non-classicality indicators, reported side by side without ranking."""
    p = parity(dist)
    try:
        g2 = factorial_moment(dist, 2)
    except ZeroMeanState:
        g2 = float("nan")
    return {"g2": g2, "sub_poissonian": bool(g2 < 1.0), "parity": p, "negative_parity": bool(p < 0.0)}
