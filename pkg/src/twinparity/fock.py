"""Photon-number distributions and the PDC twin-beam state.

All states handled by the package are diagonal in the photon-number basis, so
a single beam is a probability vector ``p(n)`` and a twin beam is a matrix
``P(k, l)`` over signal (``k``) and idler (``l``) photon numbers.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import poisson

from .errors import CutoffCapReached, InvalidParameter

__all__ = [
    "DEFAULT_TAIL_TOL",
    "DEFAULT_CUTOFF_CAP",
    "DEFAULT_MOMENT_ORDER",
    "Regime",
    "PdcSource",
    "PhotonDistribution",
    "JointDistribution",
    "falling_factorial",
    "pdc_weights",
    "pdc_joint",
    "auto_cutoff",
    "mean_photon",
]

DEFAULT_TAIL_TOL = 1e-12
DEFAULT_CUTOFF_CAP = 256
# Highest factorial moment the default cutoff keeps accurate to DEFAULT_TAIL_TOL.
DEFAULT_MOMENT_ORDER = 8

_NORM_TOL = 1e-9


class Regime(str, Enum):
    """Mode structure of the PDC emission: thermal (SM) or Poissonian (MM) weights."""

    SM = "sm"
    MM = "mm"


def falling_factorial(n, m: int) -> np.ndarray:
    """n (n-1) ... (n-m+1) as a float array, zero for n < m; ``m = 0`` gives ones."""
    n = np.asarray(n, dtype=float)
    out = np.ones_like(n)
    for j in range(m):
        out = out * np.clip(n - j, 0.0, None)
    return out


def _as_prob_array(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim or arr.size == 0:
        raise InvalidParameter(f"{name} must be a non-empty {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"{name} contains non-finite entries")
    if np.any(arr < 0):
        raise InvalidParameter(f"{name} contains negative entries")
    return arr


@dataclass(frozen=True, eq=False)
class PhotonDistribution:
    """Photon-number distribution p(0..n_max) of a single beam.

    Construct with already-normalized probabilities, or use :meth:`from_weights`
    to renormalize arbitrary non-negative weights.
    """

    probs: np.ndarray

    def __post_init__(self):
        arr = _as_prob_array(self.probs, 1, "probs")
        total = arr.sum()
        if abs(total - 1.0) > _NORM_TOL:
            raise InvalidParameter(f"probabilities sum to {total!r}, expected 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @classmethod
    def from_weights(cls, weights) -> "PhotonDistribution":
        arr = _as_prob_array(weights, 1, "weights")
        total = arr.sum()
        if total <= 0:
            raise InvalidParameter("weights have zero total mass")
        return cls(arr / total)

    @classmethod
    def fock(cls, n: int, n_max: int | None = None) -> "PhotonDistribution":
        """The number state |n>."""
        if n < 0:
            raise InvalidParameter("photon number must be >= 0")
        n_max = n if n_max is None else n_max
        if n_max < n:
            raise InvalidParameter("n_max must be >= n")
        probs = np.zeros(n_max + 1)
        probs[n] = 1.0
        return cls(probs)

    @classmethod
    def vacuum(cls, n_max: int = 0) -> "PhotonDistribution":
        return cls.fock(0, n_max)

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    @property
    def photon_numbers(self) -> np.ndarray:
        return np.arange(self.probs.size)

    def padded(self, n_max: int) -> np.ndarray:
        """Probabilities zero-padded (or checked) to length ``n_max + 1``."""
        if n_max < self.n_max:
            if np.any(self.probs[n_max + 1:] > 0):
                raise InvalidParameter("cannot truncate a distribution with mass above n_max")
            return self.probs[: n_max + 1].copy()
        out = np.zeros(n_max + 1)
        out[: self.probs.size] = self.probs
        return out

    def __len__(self) -> int:
        return self.probs.size

    def __repr__(self) -> str:
        return f"PhotonDistribution(n_max={self.n_max}, mean={mean_photon(self):.6g})"


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint photon statistics P(k, l); rows index signal, columns idler."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _as_prob_array(self.probs, 2, "probs")
        total = arr.sum()
        if abs(total - 1.0) > _NORM_TOL:
            raise InvalidParameter(f"joint probabilities sum to {total!r}, expected 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @classmethod
    def from_weights(cls, weights) -> "JointDistribution":
        arr = _as_prob_array(weights, 2, "weights")
        total = arr.sum()
        if total <= 0:
            raise InvalidParameter("weights have zero total mass")
        return cls(arr / total)

    @classmethod
    def product(cls, signal: PhotonDistribution, idler: PhotonDistribution) -> "JointDistribution":
        """Statistically independent arms."""
        return cls(np.outer(signal.probs, idler.probs))

    @property
    def k_max(self) -> int:
        return self.probs.shape[0] - 1

    @property
    def l_max(self) -> int:
        return self.probs.shape[1] - 1

    def signal(self) -> PhotonDistribution:
        return PhotonDistribution.from_weights(self.probs.sum(axis=1))

    def idler(self) -> PhotonDistribution:
        return PhotonDistribution.from_weights(self.probs.sum(axis=0))

    def __repr__(self) -> str:
        return f"JointDistribution(shape={self.probs.shape})"


@dataclass(frozen=True)
class PdcSource:
    """PDC emission with mode regime and mean photon number per beam."""

    regime: Regime
    mean_n: float

    def __post_init__(self):
        try:
            regime = Regime(self.regime.lower() if isinstance(self.regime, str) else self.regime)
        except ValueError:
            raise InvalidParameter(f"unknown regime {self.regime!r}; use 'sm' or 'mm'") from None
        mean_n = float(self.mean_n)
        if not math.isfinite(mean_n) or mean_n <= 0:
            raise InvalidParameter(f"mean_n must be a positive finite number, got {self.mean_n!r}")
        object.__setattr__(self, "regime", regime)
        object.__setattr__(self, "mean_n", mean_n)


def _reference_pmf(source: PdcSource, length: int) -> np.ndarray:
    # Untruncated weights out to `length`, used only to size the cutoff.
    n = np.arange(length)
    mu = source.mean_n
    if source.regime is Regime.MM:
        return poisson.pmf(n, mu)
    log_r = math.log(mu) - math.log1p(mu)
    return np.exp(-math.log1p(mu) + n * log_r)


def auto_cutoff(
    source: PdcSource,
    tail_tol: float = DEFAULT_TAIL_TOL,
    cap: int = DEFAULT_CUTOFF_CAP,
    moment_order: int = 0,
    strict: bool = True,
) -> int:
    """Smallest n_max whose discarded tail is below ``tail_tol``.

    With ``moment_order = 0`` the tail is the probability mass beyond n_max.
    With ``moment_order = k`` the discarded *fraction* of every factorial
    moment of order 0..k must also be below ``tail_tol``, which is what keeps
    normalized moments up to order k accurate after truncation.

    If the cap is reached, :class:`CutoffCapReached` is raised when ``strict``;
    otherwise a ``RuntimeWarning`` is issued and ``cap`` returned.
    """
    if not 0 < tail_tol < 1:
        raise InvalidParameter("tail_tol must lie in (0, 1)")
    if cap < 0:
        raise InvalidParameter("cap must be >= 0")
    if moment_order < 0:
        raise InvalidParameter("moment_order must be >= 0")

    length = 8 * cap + 64
    p = _reference_pmf(source, length)
    n = np.arange(length)
    worst = np.zeros(length)
    for k in range(moment_order + 1):
        w = falling_factorial(n, k) * p
        total = w.sum()
        if total <= 0:
            continue
        # tail[N] = sum_{n > N} w_n / total
        tail = np.append(np.cumsum(w[::-1])[::-1][1:], 0.0) / total
        worst = np.maximum(worst, tail)

    ok = np.nonzero(worst[: cap + 1] < tail_tol)[0]
    if ok.size:
        return int(ok[0])
    if strict:
        raise CutoffCapReached(cap, float(worst[cap]), tail_tol)
    warnings.warn(
        f"photon-number cutoff capped at {cap} (tail {worst[cap]:.2e} > {tail_tol:.1e})",
        RuntimeWarning,
        stacklevel=2,
    )
    return cap


def _default_cutoff(source: PdcSource) -> int:
    return auto_cutoff(source, DEFAULT_TAIL_TOL, moment_order=DEFAULT_MOMENT_ORDER, strict=False)


def pdc_weights(source: PdcSource, n_max: int | None = None) -> PhotonDistribution:
    """Photon-number weights |lambda_n|^2 of one PDC beam, renormalized on 0..n_max.

    Thermal ``mu^n / (1 + mu)^(1+n)`` for SM, Poisson ``exp(-mu) mu^n / n!`` for MM,
    built by forward recurrence. ``n_max=None`` picks a cutoff that keeps
    moments up to order 8 accurate to 1e-12.
    """
    if n_max is None:
        n_max = _default_cutoff(source)
    if n_max < 0:
        raise InvalidParameter("n_max must be >= 0")
    mu = source.mean_n
    w = np.empty(n_max + 1)
    if source.regime is Regime.SM:
        ratio = mu / (1.0 + mu)
        w[0] = 1.0 / (1.0 + mu)
        for n in range(n_max):
            w[n + 1] = w[n] * ratio
    else:
        w[0] = math.exp(-mu)
        for n in range(n_max):
            w[n + 1] = w[n] * mu / (n + 1)
    if not w.sum() > 0:
        raise InvalidParameter(f"mean_n={mu} underflows the photon-number weights")
    return PhotonDistribution.from_weights(w)


def pdc_joint(source: PdcSource, n_max: int | None = None) -> JointDistribution:
    """Perfectly correlated twin beam: P(k, l) = |lambda_k|^2 if k == l else 0."""
    weights = pdc_weights(source, n_max)
    return JointDistribution(np.diag(weights.probs))


def mean_photon(dist: PhotonDistribution) -> float:
    """Mean photon number sum_n n p(n)."""
    return float(np.dot(dist.photon_numbers, dist.probs))
