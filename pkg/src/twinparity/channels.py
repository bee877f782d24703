"""Binomial loss and detector POVMs.

Every operator here is diagonal in the photon-number basis, so a POVM element
is stored as the vector of outcome probabilities conditioned on the incident
photon number N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy
from scipy.stats import binom

from .errors import InvalidParameter
from .fock import JointDistribution, PhotonDistribution

__all__ = [
    "DetectorKind",
    "DetectorModel",
    "PovmElement",
    "CLICK",
    "NO_CLICK",
    "check_efficiency",
    "loss_matrix",
    "pnr_povm",
    "bucket_povm",
    "apply_loss",
    "apply_loss_joint",
]

CLICK = "click"
NO_CLICK = "no_click"


class DetectorKind(str, Enum):
    PNR = "pnr"
    BUCKET = "bucket"


def check_efficiency(eta: float, name: str = "eta") -> float:
    eta = float(eta)
    if not (math.isfinite(eta) and 0.0 <= eta <= 1.0):
        raise InvalidParameter(f"{name} must lie in [0, 1], got {eta!r}")
    return eta


@dataclass(frozen=True)
class DetectorModel:
    """Lossy detector: an ideal PNR or bucket detector behind a beam splitter of transmittance ``efficiency``."""

    kind: DetectorKind
    efficiency: float

    def __post_init__(self):
        try:
            kind = DetectorKind(self.kind.lower() if isinstance(self.kind, str) else self.kind)
        except ValueError:
            raise InvalidParameter(f"unknown detector kind {self.kind!r}; use 'pnr' or 'bucket'") from None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "efficiency", check_efficiency(self.efficiency, "efficiency"))

    def outcomes(self, n_max: int) -> list:
        if self.kind is DetectorKind.PNR:
            return list(range(n_max + 1))
        return [NO_CLICK, CLICK]

    def povm(self, outcome, n_max: int) -> "PovmElement":
        if self.kind is DetectorKind.PNR:
            return pnr_povm(self.efficiency, outcome, n_max)
        return bucket_povm(self.efficiency, outcome, n_max)


@dataclass(frozen=True, eq=False)
class PovmElement:
    """Diagonal POVM element: ``diag[N]`` = P(outcome | N incident photons)."""

    outcome: object
    diag: np.ndarray

    def __post_init__(self):
        diag = np.array(self.diag, dtype=float)
        if diag.ndim != 1:
            raise InvalidParameter("POVM diagonal must be 1-d")
        if np.any(diag < 0) or np.any(diag > 1):
            raise InvalidParameter("POVM entries must lie in [0, 1]")
        diag.setflags(write=False)
        object.__setattr__(self, "diag", diag)


def _binom_pmf(k, big_n, eta: float) -> np.ndarray:
    try:
        return binom.pmf(k, big_n, eta)
    except OverflowError:
        # scipy's backend overflows for some subnormal eta; the log form is fine there.
        k, big_n = np.broadcast_arrays(np.asarray(k, float), np.asarray(big_n, float))
        out = np.zeros(k.shape)
        ok = k <= big_n
        kk, nn = k[ok], big_n[ok]
        log_c = gammaln(nn + 1) - gammaln(kk + 1) - gammaln(nn - kk + 1)
        out[ok] = np.exp(log_c + xlogy(kk, eta) + xlog1py(nn - kk, -eta))
        return out


def loss_matrix(eta: float, n_max: int) -> np.ndarray:
    """B[n, N] = C(N, n) eta^n (1 - eta)^(N - n): probability that n of N photons survive."""
    eta = check_efficiency(eta)
    n = np.arange(n_max + 1)
    return _binom_pmf(n[:, None], n[None, :], eta)


def pnr_povm(eta: float, outcome_n: int, n_max: int) -> PovmElement:
    """Loss-degraded photon-number-resolving detector reporting ``outcome_n`` photons."""
    eta = check_efficiency(eta)
    if not 0 <= outcome_n <= n_max:
        raise InvalidParameter(f"outcome {outcome_n} outside 0..{n_max}")
    big_n = np.arange(n_max + 1)
    return PovmElement(int(outcome_n), _binom_pmf(outcome_n, big_n, eta))


def bucket_povm(eta: float, outcome: str, n_max: int) -> PovmElement:
    """Loss-degraded click / no-click detector."""
    eta = check_efficiency(eta)
    if outcome not in (CLICK, NO_CLICK):
        raise InvalidParameter(f"bucket outcome must be {CLICK!r} or {NO_CLICK!r}, got {outcome!r}")
    no_click = (1.0 - eta) ** np.arange(n_max + 1)
    return PovmElement(outcome, no_click if outcome == NO_CLICK else 1.0 - no_click)


def apply_loss(dist: PhotonDistribution, eta: float) -> PhotonDistribution:
    """Binomial thinning p'(n) = sum_N C(N, n) eta^n (1-eta)^(N-n) p(N)."""
    out = loss_matrix(eta, dist.n_max) @ dist.probs
    return PhotonDistribution.from_weights(out)


def apply_loss_joint(dist: JointDistribution, eta_s: float, eta_i: float) -> JointDistribution:
    """Independent binomial thinning of the signal (rows) and idler (columns)."""
    b_s = loss_matrix(eta_s, dist.k_max)
    b_i = loss_matrix(eta_i, dist.l_max)
    return JointDistribution.from_weights(b_s @ dist.probs @ b_i.T)
