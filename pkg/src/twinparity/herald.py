"""Heralded states conditioned on a detection in the other twin beam."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channels import CLICK, DetectorKind, DetectorModel, check_efficiency
from .errors import InvalidParameter, ZeroHeraldProbability
from .fock import JointDistribution, PdcSource, PhotonDistribution, Regime, pdc_joint

__all__ = [
    "Arm",
    "HeraldSpec",
    "heralded_state",
    "herald_probability",
    "preparation_probability",
    "herald_source",
]


class Arm(str, Enum):
    SIGNAL = "signal"
    IDLER = "idler"

    @property
    def other(self) -> "Arm":
        return Arm.IDLER if self is Arm.SIGNAL else Arm.SIGNAL


@dataclass(frozen=True)
class HeraldSpec:
    """Which detector heralds, on which outcome, in which arm.

    ``condition`` is a photon number for PNR detectors and ``"click"`` for
    bucket detectors.
    """

    detector: DetectorModel
    condition: object = 1
    herald_arm: Arm = Arm.IDLER

    def __post_init__(self):
        try:
            arm = Arm(self.herald_arm)
        except ValueError:
            raise InvalidParameter(f"herald_arm must be 'signal' or 'idler', got {self.herald_arm!r}") from None
        object.__setattr__(self, "herald_arm", arm)
        if self.detector.kind is DetectorKind.PNR:
            if isinstance(self.condition, bool) or not isinstance(self.condition, (int, np.integer)) or self.condition < 0:
                raise InvalidParameter("PNR heralding needs a non-negative integer condition")
            object.__setattr__(self, "condition", int(self.condition))
        elif self.condition != CLICK:
            raise InvalidParameter("bucket heralding is conditioned on 'click'")


def _herald_diag(spec: HeraldSpec, axis_max: int) -> np.ndarray:
    if spec.detector.kind is DetectorKind.PNR and spec.condition > axis_max:
        return np.zeros(axis_max + 1)
    return spec.detector.povm(spec.condition, axis_max).diag


def _herald_weights(joint: JointDistribution, spec: HeraldSpec) -> np.ndarray:
    # Unnormalized target distribution sum_l P(k, l) Pi[l], mirrored for a signal herald.
    if spec.herald_arm is Arm.IDLER:
        return joint.probs @ _herald_diag(spec, joint.l_max)
    return _herald_diag(spec, joint.k_max) @ joint.probs


def herald_probability(joint: JointDistribution, spec: HeraldSpec) -> float:
    """Probability per pulse that the herald detector returns ``spec.condition``."""
    return float(_herald_weights(joint, spec).sum())


def heralded_state(joint: JointDistribution, spec: HeraldSpec) -> PhotonDistribution:
    """Photon statistics of the target beam conditioned on the herald outcome."""
    weights = _herald_weights(joint, spec)
    if not weights.sum() > 0:
        raise ZeroHeraldProbability(
            f"herald outcome {spec.condition!r} has zero probability "
            f"({spec.detector.kind.value}, efficiency {spec.detector.efficiency})"
        )
    return PhotonDistribution.from_weights(weights)


def preparation_probability(source: PdcSource, eta: float) -> float:
    """Probability of heralding exactly one photon with a PNR herald: eta |lambda_1|^2."""
    eta = check_efficiency(eta)
    mu = source.mean_n
    if source.regime is Regime.SM:
        lambda1 = mu / (1.0 + mu) ** 2
    else:
        lambda1 = mu * math.exp(-mu)
    return eta * lambda1


def herald_source(
    source: PdcSource,
    detector: DetectorModel,
    condition: object = 1,
    n_max: int | None = None,
) -> PhotonDistribution:
    """Heralded signal state from an ideal twin beam with an idler herald."""
    return heralded_state(pdc_joint(source, n_max), HeraldSpec(detector, condition, Arm.IDLER))
