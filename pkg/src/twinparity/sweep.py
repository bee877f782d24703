"""Figures of merit of heralded states over the (heralding efficiency, PDC mean photon number) plane."""
from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channels import CLICK, DetectorKind, DetectorModel
from .errors import InvalidParameter, StatisticalError
from .fock import PdcSource, PhotonDistribution, Regime, mean_photon, pdc_joint
from .herald import Arm, HeraldSpec, heralded_state, preparation_probability
from .moments import factorial_moment, factorial_moments, mgf_series, parity

__all__ = ["Quantity", "SweepGrid", "default_grid", "evaluate_cell", "run_sweep", "heralded"]


class Quantity(str, Enum):
    HERALDED_G2_PNR = "heralded_g2_pnr"
    HERALDED_G2_BUCKET = "heralded_g2_bucket"
    PARITY_EXACT = "parity_exact"
    PARITY_TRUNCATED = "parity_truncated"
    PREP_PROBABILITY = "prep_probability"
    MEAN_HERALDED = "mean_heralded"


def _strictly_increasing(values) -> bool:
    return all(b > a for a, b in zip(values, values[1:]))


@dataclass(frozen=True)
class SweepGrid:
    """Evaluation grid; ``order`` applies to ``parity_truncated`` and ``detector``
    to the parity and mean quantities."""

    eta: tuple
    mean_n: tuple
    quantity: Quantity
    regime: Regime = Regime.MM
    order: int = 2
    detector: DetectorKind = DetectorKind.PNR

    def __post_init__(self):
        eta = tuple(float(x) for x in self.eta)
        mean_n = tuple(float(x) for x in self.mean_n)
        if not eta or not mean_n:
            raise InvalidParameter("grid axes must be non-empty")
        if not (_strictly_increasing(eta) and _strictly_increasing(mean_n)):
            raise InvalidParameter("grid axes must be strictly increasing")
        if eta[0] < 0 or eta[-1] > 1:
            raise InvalidParameter("efficiencies must lie in [0, 1]")
        if not (mean_n[0] > 0 and math.isfinite(mean_n[-1])):
            raise InvalidParameter("mean photon numbers must be positive and finite")
        if self.order < 0:
            raise InvalidParameter("order must be >= 0")
        try:
            object.__setattr__(self, "quantity", Quantity(self.quantity))
            object.__setattr__(self, "regime", Regime(self.regime))
            object.__setattr__(self, "detector", DetectorKind(self.detector))
        except ValueError as exc:
            raise InvalidParameter(str(exc)) from None
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "mean_n", mean_n)


def default_grid(quantity, regime=Regime.MM, n: int = 50, **kw) -> SweepGrid:
    """50 x 50 grid: log-spaced <n~> in [0.01, 3], linear eta in [0.01, 1]."""
    return SweepGrid(
        eta=tuple(np.linspace(0.01, 1.0, n).tolist()),
        mean_n=tuple(np.geomspace(0.01, 3.0, n).tolist()),
        quantity=quantity,
        regime=regime,
        **kw,
    )


@functools.lru_cache(maxsize=512)
def _joint(source: PdcSource):
    return pdc_joint(source)


def heralded(source: PdcSource, kind: DetectorKind, eta: float) -> PhotonDistribution:
    """Target state heralded on one PNR photon or a bucket click in the idler."""
    detector = DetectorModel(kind, eta)
    condition = 1 if detector.kind is DetectorKind.PNR else CLICK
    return heralded_state(_joint(source), HeraldSpec(detector, condition, Arm.IDLER))


def evaluate_cell(grid: SweepGrid, eta: float, mean_n: float) -> float:
    """Value of ``grid.quantity`` at one point; NaN where it is undefined."""
    source = PdcSource(grid.regime, mean_n)
    q = grid.quantity
    try:
        if q is Quantity.PREP_PROBABILITY:
            return preparation_probability(source, eta)
        if q is Quantity.HERALDED_G2_PNR:
            return factorial_moment(heralded(source, DetectorKind.PNR, eta), 2)
        if q is Quantity.HERALDED_G2_BUCKET:
            return factorial_moment(heralded(source, DetectorKind.BUCKET, eta), 2)
        state = heralded(source, grid.detector, eta)
        if q is Quantity.PARITY_EXACT:
            return parity(state)
        if q is Quantity.MEAN_HERALDED:
            return mean_photon(state)
        moments = factorial_moments(state, max(grid.order, 1))
        return mgf_series(moments.mean, moments, 2.0, grid.order)
    except StatisticalError:
        return float("nan")


def _row(args) -> list[float]:
    grid, eta = args
    return [evaluate_cell(grid, eta, m) for m in grid.mean_n]


def run_sweep(grid: SweepGrid, workers: int = 1) -> list[tuple[float, float, float]]:
    """Long-format rows (eta, mean_n, value), eta-major in grid order."""
    tasks = [(grid, eta) for eta in grid.eta]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, tasks))
    else:
        rows = [_row(t) for t in tasks]
    return [(eta, m, v) for eta, row in zip(grid.eta, rows) for m, v in zip(grid.mean_n, row)]
