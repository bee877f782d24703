"""Loss-tolerant reconstruction from measured joint photon-number counts.

The chain runs CAR -> mean PDC photon number and loss-corrected heralded
mean, conditional normalized moments g^(m) of the heralded beam, and the
truncated moment-generating-function series at mu = 2 (photon-number parity).
Uncertainties come from a multinomial percentile bootstrap of the count
matrix.

Coincidences, accidentals and singles are photon-number weighted per-pulse
moments (C = <k l>, A = <k><l>, S = <k> or <l>), so C / A is exactly g^(1,1).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np

from .errors import (
    CarNotAboveUnity,
    EmptyData,
    InsufficientData,
    InsufficientStatistics,
    InvalidParameter,
    NoHeraldEvents,
    StatisticalError,
    WeakPairCorrelation,
    ZeroMeanState,
    ZeroSingles,
)
from .fock import JointDistribution, falling_factorial
from .herald import Arm
from .moments import MomentSet, mgf_series

__all__ = [
    "JointCounts",
    "Estimate",
    "Interval",
    "EstimateReport",
    "DEFAULT_RESAMPLES",
    "DEFAULT_LEVEL",
    "DEFAULT_MIN_EVENTS",
    "empirical_joint",
    "mean_pdc_from_car",
    "mean_corrected_from_car",
    "klyshko",
    "effective_klyshko",
    "heralded_g_from_counts",
    "parity_pipeline",
    "bootstrap_ci",
    "statistics_support",
    "undersampled_orders",
]

DEFAULT_RESAMPLES = 1000
DEFAULT_LEVEL = 0.68
DEFAULT_MIN_EVENTS = 100

SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class JointCounts:
    """Event counts N(k, l) over ``total_pulses`` pulses.

    Pulses without a record (``total_pulses - counts.sum()``) are taken as
    (0, 0) events, i.e. no photon detected in either arm.
    """

    counts: np.ndarray
    total_pulses: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.counts)
        if arr.ndim != 2 or arr.size == 0:
            raise InvalidParameter(f"counts must be a non-empty 2-d array, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
                raise InvalidParameter("counts must be integers")
        arr = arr.astype(np.int64)
        if np.any(arr < 0):
            raise InvalidParameter("counts must be non-negative")
        total = int(self.total_pulses)
        if total < int(arr.sum()):
            raise InvalidParameter(f"total_pulses={total} is smaller than the number of recorded events {int(arr.sum())}")
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)
        object.__setattr__(self, "total_pulses", total)
        object.__setattr__(self, "metadata", dict(self.metadata))

    def filled(self) -> np.ndarray:
        """Count matrix with unrecorded pulses added to the (0, 0) cell."""
        out = self.counts.copy()
        out[0, 0] += self.total_pulses - int(self.counts.sum())
        return out

    def __add__(self, other: "JointCounts") -> "JointCounts":
        shape = tuple(max(a, b) for a, b in zip(self.counts.shape, other.counts.shape))
        total = np.zeros(shape, dtype=np.int64)
        total[: self.counts.shape[0], : self.counts.shape[1]] += self.counts
        total[: other.counts.shape[0], : other.counts.shape[1]] += other.counts
        return JointCounts(total, self.total_pulses + other.total_pulses, self.metadata)


Data = Union[JointCounts, JointDistribution]


@dataclass(frozen=True)
class Interval:
    """Bootstrap summary of one statistic."""

    value: float
    low: float
    high: float
    std: float
    n_valid: int
    n_failed: int
    level: float


@dataclass(frozen=True)
class Estimate:
    value: float
    ci_low: float
    ci_high: float
    std: float
    order: int | None = None

    def to_dict(self) -> dict:
        d = {"value": self.value, "ci_low": self.ci_low, "ci_high": self.ci_high, "std": self.std}
        if self.order is not None:
            d["order"] = self.order
        return d


@dataclass(frozen=True)
class EstimateReport:
    car: Estimate
    mean_pdc: Estimate
    klyshko_s: Estimate
    klyshko_i: Estimate
    eff_klyshko_s: Estimate
    eff_klyshko_i: Estimate
    heralded_g: dict
    mean_corrected: Estimate
    parity_truncated: Estimate
    truncation_order: int
    herald_arm: Arm
    herald_n: int
    herald_events: float
    total_pulses: float
    resamples: int
    level: float
    seed: int
    warnings: tuple = ()

    def heralded_moments(self) -> MomentSet:
        return MomentSet(tuple(self.heralded_g[m].value for m in sorted(self.heralded_g)), self.mean_corrected.value)

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "herald_arm": self.herald_arm.value,
            "herald_n": self.herald_n,
            "herald_events": self.herald_events,
            "total_pulses": self.total_pulses,
            "truncation_order": self.truncation_order,
            "bootstrap": {"resamples": self.resamples, "level": self.level, "seed": self.seed},
            "car": self.car.to_dict(),
            "mean_pdc": {**self.mean_pdc.to_dict(), "lower_bound": True},
            "klyshko_s": self.klyshko_s.to_dict(),
            "klyshko_i": self.klyshko_i.to_dict(),
            "eff_klyshko_s": self.eff_klyshko_s.to_dict(),
            "eff_klyshko_i": self.eff_klyshko_i.to_dict(),
            "mean_corrected": self.mean_corrected.to_dict(),
            "parity_truncated": self.parity_truncated.to_dict(),
            "warnings": list(self.warnings),
        }
        for m in sorted(self.heralded_g):
            out[f"heralded_g{m}"] = self.heralded_g[m].to_dict()
        return out


# -- probability-matrix statistics ---------------------------------------------------------

def _probability_matrix(data: Data) -> np.ndarray:
    if isinstance(data, JointDistribution):
        return np.asarray(data.probs, dtype=float)
    if data.total_pulses <= 0:
        raise EmptyData("count record has no pulses")
    return data.filled() / data.total_pulses


def _arm_moments(p: np.ndarray) -> tuple[float, float, float]:
    k = np.arange(p.shape[0])
    l = np.arange(p.shape[1])
    mean_s = float(k @ p.sum(axis=1))
    mean_i = float(l @ p.sum(axis=0))
    coinc = float(k @ p @ l)
    return mean_s, mean_i, coinc


def _car(p: np.ndarray) -> float:
    mean_s, mean_i, coinc = _arm_moments(p)
    if mean_s <= 0 or mean_i <= 0:
        raise ZeroMeanState("CAR undefined: an arm recorded no photons")
    return coinc / (mean_s * mean_i)


def _klyshko(p: np.ndarray, arm: Arm, effective: bool) -> float:
    mean_s, mean_i, coinc = _arm_moments(p)
    # Efficiency of `arm` is coincidences over singles in the other arm.
    singles = mean_i if arm is Arm.SIGNAL else mean_s
    if singles <= 0:
        raise ZeroSingles(f"no singles in the {arm.other.value} arm")
    if effective:
        return (coinc - mean_s * mean_i) / singles
    return coinc / singles


def _conditional(p: np.ndarray, herald_arm: Arm, herald_n: int) -> np.ndarray:
    axis_len = p.shape[1] if herald_arm is Arm.IDLER else p.shape[0]
    if herald_n < 0:
        raise InvalidParameter("herald_n must be >= 0")
    if herald_n >= axis_len:
        return np.zeros(p.shape[0] if herald_arm is Arm.IDLER else p.shape[1])
    return p[:, herald_n] if herald_arm is Arm.IDLER else p[herald_n, :]


def _conditional_g(cond: np.ndarray, orders) -> dict:
    total = cond.sum()
    if total <= 0:
        raise NoHeraldEvents("no events with the requested herald outcome")
    n = np.arange(cond.size)
    mean = float(n @ cond) / total
    if mean <= 0:
        raise ZeroMeanState("heralded beam recorded no photons")
    return {m: float(falling_factorial(n, m) @ cond) / total / mean**m if m > 1 else 1.0 for m in orders}


def _require_car(value: float) -> float:
    value = float(value)
    if not value > 1.0:
        raise CarNotAboveUnity(f"CAR = {value:.6g} <= 1: no pair correlation beyond accidentals")
    return value


def _as_arm(arm) -> Arm:
    try:
        return Arm(arm)
    except ValueError:
        raise InvalidParameter(f"arm must be 'signal' or 'idler', got {arm!r}") from None


# -- public operations ----------------------------------------------------------------------

def empirical_joint(counts: JointCounts) -> JointDistribution:
    """Maximum-likelihood joint distribution N(k, l) / total_pulses."""
    return JointDistribution(_probability_matrix(counts))


def mean_pdc_from_car(car: float) -> float:
    """Mean photon number of multimode PDC from CAR = 1 + 1/<n~>.

    This is a lower bound on the true mean photon number: spurious uncorrelated
    counts lower the CAR.
    """
    return 1.0 / (_require_car(car) - 1.0)


def mean_corrected_from_car(car: float) -> float:
    """Loss-tolerant mean photon number of the heralded beam, (1 - 1/CAR)^-1."""
    return 1.0 / (1.0 - 1.0 / _require_car(car))


def klyshko(counts: Data, arm="signal") -> float:
    """Klyshko efficiency of ``arm``: coincidences over singles in the other arm."""
    return _klyshko(_probability_matrix(counts), _as_arm(arm), effective=False)


def effective_klyshko(counts: Data, arm="signal") -> float:
    """Accidental-subtracted Klyshko efficiency (C - A) / S of ``arm``."""
    value = _klyshko(_probability_matrix(counts), _as_arm(arm), effective=True)
    if value <= 0:
        warnings.warn(
            f"coincidences do not exceed accidentals (effective Klyshko efficiency {value:.3g})",
            WeakPairCorrelation,
            stacklevel=2,
        )
    return value


def heralded_g_from_counts(counts: Data, herald_arm="idler", herald_n: int = 1, m: int = 2) -> float:
    """g^(m) of the beam opposite ``herald_arm``, conditioned on ``herald_n`` heralding photons."""
    if m < 1:
        raise InvalidParameter("moment order must be >= 1")
    cond = _conditional(_probability_matrix(counts), _as_arm(herald_arm), herald_n)
    return _conditional_g(cond, [m])[m]


def _resampled_matrices(counts: JointCounts, resamples: int, seed: int):
    # One independent stream per resample index, so any subset can be regenerated alone.
    filled = counts.filled()
    pvals = (filled / counts.total_pulses).ravel()
    for r in range(resamples):
        rng = np.random.default_rng([seed, r])
        yield rng.multinomial(counts.total_pulses, pvals).reshape(filled.shape)


def _check_bootstrap_args(resamples: int, level: float) -> None:
    if resamples < 100:
        raise InvalidParameter("at least 100 bootstrap resamples are required")
    if not 0 < level < 1:
        raise InvalidParameter("level must lie in (0, 1)")


def _summarize(value: float, draws: np.ndarray, level: float, name: str) -> Interval:
    valid = draws[np.isfinite(draws)]
    failed = draws.size - valid.size
    if valid.size == 0:
        raise InsufficientStatistics(f"{name}: statistic undefined in every bootstrap resample")
    if failed > 0.01 * draws.size:
        warnings.warn(
            f"{name}: statistic undefined in {failed} of {draws.size} resamples; interval uses the valid ones",
            InsufficientData,
            stacklevel=3,
        )
    low, high = np.quantile(valid, [(1 - level) / 2, (1 + level) / 2])
    std = float(np.std(valid, ddof=1)) if valid.size > 1 else 0.0
    return Interval(float(value), float(low), float(high), std, int(valid.size), int(failed), level)


def bootstrap_ci(
    counts: JointCounts,
    statistic: Callable[[JointCounts], float],
    resamples: int = DEFAULT_RESAMPLES,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
) -> Interval:
    """Percentile bootstrap interval of ``statistic`` under multinomial resampling.

    Resamples where the statistic raises :class:`StatisticalError` or returns a
    non-finite value are excluded; an :class:`InsufficientData` warning is issued
    when they exceed 1% of the draws.
    """
    _check_bootstrap_args(resamples, level)
    value = statistic(counts)
    draws = np.empty(resamples)
    for r, matrix in enumerate(_resampled_matrices(counts, resamples, seed)):
        try:
            draws[r] = statistic(JointCounts(matrix, counts.total_pulses))
        except StatisticalError:
            draws[r] = np.nan
    return _summarize(value, draws, level, getattr(statistic, "__name__", "statistic"))


def _point_statistics(p: np.ndarray, herald_arm: Arm, herald_n: int, order: int) -> dict:
    """All pipeline quantities for one probability matrix; raises on undefined values."""
    car_value = _require_car(_car(p))
    out = {
        "car": car_value,
        "mean_pdc": mean_pdc_from_car(car_value),
        "mean_corrected": mean_corrected_from_car(car_value),
        "klyshko_s": _klyshko(p, Arm.SIGNAL, False),
        "klyshko_i": _klyshko(p, Arm.IDLER, False),
        "eff_klyshko_s": _klyshko(p, Arm.SIGNAL, True),
        "eff_klyshko_i": _klyshko(p, Arm.IDLER, True),
    }
    g = _conditional_g(_conditional(p, herald_arm, herald_n), range(1, order + 1))
    out.update({f"g{m}": g[m] for m in g})
    moments = MomentSet(tuple(g[m] for m in range(1, order + 1)), out["mean_corrected"])
    out["parity"] = mgf_series(out["mean_corrected"], moments, 2.0, order)
    return out


def _statistics_or_nan(p: np.ndarray, herald_arm: Arm, herald_n: int, order: int, keys) -> np.ndarray:
    # Each quantity fails independently: a resample without heralds still has a CAR.
    vals = dict.fromkeys(keys, np.nan)
    try:
        car_value = _car(p)
        vals["car"] = car_value
        if car_value > 1:
            vals["mean_pdc"] = mean_pdc_from_car(car_value)
            vals["mean_corrected"] = mean_corrected_from_car(car_value)
    except StatisticalError:
        pass
    for key, arm, eff in (
        ("klyshko_s", Arm.SIGNAL, False),
        ("klyshko_i", Arm.IDLER, False),
        ("eff_klyshko_s", Arm.SIGNAL, True),
        ("eff_klyshko_i", Arm.IDLER, True),
    ):
        try:
            vals[key] = _klyshko(p, arm, eff)
        except StatisticalError:
            pass
    try:
        g = _conditional_g(_conditional(p, herald_arm, herald_n), range(1, order + 1))
        vals.update({f"g{m}": g[m] for m in g})
        if np.isfinite(vals["mean_corrected"]):
            moments = MomentSet(tuple(g[m] for m in range(1, order + 1)), vals["mean_corrected"])
            vals["parity"] = mgf_series(vals["mean_corrected"], moments, 2.0, order)
    except StatisticalError:
        pass
    return np.array([vals[k] for k in keys])


def _tail_events(counts: JointCounts, herald_arm: Arm, herald_n: int) -> np.ndarray:
    cond = _conditional(counts.filled().astype(float), herald_arm, herald_n)
    return np.cumsum(cond[::-1])[::-1]  # tail[m] = events with n >= m


def statistics_support(counts: JointCounts, herald_arm="idler", herald_n: int = 1, min_events: int = DEFAULT_MIN_EVENTS) -> int:
    """Highest moment order m whose conditional data has >= ``min_events`` events with n >= m."""
    tail = _tail_events(counts, _as_arm(herald_arm), herald_n)
    support = 1
    for m in range(2, tail.size):
        if tail[m] >= min_events:
            support = m
        else:
            break
    return support


def undersampled_orders(counts: JointCounts, herald_arm="idler", herald_n: int = 1, order: int = 2, min_events: int = DEFAULT_MIN_EVENTS) -> list:
    """Orders 2..``order`` backed by some, but fewer than ``min_events``, conditional events.

    An order with no events at all (n >= m never observed) contributes an
    identically zero moment and is not counted as under-sampled.
    """
    tail = _tail_events(counts, _as_arm(herald_arm), herald_n)
    return [m for m in range(2, min(order, tail.size - 1) + 1) if 0 < tail[m] < min_events]


def parity_pipeline(
    counts: Data,
    herald_arm="idler",
    order: int = 2,
    herald_n: int = 1,
    resamples: int = DEFAULT_RESAMPLES,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
    min_events: int = DEFAULT_MIN_EVENTS,
) -> EstimateReport:
    """Run the full reconstruction chain with bootstrap intervals.

    A :class:`JointDistribution` is treated as the infinite-statistics limit:
    point values only, zero-width intervals, no support check.
    """
    herald_arm = _as_arm(herald_arm)
    if order < 2:
        raise InvalidParameter("truncation order must be >= 2")
    exact = isinstance(counts, JointDistribution)
    if not exact:
        _check_bootstrap_args(resamples, level)
        if counts.total_pulses <= 0:
            raise EmptyData("count record has no pulses")
        thin = undersampled_orders(counts, herald_arm, herald_n, order, min_events)
        if thin:
            raise InsufficientStatistics(
                f"order {order} requested but the heralded data supports only order {thin[0] - 1} "
                f"(fewer than {min_events} conditional events with n >= {thin[0]})"
            )

    p = _probability_matrix(counts)
    point = _point_statistics(p, herald_arm, herald_n, order)
    keys = list(point)
    notes = []
    if point["eff_klyshko_s"] <= 0 or point["eff_klyshko_i"] <= 0:
        notes.append("coincidences do not exceed accidentals")

    if exact:
        est = {k: Estimate(point[k], point[k], point[k], 0.0) for k in keys}
        herald_events = float(_conditional(p, herald_arm, herald_n).sum())
        total = 1.0
    else:
        draws = np.array([
            _statistics_or_nan(m / counts.total_pulses, herald_arm, herald_n, order, keys)
            for m in _resampled_matrices(counts, resamples, seed)
        ])
        est = {}
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", InsufficientData)
            for j, k in enumerate(keys):
                iv = _summarize(point[k], draws[:, j], level, k)
                est[k] = Estimate(iv.value, iv.low, iv.high, iv.std)
        for w in caught:
            notes.append(str(w.message))
            warnings.warn(w.message, w.category, stacklevel=2)
        herald_events = float(_conditional(counts.filled().astype(float), herald_arm, herald_n).sum())
        total = float(counts.total_pulses)

    heralded_g = {m: replace(est[f"g{m}"], order=m) for m in range(1, order + 1)}
    parity_est = replace(est["parity"], order=order)
    return EstimateReport(
        car=est["car"],
        mean_pdc=est["mean_pdc"],
        klyshko_s=est["klyshko_s"],
        klyshko_i=est["klyshko_i"],
        eff_klyshko_s=est["eff_klyshko_s"],
        eff_klyshko_i=est["eff_klyshko_i"],
        heralded_g=heralded_g,
        mean_corrected=est["mean_corrected"],
        parity_truncated=parity_est,
        truncation_order=order,
        herald_arm=herald_arm,
        herald_n=herald_n,
        herald_events=herald_events,
        total_pulses=total,
        resamples=0 if exact else resamples,
        level=level,
        seed=seed,
        warnings=tuple(notes),
    )
