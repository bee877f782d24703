"""Pulse-by-pulse Monte Carlo of the twin-beam counting experiment.

Each pulse draws exactly three uniforms: one for the PDC photon number and one
per arm for binomial thinning, all by inverse-CDF lookup.  Pulses are grouped
into fixed chunks whose random streams come from a counter-based generator
keyed on ``(seed, chunk index)``, so the randomness of any pulse depends only on
the seed and its index.  Serial, parallel and streamed runs are therefore
bit-identical.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.stats import binom

from .channels import DetectorKind, check_efficiency
from .errors import InvalidParameter
from .estimate import JointCounts
from .fock import PdcSource, pdc_weights

__all__ = ["ExperimentConfig", "CHUNK_PULSES", "sample_run", "sample_stream", "pulse_outcomes"]

CHUNK_PULSES = 8192


@dataclass(frozen=True)
class ExperimentConfig:
    source: PdcSource
    eta_signal: float
    eta_idler: float
    detector_signal: DetectorKind = DetectorKind.PNR
    detector_idler: DetectorKind = DetectorKind.PNR
    pulses: int = 1_000_000
    seed: int = 0
    n_max: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "eta_signal", check_efficiency(self.eta_signal, "eta_signal"))
        object.__setattr__(self, "eta_idler", check_efficiency(self.eta_idler, "eta_idler"))
        for name in ("detector_signal", "detector_idler"):
            value = getattr(self, name)
            try:
                object.__setattr__(self, name, DetectorKind(value.lower() if isinstance(value, str) else value))
            except ValueError:
                raise InvalidParameter(f"{name} must be 'pnr' or 'bucket', got {value!r}") from None
        if int(self.pulses) <= 0:
            raise InvalidParameter("pulses must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParameter("seed must lie in [0, 2**64)")
        object.__setattr__(self, "pulses", int(self.pulses))
        object.__setattr__(self, "seed", int(self.seed))

    def metadata(self) -> dict:
        return {
            "regime": self.source.regime.value,
            "mean_n": self.source.mean_n,
            "eta_signal": self.eta_signal,
            "eta_idler": self.eta_idler,
            "detector_signal": self.detector_signal.value,
            "detector_idler": self.detector_idler.value,
            "pulses": self.pulses,
            "seed": self.seed,
        }


class _Sampler:
    """Lookup tables for one configuration."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        weights = pdc_weights(config.source, config.n_max).probs
        self.n_max = weights.size - 1
        self.cdf = np.cumsum(weights)
        self.cdf[-1] = 1.0
        n = np.arange(self.n_max + 1)
        self.thin_signal = self._thinning_table(n, config.eta_signal)
        self.thin_idler = self._thinning_table(n, config.eta_idler)
        self.shape = (self._axis(config.detector_signal), self._axis(config.detector_idler))

    def _axis(self, kind: DetectorKind) -> int:
        return self.n_max + 1 if kind is DetectorKind.PNR else 2

    @staticmethod
    def _thinning_table(n: np.ndarray, eta: float) -> np.ndarray:
        # table[N, k] = P(Binomial(N, eta) <= k), forced to exactly 1 for k >= N.
        table = binom.cdf(n[None, :], n[:, None], eta)
        table[n[None, :] >= n[:, None]] = 1.0
        return table

    @staticmethod
    def _thin(table: np.ndarray, photons: np.ndarray, u: np.ndarray) -> np.ndarray:
        out = np.zeros_like(photons)
        live = photons > 0
        if np.any(live):
            top = int(photons[live].max())
            rows = table[photons[live], : top + 1]
            out[live] = (rows <= u[live, None]).sum(axis=1)
        return out

    def chunk(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        """Detected (signal, idler) outcomes for every pulse of chunk ``index``."""
        bitgen = np.random.Philox(key=(self.config.seed << 64) | index)
        u = np.random.Generator(bitgen).random((3, CHUNK_PULSES))
        photons = np.minimum(np.searchsorted(self.cdf, u[0], side="right"), self.n_max)
        k = self._thin(self.thin_signal, photons, u[1])
        l = self._thin(self.thin_idler, photons, u[2])
        if self.config.detector_signal is DetectorKind.BUCKET:
            k = np.minimum(k, 1)
        if self.config.detector_idler is DetectorKind.BUCKET:
            l = np.minimum(l, 1)
        return k, l

    def accumulate(self, k: np.ndarray, l: np.ndarray) -> np.ndarray:
        flat = np.bincount(k * self.shape[1] + l, minlength=self.shape[0] * self.shape[1])
        return flat.reshape(self.shape).astype(np.int64)

    def range_counts(self, start: int, stop: int, cache: dict | None = None) -> np.ndarray:
        total = np.zeros(self.shape, dtype=np.int64)
        pos = start
        while pos < stop:
            index, offset = divmod(pos, CHUNK_PULSES)
            end = min(stop - index * CHUNK_PULSES, CHUNK_PULSES)
            if cache is not None and cache.get("index") == index:
                k, l = cache["data"]
            else:
                k, l = self.chunk(index)
                if cache is not None:
                    cache.update(index=index, data=(k, l))
            total += self.accumulate(k[offset:end], l[offset:end])
            pos = index * CHUNK_PULSES + end
        return total


def pulse_outcomes(config: ExperimentConfig, pulse_index: int) -> tuple[int, int]:
    """Detected (signal, idler) outcome of a single pulse, regenerated in isolation."""
    if not 0 <= pulse_index < config.pulses:
        raise InvalidParameter("pulse_index out of range")
    index, offset = divmod(pulse_index, CHUNK_PULSES)
    k, l = _Sampler(config).chunk(index)
    return int(k[offset]), int(l[offset])


def _worker_range(args) -> np.ndarray:
    config, start, stop = args
    return _Sampler(config).range_counts(start, stop)


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("TWINPARITY_WORKERS", "1")))
    except ValueError:
        return 1


def sample_run(config: ExperimentConfig, workers: int | None = None) -> JointCounts:
    """Simulate ``config.pulses`` pulses and return the joint count matrix."""
    workers = _default_workers() if workers is None else max(1, int(workers))
    sampler = _Sampler(config)
    n_chunks = -(-config.pulses // CHUNK_PULSES)
    if workers == 1 or n_chunks < 2:
        counts = sampler.range_counts(0, config.pulses)
    else:
        # Contiguous chunk-aligned slices; integer sums make the merge order-independent.
        bounds = np.linspace(0, n_chunks, min(workers, n_chunks) + 1).astype(int) * CHUNK_PULSES
        tasks = [(config, int(a), int(min(b, config.pulses))) for a, b in zip(bounds[:-1], bounds[1:]) if a < b]
        counts = np.zeros(sampler.shape, dtype=np.int64)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_worker_range, tasks):
                counts += part
    return JointCounts(counts, config.pulses, config.metadata())


def sample_stream(config: ExperimentConfig, block: int) -> Iterator[JointCounts]:
    """Yield counts for consecutive blocks of ``block`` pulses; they sum to :func:`sample_run`."""
    if block <= 0:
        raise InvalidParameter("block must be positive")
    sampler = _Sampler(config)
    cache: dict = {}
    for start in range(0, config.pulses, block):
        stop = min(start + block, config.pulses)
        yield JointCounts(sampler.range_counts(start, stop, cache), stop - start, config.metadata())
