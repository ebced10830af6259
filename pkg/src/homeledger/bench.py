"""Experiment harness: RSSI RMSE per technology/distance and admission latency per ledger mode."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .access import TrustList
from .kalman import KalmanModel, filter_series
from .ledger import (
    ChainConfig,
    Mode,
    Transaction,
    TxKind,
    append_private,
    fmt_decimal,
    make_transaction,
    mine_block,
    new_chain,
)
from .radio import RadioProfile, distance_from_rssi, expected_rssi, sample_rssi_series

CSV_HEADER = ("sample_index", "technology", "true_distance_m", "raw_rssi_dbm", "filtered_rssi_dbm", "est_distance_m")


@dataclass(frozen=True)
class RmseReport:
    technology: str
    distance: float
    rmse_raw: float
    rmse_filtered: float
    n_samples: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LatencyReport:
    mode: str
    difficulty: int | None
    trials: int
    mean_seconds: float
    min_seconds: float
    max_seconds: float

    def to_dict(self) -> dict:
        return asdict(self)


def rmse(predicted: Sequence[float], observed: Sequence[float]) -> float:
    p = np.asarray(predicted, dtype=np.float64)
    o = np.asarray(observed, dtype=np.float64)
    if p.shape != o.shape or p.ndim != 1 or len(p) == 0:
        raise ValueError("rmse needs two nonempty sequences of equal length")
    diff = p - o
    return math.sqrt(float(np.dot(diff, diff)) / len(diff))


def technology_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for the ``index``-th technology: master seed XOR index.

    Each distance of one technology restarts this stream, so cells that
    differ only in distance see the same standardized noise draws.
    """
    return np.random.default_rng(seed ^ index)


@dataclass
class Cell:
    profile: RadioProfile
    distance: float
    raw: np.ndarray
    filtered: np.ndarray

    @property
    def predicted(self) -> float:
        return expected_rssi(self.profile, self.distance)

    def report(self) -> RmseReport:
        pred = np.full(len(self.raw), self.predicted)
        return RmseReport(
            self.profile.name,
            self.distance,
            rmse(pred, self.raw),
            rmse(pred, self.filtered),
            len(self.raw),
        )

    def rows(self) -> list[tuple]:
        return [
            (
                i,
                self.profile.name,
                fmt_decimal(self.distance),
                fmt_decimal(r),
                fmt_decimal(f),
                fmt_decimal(distance_from_rssi(self.profile, f)),
            )
            for i, (r, f) in enumerate(zip(self.raw.tolist(), self.filtered.tolist()))
        ]


def simulate_cells(
    profiles: Sequence[RadioProfile],
    distances: Sequence[float],
    n_samples: int,
    kalman_model: KalmanModel,
    seed: int,
    x0: float | None = None,
    P0: float | None = None,
) -> list[Cell]:
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if not distances or any(not d > 0 for d in distances):
        raise ValueError("distances must be a nonempty list of positive values")
    cells = []
    for t, profile in enumerate(profiles):
        for d in distances:
            raw = sample_rssi_series(profile, d, n_samples, technology_rng(seed, t))
            init = (raw[0] if x0 is None else x0, kalman_model.R if P0 is None else P0)
            cells.append(Cell(profile, d, raw, filter_series(raw, kalman_model, init)))
    return cells


def run_rssi_experiment(
    profiles: Sequence[RadioProfile],
    distances: Sequence[float],
    n_samples: int,
    kalman_model: KalmanModel,
    seed: int,
) -> list[RmseReport]:
    return [c.report() for c in simulate_cells(profiles, distances, n_samples, kalman_model, seed)]


def default_payload(trial: int) -> Transaction:
    rssi = {f"a{j}": fmt_decimal(-45.0 - 0.25 * j - trial / 1000.0) for j in range(4)}
    return make_transaction(TxKind.ADMISSION_REQUEST, f"device-{trial}", {"rssi": rssi})


def _summarize(mode: Mode, difficulty: int | None, times: list[float]) -> LatencyReport:
    return LatencyReport(mode.value, difficulty, len(times), sum(times) / len(times), min(times), max(times))


def run_latency_experiment(
    trials: int,
    difficulty: int,
    payload_source: Callable[[int], Transaction] = default_payload,
    clock: Callable[[], float] = time.perf_counter,
) -> tuple[LatencyReport, LatencyReport]:
    """Wall-clock per admission consult: trust lookup plus append (private) or mining (public).

    Trials run sequentially; every trial seals a fresh payload.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    private = new_chain(ChainConfig(Mode.PRIVATE))
    public = new_chain(ChainConfig(Mode.PUBLIC, difficulty))
    payloads = [payload_source(i) for i in range(trials)]
    trust = TrustList(sorted({p.device_id for p in payloads}))

    priv_times, pub_times = [], []
    for payload in payloads:
        t0 = clock()
        if payload.device_id in trust:
            append_private(private, payload)
        priv_times.append(clock() - t0)
    for payload in payloads:
        t0 = clock()
        if payload.device_id in trust:
            mine_block(public, payload)
        pub_times.append(clock() - t0)
    return _summarize(Mode.PRIVATE, None, priv_times), _summarize(Mode.PUBLIC, difficulty, pub_times)


def mining_attempts(difficulty: int, trials: int, seed: int = 0) -> list[int]:
    """Attempts (final nonce + 1) needed to mine ``trials`` random payloads."""
    rng = np.random.default_rng(seed)
    chain = new_chain(ChainConfig(Mode.PUBLIC, difficulty))
    out = []
    for i in range(trials):
        rssi = {f"a{j}": fmt_decimal(v) for j, v in enumerate(rng.uniform(-90, -30, size=4))}
        block = mine_block(chain, make_transaction(TxKind.ADMISSION_REQUEST, f"device-{i}", {"rssi": rssi}))
        out.append(block.nonce + 1)
    return out
