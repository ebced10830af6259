"""Scalar Kalman filter for smoothing one RSSI stream.

The covariance update uses the Joseph form
``P = (1 - K H) P- (1 - K H) + K R K``, which stays non-negative even for a
suboptimal gain.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import kernels


@dataclass(frozen=True)
class KalmanModel:
    A: float = 1.0  # state transition
    B: float = 0.0  # control-input gain
    u: float = 0.0  # control value
    Q: float = 0.01  # process noise variance, dBm^2
    H: float = 1.0  # measurement sensitivity
    R: float = 4.0  # measurement noise variance, dBm^2

    def __post_init__(self):
        if self.Q < 0 or self.R < 0:
            raise ValueError("Q and R must be non-negative")


@dataclass(frozen=True)
class KalmanState:
    x_hat: float
    P: float
    k: int = 0


def predict(state: KalmanState, model: KalmanModel) -> tuple[float, float]:
    if state.P < 0:
        raise ValueError("covariance must be non-negative")
    x_prior = model.A * state.x_hat + model.B * model.u
    P_prior = model.A * state.P * model.A + model.Q
    return x_prior, P_prior


def gain(P_prior: float, model: KalmanModel) -> float:
    den = model.H * P_prior * model.H + model.R
    if den <= 0:
        raise ZeroDivisionError("degenerate gain: H*P*H + R is zero (P- = 0 and R = 0)")
    return P_prior * model.H / den


def update(predicted: tuple[float, float], K: float, z: float, model: KalmanModel, k: int = 0) -> KalmanState:
    """Fold measurement ``z`` into the prediction; ``k`` is the prior index."""
    x_prior, P_prior = predicted
    x_hat = x_prior + K * (z - model.H * x_prior)
    a = 1.0 - K * model.H
    P = a * P_prior * a + K * model.R * K
    return KalmanState(x_hat, P, k + 1)


def recursion_gain(P_prior: float, model: KalmanModel) -> float:
    """``gain`` extended to P- = 0 when R = 0.

    With R = 0 the gain is 1/H for every P- > 0; the recursion keeps that
    value at P- = 0 so an exact sensor stays a passthrough after its first
    update.
    """
    if model.R == 0 and P_prior == 0 and model.H != 0:
        return 1.0 / model.H
    return gain(P_prior, model)


def step(state: KalmanState, z: float, model: KalmanModel) -> KalmanState:
    predicted = predict(state, model)
    return update(predicted, recursion_gain(predicted[1], model), z, model, state.k)


def filter_run(samples: Sequence[float], model: KalmanModel, init: tuple[float, float]) -> tuple[np.ndarray, KalmanState]:
    """Posterior estimates after each sample, plus the final state."""
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    if samples.ndim != 1 or len(samples) == 0:
        raise ValueError("filter input must be a nonempty 1-D sequence")
    x0, P0 = init
    if P0 < 0:
        raise ValueError("covariance must be non-negative")
    out, x, P = kernels.kalman_series(samples, model.A, model.B, model.u, model.Q, model.H, model.R, float(x0), float(P0))
    return out, KalmanState(x, P, len(samples))


def filter_series(samples: Sequence[float], model: KalmanModel, init: tuple[float, float]) -> np.ndarray:
    return filter_run(samples, model, init)[0]


def default_init(samples: Sequence[float], model: KalmanModel) -> tuple[float, float]:
    """Start at the first measurement with covariance R."""
    return float(samples[0]), model.R


def with_noise(model: KalmanModel, *, Q: float | None = None, R: float | None = None) -> KalmanModel:
    return replace(model, Q=model.Q if Q is None else Q, R=model.R if R is None else R)
