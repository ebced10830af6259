"""Log-distance path-loss channel: RSSI = A - 10 n log10(d / 1 m).

Noise is Gaussian in the dB domain with standard deviation
``sigma0 + sigma_slope * d``. The noise defaults are simulation parameters
that order the technologies WiFi < XBee < BLE at 1 m; they were not measured.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

PROFILE_NAMES = ("WiFi", "BLE", "XBee")


@dataclass(frozen=True)
class RadioProfile:
    name: str
    A: float  # RSSI at the 1 m reference, dBm
    n: float = 2.0  # path-loss exponent
    sigma0: float = 0.0  # dB
    sigma_slope: float = 0.0  # dB per metre

    def __post_init__(self):
        if self.name not in PROFILE_NAMES:
            raise ValueError(f"profile name must be one of {PROFILE_NAMES}, got {self.name!r}")
        if not self.n > 0:
            raise ValueError("path-loss exponent n must be positive")
        if self.sigma0 < 0 or self.sigma_slope < 0:
            raise ValueError("noise parameters must be non-negative")

    def sigma(self, d: float) -> float:
        return self.sigma0 + self.sigma_slope * d

    def noiseless(self) -> RadioProfile:
        return RadioProfile(self.name, self.A, self.n)

    def to_dict(self) -> dict:
        return asdict(self)


WIFI = RadioProfile("WiFi", -45.0, 2.0, sigma0=2.0, sigma_slope=0.5)
BLE = RadioProfile("BLE", -56.0, 2.0, sigma0=4.0, sigma_slope=1.0)
XBEE = RadioProfile("XBee", 18.0, 2.0, sigma0=1.0, sigma_slope=3.0)

PROFILES = {p.name: p for p in (WIFI, BLE, XBEE)}


def _check_distance(d) -> None:
    if not np.all(np.asarray(d) > 0):
        raise ValueError(f"distance must be positive, got {d}")


def expected_rssi(profile: RadioProfile, d: float) -> float:
    _check_distance(d)
    return profile.A - 10.0 * profile.n * math.log10(d)


def distance_from_rssi(profile: RadioProfile, rssi: float) -> float:
    return 10.0 ** ((profile.A - rssi) / (10.0 * profile.n))


def sample_rssi(profile: RadioProfile, d: float, rng: np.random.Generator) -> float:
    _check_distance(d)
    return expected_rssi(profile, d) + rng.normal(0.0, profile.sigma(d))


def sample_rssi_series(profile: RadioProfile, d: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` consecutive draws; equal to ``n`` calls of ``sample_rssi``."""
    _check_distance(d)
    return expected_rssi(profile, d) + rng.normal(0.0, profile.sigma(d), size=n)
