"""Smart-home access layer: a trust-gated hash-chained ledger that admits
devices by identity and RSSI-trilaterated position, smoothing RSSI with a
scalar Kalman filter run as a ledger smart contract."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
