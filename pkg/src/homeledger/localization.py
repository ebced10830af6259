"""2-D trilateration by linearized least squares, plus a grid-search oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .radio import RadioProfile, distance_from_rssi

DEGENERATE_DET = 1e-9


class LocalizationError(ValueError):
    pass


@dataclass(frozen=True)
class Anchor:
    id: str
    x: float
    y: float


@dataclass(frozen=True)
class Workspace:
    width: float = 4.0
    height: float = 3.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("workspace width and height must be positive")

    def contains(self, x: float, y: float, margin: float = 0.0) -> bool:
        return -margin <= x <= self.width + margin and -margin <= y <= self.height + margin


@dataclass(frozen=True)
class PositionEstimate:
    x: float
    y: float
    residual: float


def corner_anchors(workspace: Workspace) -> list[Anchor]:
    w, h = workspace.width, workspace.height
    return [Anchor("a0", 0.0, 0.0), Anchor("a1", w, 0.0), Anchor("a2", 0.0, h), Anchor("a3", w, h)]


def rms_residual(x: float, y: float, ranged: Sequence[tuple[Anchor, float]]) -> float:
    sq = [(math.hypot(x - a.x, y - a.y) - d) ** 2 for a, d in ranged]
    return math.sqrt(sum(sq) / len(sq))


def trilaterate(ranged: Sequence[tuple[Anchor, float]]) -> PositionEstimate:
    """Least-squares position from (anchor, distance) pairs.

    Each circle equation minus the first anchor's gives a row of a linear
    system in (x, y); the 2x2 normal equations are solved in closed form.
    """
    if len(ranged) < 3:
        raise LocalizationError(f"trilateration needs at least 3 anchors, got {len(ranged)}")
    if any(d < 0 for _, d in ranged):
        raise LocalizationError("distances must be non-negative")
    (a0, d0), rest = ranged[0], ranged[1:]
    k0 = a0.x * a0.x + a0.y * a0.y
    rows = np.array([[2.0 * (a.x - a0.x), 2.0 * (a.y - a0.y)] for a, _ in rest])
    rhs = np.array([d0 * d0 - d * d + a.x * a.x + a.y * a.y - k0 for a, d in rest])
    M = rows.T @ rows
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det) < DEGENERATE_DET:
        raise LocalizationError("anchors are collinear (normal matrix is singular)")
    v = rows.T @ rhs
    x = (M[1, 1] * v[0] - M[0, 1] * v[1]) / det
    y = (M[0, 0] * v[1] - M[1, 0] * v[0]) / det
    return PositionEstimate(float(x), float(y), rms_residual(x, y, ranged))


def grid_shape(workspace: Workspace, resolution: float) -> tuple[int, int]:
    nx = max(1, math.ceil(workspace.width / resolution - 1e-9))
    ny = max(1, math.ceil(workspace.height / resolution - 1e-9))
    return nx, ny


def trilaterate_oracle(ranged: Sequence[tuple[Anchor, float]], workspace: Workspace, resolution: float) -> PositionEstimate:
    """Brute-force argmin of summed squared range mismatch over grid cell centres."""
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    nx, ny = grid_shape(workspace, resolution)
    ax = np.array([a.x for a, _ in ranged], dtype=np.float64)
    ay = np.array([a.y for a, _ in ranged], dtype=np.float64)
    dist = np.array([d for _, d in ranged], dtype=np.float64)
    ix, iy, _ = kernels.grid_argmin(ax, ay, dist, nx, ny, float(resolution))
    x, y = (ix + 0.5) * resolution, (iy + 0.5) * resolution
    return PositionEstimate(x, y, rms_residual(x, y, ranged))


def localize_device(reports: Mapping[str, float], anchors: Sequence[Anchor], profile: RadioProfile) -> PositionEstimate:
    """RSSI per anchor -> distances -> trilateration."""
    by_id = {a.id: a for a in anchors}
    unknown = [aid for aid in reports if aid not in by_id]
    if unknown:
        raise LocalizationError(f"unknown anchor id(s) in report: {', '.join(map(repr, unknown))}")
    ranged = [(by_id[aid], distance_from_rssi(profile, rssi)) for aid, rssi in reports.items()]
    return trilaterate(ranged)
