"""Device admission: trust gate first, then RSSI localization against the workspace.

Every request appends three blocks: the filtered RSSI report, the position
record emitted by the localization contract, and the decision.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .kalman import KalmanModel, filter_series
from .ledger import (
    Chain,
    TamperedChainError,
    Transaction,
    TxKind,
    fmt_decimal,
    make_transaction,
    register_contract,
    verify_chain,
)
from .localization import (
    Anchor,
    LocalizationError,
    PositionEstimate,
    Workspace,
    localize_device,
    rms_residual,
)
from .radio import RadioProfile, distance_from_rssi, sample_rssi_series

log = logging.getLogger(__name__)

BOUNDS_MARGIN = 0.5
# devices closer than this to an anchor are sampled at this range
MIN_RANGE = 0.01


class TrustList:
    def __init__(self, entries: Iterable[str] = ()):
        entries = list(entries)
        if len(set(entries)) != len(entries):
            raise ValueError("trust list contains duplicate device ids")
        self.entries = frozenset(entries)

    def __contains__(self, device_id: str) -> bool:
        return device_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(sorted(self.entries))


@dataclass(frozen=True)
class DeviceIdentity:
    device_id: str
    true_position: tuple[float, float]

    def __post_init__(self):
        if not isinstance(self.device_id, str) or not self.device_id:
            raise ValueError("device_id must be a nonempty string")


@dataclass(frozen=True)
class AdmissionDecision:
    granted: bool
    reason: str
    position: PositionEstimate | None = None


@dataclass
class Deployment:
    workspace: Workspace
    anchors: list[Anchor]
    profile: RadioProfile
    trust: TrustList
    chain: Chain
    kalman_defaults: KalmanModel = field(default_factory=KalmanModel)
    samples_per_request: int = 100
    kalman_x0: float | None = None  # None: start at the first sample
    kalman_P0: float | None = None  # None: start at R
    margin: float = BOUNDS_MARGIN
    diagnostics: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.samples_per_request < 1:
            raise ValueError("samples_per_request must be at least 1")
        ids = [a.id for a in self.anchors]
        if len(set(ids)) != len(ids):
            raise ValueError("anchor ids must be unique")
        for a in self.anchors:
            if not self.workspace.contains(a.x, a.y):
                raise ValueError(f"anchor {a.id!r} at ({a.x}, {a.y}) lies outside the workspace")
        if TxKind.RSSI_REPORT not in self.chain.contracts:
            register_contract(self.chain, TxKind.RSSI_REPORT, lambda tx: localization_contract(tx, self))

    def diagnose(self, message: str) -> None:
        log.warning(message)
        self.diagnostics.append(message)


def _parse_rssi(body: dict) -> dict[str, float]:
    return {aid: float(v) for aid, v in body["rssi"].items()}


def localization_contract(report: Transaction, deployment: Deployment) -> Transaction | None:
    """Smart contract bound to RssiReport: localize and emit a PositionRecord."""
    rssi = _parse_rssi(report.body)
    if len(rssi) < 3:
        deployment.diagnose(f"{report.device_id}: report covers {len(rssi)} anchors, need 3")
        return None
    try:
        est = localize_device(rssi, deployment.anchors, deployment.profile)
    except LocalizationError as exc:
        deployment.diagnose(f"{report.device_id}: localization failed: {exc}")
        return None
    return make_transaction(
        TxKind.POSITION_RECORD, report.device_id, {"x": fmt_decimal(est.x), "y": fmt_decimal(est.y)}
    )


def filtered_report(deployment: Deployment, device: DeviceIdentity, rng: np.random.Generator) -> dict[str, str]:
    """Terminal Kalman estimate per anchor after ``samples_per_request`` draws."""
    model = deployment.kalman_defaults
    px, py = device.true_position
    out = {}
    for anchor in deployment.anchors:
        d = max(math.hypot(px - anchor.x, py - anchor.y), MIN_RANGE)
        raw = sample_rssi_series(deployment.profile, d, deployment.samples_per_request, rng)
        x0 = raw[0] if deployment.kalman_x0 is None else deployment.kalman_x0
        P0 = model.R if deployment.kalman_P0 is None else deployment.kalman_P0
        out[anchor.id] = fmt_decimal(filter_series(raw, model, (x0, P0))[-1])
    return out


def _decision_tx(device_id: str, decision: AdmissionDecision) -> Transaction:
    pos = decision.position
    return make_transaction(
        TxKind.ADMISSION_DECISION,
        device_id,
        {
            "granted": "true" if decision.granted else "false",
            "reason": decision.reason,
            "x": fmt_decimal(pos.x) if pos else "",
            "y": fmt_decimal(pos.y) if pos else "",
        },
    )


def request_admission(deployment: Deployment, device: DeviceIdentity, rng: np.random.Generator) -> AdmissionDecision:
    chain = deployment.chain
    report = make_transaction(TxKind.RSSI_REPORT, device.device_id, {"rssi": filtered_report(deployment, device, rng)})
    before = len(chain)
    chain.append(report)

    position = None
    if len(chain) == before + 2 and chain.head.payload.kind is TxKind.POSITION_RECORD:
        body = chain.head.payload.body
        x, y = float(body["x"]), float(body["y"])
        by_id = {a.id: a for a in deployment.anchors}
        ranged = [(by_id[aid], distance_from_rssi(deployment.profile, v)) for aid, v in _parse_rssi(report.body).items()]
        position = PositionEstimate(x, y, rms_residual(x, y, ranged))

    if device.device_id not in deployment.trust:
        decision = AdmissionDecision(False, "UntrustedIdentity")
    elif position is None:
        decision = AdmissionDecision(False, "OutOfBounds")
    elif not deployment.workspace.contains(position.x, position.y, deployment.margin):
        decision = AdmissionDecision(False, "OutOfBounds", position)
    else:
        decision = AdmissionDecision(True, "Trusted", position)
    chain.append(_decision_tx(device.device_id, decision))
    return decision


@dataclass(frozen=True)
class AuditEntry:
    device_id: str
    granted: bool
    reason: str
    position: tuple[float, float] | None  # from the paired PositionRecord


def audit_trail(chain: Chain) -> list[AuditEntry]:
    """Decisions in chain order, each paired with the device's latest position record."""
    check = verify_chain(chain)
    if not check.ok:
        raise TamperedChainError(f"refusing to audit: chain fails verification at block {check.first_bad_index}")
    pending: dict[str, tuple[float, float]] = {}
    entries = []
    for block in chain.blocks[1:]:
        tx = block.payload
        if tx.kind is TxKind.POSITION_RECORD:
            pending[tx.device_id] = (float(tx.body["x"]), float(tx.body["y"]))
        elif tx.kind is TxKind.ADMISSION_DECISION:
            entries.append(
                AuditEntry(tx.device_id, tx.body["granted"] == "true", tx.body["reason"], pending.pop(tx.device_id, None))
            )
    return entries


def process_requests(deployment: Deployment, devices: Sequence[DeviceIdentity], rng: np.random.Generator) -> list[AdmissionDecision]:
    return [request_admission(deployment, d, rng) for d in devices]
