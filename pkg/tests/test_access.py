import math
import statistics

import numpy as np
import pytest

from homeledger.access import (
    Deployment,
    DeviceIdentity,
    TrustList,
    audit_trail,
    localization_contract,
    request_admission,
)
from homeledger.kalman import KalmanModel, filter_series
from homeledger.ledger import (
    ChainConfig,
    LedgerError,
    Mode,
    TamperedChainError,
    TxKind,
    dump_chain,
    fmt_decimal,
    make_transaction,
    new_chain,
    verify_chain,
)
from homeledger.localization import Anchor, Workspace, corner_anchors, localize_device
from homeledger.radio import WIFI, expected_rssi, sample_rssi_series

TRUSTED = ["cam", "lock", "thermo"]


def deployment(profile=WIFI, anchors=None, mode=Mode.PRIVATE, difficulty=0, samples=100):
    ws = Workspace()
    return Deployment(
        workspace=ws,
        anchors=anchors or corner_anchors(ws),
        profile=profile,
        trust=TrustList(TRUSTED),
        chain=new_chain(ChainConfig(mode, difficulty)),
        kalman_defaults=KalmanModel(),
        samples_per_request=samples,
    )


def noiseless_report(dep, x, y, anchors=None):
    rssi = {a.id: fmt_decimal(expected_rssi(dep.profile, math.hypot(x - a.x, y - a.y))) for a in anchors or dep.anchors}
    return make_transaction(TxKind.RSSI_REPORT, "dev", {"rssi": rssi})


class TestRequestAdmission:
    def test_trusted_noiseless_granted(self, rng):
        dep = deployment(WIFI.noiseless())
        d = request_admission(dep, DeviceIdentity("cam", (1.0, 1.0)), rng)
        assert d.granted and d.reason == "Trusted"
        assert (d.position.x, d.position.y) == pytest.approx((1, 1), abs=1e-6)
        assert len(dep.chain) == 4
        kinds = [b.payload.kind for b in dep.chain][1:]
        assert kinds == [TxKind.RSSI_REPORT, TxKind.POSITION_RECORD, TxKind.ADMISSION_DECISION]
        assert verify_chain(dep.chain).ok

    def test_untrusted_denied_without_position(self, rng):
        dep = deployment()
        d = request_admission(dep, DeviceIdentity("intruder", (1.0, 1.0)), rng)
        assert not d.granted and d.reason == "UntrustedIdentity" and d.position is None
        assert len(dep.chain) == 4
        body = dep.chain.head.payload.body
        assert body == {"granted": "false", "reason": "UntrustedIdentity", "x": "", "y": ""}

    def test_out_of_bounds(self, rng):
        dep = deployment(WIFI.noiseless())
        d = request_admission(dep, DeviceIdentity("lock", (10.0, 10.0)), rng)
        assert not d.granted and d.reason == "OutOfBounds"
        assert (d.position.x, d.position.y) == pytest.approx((10, 10), abs=1e-5)

    def test_degenerate_anchors_denied_with_diagnostic(self, rng):
        line = [Anchor("a", 0, 0), Anchor("b", 2, 0), Anchor("c", 4, 0)]
        dep = deployment(WIFI.noiseless(), anchors=line)
        d = request_admission(dep, DeviceIdentity("cam", (1.0, 1.0)), rng)
        assert (d.granted, d.reason, d.position) == (False, "OutOfBounds", None)
        assert dep.diagnostics and "collinear" in dep.diagnostics[0]
        # no PositionRecord: report + decision only
        assert len(dep.chain) == 3

    def test_device_at_anchor(self, rng):
        dep = deployment(WIFI.noiseless())
        d = request_admission(dep, DeviceIdentity("cam", (0.0, 0.0)), rng)
        assert d.granted and abs(d.position.x) < 0.05 and abs(d.position.y) < 0.05

    def test_public_mode_mines_every_block(self, rng):
        dep = deployment(mode=Mode.PUBLIC, difficulty=2, samples=10)
        request_admission(dep, DeviceIdentity("cam", (2.0, 1.0)), rng)
        assert len(dep.chain) == 4
        assert all(b.hash.startswith("00") for b in dep.chain.blocks[1:])
        assert verify_chain(dep.chain).ok

    def test_empty_device_id(self):
        with pytest.raises(ValueError):
            DeviceIdentity("", (0, 0))


class TestContract:
    def test_noiseless_report(self):
        dep = deployment()
        tx = localization_contract(noiseless_report(dep, 2.0, 1.5), dep)
        assert tx.kind is TxKind.POSITION_RECORD
        assert (float(tx.body["x"]), float(tx.body["y"])) == pytest.approx((2.0, 1.5), abs=1e-6)

    def test_two_anchor_report(self):
        dep = deployment()
        report = noiseless_report(dep, 2.0, 1.5, dep.anchors[:2])
        assert localization_contract(report, dep) is None
        assert dep.diagnostics
        before = len(dep.chain)
        dep.chain.append(report)
        assert len(dep.chain) == before + 1

    def test_pure(self):
        dep = deployment()
        r = noiseless_report(dep, 3.1, 0.4)
        assert localization_contract(r, dep) == localization_contract(r, dep)


class TestAudit:
    def test_empty(self):
        assert audit_trail(deployment().chain) == []

    def test_order_and_pairing(self, rng):
        dep = deployment(WIFI.noiseless())
        for dev, pos in [("cam", (1, 1)), ("ghost", (2, 2)), ("lock", (3, 2.5))]:
            request_admission(dep, DeviceIdentity(dev, pos), rng)
        trail = audit_trail(dep.chain)
        assert [e.device_id for e in trail] == ["cam", "ghost", "lock"]
        assert [e.reason for e in trail] == ["Trusted", "UntrustedIdentity", "Trusted"]
        # the ledger still tracks where the untrusted device was
        assert trail[1].position == pytest.approx((2, 2), abs=1e-5)

    def test_tampered(self, rng):
        dep = deployment()
        request_admission(dep, DeviceIdentity("cam", (1, 1)), rng)
        dep.chain[2].payload.body["x"] = "0.000000"
        with pytest.raises(TamperedChainError):
            audit_trail(dep.chain)
        assert issubclass(TamperedChainError, LedgerError)


def test_deployment_invariants():
    with pytest.raises(ValueError):
        deployment(samples=0)
    with pytest.raises(ValueError):
        deployment(anchors=[Anchor("a", 0, 0), Anchor("b", 9, 0), Anchor("c", 0, 3)])
    with pytest.raises(ValueError):
        TrustList(["a", "a"])


def test_determinism():
    def run():
        dep = deployment()
        rng = np.random.default_rng(77)
        for i, pos in enumerate([(1, 1), (3, 2), (0.5, 2.5), (6, 1)]):
            request_admission(dep, DeviceIdentity(TRUSTED[i % 3] if i != 2 else "x", pos), rng)
        return dump_chain(dep.chain)

    assert run() == run()


def test_filtering_improves_localization():
    anchors = corner_anchors(Workspace())
    model = KalmanModel()
    raw_err, filt_err = [], []
    for trial in range(50):
        rng = np.random.default_rng(1000 + trial)
        raw, filt = {}, {}
        for a in anchors:
            z = sample_rssi_series(WIFI, math.hypot(1 - a.x, 1 - a.y), 100, rng)
            raw[a.id] = z[-1]
            filt[a.id] = filter_series(z, model, (z[0], model.R))[-1]
        for store, errs in ((raw, raw_err), (filt, filt_err)):
            est = localize_device(store, anchors, WIFI)
            errs.append(math.hypot(est.x - 1, est.y - 1))
    assert statistics.median(filt_err) < statistics.median(raw_err)
