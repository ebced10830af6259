"""Shared builders and mutators for tests."""

import copy

from homeledger.ledger import REASONS, TxKind, fmt_decimal, make_transaction

FIELDS = ("index", "timestamp", "prev_hash", "nonce", "hash", "kind", "device_id", "body")


def rssi_tx(device_id="dev", kind=TxKind.RSSI_REPORT, values=(-45.0, -50.0, -55.0)):
    return make_transaction(kind, device_id, {"rssi": {f"a{i}": fmt_decimal(v) for i, v in enumerate(values)}})


def random_tx(rng):
    kind = TxKind(rng.choice([k.value for k in TxKind]))
    dev = f"dev-{int(rng.integers(1000))}"
    if kind in (TxKind.RSSI_REPORT, TxKind.ADMISSION_REQUEST):
        body = {"rssi": {f"a{j}": fmt_decimal(v) for j, v in enumerate(rng.uniform(-90, -30, 4))}}
    elif kind is TxKind.POSITION_RECORD:
        body = {"x": fmt_decimal(rng.uniform(0, 4)), "y": fmt_decimal(rng.uniform(0, 3))}
    else:
        body = {"granted": "false", "reason": str(rng.choice(REASONS)), "x": "", "y": ""}
    return make_transaction(kind, dev, body)


def _flip_hex(text, pos):
    c = text[pos]
    return text[:pos] + ("1" if c == "0" else "0") + text[pos + 1 :]


def mutate(block, field, rng):
    """Change exactly one field of ``block`` in place to a different value."""
    if field in ("index", "timestamp", "nonce"):
        setattr(block, field, getattr(block, field) + int(rng.integers(1, 5)))
    elif field in ("prev_hash", "hash"):
        setattr(block, field, _flip_hex(getattr(block, field), int(rng.integers(64))))
    elif field == "kind":
        others = [k for k in TxKind if k is not block.payload.kind]
        block.payload.kind = others[int(rng.integers(len(others)))]
    elif field == "device_id":
        block.payload.device_id = block.payload.device_id + "x"
    else:
        body = copy.deepcopy(block.payload.body)
        key = sorted(body)[int(rng.integers(len(body)))]
        if isinstance(body[key], dict):
            inner = sorted(body[key])[0]
            body[key][inner] = body[key][inner] + "1"
        else:
            body[key] = body[key] + "1"
        block.payload.body = body
