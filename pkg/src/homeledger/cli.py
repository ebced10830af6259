"""``homeledger`` command line: simulate-rssi, bench-chain, run-access, verify-chain.

Exit status is 0 on full success, 1 when a chain fails verification and 2
for invalid input (config, requests, chain dump, arguments).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .access import DeviceIdentity, request_admission
from .bench import CSV_HEADER, run_latency_experiment, simulate_cells
from .config import Config, ConfigError, load_config
from .ledger import ChainConfig, LedgerError, Mode, dump_chain, load_chain, verify_chain


class UsageError(Exception):
    pass


def _err(message: str) -> None:
    print(f"homeledger: {message}", file=sys.stderr)


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load(args) -> Config:
    if args.config is None:
        config = Config()
    else:
        try:
            config = load_config(args.config)
        except ConfigError as exc:
            raise ConfigError(f"{args.config}:{exc.line}: {exc}") from None
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    if getattr(args, "seed", None) is not None:
        config.experiment.seed = args.seed
    if getattr(args, "trials", None) is not None:
        if args.trials < 1:
            raise UsageError("--trials must be at least 1")
        config.experiment.trials = args.trials
    if getattr(args, "difficulty", None) is not None:
        config.chain = ChainConfig(config.chain.mode, args.difficulty)
    return config


def cmd_simulate_rssi(config: Config, out_csv: str | None, out_json: str | None, fmt: str = "csv") -> int:
    kc = config.kalman
    cells = simulate_cells(
        config.experiment_profiles(),
        config.experiment.distances,
        config.experiment.n_samples,
        kc.model,
        config.experiment.seed,
        None if kc.x0_policy == "first" else float(kc.x0_policy),
        kc.P0,
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for cell in cells:
        writer.writerows(cell.rows())
    summary = json.dumps([c.report().to_dict() for c in cells], indent=2) + "\n"
    if out_csv is None and fmt == "json":
        _write(None, summary)
        return 0
    _write(out_csv, buf.getvalue())
    if out_json is not None:
        _write(out_json, summary)
    return 0


def cmd_bench_chain(config: Config, out_json: str | None) -> int:
    private, public = run_latency_experiment(config.experiment.trials, config.chain.difficulty)
    _write(out_json, json.dumps([private.to_dict(), public.to_dict()], indent=2) + "\n")
    ratio = public.mean_seconds / private.mean_seconds if private.mean_seconds > 0 else float("inf")
    print(
        f"private mean {private.mean_seconds:.6g} s, public (difficulty {config.chain.difficulty}) "
        f"mean {public.mean_seconds:.6g} s, ratio {ratio:.3g}",
        file=sys.stderr,
    )
    return 0


def parse_requests(text: str) -> list[DeviceIdentity]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"requests file is not valid JSON (line {exc.lineno}): {exc.msg}") from None
    if not isinstance(data, list):
        raise UsageError("requests file must be a JSON array of {device_id, x, y}")
    devices = []
    for i, item in enumerate(data):
        ok = (
            isinstance(item, dict)
            and set(item) == {"device_id", "x", "y"}
            and isinstance(item["device_id"], str)
            and item["device_id"] != ""
            and all(isinstance(item[k], (int, float)) and not isinstance(item[k], bool) for k in ("x", "y"))
        )
        if not ok:
            raise UsageError(f"request {i} is malformed: need {{device_id: nonempty string, x: number, y: number}}")
        devices.append(DeviceIdentity(item["device_id"], (float(item["x"]), float(item["y"]))))
    return devices


def cmd_run_access(config: Config, requests_file: str, out_chain_json: str | None) -> int:
    try:
        text = Path(requests_file).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read requests: {exc}") from None
    devices = parse_requests(text)
    deployment = config.deployment()
    rng = np.random.default_rng(config.experiment.seed)
    for device in devices:
        decision = request_admission(deployment, device, rng)
        print(f"{device.device_id} {'granted' if decision.granted else 'denied'} {decision.reason}")
    for message in deployment.diagnostics:
        _err(message)
    if out_chain_json is not None:
        _write(out_chain_json, dump_chain(deployment.chain))
    return 0


def cmd_verify_chain(chain_json: str, chain_config: ChainConfig | None = None) -> int:
    try:
        chain = load_chain(Path(chain_json).read_text(), chain_config)
    except OSError as exc:
        raise UsageError(f"cannot read chain dump: {exc}") from None
    except LedgerError as exc:
        raise UsageError(f"{chain_json}: {exc}") from None
    result = verify_chain(chain)
    if not result.ok:
        _err(f"chain verification failed at block {result.first_bad_index}")
        print(result.first_bad_index)
        return 1
    print(f"chain ok: {len(chain)} blocks")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="deployment/experiment config JSON (built-in defaults if omitted)")

    parser = argparse.ArgumentParser(prog="homeledger", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-rssi", parents=[common], help="per-sample RSSI CSV and RMSE summary")
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.add_argument("--summary", help="RMSE summary JSON path")
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="what to print when --out is omitted")

    p = sub.add_parser("bench-chain", parents=[common], help="private vs public admission latency")
    p.add_argument("--out", help="LatencyReport JSON path (stdout if omitted)")
    p.add_argument("--trials", type=int)
    p.add_argument("--difficulty", type=int)

    p = sub.add_parser("run-access", parents=[common], help="process admission requests and dump the chain")
    p.add_argument("requests", help="JSON array of {device_id, x, y}")
    p.add_argument("--out", help="chain dump path")
    p.add_argument("--seed", type=int)
    p.add_argument("--difficulty", type=int)

    p = sub.add_parser("verify-chain", parents=[common], help="verify a chain dump")
    p.add_argument("chain", help="chain dump JSON")
    p.add_argument("--difficulty", type=int, help="also require proof of work at this difficulty")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if args.command == "verify-chain":
            chain_config = None
            if args.difficulty is not None:
                chain_config = ChainConfig(Mode.PUBLIC, args.difficulty)
            elif args.config is not None:
                chain_config = _load(args).chain
            return cmd_verify_chain(args.chain, chain_config)
        config = _load(args)
        if args.command == "simulate-rssi":
            return cmd_simulate_rssi(config, args.out, args.summary, args.format)
        if args.command == "bench-chain":
            return cmd_bench_chain(config, args.out)
        return cmd_run_access(config, args.requests, args.out)
    except (ConfigError, UsageError, LedgerError, ValueError) as exc:
        _err(str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
