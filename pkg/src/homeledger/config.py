"""JSON configuration with strict key checking and line-anchored errors."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .access import Deployment, TrustList
from .kalman import KalmanModel
from .ledger import MAX_DIFFICULTY, ChainConfig, Mode, SimClock, new_chain
from .localization import Anchor, Workspace, corner_anchors
from .radio import PROFILE_NAMES, PROFILES, RadioProfile


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message)


@dataclass
class KalmanConfig:
    model: KalmanModel = field(default_factory=KalmanModel)
    x0_policy: str | float = "first"
    P0: float | None = None


@dataclass
class ExperimentConfig:
    distances: list[float] = field(default_factory=lambda: [0.25, 0.5, 1.0])
    n_samples: int = 100
    trials: int = 20
    seed: int = 0


@dataclass
class Config:
    workspace: Workspace = field(default_factory=Workspace)
    anchors: list[Anchor] = field(default_factory=lambda: corner_anchors(Workspace()))
    profile: RadioProfile = PROFILES["WiFi"]
    trust: list[str] = field(default_factory=lambda: ["thermostat-01", "camera-01", "lock-01"])
    chain: ChainConfig = field(default_factory=lambda: ChainConfig(Mode.PRIVATE, 4))
    kalman: KalmanConfig = field(default_factory=KalmanConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)

    def to_dict(self) -> dict:
        m = self.kalman.model
        return {
            "workspace": {"width": self.workspace.width, "height": self.workspace.height},
            "anchors": [{"id": a.id, "x": a.x, "y": a.y} for a in self.anchors],
            "profile": self.profile.to_dict(),
            "trust": list(self.trust),
            "chain": {"mode": self.chain.mode.value, "difficulty": self.chain.difficulty},
            "kalman": {
                "A": m.A, "B": m.B, "u": m.u, "Q": m.Q, "H": m.H, "R": m.R,
                "x0_policy": self.kalman.x0_policy,
                "P0": self.kalman.P0,
            },
            "experiment": {
                "distances": list(self.experiment.distances),
                "n_samples": self.experiment.n_samples,
                "trials": self.experiment.trials,
                "seed": self.experiment.seed,
            },
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def experiment_profiles(self) -> list[RadioProfile]:
        """The three built-in technologies, with the configured profile substituted by name."""
        return [self.profile if name == self.profile.name else PROFILES[name] for name in ("WiFi", "XBee", "BLE")]

    def deployment(self, chain=None) -> Deployment:
        x0 = None if self.kalman.x0_policy == "first" else float(self.kalman.x0_policy)
        return Deployment(
            workspace=self.workspace,
            anchors=list(self.anchors),
            profile=self.profile,
            trust=TrustList(self.trust),
            chain=chain if chain is not None else new_chain(self.chain, SimClock()),
            kalman_defaults=self.kalman.model,
            kalman_x0=x0,
            kalman_P0=self.kalman.P0,
        )


class _Reader:
    """Walks parsed JSON, locating keys in the source text for error lines."""

    def __init__(self, text: str):
        self.text = text

    def line_of(self, key: str, start: int = 0) -> tuple[int, int]:
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(self.text, start)
        if m is None:
            return self.text.count("\n", 0, start) + 1, start
        return self.text.count("\n", 0, m.start()) + 1, m.start()

    def fail(self, message: str, pos: int) -> ConfigError:
        return ConfigError(message, self.text.count("\n", 0, pos) + 1)

    def obj(self, value, where: str, pos: int, required: set[str], optional: set[str] = frozenset()) -> dict[str, int]:
        """Check key sets of ``value``; returns each key's text offset."""
        if not isinstance(value, dict):
            raise self.fail(f"{where} must be an object", pos)
        offsets = {k: self.line_of(k, pos)[1] for k in value}
        for k in sorted(set(value) - required - optional):
            raise self.fail(f"unknown key '{k}' in {where}", offsets[k])
        for k in sorted(required - set(value)):
            raise self.fail(f"missing key '{k}' in {where}", pos)
        return offsets

    def number(self, value, where: str, pos: int, *, positive=False, nonneg=False) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.fail(f"{where} must be a number", pos)
        if positive and not value > 0:
            raise self.fail(f"{where} must be positive", pos)
        if nonneg and value < 0:
            raise self.fail(f"{where} must be non-negative", pos)
        return float(value)

    def integer(self, value, where: str, pos: int, lo: int, hi: int | None = None) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.fail(f"{where} must be an integer", pos)
        if value < lo or (hi is not None and value > hi):
            bound = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
            raise self.fail(f"{where} must be in {bound}, got {value}", pos)
        return value


_TOP = {"workspace", "anchors", "profile", "trust", "chain", "kalman", "experiment"}


def parse_config(text: str) -> Config:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    r = _Reader(text)
    at = r.obj(data, "config", 0, _TOP)

    ws = data["workspace"]
    wat = r.obj(ws, "workspace", at["workspace"], {"width", "height"})
    workspace = Workspace(
        r.number(ws["width"], "workspace.width", wat["width"], positive=True),
        r.number(ws["height"], "workspace.height", wat["height"], positive=True),
    )

    anchors = []
    pos = at["anchors"]
    if not isinstance(data["anchors"], list) or len(data["anchors"]) < 3:
        raise r.fail("anchors must be a list of at least 3 {id, x, y} objects", pos)
    for i, item in enumerate(data["anchors"]):
        where = f"anchors[{i}]"
        aat = r.obj(item, where, pos, {"id", "x", "y"})
        if not isinstance(item["id"], str) or not item["id"]:
            raise r.fail(f"{where}.id must be a nonempty string", aat["id"])
        x = r.number(item["x"], f"{where}.x", aat["x"])
        y = r.number(item["y"], f"{where}.y", aat["y"])
        if not workspace.contains(x, y):
            raise r.fail(f"{where} at ({x}, {y}) lies outside the workspace", aat["id"])
        if any(a.id == item["id"] for a in anchors):
            raise r.fail(f"duplicate anchor id {item['id']!r}", aat["id"])
        anchors.append(Anchor(item["id"], x, y))
        pos = max(aat.values()) + 1

    prof = data["profile"]
    if isinstance(prof, str):
        if prof not in PROFILES:
            raise r.fail(f"profile must be one of {PROFILE_NAMES}, got {prof!r}", at["profile"])
        profile = PROFILES[prof]
    else:
        pat = r.obj(prof, "profile", at["profile"], {"name", "A", "n", "sigma0", "sigma_slope"})
        if prof["name"] not in PROFILE_NAMES:
            raise r.fail(f"profile.name must be one of {PROFILE_NAMES}", pat["name"])
        profile = RadioProfile(
            prof["name"],
            r.number(prof["A"], "profile.A", pat["A"]),
            r.number(prof["n"], "profile.n", pat["n"], positive=True),
            r.number(prof["sigma0"], "profile.sigma0", pat["sigma0"], nonneg=True),
            r.number(prof["sigma_slope"], "profile.sigma_slope", pat["sigma_slope"], nonneg=True),
        )

    trust = data["trust"]
    if not isinstance(trust, list) or not all(isinstance(t, str) and t for t in trust):
        raise r.fail("trust must be a list of nonempty device id strings", at["trust"])
    if len(set(trust)) != len(trust):
        raise r.fail("trust contains duplicate device ids", at["trust"])

    ch = data["chain"]
    cat = r.obj(ch, "chain", at["chain"], {"mode", "difficulty"})
    if ch["mode"] not in ("Private", "Public"):
        raise r.fail("chain.mode must be 'Private' or 'Public'", cat["mode"])
    chain = ChainConfig(Mode(ch["mode"]), r.integer(ch["difficulty"], "chain.difficulty", cat["difficulty"], 0, MAX_DIFFICULTY))

    km = data["kalman"]
    kat = r.obj(km, "kalman", at["kalman"], {"A", "B", "u", "Q", "H", "R"}, {"x0_policy", "P0"})
    vals = {k: r.number(km[k], f"kalman.{k}", kat[k], nonneg=k in ("Q", "R")) for k in ("A", "B", "u", "Q", "H", "R")}
    x0_policy = km.get("x0_policy", "first")
    if x0_policy != "first":
        x0_policy = r.number(x0_policy, "kalman.x0_policy ('first' or a number)", kat["x0_policy"])
    P0 = km.get("P0")
    if P0 is not None:
        P0 = r.number(P0, "kalman.P0", kat["P0"], nonneg=True)
    kalman = KalmanConfig(KalmanModel(**vals), x0_policy, P0)

    ex = data["experiment"]
    eat = r.obj(ex, "experiment", at["experiment"], {"distances", "n_samples", "trials", "seed"})
    dists = ex["distances"]
    if not isinstance(dists, list) or not dists:
        raise r.fail("experiment.distances must be a nonempty list", eat["distances"])
    distances = [r.number(d, "experiment.distances[]", eat["distances"], positive=True) for d in dists]
    experiment = ExperimentConfig(
        distances,
        r.integer(ex["n_samples"], "experiment.n_samples", eat["n_samples"], 1),
        r.integer(ex["trials"], "experiment.trials", eat["trials"], 1),
        r.integer(ex["seed"], "experiment.seed", eat["seed"], 0, 2**64 - 1),
    )
    return Config(workspace, anchors, profile, list(trust), chain, kalman, experiment)


def load_config(path: str | Path) -> Config:
    return parse_config(Path(path).read_text())
