"""Scenario files: schema, loading with line-numbered diagnostics, and execution."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .protocol import (NS, PROFILES, AccessPoint, Client, Fcc, LocationProofAP, NearbyDevice,
                       ProtocolConfig, ProtocolRejection, QueryGrant, SpectrumServer,
                       populate_payload)
from .ranging import EnvParams
from .simnet import Network
from .store import Grid, synth_generate
from .tlp import DifficultyPolicy, SquaringCounter

SCHEMA_VERSION = 1
BUNDLED = ("honest_ap_query", "rural_nd_query", "attack_world")


class ScenarioError(ValueError):
    """Configuration problem; carries a line number when one is known."""

    def __init__(self, message: str, line: Optional[int] = None, source: str = "<scenario>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EntitySpec(_Strict):
    id: str
    kind: Literal["ap", "client", "nd", "psd", "crn"]
    position: Tuple[float, float] = (0.0, 0.0)
    region: Optional[str] = None
    device_class: str = "mobile"
    device_type: Literal["SU", "PU"] = "SU"
    radio_range_m: float = Field(300.0, gt=0)


class StoreSpec(_Strict):
    origin: Tuple[float, float] = (0.0, 0.0)
    width_m: float = Field(1000.0, gt=0)
    height_m: float = Field(1000.0, gt=0)
    cell_m: float = Field(100.0, gt=0)
    window_s: int = Field(900, gt=0)
    windows: int = Field(96, gt=0)
    bands: List[Tuple[int, int]] = [(3550, 3560), (3560, 3570)]
    density: float = Field(0.7, ge=0, le=1)
    seed: int = 0

    def grid(self) -> Grid:
        return Grid(self.origin, self.width_m, self.height_m, self.cell_m, self.window_s,
                    self.windows, tuple(tuple(b) for b in self.bands))


class ConfigSpec(_Strict):
    freshness_s: float = Field(60.0, gt=0)
    coverage_margin_m: float = Field(5.0, ge=0)
    ap_coverage_m: float = Field(200.0, gt=0)
    dbp_threshold_m: float = Field(50.0, gt=0)
    dbp_rounds: Optional[int] = Field(None, ge=1, le=256)
    threat_level: Literal["none", "low", "medium", "high"] = "low"
    beacon_window_ms: int = Field(200, ge=100, le=500)
    realistic: bool = False


class Step(_Strict):
    phase: Literal["pol_ap", "pol_nd", "query", "notify", "sleep"]
    client: Optional[str] = None
    ap: Optional[str] = None
    nd: Optional[str] = None
    server: Optional[str] = None
    via: Optional[Literal["ap", "nd"]] = None
    freq_mhz: int = 3555
    payload: str = "usage"
    populate: Optional[Tuple[bool, int, int]] = None
    seconds: float = 0.0


class Scenario(_Strict):
    version: Literal[1] = 1
    id: str
    seed: int = 0
    profile: Literal["toy", "production"] = "toy"
    regions: List[str] = ["region-1"]
    env: EnvParams = EnvParams()
    config: ConfigSpec = ConfigSpec()
    store: StoreSpec = StoreSpec()
    entities: List[EntitySpec]
    script: List[Step] = []

    @model_validator(mode="after")
    def _references(self):
        ids = [e.id for e in self.entities]
        if len(set(ids)) != len(ids):
            raise ValueError("entity ids must be unique")
        if "fcc" in ids:
            raise ValueError("'fcc' is reserved for the regulator")
        kinds = {e.id: e.kind for e in self.entities}
        for e in self.entities:
            if e.kind == "ap" and e.region not in self.regions:
                raise ValueError(f"access point {e.id!r} needs a region from {self.regions}")
        for i, s in enumerate(self.script):
            want = {"pol_ap": [("client", "client"), ("ap", "ap")],
                    "pol_nd": [("client", "client"), ("nd", "nd")],
                    "query": [("client", "client"), ("server", ("psd", "crn"))],
                    "notify": [("client", "client"), ("server", ("psd", "crn"))],
                    "sleep": []}[s.phase]
            for attr, kind in want:
                ref = getattr(s, attr)
                allowed = kind if isinstance(kind, tuple) else (kind,)
                if ref is None or kinds.get(ref) not in allowed:
                    raise ValueError(f"script step {i} ({s.phase}) needs {attr} naming a {'/'.join(allowed)} entity")
        return self


# -- loading -----------------------------------------------------------------

def _node_line(root: yaml.Node, path: Tuple) -> Optional[int]:
    """1-based line of the YAML node at `path` (best effort, falls back to the parent)."""
    node, line = root, root.start_mark.line + 1
    for key in path:
        child = None
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                if k.value == key:
                    child = v
                    break
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            child = node.value[key]
        if child is None:
            break
        node, line = child, child.start_mark.line + 1
    return line


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                            mark.line + 1 if mark else None, source) from None
    if not isinstance(data, dict):
        raise ScenarioError("top level must be a mapping", 1, source)
    if data.get("version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema version {data.get('version')!r}",
                            _node_line(root, ("version",)), source)
    try:
        return Scenario.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = tuple(err["loc"])
        raise ScenarioError(f"{'.'.join(map(str, loc)) or 'scenario'}: {err['msg']}",
                            _node_line(root, loc), source) from None


def load_scenario(path_or_name: Union[str, Path]) -> Scenario:
    """Load a scenario file, or a bundled scenario by name."""
    name = str(path_or_name)
    if name in BUNDLED:
        text = resources.files("slap.scenarios").joinpath(f"{name}.yaml").read_text()
        return parse_scenario(text, f"{name}.yaml")
    path = Path(path_or_name)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc.strerror}", None, str(path)) from None
    return parse_scenario(text, str(path))


# -- execution ---------------------------------------------------------------

@dataclass
class PhaseResult:
    index: int
    phase: str
    client: Optional[str]
    accepted: bool
    reason: str = ""
    step: str = ""
    bytes: int = 0
    messages: int = 0
    sim_ns: int = 0
    wall_s: float = 0.0
    detail: Dict[str, object] = field(default_factory=dict)


@dataclass
class ScenarioRun:
    scenario: Scenario
    seed: int
    profile: str
    phases: List[PhaseResult]
    net: Network
    world: "World"

    @property
    def accepted(self) -> bool:
        return all(p.accepted for p in self.phases)


@dataclass
class World:
    net: Network
    config: ProtocolConfig
    fcc: Fcc
    clients: Dict[str, Client]
    nds: Dict[str, NearbyDevice]
    aps: Dict[str, AccessPoint]
    servers: Dict[str, SpectrumServer]


def build_world(sc: Scenario, seed: int, profile: str, capture: bool = False) -> World:
    prof = PROFILES[profile]
    if sc.config.dbp_rounds:
        prof = type(prof)(prof.name, prof.rsa_bits, prof.require_disjoint, sc.config.dbp_rounds)
    cfg = ProtocolConfig(
        seed=seed, profile=prof, freshness_ns=int(sc.config.freshness_s * NS),
        coverage_margin_m=sc.config.coverage_margin_m, ap_coverage_m=sc.config.ap_coverage_m,
        dbp_threshold_m=sc.config.dbp_threshold_m, threat_level=sc.config.threat_level,
        beacon_window_ns=sc.config.beacon_window_ms * 1_000_000, realistic=sc.config.realistic,
        policy=DifficultyPolicy())
    net = Network(seed=seed, env=sc.env, capture=capture)
    fcc = Fcc(cfg, sc.regions)
    fcc.attach(net)
    pub = fcc.public
    world = World(net, cfg, fcc, {}, {}, {}, {})
    for e in sc.entities:
        if e.kind == "ap":
            world.aps[e.id] = AccessPoint(e.id, net, pub, e.region, fcc.region_keys[e.region], cfg,
                                          e.position, sc.env, e.radio_range_m)
        elif e.kind in ("client", "nd"):
            cls = Client if e.kind == "client" else NearbyDevice
            user = cls(e.id, net, pub, cfg, e.position, e.device_class, e.device_type, e.radio_range_m)
            fcc.enroll(e.id, user.attributes)
            (world.clients if e.kind == "client" else world.nds)[e.id] = user
        else:
            store = synth_generate(sc.store.grid(), sc.store.seed, sc.store.density) if e.kind == "psd" else None
            world.servers[e.id] = SpectrumServer(e.id, net, pub, cfg, store, e.kind, fcc.puzzle_registry,
                                                 e.position)
    return world


def run_scenario(sc: Scenario, seed: Optional[int] = None, profile: Optional[str] = None,
                 capture: bool = False) -> ScenarioRun:
    seed = sc.seed if seed is None else seed
    profile = profile or sc.profile
    world = build_world(sc, seed, profile, capture)
    net = world.net
    results: List[PhaseResult] = []

    def timed(index: int, phase: str, client: Optional[str], fn):
        mark, t0, wall = len(net.trace), net.now_ns, time.perf_counter()
        res = PhaseResult(index, phase, client, True)
        try:
            res.detail = fn() or {}
        except ProtocolRejection as exc:
            res.accepted, res.reason, res.step = False, str(exc), exc.step
        delivered = [r for r in net.trace[mark:] if not r.get("dropped")]
        res.bytes = sum(r["size"] for r in delivered)
        res.messages = len(delivered)
        res.sim_ns = net.now_ns - t0
        res.wall_s = time.perf_counter() - wall
        results.append(res)
        return res

    for uid, user in list(world.clients.items()) + list(world.nds.items()):
        timed(-1, "register", uid, lambda u=user: (u.register(), None)[1])

    proofs: Dict[str, Tuple[LocationProofAP, object]] = {}
    grants: Dict[str, QueryGrant] = {}
    for i, step in enumerate(sc.script):
        client = world.clients.get(step.client) if step.client else None
        if step.phase == "sleep":
            timed(i, "sleep", None, lambda s=step: net.sleep(int(s.seconds * NS)))
        elif step.phase == "pol_ap":
            def pol_ap(c=client, s=step):
                proofs[c.id] = c.pol_ap(s.ap)
                return {"ap": s.ap}
            timed(i, "pol_ap", client.id, pol_ap)
        elif step.phase == "pol_nd":
            def pol_nd(c=client, s=step):
                cred = c.pol_nd(s.nd)
                return {"nd": s.nd, "depth": cred.depth, "bound": cred.bound}
            timed(i, "pol_nd", client.id, pol_nd)
        elif step.phase == "query":
            def query(c=client, s=step):
                via = s.via or ("ap" if c.id in proofs else "nd")
                if via == "ap":
                    if c.id not in proofs:
                        raise ProtocolRejection("no access-point location proof held", "query")
                    phi, nym = proofs[c.id]
                    g = c.query(s.server, s.freq_mhz, phi=phi, pseudonym=nym)
                else:
                    g = c.query(s.server, s.freq_mhz)
                grants[c.id] = g
                return {"via": via, "kappa": g.puzzle.kappa, "record_bytes": len(g.record)}
            timed(i, "query", client.id, query)
        elif step.phase == "notify":
            def notify(c=client, s=step):
                g = grants.pop(c.id, None)
                if g is None:
                    raise ProtocolRejection("no puzzle held from a prior query", "notify")
                payload = populate_payload(*s.populate) if s.populate else b"U" + s.payload.encode()
                counter = SquaringCounter()
                c.notify(g, payload, counter=counter, disclose_type=bool(s.populate))
                return {"kappa": g.puzzle.kappa, "squarings": counter.squarings}
            timed(i, "notify", client.id, notify)
    return ScenarioRun(sc, seed, profile, results, net, world)
