"""Network data model and seeded generation of day-long topology traces.

Nodes are indexed 0 (donor), 1..num_bs (base stations), then the UEs. One
simulated day is 96 fifteen-minute intervals; every interval gets a fresh
snapshot of candidate links plus the congested hub's three slice demands.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator

import numpy as np

from .errors import ConfigurationError, ConsistencyError

if TYPE_CHECKING:
    from .scheduling import ScheduleResult

INTERVALS_PER_DAY = 96
INFRASTRUCTURE = 0
ACCESS = 1
_SEED_MASK = (1 << 64) - 1


class NodeKind(enum.Enum):
    DONOR = "donor"
    BASE_STATION = "bs"
    USER_EQUIPMENT = "ue"


class SliceKind(enum.Enum):
    EMBB = "eMBB"
    URLLC = "uRLLC"
    EMTC = "eMTC"


SLICE_ORDER = (SliceKind.EMBB, SliceKind.URLLC, SliceKind.EMTC)


@dataclass(frozen=True)
class Node:
    node_id: int
    kind: NodeKind
    antenna_budget: int


@dataclass(frozen=True)
class LinkCandidate:
    link_id: int
    src: int
    dst: int
    weight: float
    link_type: int  # INFRASTRUCTURE or ACCESS


@dataclass(frozen=True)
class TopologySnapshot:
    interval_index: int
    nodes: tuple[Node, ...]
    links: tuple[LinkCandidate, ...]

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]


@dataclass(frozen=True)
class SliceProfile:
    interval_index: int
    bs: int
    slice_kind: SliceKind
    band_demand: float
    antenna_demand: float


@dataclass(frozen=True)
class LoadProfile:
    interval_index: int
    residual_band: dict[int, float]
    residual_antennas: dict[int, float]


@dataclass(frozen=True)
class DayTrace:
    seed: int
    snapshots: tuple[TopologySnapshot, ...]
    slice_profiles: tuple[tuple[SliceProfile, ...], ...]


@dataclass(frozen=True)
class ScenarioConfig:
    """Deployment scenario: a hub BS backhauled to a donor, plus UEs.

    cap_mb normalizes raw MB-scale band demands into [0,1]; antenna demands
    are integer counts normalized by antennas_per_bs.
    """

    num_bs: int = 7
    num_ue: int = 10
    antennas_per_bs: int = 14
    cap_mb: int = 25000
    band_ranges_mb: dict[SliceKind, tuple[float, float]] = field(
        default_factory=lambda: {
            SliceKind.EMBB: (8000.0, 20000.0),
            SliceKind.URLLC: (500.0, 3000.0),
            SliceKind.EMTC: (500.0, 2500.0),
        }
    )
    antenna_demand_range: tuple[int, int] = (1, 10)

    def validate(self) -> None:
        if self.num_bs < 1:
            raise ConfigurationError("scenario needs at least one base station")
        if self.num_ue < 0:
            raise ConfigurationError("num_ue must be non-negative")
        if self.antennas_per_bs < 1:
            raise ConfigurationError("antennas_per_bs must be at least 1")
        if self.cap_mb <= 0:
            raise ConfigurationError("cap_mb must be positive")
        for kind in SLICE_ORDER:
            lo, hi = self.band_ranges_mb[kind]
            if not 0 <= lo <= hi:
                raise ConfigurationError(f"bad band range for {kind.value}: ({lo}, {hi})")
            if hi > self.cap_mb:
                raise ConfigurationError(
                    f"cap_mb={self.cap_mb} below {kind.value} range top {hi}; demands would exceed 1"
                )
        lo, hi = self.antenna_demand_range
        if not 1 <= lo <= hi:
            raise ConfigurationError(f"bad antenna demand range ({lo}, {hi})")
        if hi > self.antennas_per_bs:
            raise ConfigurationError(
                f"antenna demand top {hi} exceeds antennas_per_bs={self.antennas_per_bs}"
            )

    @property
    def donor_id(self) -> int:
        return 0

    @property
    def bs_ids(self) -> range:
        return range(1, self.num_bs + 1)

    @property
    def ue_ids(self) -> range:
        return range(self.num_bs + 1, self.num_bs + self.num_ue + 1)

    @property
    def num_nodes(self) -> int:
        return 1 + self.num_bs + self.num_ue


DEFAULT_SCENARIO = ScenarioConfig()


def _build_nodes(config: ScenarioConfig) -> tuple[Node, ...]:
    nodes = [Node(0, NodeKind.DONOR, config.antennas_per_bs)]
    nodes += [Node(i, NodeKind.BASE_STATION, config.antennas_per_bs) for i in config.bs_ids]
    nodes += [Node(i, NodeKind.USER_EQUIPMENT, 1) for i in config.ue_ids]
    return tuple(nodes)


def generate_snapshot(rng, config: ScenarioConfig, interval_index: int) -> TopologySnapshot:
    """One candidate-link snapshot: hub infrastructure links plus UE associations.

    BS1 keeps a link to the donor and to every other BS; each UE associates
    with one uniformly random BS. All weights are uniform on [0,1].
    """
    links = []
    links.append(LinkCandidate(0, 1, 0, float(rng.uniform()), INFRASTRUCTURE))
    for j in range(2, config.num_bs + 1):
        links.append(LinkCandidate(len(links), 1, j, float(rng.uniform()), INFRASTRUCTURE))
    for ue in config.ue_ids:
        bs = int(rng.integers(1, config.num_bs + 1))
        links.append(LinkCandidate(len(links), ue, bs, float(rng.uniform()), ACCESS))
    return TopologySnapshot(interval_index, _build_nodes(config), tuple(links))


def sample_slice_profiles(rng, config: ScenarioConfig, interval_index: int) -> tuple[SliceProfile, ...]:
    """The hub's three per-slice demands for one interval, normalized to [0,1]."""
    profiles = []
    for kind in SLICE_ORDER:
        lo, hi = config.band_ranges_mb[kind]
        raw_mb = float(rng.uniform(lo, hi))
        ant_lo, ant_hi = config.antenna_demand_range
        raw_antennas = int(rng.integers(ant_lo, ant_hi + 1))
        profiles.append(
            SliceProfile(
                interval_index,
                bs=1,
                slice_kind=kind,
                band_demand=raw_mb / config.cap_mb,
                antenna_demand=raw_antennas / config.antennas_per_bs,
            )
        )
    return tuple(profiles)


def generate_day(seed: int, config: ScenarioConfig = DEFAULT_SCENARIO) -> DayTrace:
    """96 snapshots plus slice profiles; identical output for identical inputs."""
    config.validate()
    if not 0 <= seed <= _SEED_MASK:
        raise ConfigurationError("seed must fit in 64 bits")
    rng = np.random.default_rng(seed)
    snapshots = []
    profiles = []
    for t in range(INTERVALS_PER_DAY):
        snapshots.append(generate_snapshot(rng, config, t))
        profiles.append(sample_slice_profiles(rng, config, t))
    return DayTrace(seed, tuple(snapshots), tuple(profiles))


def derive_seed(base_seed: int, index: int) -> int:
    """Stable 64-bit child seed for stream index `index`."""
    ss = np.random.SeedSequence((base_seed & _SEED_MASK, index))
    return int(ss.generate_state(1, np.uint64)[0])


def day_stream(base_seed: int, config: ScenarioConfig = DEFAULT_SCENARIO) -> Iterator[DayTrace]:
    """Endless stream of independent days derived from one base seed."""
    index = 0
    while True:
        yield generate_day(derive_seed(base_seed, index), config)
        index += 1


def residual_load(snapshot: TopologySnapshot, schedule: "ScheduleResult", rng=None) -> LoadProfile:
    """Per-BS bandwidth and antenna fractions left over after scheduling.

    Antenna residual is the unused share of the node budget; band residual
    is one minus the (clamped) sum of activated incident link weights. The
    rng argument is accepted for interface stability and not consumed.
    """
    by_id = {link.link_id: link for link in snapshot.links}
    for link_id in schedule.activated:
        if link_id not in by_id:
            raise ConsistencyError(f"schedule references unknown link {link_id}")
    for node_id in schedule.antenna_usage:
        if node_id >= len(snapshot.nodes):
            raise ConsistencyError(f"schedule references unknown node {node_id}")
    bands: dict[int, float] = {}
    antennas: dict[int, float] = {}
    for node in snapshot.nodes:
        if node.kind != NodeKind.BASE_STATION:
            continue
        used = schedule.antenna_usage.get(node.node_id, 0)
        antennas[node.node_id] = (node.antenna_budget - min(used, node.antenna_budget)) / node.antenna_budget
        incident = sum(
            by_id[link_id].weight
            for link_id in schedule.activated
            if by_id[link_id].src == node.node_id or by_id[link_id].dst == node.node_id
        )
        bands[node.node_id] = 1.0 - min(1.0, incident)
    return LoadProfile(snapshot.interval_index, bands, antennas)


def validate_snapshot(snapshot: TopologySnapshot) -> list[str]:
    """All invariant violations in one pass; empty list means valid."""
    problems: list[str] = []
    nodes = snapshot.nodes
    ids = [n.node_id for n in nodes]
    if ids != list(range(len(nodes))):
        problems.append("node ids are not dense from 0")
        return problems

    bs_ids = {n.node_id for n in nodes if n.kind == NodeKind.BASE_STATION}
    ue_ids = {n.node_id for n in nodes if n.kind == NodeKind.USER_EQUIPMENT}
    infra_ids = bs_ids | {n.node_id for n in nodes if n.kind == NodeKind.DONOR}

    link_ids = [link.link_id for link in snapshot.links]
    if sorted(link_ids) != list(range(len(snapshot.links))):
        problems.append("link ids are not unique and dense from 0")

    for node in nodes:
        if node.antenna_budget < 1:
            problems.append(f"node {node.node_id} has antenna budget {node.antenna_budget}")

    pairs = set()
    for link in snapshot.links:
        if link.src == link.dst:
            problems.append(f"link {link.link_id} is a self-loop")
        if not (0 <= link.src < len(nodes) and 0 <= link.dst < len(nodes)):
            problems.append(f"link {link.link_id} references unknown nodes")
            continue
        if not 0.0 <= link.weight <= 1.0:
            problems.append(f"link {link.link_id} weight {link.weight} outside [0,1]")
        both_infra = link.src in infra_ids and link.dst in infra_ids
        if (link.link_type == INFRASTRUCTURE) != both_infra:
            problems.append(f"link {link.link_id} type {link.link_type} mismatches endpoints")
        pairs.add(frozenset((link.src, link.dst)))

    if bs_ids:
        hub = min(bs_ids)
        if frozenset((hub, 0)) not in pairs:
            problems.append("missing hub-to-donor link")
        for j in sorted(bs_ids - {hub}):
            if frozenset((hub, j)) not in pairs:
                problems.append(f"missing hub link to BS{j}")

    for ue in sorted(ue_ids):
        assoc = [
            link for link in snapshot.links
            if link.link_type == ACCESS and ue in (link.src, link.dst)
        ]
        if len(assoc) != 1:
            problems.append(f"UE {ue} has {len(assoc)} association links, expected 1")
        elif not ({assoc[0].src, assoc[0].dst} - {ue}) <= bs_ids:
            problems.append(f"UE {ue} associates with a non-BS node")

    return problems
