"""Greedy link scheduling under per-node antenna budgets.

The deterministic oracle activates candidates in rank order (-weight, type,
id). The learned agent walks the same decision process but picks the next
link by Q-value; every real link is processed exactly once per episode and
is activated only if both endpoints still have antenna budget, so the
step rewards sum exactly to the episode's schedule reward.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from . import dqn
from .dqn import (
    AdamState,
    EpsilonSchedule,
    QNetwork,
    ReplayBuffer,
    TrainConfig,
    Transition,
)
from .errors import CapacityError, NumericError, ShapeError
from .network import DayTrace, LinkCandidate, NodeKind, TopologySnapshot

DEFAULT_MAX_LINKS = 32
HIDDEN_UNITS = (32, 32)


@dataclass(frozen=True)
class ScheduleResult:
    activated: frozenset[int]
    assigned_weight: dict[int, float]
    antenna_usage: dict[int, int]


def rank_key(link: LinkCandidate) -> tuple[float, int]:
    """Ascending sort order = scheduling priority; ids break exact ties."""
    return (-link.weight, link.link_type)


def encode_state(snapshot: TopologySnapshot, max_links: int = DEFAULT_MAX_LINKS) -> np.ndarray:
    """(max_links, 2) matrix of (weight, type) rows; padding rows are (0, 1)."""
    n = len(snapshot.links)
    if n > max_links:
        raise CapacityError(f"snapshot has {n} links, state holds at most {max_links}")
    state = np.zeros((max_links, 2))
    state[:, 1] = 1.0
    for link in snapshot.links:
        state[link.link_id, 0] = link.weight
        state[link.link_id, 1] = float(link.link_type)
    return state


def flatten_state(state: np.ndarray) -> np.ndarray:
    return state.reshape(-1).copy()


def _budgets(snapshot: TopologySnapshot, antennas_per_bs: int | None) -> dict[int, int]:
    budgets = {}
    for node in snapshot.nodes:
        if antennas_per_bs is not None and node.kind != NodeKind.USER_EQUIPMENT:
            budgets[node.node_id] = antennas_per_bs
        else:
            budgets[node.node_id] = node.antenna_budget
    return budgets


def oracle_schedule(snapshot: TopologySnapshot, antennas_per_bs: int | None = None) -> ScheduleResult:
    """Activate links in rank order while both endpoints have budget left."""
    budgets = _budgets(snapshot, antennas_per_bs)
    usage = {node.node_id: 0 for node in snapshot.nodes}
    activated = set()
    assigned = {}
    for link in sorted(snapshot.links, key=lambda l: rank_key(l) + (l.link_id,)):
        if usage[link.src] < budgets[link.src] and usage[link.dst] < budgets[link.dst]:
            usage[link.src] += 1
            usage[link.dst] += 1
            activated.add(link.link_id)
            assigned[link.link_id] = link.weight
    return ScheduleResult(frozenset(activated), assigned, usage)


def schedule_reward(snapshot: TopologySnapshot, result: ScheduleResult) -> float:
    """Sum over real links of 1 - (weight - assigned_weight)^2."""
    total = 0.0
    for link in snapshot.links:
        assigned = result.assigned_weight.get(link.link_id, 0.0)
        total += 1.0 - (link.weight - assigned) ** 2
    return total


class _Episode:
    """Stepwise scheduling of one snapshot, shared by rollout and training."""

    def __init__(self, snapshot, antennas_per_bs, max_links):
        self.snapshot = snapshot
        self.links = {link.link_id: link for link in snapshot.links}
        self.state = encode_state(snapshot, max_links)
        self.budgets = _budgets(snapshot, antennas_per_bs)
        self.usage = {node.node_id: 0 for node in snapshot.nodes}
        self.pending = [link.link_id for link in snapshot.links]
        self.activated: set[int] = set()
        self.assigned: dict[int, float] = {}

    def done(self) -> bool:
        return not self.pending

    def select(self, net: QNetwork, epsilon: float, rng) -> int:
        if epsilon > 0.0 and rng is not None and rng.random() < epsilon:
            return self.pending[int(rng.integers(len(self.pending)))]
        q = dqn.mlp_forward(net, flatten_state(self.state))
        return min(self.pending, key=lambda i: (-q[i], i))

    def step(self, link_id: int) -> Transition:
        """Process one link: activate it if feasible, then zero its row."""
        link = self.links[link_id]
        before = flatten_state(self.state)
        feasible = (
            self.usage[link.src] < self.budgets[link.src]
            and self.usage[link.dst] < self.budgets[link.dst]
        )
        if feasible:
            self.usage[link.src] += 1
            self.usage[link.dst] += 1
            self.activated.add(link_id)
            self.assigned[link_id] = link.weight
            reward = 1.0
        else:
            reward = 1.0 - link.weight**2
        self.pending.remove(link_id)
        self.state[link_id, :] = 0.0
        return Transition(before, link_id, reward, flatten_state(self.state), self.done())

    def result(self) -> ScheduleResult:
        return ScheduleResult(frozenset(self.activated), dict(self.assigned), dict(self.usage))


def agent_schedule(
    net: QNetwork,
    snapshot: TopologySnapshot,
    antennas_per_bs: int | None = None,
    epsilon: float = 0.0,
    rng=None,
    max_links: int = DEFAULT_MAX_LINKS,
) -> tuple[ScheduleResult, list[Transition]]:
    """Roll the epsilon-greedy policy over one snapshot."""
    if net.input_dim != 2 * max_links or net.output_dim != max_links:
        raise ShapeError(
            f"network dims {net.layer_dims} do not match max_links={max_links}"
        )
    episode = _Episode(snapshot, antennas_per_bs, max_links)
    transitions = []
    while not episode.done():
        transitions.append(episode.step(episode.select(net, epsilon, rng)))
    return episode.result(), transitions


def snapshot_stream(days: Iterable[DayTrace]) -> Iterator[TopologySnapshot]:
    for day in days:
        yield from day.snapshots


def train_scheduler(
    cfg: TrainConfig,
    schedule: EpsilonSchedule,
    days: Iterable[DayTrace],
    max_links: int = DEFAULT_MAX_LINKS,
) -> tuple[QNetwork, list[float]]:
    """One episode per snapshot; one gradient step per processed link.

    The exploration rate decays per episode; the target network syncs every
    cfg.target_sync_interval environment steps. Returns the trained online
    network and the per-episode reward series.
    """
    rng = np.random.default_rng(cfg.seed)
    online = QNetwork.create((2 * max_links, *HIDDEN_UNITS, max_links), rng)
    target = online.copy()
    adam = AdamState.for_network(online)
    buffer = ReplayBuffer()
    snapshots = snapshot_stream(days)
    rewards = []
    env_step = 0
    for ep in range(cfg.episodes):
        snapshot = next(snapshots)
        epsilon = dqn.epsilon_at(schedule, ep)
        episode = _Episode(snapshot, None, max_links)
        while not episode.done():
            buffer.push(episode.step(episode.select(online, epsilon, rng)))
            env_step += 1
            if len(buffer) >= cfg.batch_size:
                try:
                    dqn.train_on_batch(online, target, buffer.sample(cfg.batch_size, rng), cfg, adam)
                except NumericError as exc:
                    raise NumericError(f"training diverged in episode {ep}: {exc}") from exc
            if env_step % cfg.target_sync_interval == 0:
                dqn.sync_target(online, target)
        rewards.append(schedule_reward(snapshot, episode.result()))
    return online, rewards


@dataclass(frozen=True)
class SnapshotEvaluation:
    interval_index: int
    links: int
    activated_agent: int
    activated_oracle: int
    matches: int
    reward_agent: float
    reward_oracle: float
    infer_seconds: float


def evaluate_against_oracle(
    net: QNetwork,
    snapshots: Iterable[TopologySnapshot],
    max_links: int = DEFAULT_MAX_LINKS,
) -> list[SnapshotEvaluation]:
    """Greedy-policy activation sets versus the rank oracle, with timing."""
    rows = []
    for snapshot in snapshots:
        start = time.perf_counter()
        agent_result, _ = agent_schedule(net, snapshot, max_links=max_links)
        elapsed = time.perf_counter() - start
        oracle_result = oracle_schedule(snapshot)
        matches = sum(
            (link.link_id in agent_result.activated) == (link.link_id in oracle_result.activated)
            for link in snapshot.links
        )
        rows.append(
            SnapshotEvaluation(
                snapshot.interval_index,
                len(snapshot.links),
                len(agent_result.activated),
                len(oracle_result.activated),
                matches,
                schedule_reward(snapshot, agent_result),
                schedule_reward(snapshot, oracle_result),
                elapsed,
            )
        )
    return rows


def accuracy_summary(rows: list[SnapshotEvaluation]) -> tuple[float, float]:
    """(per-link agreement fraction, mean inference seconds per graph)."""
    total_links = sum(row.links for row in rows)
    total_matches = sum(row.matches for row in rows)
    mean_seconds = sum(row.infer_seconds for row in rows) / len(rows)
    return total_matches / total_links, mean_seconds


def accuracy(
    net: QNetwork,
    snapshots: Iterable[TopologySnapshot],
    max_links: int = DEFAULT_MAX_LINKS,
) -> tuple[float, float]:
    return accuracy_summary(evaluate_against_oracle(net, snapshots, max_links))
