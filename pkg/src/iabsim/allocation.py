"""Per-slice bandwidth and antenna borrowing for the congested hub.

Each 15-minute interval, two agents act per slice in the fixed order eMBB,
uRLLC, eMTC: one picks the base station that lends bandwidth, the other the
one that lends antennas. A selected station grants its full residual for
that resource and is drained; the reward 1 - (granted - demand)^2 favors
grants that match the slice demand.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

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
from .errors import ActionError, ConsistencyError, NumericError, ShapeError
from .network import DayTrace, LoadProfile, SliceKind, SliceProfile

HIDDEN_UNITS = 64
DEFAULT_TRAIN_PASSES = 1
_LOAD_STREAM_TAG = 0x4C4F4144  # distinguishes the load stream from the day stream
_HUB_BAND_CENTER = 0.05
_NEIGHBOR_BAND_SPAN = (0.15, 0.90)
_BAND_JITTER = 0.05


class ResourceKind(enum.Enum):
    BANDWIDTH = "band"
    ANTENNA = "antenna"


@dataclass(frozen=True)
class AllocationDecision:
    interval: int
    slice_kind: SliceKind
    resource: ResourceKind
    chosen_bs: int
    demand: float
    granted: float
    reward: float


def observation_size(num_bs: int) -> int:
    return 2 + 2 * num_bs


def build_observation(profile: SliceProfile, load: LoadProfile) -> np.ndarray:
    """[band demand, antenna demand, per-BS band residuals, per-BS antenna residuals]."""
    bs_ids = sorted(load.residual_band)
    if bs_ids != sorted(load.residual_antennas) or not bs_ids:
        raise ConsistencyError("load profile must cover the same BS set for both resources")
    if bs_ids != list(range(1, len(bs_ids) + 1)):
        raise ConsistencyError(f"load profile BS ids {bs_ids} are not 1..{len(bs_ids)}")
    obs = np.empty(observation_size(len(bs_ids)))
    obs[0] = profile.band_demand
    obs[1] = profile.antenna_demand
    for i, bs in enumerate(bs_ids):
        obs[2 + i] = load.residual_band[bs]
        obs[2 + len(bs_ids) + i] = load.residual_antennas[bs]
    return obs


def apply_action(
    load: LoadProfile, bs: int, resource: ResourceKind, demand: float
) -> tuple[float, LoadProfile]:
    """Grant the chosen BS's full residual for the resource and drain it."""
    residuals = load.residual_band if resource == ResourceKind.BANDWIDTH else load.residual_antennas
    if bs not in residuals:
        raise ActionError(f"BS {bs} is outside the action set {sorted(residuals)}")
    granted = residuals[bs]
    updated = dict(residuals)
    updated[bs] = 0.0
    if resource == ResourceKind.BANDWIDTH:
        new_load = LoadProfile(load.interval_index, updated, dict(load.residual_antennas))
    else:
        new_load = LoadProfile(load.interval_index, dict(load.residual_band), updated)
    return granted, new_load


def allocation_reward(granted: float, demand: float) -> float:
    return 1.0 - (granted - demand) ** 2


def band_load_centers(num_bs: int) -> dict[int, float]:
    """Characteristic bandwidth residual per station.

    The hub stays congested; neighbors span an even utilization ladder, so
    some station is always close to any slice demand.
    """
    centers = {1: _HUB_BAND_CENTER}
    lo, hi = _NEIGHBOR_BAND_SPAN
    for j in range(2, num_bs + 1):
        frac = (j - 2) / max(1, num_bs - 2)
        centers[j] = lo + (hi - lo) * frac
    return centers


def antenna_load_counts(num_bs: int, antennas_per_bs: int = 14, max_demand: int = 10) -> dict[int, int]:
    """Characteristic idle-antenna count per station, spread over the demand
    range; counts stay integral like the demands they serve."""
    counts = {}
    for j in range(1, num_bs + 1):
        frac = (j - 1) / max(1, num_bs - 1)
        counts[j] = min(antennas_per_bs, int(1 + (max_demand - 1) * frac))
    return counts


def draw_interval_load(rng, num_bs: int, interval_index: int, antennas_per_bs: int = 14) -> LoadProfile:
    """One interval's post-scheduling residuals around the station profiles.

    Bandwidth residuals jitter around each station's center; antenna
    residuals are the station's idle-antenna count normalized by the budget.
    """
    centers = band_load_centers(num_bs)
    counts = antenna_load_counts(num_bs, antennas_per_bs)
    band = {
        bs: min(1.0, max(0.0, centers[bs] + float(rng.uniform(-_BAND_JITTER, _BAND_JITTER))))
        for bs in range(1, num_bs + 1)
    }
    antennas = {bs: counts[bs] / antennas_per_bs for bs in range(1, num_bs + 1)}
    return LoadProfile(interval_index, band, antennas)


def day_loads(day: DayTrace, num_bs: int, antennas_per_bs: int = 14) -> list[LoadProfile]:
    """The day's 96 interval load profiles, derived only from the day seed."""
    rng = np.random.default_rng(np.random.SeedSequence((day.seed, _LOAD_STREAM_TAG)))
    return [
        draw_interval_load(rng, num_bs, t, antennas_per_bs)
        for t in range(len(day.snapshots))
    ]


def _select_bs(net: QNetwork, obs: np.ndarray, num_bs: int, epsilon: float, rng) -> int:
    if net.input_dim != obs.shape[0] or net.output_dim != num_bs:
        raise ShapeError(
            f"network dims {net.layer_dims} do not match observation size "
            f"{obs.shape[0]} and {num_bs} actions"
        )
    if epsilon > 0.0 and rng is not None and rng.random() < epsilon:
        return int(rng.integers(num_bs)) + 1
    q = dqn.mlp_forward(net, obs)
    return min(range(1, num_bs + 1), key=lambda bs: (-q[bs - 1], bs))


def run_interval(
    band_net: QNetwork,
    antenna_net: QNetwork,
    slices: Sequence[SliceProfile],
    load: LoadProfile,
    epsilon: float,
    rng=None,
) -> tuple[list[AllocationDecision], list[Transition], list[Transition]]:
    """Process one interval's slices in order; band agent acts before the
    antenna agent on every slice, each on an observation reflecting all
    prior consumption. The last decision per agent is terminal."""
    num_bs = len(load.residual_band)
    decisions: list[AllocationDecision] = []
    band_transitions: list[Transition] = []
    antenna_transitions: list[Transition] = []
    band_pending = None
    antenna_pending = None

    for profile in slices:
        band_obs = build_observation(profile, load)
        if band_pending is not None:
            band_transitions.append(Transition(*band_pending, band_obs, False))
        bs = _select_bs(band_net, band_obs, num_bs, epsilon, rng)
        granted, load = apply_action(load, bs, ResourceKind.BANDWIDTH, profile.band_demand)
        reward = allocation_reward(granted, profile.band_demand)
        decisions.append(
            AllocationDecision(
                load.interval_index, profile.slice_kind, ResourceKind.BANDWIDTH,
                bs, profile.band_demand, granted, reward,
            )
        )
        band_pending = (band_obs, bs - 1, reward)

        antenna_obs = build_observation(profile, load)
        if antenna_pending is not None:
            antenna_transitions.append(Transition(*antenna_pending, antenna_obs, False))
        bs = _select_bs(antenna_net, antenna_obs, num_bs, epsilon, rng)
        granted, load = apply_action(load, bs, ResourceKind.ANTENNA, profile.antenna_demand)
        reward = allocation_reward(granted, profile.antenna_demand)
        decisions.append(
            AllocationDecision(
                load.interval_index, profile.slice_kind, ResourceKind.ANTENNA,
                bs, profile.antenna_demand, granted, reward,
            )
        )
        antenna_pending = (antenna_obs, bs - 1, reward)

    final_obs = build_observation(slices[-1], load)
    band_transitions.append(Transition(*band_pending, final_obs, True))
    antenna_transitions.append(Transition(*antenna_pending, final_obs, True))
    return decisions, band_transitions, antenna_transitions


def oracle_allocation(
    demands: Sequence[float], residuals: Sequence[float]
) -> tuple[tuple[int, ...], float]:
    """Exhaustive search over every ordered BS assignment with consumption.

    Returns 1-based choices maximizing the summed reward; exact ties go to
    the lexicographically smallest tuple.
    """
    n = len(residuals)
    best_choice = None
    best_total = -np.inf
    for choice in product(range(n), repeat=len(demands)):
        remaining = list(residuals)
        total = 0.0
        for demand, picked in zip(demands, choice):
            granted = remaining[picked]
            remaining[picked] = 0.0
            total += allocation_reward(granted, demand)
        if total > best_total:
            best_total = total
            best_choice = choice
    return tuple(c + 1 for c in best_choice), best_total


def train_allocator(
    cfg: TrainConfig,
    schedule: EpsilonSchedule,
    days: Iterable[DayTrace],
    hidden_layers: int,
    num_bs: int = 7,
    antennas_per_bs: int = 14,
    train_passes: int = DEFAULT_TRAIN_PASSES,
) -> tuple[tuple[QNetwork, QNetwork], tuple[list[float], list[float]]]:
    """Train the bandwidth and antenna agents concurrently.

    One episode is a full day (96 intervals, 3 decisions per agent per
    interval). Exploration decays per episode and each agent's target
    syncs every cfg.target_sync_interval episodes, keeping regression
    targets stationary between syncs. train_passes gradient steps are
    taken per stored transition; short-horizon presets use several passes
    to compensate for the small sample budget at the fixed learning rate.
    Returns both networks and the per-episode reward sums.
    """
    if hidden_layers < 1:
        raise ValueError("hidden_layers must be at least 1")
    if train_passes < 1:
        raise ValueError("train_passes must be at least 1")
    rng = np.random.default_rng(cfg.seed)
    dims = (observation_size(num_bs), *([HIDDEN_UNITS] * hidden_layers), num_bs)
    band_net = QNetwork.create(dims, rng)
    antenna_net = QNetwork.create(dims, rng)
    band_target = band_net.copy()
    antenna_target = antenna_net.copy()
    band_adam = AdamState.for_network(band_net)
    antenna_adam = AdamState.for_network(antenna_net)
    band_buffer = ReplayBuffer()
    antenna_buffer = ReplayBuffer()
    band_curve: list[float] = []
    antenna_curve: list[float] = []
    day_source = iter(days)
    for ep in range(cfg.episodes):
        day = next(day_source)
        loads = day_loads(day, num_bs, antennas_per_bs)
        epsilon = dqn.epsilon_at(schedule, ep)
        band_total = 0.0
        antenna_total = 0.0
        try:
            for profiles, load in zip(day.slice_profiles, loads):
                decisions, band_tr, antenna_tr = run_interval(
                    band_net, antenna_net, profiles, load, epsilon, rng
                )
                for agent_tr, net, target, adam, buffer in (
                    (band_tr, band_net, band_target, band_adam, band_buffer),
                    (antenna_tr, antenna_net, antenna_target, antenna_adam, antenna_buffer),
                ):
                    for tr in agent_tr:
                        buffer.push(tr)
                        if len(buffer) >= cfg.batch_size:
                            for _ in range(train_passes):
                                dqn.train_on_batch(
                                    net, target, buffer.sample(cfg.batch_size, rng), cfg, adam
                                )
                for decision in decisions:
                    if decision.resource == ResourceKind.BANDWIDTH:
                        band_total += decision.reward
                    else:
                        antenna_total += decision.reward
        except NumericError as exc:
            raise NumericError(f"training diverged in episode {ep}: {exc}") from exc
        if (ep + 1) % cfg.target_sync_interval == 0:
            dqn.sync_target(band_net, band_target)
            dqn.sync_target(antenna_net, antenna_target)
        band_curve.append(band_total)
        antenna_curve.append(antenna_total)
    return (band_net, antenna_net), (band_curve, antenna_curve)


def allocate_day(
    band_net: QNetwork,
    antenna_net: QNetwork,
    day: DayTrace,
    num_bs: int = 7,
) -> tuple[list[AllocationDecision], float, float]:
    """Greedy-policy decisions for every interval of one day."""
    decisions: list[AllocationDecision] = []
    band_total = 0.0
    antenna_total = 0.0
    for profiles, load in zip(day.slice_profiles, day_loads(day, num_bs)):
        interval_decisions, _, _ = run_interval(band_net, antenna_net, profiles, load, 0.0)
        decisions.extend(interval_decisions)
        for decision in interval_decisions:
            if decision.resource == ResourceKind.BANDWIDTH:
                band_total += decision.reward
            else:
                antenna_total += decision.reward
    return decisions, band_total, antenna_total
