"""Topology generation, slice sampling, residual loads, validation."""

import numpy as np
import pytest

from iabsim import network
from iabsim.errors import ConfigurationError, ConsistencyError
from iabsim.network import (
    ACCESS,
    INFRASTRUCTURE,
    DayTrace,
    LinkCandidate,
    Node,
    NodeKind,
    ScenarioConfig,
    SliceKind,
    TopologySnapshot,
    day_stream,
    derive_seed,
    generate_day,
    generate_snapshot,
    residual_load,
    sample_slice_profiles,
    validate_snapshot,
)
from iabsim.scheduling import ScheduleResult, oracle_schedule


class TestGenerateDay:
    def test_default_scenario_counts(self):
        day = generate_day(42)
        assert len(day.snapshots) == 96
        assert all(len(s.nodes) == 18 for s in day.snapshots)
        assert all(len(day.slice_profiles[t]) == 3 for t in range(96))

    def test_same_seed_reproduces_trace(self):
        assert generate_day(42) == generate_day(42)

    def test_distinct_seeds_differ(self):
        assert generate_day(1) != generate_day(2)

    def test_mandatory_infrastructure_links_every_snapshot(self):
        day = generate_day(42)
        for snapshot in day.snapshots:
            infra_pairs = {
                frozenset((l.src, l.dst))
                for l in snapshot.links
                if l.link_type == INFRASTRUCTURE
            }
            assert frozenset((1, 0)) in infra_pairs
            for j in range(2, 8):
                assert frozenset((1, j)) in infra_pairs

    def test_zero_bs_config_rejected(self):
        with pytest.raises(ConfigurationError):
            generate_day(1, ScenarioConfig(num_bs=0))

    def test_cap_below_demand_range_rejected(self):
        with pytest.raises(ConfigurationError):
            generate_day(1, ScenarioConfig(cap_mb=10000))

    def test_antenna_budget_below_demand_range_rejected(self):
        with pytest.raises(ConfigurationError):
            generate_day(1, ScenarioConfig(antennas_per_bs=9))

    def test_determinism_property_over_seeds(self):
        for seed in range(10):
            first = generate_day(seed)
            second = generate_day(seed)
            assert first == second

    def test_every_snapshot_validates(self):
        day = generate_day(7)
        for snapshot in day.snapshots:
            assert validate_snapshot(snapshot) == []


class TestGenerateSnapshot:
    def test_default_link_counts(self):
        rng = np.random.default_rng(0)
        snap = generate_snapshot(rng, ScenarioConfig(), 0)
        types = [l.link_type for l in snap.links]
        assert len(snap.links) == 17
        assert types.count(INFRASTRUCTURE) == 7
        assert types.count(ACCESS) == 10

    def test_no_ue_degenerate_case(self):
        rng = np.random.default_rng(0)
        snap = generate_snapshot(rng, ScenarioConfig(num_ue=0), 5)
        assert len(snap.links) == 7
        assert all(l.link_type == INFRASTRUCTURE for l in snap.links)
        assert validate_snapshot(snap) == []

    def test_weights_in_unit_interval(self):
        rng = np.random.default_rng(3)
        for t in range(20):
            snap = generate_snapshot(rng, ScenarioConfig(), t)
            assert all(0.0 <= l.weight <= 1.0 for l in snap.links)

    def test_weight_mean_over_1000_links(self):
        rng = np.random.default_rng(4)
        weights = []
        t = 0
        while len(weights) < 1000:
            weights += [l.weight for l in generate_snapshot(rng, ScenarioConfig(), t).links]
            t += 1
        mean = float(np.mean(weights[:1000]))
        assert 0.45 <= mean <= 0.55

    def test_link_ids_dense(self):
        rng = np.random.default_rng(5)
        snap = generate_snapshot(rng, ScenarioConfig(), 0)
        assert [l.link_id for l in snap.links] == list(range(17))

    def test_ue_budget_is_one(self):
        rng = np.random.default_rng(6)
        snap = generate_snapshot(rng, ScenarioConfig(), 0)
        for node in snap.nodes:
            if node.kind == NodeKind.USER_EQUIPMENT:
                assert node.antenna_budget == 1
            else:
                assert node.antenna_budget == 14


class TestSliceProfiles:
    def test_normalization_against_cap(self):
        # raw eMBB draw of 20000 MB against a 25000 MB cap gives 0.8
        cfg = ScenarioConfig()
        assert 20000 / cfg.cap_mb == pytest.approx(0.8)
        assert 500 / cfg.cap_mb == pytest.approx(0.02)
        assert 7 / cfg.antennas_per_bs == pytest.approx(0.5)

    def test_demands_denormalize_into_table_ranges(self):
        cfg = ScenarioConfig()
        rng = np.random.default_rng(8)
        for t in range(200):
            for profile in sample_slice_profiles(rng, cfg, t):
                lo, hi = cfg.band_ranges_mb[profile.slice_kind]
                raw = profile.band_demand * cfg.cap_mb
                assert lo - 1e-9 <= raw <= hi + 1e-9
                raw_antennas = profile.antenna_demand * cfg.antennas_per_bs
                assert round(raw_antennas) == pytest.approx(raw_antennas, abs=1e-9)
                assert 1 <= round(raw_antennas) <= 10

    def test_profiles_are_for_hub(self):
        rng = np.random.default_rng(9)
        profiles = sample_slice_profiles(rng, ScenarioConfig(), 3)
        assert [p.slice_kind for p in profiles] == list(network.SLICE_ORDER)
        assert all(p.bs == 1 and p.interval_index == 3 for p in profiles)

    def test_demands_in_unit_interval(self):
        rng = np.random.default_rng(10)
        for t in range(100):
            for p in sample_slice_profiles(rng, ScenarioConfig(), t):
                assert 0.0 <= p.band_demand <= 1.0
                assert 0.0 <= p.antenna_demand <= 1.0


class TestResidualLoad:
    def snapshot(self):
        return generate_day(11).snapshots[0]

    def test_empty_schedule_gives_full_residuals(self):
        snap = self.snapshot()
        load = residual_load(snap, ScheduleResult(frozenset(), {}, {}))
        assert all(v == 1.0 for v in load.residual_band.values())
        assert all(v == 1.0 for v in load.residual_antennas.values())

    def test_saturated_bs_has_zero_antenna_residual(self):
        snap = self.snapshot()
        usage = {node.node_id: 0 for node in snap.nodes}
        usage[3] = 14
        load = residual_load(snap, ScheduleResult(frozenset(), {}, usage))
        assert load.residual_antennas[3] == 0.0

    def test_band_residual_formula(self):
        # one activated incident link of weight 0.3 leaves 0.7
        nodes = (
            Node(0, NodeKind.DONOR, 14),
            Node(1, NodeKind.BASE_STATION, 14),
            Node(2, NodeKind.BASE_STATION, 14),
        )
        links = (
            LinkCandidate(0, 1, 0, 0.3, INFRASTRUCTURE),
            LinkCandidate(1, 1, 2, 0.4, INFRASTRUCTURE),
        )
        snap = TopologySnapshot(0, nodes, links)
        schedule = ScheduleResult(frozenset({0}), {0: 0.3}, {0: 1, 1: 1})
        load = residual_load(snap, schedule)
        assert load.residual_band[1] == pytest.approx(0.7)
        assert load.residual_band[2] == 1.0

    def test_band_residual_clamped(self):
        snap = self.snapshot()
        result = oracle_schedule(snap)
        load = residual_load(snap, result)
        for value in load.residual_band.values():
            assert 0.0 <= value <= 1.0
        for value in load.residual_antennas.values():
            assert 0.0 <= value <= 1.0

    def test_mismatched_schedule_rejected(self):
        snap = self.snapshot()
        bogus = ScheduleResult(frozenset({99}), {99: 0.5}, {})
        with pytest.raises(ConsistencyError):
            residual_load(snap, bogus)

    def test_covers_all_base_stations(self):
        snap = self.snapshot()
        load = residual_load(snap, oracle_schedule(snap))
        assert sorted(load.residual_band) == list(range(1, 8))
        assert sorted(load.residual_antennas) == list(range(1, 8))


class TestValidateSnapshot:
    def test_generated_snapshot_is_valid(self):
        assert validate_snapshot(generate_day(12).snapshots[0]) == []

    def test_missing_donor_link_flagged(self):
        snap = generate_day(12).snapshots[0]
        links = tuple(l for l in snap.links if frozenset((l.src, l.dst)) != frozenset((0, 1)))
        links = tuple(
            LinkCandidate(i, l.src, l.dst, l.weight, l.link_type) for i, l in enumerate(links)
        )
        broken = TopologySnapshot(snap.interval_index, snap.nodes, links)
        problems = validate_snapshot(broken)
        assert len(problems) == 1
        assert "donor" in problems[0]

    def test_out_of_range_weight_flagged(self):
        snap = generate_day(12).snapshots[0]
        links = list(snap.links)
        links[3] = LinkCandidate(3, links[3].src, links[3].dst, 1.5, links[3].link_type)
        problems = validate_snapshot(TopologySnapshot(0, snap.nodes, tuple(links)))
        assert len(problems) == 1
        assert "weight" in problems[0]

    def test_duplicate_link_ids_flagged(self):
        snap = generate_day(12).snapshots[0]
        links = list(snap.links)
        links[1] = LinkCandidate(0, links[1].src, links[1].dst, links[1].weight, links[1].link_type)
        problems = validate_snapshot(TopologySnapshot(0, snap.nodes, tuple(links)))
        assert any("link ids" in p for p in problems)

    def test_ue_with_two_associations_flagged(self):
        snap = generate_day(12).snapshots[0]
        extra = LinkCandidate(17, 8, 2, 0.5, ACCESS)
        problems = validate_snapshot(TopologySnapshot(0, snap.nodes, snap.links + (extra,)))
        assert any("UE 8" in p for p in problems)

    def test_type_mismatch_flagged(self):
        snap = generate_day(12).snapshots[0]
        links = list(snap.links)
        links[0] = LinkCandidate(0, links[0].src, links[0].dst, links[0].weight, ACCESS)
        problems = validate_snapshot(TopologySnapshot(0, snap.nodes, tuple(links)))
        assert any("type" in p for p in problems)


class TestSeedDerivation:
    def test_derive_seed_stable(self):
        assert derive_seed(1, 0) == derive_seed(1, 0)
        assert derive_seed(1, 0) != derive_seed(1, 1)
        assert derive_seed(1, 0) != derive_seed(2, 0)

    def test_day_stream_deterministic(self):
        a = [day.seed for _, day in zip(range(3), day_stream(5))]
        b = [day.seed for _, day in zip(range(3), day_stream(5))]
        assert a == b
