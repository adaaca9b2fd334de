"""Day-trace file format round trips."""

import pytest

from iabsim.errors import TraceFormatError
from iabsim.network import ScenarioConfig, generate_day
from iabsim.traceio import format_trace, parse_trace, read_trace, write_trace


def test_header_lines():
    day = generate_day(42)
    text = format_trace(day, 25000, 14)
    lines = text.splitlines()
    assert lines[0] == "#seed=42"
    assert lines[1] == "#cap_mb=25000"
    assert lines[2] == "#K=14"
    assert lines[3] == "T 0"


def test_file_round_trip_is_byte_exact(tmp_path):
    day = generate_day(42)
    p1, p2 = tmp_path / "a.trace", tmp_path / "b.trace"
    write_trace(day, 25000, 14, p1)
    parsed, header = read_trace(p1)
    write_trace(parsed, header.cap_mb, header.antennas_per_bs, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_parse_recovers_structure():
    day = generate_day(9)
    parsed, header = parse_trace(format_trace(day, 25000, 14))
    assert header.seed == 9
    assert len(parsed.snapshots) == 96
    for orig, back in zip(day.snapshots, parsed.snapshots):
        assert len(orig.links) == len(back.links)
        assert orig.nodes == back.nodes
        for a, b in zip(orig.links, back.links):
            assert (a.link_id, a.src, a.dst, a.link_type) == (b.link_id, b.src, b.dst, b.link_type)
            assert b.weight == pytest.approx(a.weight, abs=5e-7)
    for orig_profiles, back_profiles in zip(day.slice_profiles, parsed.slice_profiles):
        for a, b in zip(orig_profiles, back_profiles):
            assert a.slice_kind == b.slice_kind
            assert b.band_demand == pytest.approx(a.band_demand, abs=5e-7)
            assert b.antenna_demand == pytest.approx(a.antenna_demand, abs=5e-7)


def test_round_trip_with_custom_scenario(tmp_path):
    cfg = ScenarioConfig(num_bs=3, num_ue=0, antennas_per_bs=12, antenna_demand_range=(1, 10))
    day = generate_day(5, cfg)
    path = tmp_path / "d.trace"
    write_trace(day, cfg.cap_mb, cfg.antennas_per_bs, path)
    parsed, header = read_trace(path)
    assert header.antennas_per_bs == 12
    assert parsed.snapshots[0].nodes == day.snapshots[0].nodes


def test_truncated_day_rejected():
    day = generate_day(3)
    text = format_trace(day, 25000, 14)
    cut = "\n".join(text.splitlines()[:40]) + "\n"
    with pytest.raises(TraceFormatError, match="96"):
        parse_trace(cut)


def test_bad_header_rejected():
    with pytest.raises(TraceFormatError, match="header"):
        parse_trace("#seed=1\n#wrong=2\n#K=14\n")


def test_malformed_record_rejected():
    day = generate_day(3)
    lines = format_trace(day, 25000, 14).splitlines()
    lines[5] = "L not numbers here x y"
    with pytest.raises(TraceFormatError, match="line 6"):
        parse_trace("\n".join(lines) + "\n")


def test_unknown_tag_rejected():
    day = generate_day(3)
    lines = format_trace(day, 25000, 14).splitlines()
    lines.insert(4, "Z 1 2 3")
    with pytest.raises(TraceFormatError, match="tag"):
        parse_trace("\n".join(lines) + "\n")
