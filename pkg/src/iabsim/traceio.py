"""Line-oriented day-trace files.

Layout: three header lines (#seed, #cap_mb, #K), then per interval a `T <t>`
line followed by `L <id> <src> <dst> <weight> <type>` candidate lines and
`S <slice> <band> <antennas>` demand lines. Weights and demands are fixed
6-decimal, so a parsed file re-serializes byte-identically.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import TraceFormatError
from .network import (
    ACCESS,
    INFRASTRUCTURE,
    INTERVALS_PER_DAY,
    DayTrace,
    LinkCandidate,
    Node,
    NodeKind,
    SliceKind,
    SliceProfile,
    TopologySnapshot,
)

_SLICE_BY_NAME = {kind.value: kind for kind in SliceKind}


@dataclass(frozen=True)
class TraceHeader:
    seed: int
    cap_mb: int
    antennas_per_bs: int


def format_trace(day: DayTrace, cap_mb: int, antennas_per_bs: int) -> str:
    lines = [f"#seed={day.seed}", f"#cap_mb={cap_mb}", f"#K={antennas_per_bs}"]
    for snapshot, profiles in zip(day.snapshots, day.slice_profiles):
        lines.append(f"T {snapshot.interval_index}")
        for link in snapshot.links:
            lines.append(
                f"L {link.link_id} {link.src} {link.dst} {link.weight:.6f} {link.link_type}"
            )
        for profile in profiles:
            lines.append(
                f"S {profile.slice_kind.value} {profile.band_demand:.6f} {profile.antenna_demand:.6f}"
            )
    return "\n".join(lines) + "\n"


def write_trace(day: DayTrace, cap_mb: int, antennas_per_bs: int, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_trace(day, cap_mb, antennas_per_bs))


def _header_value(line: str, key: str) -> int:
    prefix = f"#{key}="
    if not line.startswith(prefix):
        raise TraceFormatError(f"expected header line '{prefix}<int>', got {line!r}")
    try:
        return int(line[len(prefix):])
    except ValueError as exc:
        raise TraceFormatError(f"bad {key} header: {line!r}") from exc


def _rebuild_nodes(links: list[LinkCandidate], antennas_per_bs: int) -> tuple[Node, ...]:
    """Node roster is implied by the links: the hub reaches every BS, and
    every UE carries exactly one access link."""
    infra_nodes = set()
    ue_nodes = set()
    for link in links:
        if link.link_type == INFRASTRUCTURE:
            infra_nodes.update((link.src, link.dst))
    for link in links:
        if link.link_type == ACCESS:
            ue = link.src if link.src not in infra_nodes else link.dst
            ue_nodes.add(ue)
    num_bs = max((n for n in infra_nodes if n > 0), default=0)
    expected_ues = set(range(num_bs + 1, num_bs + len(ue_nodes) + 1))
    if ue_nodes != expected_ues:
        raise TraceFormatError(f"UE ids {sorted(ue_nodes)} are not dense after BS ids")
    nodes = [Node(0, NodeKind.DONOR, antennas_per_bs)]
    nodes += [Node(i, NodeKind.BASE_STATION, antennas_per_bs) for i in range(1, num_bs + 1)]
    nodes += [Node(i, NodeKind.USER_EQUIPMENT, 1) for i in sorted(ue_nodes)]
    return tuple(nodes)


def parse_trace(text: str) -> tuple[DayTrace, TraceHeader]:
    lines = text.splitlines()
    if len(lines) < 3:
        raise TraceFormatError("trace shorter than its header")
    header = TraceHeader(
        seed=_header_value(lines[0], "seed"),
        cap_mb=_header_value(lines[1], "cap_mb"),
        antennas_per_bs=_header_value(lines[2], "K"),
    )
    snapshots: list[TopologySnapshot] = []
    profiles: list[tuple[SliceProfile, ...]] = []
    interval = None
    links: list[LinkCandidate] = []
    slices: list[SliceProfile] = []

    def flush():
        if interval is None:
            return
        snapshots.append(
            TopologySnapshot(interval, _rebuild_nodes(links, header.antennas_per_bs), tuple(links))
        )
        profiles.append(tuple(slices))

    for line_no, line in enumerate(lines[3:], start=4):
        parts = line.split()
        if not parts:
            continue
        tag = parts[0]
        try:
            if tag == "T":
                flush()
                interval = int(parts[1])
                links, slices = [], []
            elif tag == "L":
                links.append(
                    LinkCandidate(
                        int(parts[1]), int(parts[2]), int(parts[3]),
                        float(parts[4]), int(parts[5]),
                    )
                )
            elif tag == "S":
                slices.append(
                    SliceProfile(
                        interval, 1, _SLICE_BY_NAME[parts[1]],
                        float(parts[2]), float(parts[3]),
                    )
                )
            else:
                raise TraceFormatError(f"line {line_no}: unknown record tag {tag!r}")
        except (IndexError, ValueError, KeyError) as exc:
            raise TraceFormatError(f"line {line_no}: malformed record {line!r}") from exc
    flush()

    if len(snapshots) != INTERVALS_PER_DAY:
        raise TraceFormatError(
            f"expected {INTERVALS_PER_DAY} snapshots, found {len(snapshots)}"
        )
    return DayTrace(header.seed, tuple(snapshots), tuple(profiles)), header


def read_trace(path) -> tuple[DayTrace, TraceHeader]:
    with open(path, "r", encoding="ascii") as fh:
        return parse_trace(fh.read())
