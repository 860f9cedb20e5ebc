"""VeReMi-style log ingestion.

Message logs are line-delimited JSON; each receiver's log holds the messages it
received (type 3) with transmitted kinematics as 3-vectors (z discarded).
Ground-truth files map messageID to the sender's true kinematics.  Merging the
two yields canonical flat records with a signed scalar acceleration, a heading
angle in degrees, and a per-record label: the scenario label when a transmitted
kinematic field differs from truth, 0 otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

LABEL_NAMES = (
    "regular",
    "constPos",
    "randomPos",
    "posOffset",
    "randomSpeed",
    "spdOffset",
    "eventualStop",
    "disruptive",
    "dataReplay",
)

CANONICAL_HEADER = "rx,senderPseudo,sendTime,posx,posy,spdx,spdy,acl,hed,lab"

# Tolerance for "transmitted value differs from ground truth".
LABEL_TOLERANCE = 1e-9

_REQUIRED_FIELDS = ("type", "sendTime", "senderPseudo", "messageID", "pos", "spd", "acl", "hed")


@dataclass
class RawMessage:
    rx: int
    send_time: float
    sender_pseudo: int
    message_id: int
    pos: tuple[float, float]
    spd: tuple[float, float]
    acl: tuple[float, float]
    hed: tuple[float, float]


@dataclass
class TruthRecord:
    message_id: int
    pos: tuple[float, float]
    spd: tuple[float, float]
    acl: tuple[float, float]
    hed: tuple[float, float]


@dataclass
class CanonicalRecord:
    rx: int
    sender_pseudo: int
    send_time: float
    posx: float
    posy: float
    spdx: float
    spdy: float
    acl: float
    hed: float
    lab: int


@dataclass
class ParseResult:
    messages: list
    skips: list  # (line_number, reason)
    n_lines: int


def _vec2(value):
    """First two components of a JSON vector field, as floats."""
    if not isinstance(value, (list, tuple)) or len(value) < 2:
        raise ValueError("expected a vector of at least 2 components")
    return (float(value[0]), float(value[1]))


def parse_log_stream(stream, rx):
    """Parse one receiver's message log.

    Returns a ParseResult whose messages are the type-3 records in file order.
    Every input line is accounted for: len(messages) + len(skips) == n_lines.
    Lines of other message types are skipped with reason "not-type-3".
    """
    messages = []
    skips = []
    n_lines = 0
    for lineno, line in enumerate(stream, start=1):
        n_lines += 1
        text = line.strip()
        if not text:
            skips.append((lineno, "blank"))
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError:
            skips.append((lineno, "bad-json"))
            continue
        if not isinstance(obj, dict):
            skips.append((lineno, "bad-json"))
            continue
        missing = [f for f in _REQUIRED_FIELDS if f not in obj]
        if "type" in obj and obj["type"] != 3:
            skips.append((lineno, "not-type-3"))
            continue
        if missing:
            skips.append((lineno, f"missing-field:{missing[0]}"))
            continue
        try:
            messages.append(
                RawMessage(
                    rx=int(rx),
                    send_time=float(obj["sendTime"]),
                    sender_pseudo=int(obj["senderPseudo"]),
                    message_id=int(obj["messageID"]),
                    pos=_vec2(obj["pos"]),
                    spd=_vec2(obj["spd"]),
                    acl=_vec2(obj["acl"]),
                    hed=_vec2(obj["hed"]),
                )
            )
        except (TypeError, ValueError):
            skips.append((lineno, "bad-field"))
    return ParseResult(messages=messages, skips=skips, n_lines=n_lines)


def parse_ground_truth(stream):
    """Parse a ground-truth stream into {messageID: TruthRecord}.

    Duplicate messageIDs keep the first occurrence; later ones are reported as
    conflicts.  Returns (mapping, skips, conflicts).
    """
    truth = {}
    skips = []
    conflicts = []
    for lineno, line in enumerate(stream, start=1):
        text = line.strip()
        if not text:
            skips.append((lineno, "blank"))
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError:
            skips.append((lineno, "bad-json"))
            continue
        if not isinstance(obj, dict) or "messageID" not in obj:
            skips.append((lineno, "missing-field:messageID"))
            continue
        try:
            mid = int(obj["messageID"])
            rec = TruthRecord(
                message_id=mid,
                pos=_vec2(obj["pos"]),
                spd=_vec2(obj["spd"]),
                acl=_vec2(obj["acl"]),
                hed=_vec2(obj["hed"]),
            )
        except (KeyError, TypeError, ValueError):
            skips.append((lineno, "bad-field"))
            continue
        if mid in truth:
            conflicts.append((lineno, mid))
            continue
        truth[mid] = rec
    return truth, skips, conflicts


def horizontal_angle(x, y):
    """Direction of the vector (x, y) in degrees, normalized to (-180, 180]."""
    if x == 0.0 and y == 0.0:
        raise ValueError("direction of the zero vector is undefined")
    angle = math.degrees(math.atan2(y, x))
    if angle <= -180.0:
        angle += 360.0
    return angle


def signed_acceleration(ax, ay, heading_deg):
    """Scalar acceleration with sign relative to the heading.

    Magnitude is sqrt(ax^2 + ay^2); the sign flips to negative when the minimal
    circular difference between the heading and the acceleration direction
    exceeds 90 degrees (decelerating).  A zero vector maps to 0.
    """
    magnitude = math.hypot(ax, ay)
    if magnitude == 0.0:
        return 0.0
    diff = abs(heading_deg - horizontal_angle(ax, ay)) % 360.0
    if diff > 180.0:
        diff = 360.0 - diff
    return -magnitude if diff > 90.0 else magnitude


def merge_and_label(messages, truth, scenario_label):
    """Join messages with ground truth and attach per-record labels.

    A record is labeled `scenario_label` when any of the transmitted position
    or speed components differs from truth by more than LABEL_TOLERANCE, else 0.
    Messages without a truth counterpart are skipped and reported.
    Returns (records, missing) where missing lists orphan messageIDs.
    """
    if not 0 <= scenario_label <= 8:
        raise ValueError(f"scenario label must be in 0..8, got {scenario_label}")
    records = []
    missing = []
    for msg in messages:
        true = truth.get(msg.message_id)
        if true is None:
            missing.append(msg.message_id)
            continue
        differs = (
            abs(msg.pos[0] - true.pos[0]) > LABEL_TOLERANCE
            or abs(msg.pos[1] - true.pos[1]) > LABEL_TOLERANCE
            or abs(msg.spd[0] - true.spd[0]) > LABEL_TOLERANCE
            or abs(msg.spd[1] - true.spd[1]) > LABEL_TOLERANCE
        )
        lab = scenario_label if differs else 0
        hed = horizontal_angle(*msg.hed) if msg.hed != (0.0, 0.0) else 0.0
        records.append(
            CanonicalRecord(
                rx=msg.rx,
                sender_pseudo=msg.sender_pseudo,
                send_time=msg.send_time,
                posx=msg.pos[0],
                posy=msg.pos[1],
                spdx=msg.spd[0],
                spdy=msg.spd[1],
                acl=signed_acceleration(msg.acl[0], msg.acl[1], hed),
                hed=hed,
                lab=lab,
            )
        )
    return records, missing


def write_canonical_csv(path, records):
    """Write canonical records as a comma-delimited table (repr-exact floats)."""
    with open(path, "w") as fh:
        fh.write(CANONICAL_HEADER + "\n")
        for r in records:
            fh.write(
                f"{r.rx},{r.sender_pseudo},{r.send_time!r},{r.posx!r},{r.posy!r},"
                f"{r.spdx!r},{r.spdy!r},{r.acl!r},{r.hed!r},{r.lab}\n"
            )


def read_canonical_csv(path):
    """Read a canonical table written by write_canonical_csv."""
    records = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CANONICAL_HEADER:
            raise ValueError(f"unexpected header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 10:
                raise ValueError(f"bad canonical row: {line!r}")
            records.append(
                CanonicalRecord(
                    rx=int(parts[0]),
                    sender_pseudo=int(parts[1]),
                    send_time=float(parts[2]),
                    posx=float(parts[3]),
                    posy=float(parts[4]),
                    spdx=float(parts[5]),
                    spdy=float(parts[6]),
                    acl=float(parts[7]),
                    hed=float(parts[8]),
                    lab=int(parts[9]),
                )
            )
    return records


def write_skip_report(path, log_skips, truth_skips, conflicts, missing):
    """Human-readable skip/conflict report for an ingest invocation."""
    with open(path, "w") as fh:
        fh.write(f"log_skips {len(log_skips)}\n")
        for lineno, reason in log_skips:
            fh.write(f"  line {lineno}: {reason}\n")
        fh.write(f"truth_skips {len(truth_skips)}\n")
        for lineno, reason in truth_skips:
            fh.write(f"  line {lineno}: {reason}\n")
        fh.write(f"truth_conflicts {len(conflicts)}\n")
        for lineno, mid in conflicts:
            fh.write(f"  line {lineno}: duplicate messageID {mid}\n")
        fh.write(f"messages_without_truth {len(missing)}\n")
        for mid in missing:
            fh.write(f"  messageID {mid}\n")
