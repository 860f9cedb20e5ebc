"""Raw log ingestion: parsing, angle/acceleration scalars, truth merge, CSV."""

from __future__ import annotations

import io
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from platoonguard.ingest import (
    CANONICAL_HEADER,
    LABEL_NAMES,
    RawMessage,
    TruthRecord,
    horizontal_angle,
    merge_and_label,
    parse_ground_truth,
    parse_log_stream,
    read_canonical_csv,
    signed_acceleration,
    write_canonical_csv,
    write_skip_report,
)

from conftest import make_record


def log_line(mid=1, t=1.0, sender=7, msg_type=3, pos=(10.0, 20.0), spd=(1.0, 0.0),
             acl=(0.5, 0.0), hed=(1.0, 0.0), drop=None):
    obj = {
        "type": msg_type,
        "sendTime": t,
        "senderPseudo": sender,
        "messageID": mid,
        "pos": list(pos) + [0.0],
        "spd": list(spd) + [0.0],
        "acl": list(acl) + [0.0],
        "hed": list(hed) + [0.0],
    }
    if drop:
        del obj[drop]
    return json.dumps(obj)


def truth_line(mid=1, pos=(10.0, 20.0), spd=(1.0, 0.0), acl=(0.5, 0.0),
               hed=(1.0, 0.0)):
    return json.dumps({
        "messageID": mid,
        "pos": list(pos) + [0.0],
        "spd": list(spd) + [0.0],
        "acl": list(acl) + [0.0],
        "hed": list(hed) + [0.0],
    })


# ---------------------------------------------------------------- angles

def test_horizontal_angle_east_is_zero():
    assert horizontal_angle(1.0, 0.0) == 0.0


def test_horizontal_angle_north_is_ninety():
    assert horizontal_angle(0.0, 1.0) == pytest.approx(90.0, abs=1e-12)


def test_horizontal_angle_southwest():
    assert horizontal_angle(-1.0, -1.0) == pytest.approx(-135.0, abs=1e-12)


def test_horizontal_angle_west_is_positive_180():
    # the normalization keeps 180 and excludes -180
    assert horizontal_angle(-1.0, 0.0) == pytest.approx(180.0, abs=1e-12)


def test_horizontal_angle_zero_vector_rejected():
    with pytest.raises(ValueError):
        horizontal_angle(0.0, 0.0)


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
@settings(max_examples=200, deadline=None)
def test_horizontal_angle_range(x, y):
    if x == 0.0 and y == 0.0:
        return
    a = horizontal_angle(x, y)
    assert -180.0 < a <= 180.0


# ---------------------------------------------------- signed acceleration

def test_signed_acceleration_braking_along_heading():
    assert signed_acceleration(-2.0, 0.0, 0.0) == -2.0


def test_signed_acceleration_forward_along_heading():
    assert signed_acceleration(3.0, 0.0, 0.0) == 3.0


def test_signed_acceleration_oblique_brake():
    # acceleration points at 45 deg, heading 170 deg: circular difference is
    # 125 deg > 90, so the magnitude sqrt(2) comes out negative
    assert signed_acceleration(1.0, 1.0, 170.0) == pytest.approx(-math.sqrt(2), abs=1e-12)


def test_signed_acceleration_zero_vector_is_zero():
    assert signed_acceleration(0.0, 0.0, 45.0) == 0.0


def test_signed_acceleration_wraps_circularly():
    # heading 179, acceleration at -179: difference is 2 deg, not 358
    assert signed_acceleration(math.cos(math.radians(-179)),
                               math.sin(math.radians(-179)), 179.0) > 0


@given(st.floats(-100, 100), st.floats(-100, 100), st.floats(-180, 180))
@settings(max_examples=200, deadline=None)
def test_signed_acceleration_magnitude(ax, ay, heading):
    got = signed_acceleration(ax, ay, heading)
    assert abs(got) == pytest.approx(math.hypot(ax, ay), rel=1e-12, abs=0.0)


# --------------------------------------------------------------- log parse

def test_parse_log_keeps_type3_in_order():
    stream = io.StringIO("\n".join([
        log_line(mid=1, t=1.0),
        log_line(mid=2, t=2.0, msg_type=2),
        log_line(mid=3, t=3.0),
    ]))
    res = parse_log_stream(stream, rx=5)
    assert [m.message_id for m in res.messages] == [1, 3]
    assert all(m.rx == 5 for m in res.messages)
    assert res.skips == [(2, "not-type-3")]
    assert res.n_lines == 3


def test_parse_log_skip_reasons():
    stream = io.StringIO("\n".join([
        "",
        "{not json",
        log_line(mid=1, drop="pos"),
        json.dumps({"type": 3, "sendTime": "x", "senderPseudo": 1, "messageID": 2,
                    "pos": "bad", "spd": [0, 0], "acl": [0, 0], "hed": [1, 0]}),
        log_line(mid=3),
    ]))
    res = parse_log_stream(stream, rx=0)
    reasons = dict(res.skips)
    assert reasons[1] == "blank"
    assert reasons[2] == "bad-json"
    assert reasons[3] == "missing-field:pos"
    assert reasons[4] == "bad-field"
    assert len(res.messages) == 1


def test_parse_log_accounts_for_every_line():
    lines = [log_line(mid=i) for i in range(4)] + ["", "oops", log_line(mid=9, msg_type=4)]
    res = parse_log_stream(io.StringIO("\n".join(lines)), rx=1)
    assert len(res.messages) + len(res.skips) == res.n_lines == len(lines)


def test_parse_log_empty_stream():
    res = parse_log_stream(io.StringIO(""), rx=0)
    assert res.messages == [] and res.skips == [] and res.n_lines == 0


# ------------------------------------------------------------- truth parse

def test_truth_keeps_first_duplicate_and_reports_conflict():
    stream = io.StringIO("\n".join([
        truth_line(mid=10, pos=(1.0, 1.0)),
        truth_line(mid=10, pos=(9.0, 9.0)),
        truth_line(mid=11),
    ]))
    truth, skips, conflicts = parse_ground_truth(stream)
    assert set(truth) == {10, 11}
    assert truth[10].pos == (1.0, 1.0)
    assert conflicts == [(2, 10)]
    assert skips == []


def test_truth_skips_malformed_lines():
    stream = io.StringIO("\n".join(["", "nope", json.dumps({"pos": [1, 2, 0]})]))
    truth, skips, conflicts = parse_ground_truth(stream)
    assert truth == {} and conflicts == []
    assert dict(skips) == {1: "blank", 2: "bad-json", 3: "missing-field:messageID"}


# ----------------------------------------------------------------- merging

def _msg(mid, pos=(10.0, 20.0), spd=(1.0, 0.0), acl=(0.5, 0.0), hed=(1.0, 0.0)):
    return RawMessage(rx=1, send_time=float(mid), sender_pseudo=3, message_id=mid,
                      pos=pos, spd=spd, acl=acl, hed=hed)


def _truth(mid, pos=(10.0, 20.0), spd=(1.0, 0.0)):
    return TruthRecord(message_id=mid, pos=pos, spd=spd, acl=(0.5, 0.0),
                       hed=(1.0, 0.0))


def test_merge_matching_message_is_regular():
    records, missing = merge_and_label([_msg(1)], {1: _truth(1)}, 3)
    assert missing == []
    assert records[0].lab == 0


def test_merge_position_mismatch_gets_scenario_label():
    msg = _msg(1, pos=(260.0, 20.0))
    records, _ = merge_and_label([msg], {1: _truth(1)}, 3)
    assert records[0].lab == 3


def test_merge_tiny_speed_noise_stays_regular():
    msg = _msg(1, spd=(1.0 + 1e-12, 0.0))
    records, _ = merge_and_label([msg], {1: _truth(1)}, 4)
    assert records[0].lab == 0


def test_merge_speed_mismatch_gets_label():
    msg = _msg(1, spd=(5.0, 0.0))
    records, _ = merge_and_label([msg], {1: _truth(1)}, 5)
    assert records[0].lab == 5


def test_merge_acl_mismatch_alone_is_not_labeled():
    # labels compare transmitted position and speed only
    msg = _msg(1, acl=(9.0, 0.0))
    records, _ = merge_and_label([msg], {1: _truth(1)}, 2)
    assert records[0].lab == 0


def test_merge_orphan_message_reported():
    records, missing = merge_and_label([_msg(1), _msg(2)], {1: _truth(1)}, 1)
    assert len(records) == 1
    assert missing == [2]


def test_merge_zero_heading_vector_maps_to_zero_angle():
    msg = _msg(1, hed=(0.0, 0.0))
    records, _ = merge_and_label([msg], {1: _truth(1)}, 0)
    assert records[0].hed == 0.0


def test_merge_computes_signed_acceleration():
    # heading east, acceleration west: negative scalar
    msg = _msg(1, acl=(-2.0, 0.0), hed=(1.0, 0.0))
    records, _ = merge_and_label([msg], {1: _truth(1)}, 0)
    assert records[0].acl == -2.0
    assert records[0].hed == 0.0


def test_merge_rejects_bad_scenario_label():
    with pytest.raises(ValueError):
        merge_and_label([], {}, 9)


# --------------------------------------------------------------------- CSV

def test_canonical_csv_round_trip(tmp_path):
    records = [
        make_record(rx=1, sender=2, t=0.1, posx=1.5, posy=-2.25, spdx=0.3,
                    spdy=1e-17, acl=-0.125, hed=179.99999999999, lab=4),
        make_record(rx=1, sender=2, t=0.2, posx=math.pi, lab=0),
    ]
    path = tmp_path / "records.csv"
    write_canonical_csv(path, records)
    back = read_canonical_csv(path)
    assert back == records  # repr round trip is exact for float64


def test_canonical_csv_header(tmp_path):
    path = tmp_path / "records.csv"
    write_canonical_csv(path, [])
    assert path.read_text().splitlines()[0] == CANONICAL_HEADER
    assert CANONICAL_HEADER == "rx,senderPseudo,sendTime,posx,posy,spdx,spdy,acl,hed,lab"


def test_canonical_csv_rejects_foreign_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        read_canonical_csv(path)


def test_skip_report_written(tmp_path):
    path = tmp_path / "report.txt"
    write_skip_report(path, [("log:3", "bad-json")], [(1, "blank")], [(2, 10)], [99])
    text = path.read_text()
    assert "bad-json" in text and "blank" in text and "99" in text


def test_label_names_cover_nine_classes():
    assert len(LABEL_NAMES) == 9
    assert LABEL_NAMES[0] == "regular"
    assert LABEL_NAMES[8] == "dataReplay"
